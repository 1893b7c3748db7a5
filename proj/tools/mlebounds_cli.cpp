#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mlebounds/cli.hpp"

// mlebounds <subcommand> --config PATH [--out DIR] [--workers N] [--seed U64]
//
// Subcommands: fit, bounds, tune, norms, simulate. The config file carries
// the full run description; the flags override its [run] block.

int main(int argc, char** argv) {
    CLI::App app{"classical and log-truncated robust likelihood estimation "
                 "with finite-sample bounds"};
    app.require_subcommand(0, 1);

    bool show_keys = false;
    app.add_flag("--config-keys", show_keys,
                 "print the generated config key reference and exit");

    struct sub_opts {
        std::string config_path;
        std::string out_dir;
        int workers = 0;
        std::uint64_t seed = 0;
        CLI::App* sub = nullptr;
    };
    const char* names[] = {"fit", "bounds", "tune", "norms", "simulate"};
    const char* descs[] = {
        "estimate the parameter from data (plain or truncated MLE)",
        "evaluate the concentration and oracle bound calculators",
        "tune the truncation level and report the implied widths",
        "compute theta1/theta2 moment-ratio norms",
        "run a deterministic Monte Carlo experiment",
    };
    std::vector<sub_opts> opts(5);
    for (int i = 0; i < 5; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], descs[i]);
        opts[i].sub = sub;
        sub->add_option("--config", opts[i].config_path,
                        "run configuration file")
            ->required();
        sub->add_option("--out", opts[i].out_dir,
                        "directory for CSV curve files");
        sub->add_option("--workers", opts[i].workers,
                        "worker threads (simulate only)");
        sub->add_option("--seed", opts[i].seed, "master seed override");
    }

    CLI11_PARSE(app, argc, argv);

    if (show_keys) {
        std::cout << mleb::config_key_reference();
        return 0;
    }

    const sub_opts* chosen = nullptr;
    for (const auto& o : opts) {
        if (o.sub->parsed()) chosen = &o;
    }
    if (chosen == nullptr) {
        std::cerr << app.help() << '\n';
        return 1;
    }

    try {
        mleb::run_config cfg = mleb::parse_config(chosen->config_path);
        std::string invoked = chosen->sub->get_name();
        if (mleb::command_name(cfg.command) != invoked) {
            std::cerr << "error: config file says command = "
                      << mleb::command_name(cfg.command) << " but the "
                      << invoked << " subcommand was invoked\n";
            return 1;
        }
        if (chosen->sub->count("--out") > 0) cfg.out_dir = chosen->out_dir;
        if (chosen->sub->count("--workers") > 0) {
            cfg.workers = chosen->workers;
        }
        if (chosen->sub->count("--seed") > 0) cfg.master_seed = chosen->seed;
        return mleb::dispatch(cfg, std::cout, std::cerr);
    } catch (const mleb::validation_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const mleb::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 2;
    }
}
