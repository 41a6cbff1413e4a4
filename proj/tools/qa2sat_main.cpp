#include <cstring>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qa2sat/pipeline.hpp"
#include "qa2sat/store.hpp"
#include "qa2sat/version.hpp"

using qa2sat::RunConfig;

namespace {

// --config is honored before CLI11 runs so that explicit flags override
// values from the file.
RunConfig load_base_config(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::strcmp(argv[i], "--config") == 0)
            return RunConfig::from_json(qa2sat::read_json_file(argv[i + 1]));
        if (std::strncmp(argv[i], "--config=", 9) == 0)
            return RunConfig::from_json(qa2sat::read_json_file(argv[i] + 9));
    }
    if (argc >= 2 && std::strncmp(argv[argc - 1], "--config=", 9) == 0)
        return RunConfig::from_json(
            qa2sat::read_json_file(argv[argc - 1] + 9));
    return RunConfig{};
}

void add_common(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--seed", cfg.seed, "master seed");
    cmd->add_option("--out", cfg.out, "results store directory");
    cmd->add_option("--workers", cfg.workers, "worker threads (default 1)");
    cmd->add_option("--n", cfg.n_values, "system sizes to process");
    // The value was already consumed by load_base_config; the option is
    // registered so CLI11 accepts and documents it.
    static std::string config_path;
    cmd->add_option("--config", config_path, "JSON file with a full run config");
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    try {
        cfg = load_base_config(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    CLI::App app{"hard 2-SAT ensembles, interpolated spectra, annealing"};
    app.require_subcommand(1);
    app.set_version_flag("--version", qa2sat::kVersion);

    auto* gen = app.add_subcommand("generate",
                                   "learn weights and harvest hard instances");
    add_common(gen, cfg);
    gen->add_option("--count", cfg.count, "instances per system size");
    gen->add_option("--spacing", cfg.spacing,
                    "accepted moves between harvested instances (0: 10*m)");
    gen->add_flag("!--free-vars", cfg.distinct_vars,
                  "allow clauses with a repeated variable");

    auto* spec = app.add_subcommand("spectrum",
                                    "scan gaps and fit the crossing form");
    add_common(spec, cfg);
    spec->add_option("--limit", cfg.spectrum_limit,
                     "instances per size (0: all)");
    spec->add_option("--nmax", cfg.spectrum_nmax,
                     "skip sizes above this (0: all)");
    spec->add_option("--tol", cfg.scan.tol, "eigenvalue residual tolerance");
    spec->add_option("--coarse", cfg.scan.coarse_spacing,
                     "coarse lambda spacing");
    spec->add_option("--window-r", cfg.scan.critical_r,
                     "critical window half-count in units of gap/slope");
    spec->add_option("--min-points", cfg.scan.min_points_critical,
                     "points required inside the critical window");
    spec->add_option("--stability", cfg.lz.stability_rel,
                     "allowed gap_min drift under window halving");

    auto* sa = app.add_subcommand("sa", "annealing success statistics");
    add_common(sa, cfg);
    sa->add_option("--trajectories", cfg.sa.trajectories,
                   "trajectories per instance");
    sa->add_option("--t0", cfg.sa.t0, "initial temperature");
    sa->add_option("--ratio", cfg.sa.ratio, "cooling factor per sweep");
    sa->add_option("--sweeps", cfg.sa.sweeps, "sweeps per trajectory");

    auto* rep = app.add_subcommand("report", "tables and figure data");
    add_common(rep, cfg);
    rep->add_option("--nmin", cfg.report_nmin,
                    "smallest size included in rate fits");

    CLI11_PARSE(app, argc, argv);

    // fit_lz shares the window convention with the scan.
    cfg.lz.critical_r = cfg.scan.critical_r;

    try {
        if (gen->parsed()) return qa2sat::cmd_generate(cfg, std::cout);
        if (spec->parsed()) return qa2sat::cmd_spectrum(cfg, std::cout);
        if (sa->parsed()) return qa2sat::cmd_sa(cfg, std::cout);
        if (rep->parsed()) return qa2sat::cmd_report(cfg, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return qa2sat::exit_code_for_current_exception();
    }
    return 1;
}
