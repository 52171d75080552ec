#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ripening/harness.hpp"

namespace rh = ripening::harness;

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::size_t workers = 1;
    bool diagnostics_only = false;
};

void attach(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "JSON run configuration");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "override the initial-data seed");
    cmd->add_option("--workers", opts.workers, "parallel workers (sweep only)")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--diagnostics-only", opts.diagnostics_only,
                  "skip the admissibility gate on alpha (surveys only)");
}

rh::RunConfig resolve(const CommonOptions& opts) {
    rh::RunConfig config;
    if (!opts.config_path.empty()) config = rh::load_config(opts.config_path);
    if (opts.seed) config.seed = *opts.seed;
    if (opts.diagnostics_only) config.diagnostics_only = true;
    config.scaleParameters();  // validate before any work starts
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reaction-controlled ripening toolkit"};
    app.require_subcommand(1);

    CommonOptions simulate_opts, pde_opts, survey_opts, sweep_opts, compare_opts;
    std::vector<double> sweep_deltas{0.2, 0.14, 0.1};
    std::vector<std::uint64_t> sweep_seeds;

    attach(app.add_subcommand("simulate", "finite particle system"), simulate_opts);
    attach(app.add_subcommand("pde", "mean-field transport equation"), pde_opts);
    attach(app.add_subcommand("field-survey", "monopole field deviation survey"), survey_opts);
    CLI::App* sweep = app.add_subcommand("sweep", "delta-convergence study");
    attach(sweep, sweep_opts);
    sweep->add_option("--deltas", sweep_deltas, "delta values (need >= 3)");
    sweep->add_option("--seeds", sweep_seeds, "seeds, one cell row per seed");
    attach(app.add_subcommand("compare", "particle run against matched PDE run"), compare_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("simulate"))
            return rh::run_particles(resolve(simulate_opts), simulate_opts.out_dir);
        if (app.got_subcommand("pde"))
            return rh::run_pde(resolve(pde_opts), pde_opts.out_dir);
        if (app.got_subcommand("field-survey"))
            return rh::run_field_survey(resolve(survey_opts), survey_opts.out_dir);
        if (app.got_subcommand("compare"))
            return rh::run_compare(resolve(compare_opts), compare_opts.out_dir);
        if (app.got_subcommand("sweep")) {
            const rh::RunConfig base = resolve(sweep_opts);
            const rh::SweepSummary summary = rh::run_convergence_sweep(
                base, sweep_deltas, sweep_seeds, sweep_opts.out_dir, sweep_opts.workers);
            std::cout << "residual_slope=" << summary.residual_slope
                      << " deviation_slope=" << summary.deviation_slope
                      << " gamma=" << summary.gamma
                      << " w1_decreasing=" << (summary.w1_decreasing ? "yes" : "no") << "\n";
            for (const rh::SweepCell& cell : summary.cells)
                if (cell.failed) {
                    std::cerr << "cell delta=" << cell.delta << " seed=" << cell.seed
                              << " failed: " << cell.error << "\n";
                    return 3;
                }
            return 0;
        }
    } catch (const rh::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ripening::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
