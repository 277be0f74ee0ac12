// Batch front end over the scenario layer: solve | sweep | simulate | check.
// Exit codes: 0 solved and verified (sweep: table written), 1 config or usage
// error, 2 solver non-convergence / non-existence, 3 verification failure.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lme/config.hpp"
#include "lme/errors.hpp"
#include "lme/scenario.hpp"

namespace {

lme::ScenarioConfig assemble_config(const std::string& config_path,
                                    const std::string& preset,
                                    const std::string& out_dir,
                                    long long seed_override,
                                    int workers_override) {
    if (config_path.empty() == preset.empty())
        throw lme::ConfigError("provide exactly one of --config or --preset");
    lme::ScenarioConfig cfg =
        config_path.empty() ? lme::parse_config(lme::preset_text(preset))
                            : lme::load_config_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed_override >= 0)
        cfg.sim.seed = static_cast<std::uint64_t>(seed_override);
    if (workers_override > 0) cfg.sweep.workers = workers_override;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Linear Markov equilibrium engine for signaling games with private "
        "monitoring: solves coefficient boundary-value systems, verifies "
        "them, sweeps parameters, and Monte-Carlo simulates the equilibria."};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, preset, out_dir;
    long long seed = -1;
    int workers = 0;
    app.add_option("--config", config_path,
                   "Path to a scenario config file (key = value lines)");
    app.add_option("--preset", preset,
                   "Name of a built-in sweep preset (see README)");
    app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
    app.add_option("--seed", seed, "Simulation seed override (nonnegative)");
    app.add_option("--workers", workers, "Sweep worker thread count override");

    CLI::App* cmd_solve = app.add_subcommand(
        "solve", "Solve one scenario; writes coefficients.csv and "
                 "diagnostics.json");
    CLI::App* cmd_sweep = app.add_subcommand(
        "sweep", "Solve one scenario per axis value; writes sweep.csv and "
                 "sweep.json");
    CLI::App* cmd_simulate = app.add_subcommand(
        "simulate", "Solve and simulate; additionally writes simulation.csv");
    CLI::App* cmd_check = app.add_subcommand(
        "check", "Solve and print per-invariant pass/fail; writes "
                 "diagnostics.json only");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        const lme::ScenarioConfig cfg =
            assemble_config(config_path, preset, out_dir, seed, workers);
        if (cmd_solve->parsed())
            return lme::run_scenario(cfg, false, std::cout);
        if (cmd_simulate->parsed())
            return lme::run_scenario(cfg, true, std::cout);
        if (cmd_sweep->parsed()) return lme::run_sweep(cfg, std::cout);
        if (cmd_check->parsed()) return lme::run_check(cfg, std::cout);
        std::cerr << "no subcommand selected\n";
        return 1;
    } catch (const lme::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const lme::GridMismatch& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const lme::Error& e) {
        std::cerr << "solver error (" << lme::error_tag(e) << "): " << e.what()
                  << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
