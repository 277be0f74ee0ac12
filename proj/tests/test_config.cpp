#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>

#include "lme/config.hpp"
#include "lme/errors.hpp"

using namespace lme;

TEST_CASE("a full config round-trips every block") {
    const std::string text =
        "# interior run with explicit everything\n"
        "scenario = leadership_interior\n"
        "game.sigma_x = 0.75   # finite\n"
        "game.sigma_y = 1.5\n"
        "game.gamma0 = 2\n"
        "game.r = 0.5\n"
        "game.T = 3\n"
        "game.mu = -0.25\n"
        "solver.tol = 1e-10\n"
        "solver.fixed_point_tol = 1e-11\n"
        "solver.max_probes = 40\n"
        "solver.max_iter = 200\n"
        "sim.n_paths = 5000\n"
        "sim.dt = 0.001\n"
        "sim.seed = 987654321\n"
        "sim.substeps = 2\n"
        "output.dir = out/run1\n";
    const ScenarioConfig cfg = parse_config(text);
    CHECK(cfg.scenario == ScenarioId::leadership_interior);
    CHECK(cfg.params.sigma_x.is_finite());
    CHECK(cfg.params.sigma_x.value == 0.75);
    CHECK(cfg.params.sigma_y == 1.5);
    CHECK(cfg.params.gamma0 == 2.0);
    CHECK(cfg.params.r == 0.5);
    CHECK(cfg.params.T == 3.0);
    CHECK(cfg.params.mu == -0.25);
    CHECK(cfg.solver.shoot_tol == 1e-10);
    CHECK(cfg.solver.fixed_point_tol == 1e-11);
    CHECK(cfg.solver.max_probes == 40);
    CHECK(cfg.solver.max_iter == 200);
    CHECK(cfg.sim.n_paths == 5000);
    CHECK(cfg.sim.dt == 0.001);
    CHECK(cfg.sim.seed == 987654321ull);
    CHECK(cfg.sim.noise_substeps == 2);
    CHECK(cfg.sweep.axis.empty());
    CHECK(cfg.out_dir == "out/run1");
}

TEST_CASE("scenario names round-trip and unknown names fail") {
    for (ScenarioId id :
         {ScenarioId::leadership_public, ScenarioId::leadership_nofeedback,
          ScenarioId::leadership_interior, ScenarioId::common_value_lambda,
          ScenarioId::conflict_of_interest, ScenarioId::reputation,
          ScenarioId::custom_payoffs})
        CHECK(scenario_from_string(to_string(id)) == id);
    CHECK_THROWS_AS(scenario_from_string("leadership"), ConfigError);
    CHECK_THROWS_AS(parse_config("scenario = nope\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("game.T = 1\n"), ConfigError);  // no scenario
}

TEST_CASE("regime defaults and coherence follow the scenario name") {
    CHECK(parse_config("scenario = leadership_public\n")
              .params.sigma_x.is_zero());
    CHECK(parse_config("scenario = leadership_nofeedback\n")
              .params.sigma_x.is_infinite());
    CHECK(parse_config("scenario = leadership_interior\n")
              .params.sigma_x.is_finite());
    CHECK(parse_config("scenario = leadership_nofeedback\n"
                       "game.sigma_x = inf\n")
              .params.sigma_x.is_infinite());

    CHECK_THROWS_AS(parse_config("scenario = leadership_public\n"
                                 "game.sigma_x = 1\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("scenario = leadership_nofeedback\n"
                                 "game.sigma_x = 1\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("scenario = leadership_interior\n"
                                 "game.sigma_x = inf\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("scenario = common_value_lambda\n"
                                 "payoff.lambda = 0.5\n"
                                 "game.sigma_x = 0\n"),
                    ConfigError);
    // a sigma_x sweep relaxes the base-regime pin: cells route dynamically
    const ScenarioConfig swept =
        parse_config("scenario = leadership_interior\n"
                     "sweep.axis = sigma_x\n"
                     "sweep.values = 0, 1, inf\n");
    CHECK(swept.sweep.values.size() == 3);
    CHECK(std::isinf(swept.sweep.values[2]));
}

TEST_CASE("scenario-specific required and forbidden keys") {
    CHECK_THROWS_AS(parse_config("scenario = common_value_lambda\n"),
                    ConfigError);  // lambda required
    CHECK_THROWS_AS(parse_config("scenario = common_value_lambda\n"
                                 "payoff.lambda = 1.5\n"),
                    ConfigError);  // out of range
    CHECK_THROWS_AS(parse_config("scenario = reputation\n"
                                 "game.sigma_x = 0\n"),
                    ConfigError);  // psi required
    CHECK_THROWS_AS(parse_config("scenario = reputation\n"
                                 "game.psi = 0.5\n"),
                    ConfigError);  // sigma_x required
    CHECK_THROWS_AS(parse_config("scenario = reputation\n"
                                 "game.psi = 0.5\n"
                                 "game.sigma_x = 1\n"),
                    ConfigError);  // finite regime unsupported
    CHECK_THROWS_AS(parse_config("scenario = leadership_interior\n"
                                 "payoff.lambda = 0.5\n"),
                    ConfigError);  // lambda outside its scenario
    CHECK_THROWS_AS(parse_config("scenario = leadership_interior\n"
                                 "game.psi = 0.5\n"),
                    ConfigError);  // psi outside reputation
    CHECK_THROWS_AS(parse_config("scenario = leadership_interior\n"
                                 "payoff.u_atheta = 1\n"),
                    ConfigError);  // custom keys outside custom_payoffs
    CHECK_THROWS_AS(parse_config("scenario = custom_payoffs\n"),
                    ConfigError);  // needs at least one payoff key

    const ScenarioConfig rep = parse_config(
        "scenario = reputation\ngame.psi = 1.125\ngame.sigma_x = inf\n");
    CHECK(rep.params.psi == 1.125);

    // a custom spec mirroring the leadership game passes the assumptions
    const ScenarioConfig custom = parse_config(
        "scenario = custom_payoffs\n"
        "payoff.u_atheta = 0.5\n"
        "payoff.u_ahata = 0.5\n"
        "payoff.u_hatahata = -0.5\n"
        "payoff.u_thetatheta = -0.5\n"
        "payoff.uhat_hataa = 1\n"
        "payoff.scale_u = 4\n"
        "payoff.scale_uhat = 2\n");
    CHECK(custom.custom.u_atheta == 0.5);
    // and one violating them (no myopic response at all) is rejected
    CHECK_THROWS_AS(parse_config("scenario = custom_payoffs\n"
                                 "payoff.u_atheta = 0.5\n"
                                 "payoff.scale_u = 4\n"),
                    ConfigError);
}

TEST_CASE("malformed input fails with the offending key") {
    CHECK_THROWS_AS(parse_config("scenario = leadership_interior\n"
                                 "game.T = twelve\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("scenario = leadership_interior\n"
                                 "game.T = 1\n"
                                 "game.T = 2\n"),
                    ConfigError);  // duplicate
    CHECK_THROWS_AS(parse_config("scenario = leadership_interior\n"
                                 "game.tee = 1\n"),
                    ConfigError);  // unknown key
    CHECK_THROWS_AS(parse_config("scenario = leadership_interior\n"
                                 "just a line\n"),
                    ConfigError);  // no '='
    CHECK_THROWS_AS(parse_config("scenario = leadership_interior\n"
                                 "game.T = -1\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("scenario = leadership_interior\n"
                                 "game.sigma_y = 0\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("scenario = leadership_interior\n"
                                 "game.sigma_y = inf\n"),
                    ConfigError);  // inf only for sigma_x
    CHECK_THROWS_AS(parse_config("scenario = leadership_interior\n"
                                 "game.nu = 0.5\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("scenario = leadership_interior\n"
                                 "sim.n_paths = 0\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("scenario = leadership_interior\n"
                                 "sim.seed = -3\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("scenario = leadership_interior\n"
                                 "sweep.values = 1, 2\n"),
                    ConfigError);  // values without axis
    CHECK_THROWS_AS(parse_config("scenario = leadership_interior\n"
                                 "sweep.axis = sigma_x\n"),
                    ConfigError);  // axis without values
    CHECK_THROWS_AS(parse_config("scenario = leadership_interior\n"
                                 "sweep.axis = mu\n"
                                 "sweep.values = 0\n"),
                    ConfigError);  // not a sweepable axis
    CHECK_THROWS_AS(parse_config("scenario = leadership_interior\n"
                                 "sweep.axis = T\n"
                                 "sweep.values = 1, inf\n"),
                    ConfigError);  // inf only on the sigma_x axis
    CHECK_THROWS_AS(parse_config("scenario = leadership_interior\n"
                                 "sweep.axis = lambda\n"
                                 "sweep.values = 0, 1\n"),
                    ConfigError);  // lambda axis needs the lambda scenario
    CHECK_THROWS_AS(load_config_file("/nonexistent/path.config"), ConfigError);
}

TEST_CASE("the canonical rendering is stable and drives the hash") {
    const std::string text =
        "scenario = leadership_interior\n"
        "game.T = 2\n"
        "game.sigma_x = 1\n";
    const ScenarioConfig a = parse_config(text);
    const ScenarioConfig b =
        parse_config("game.sigma_x = 1\n"
                     "scenario = leadership_interior\n"
                     "# reordered and commented\n"
                     "game.T = 2\n");
    CHECK(canonical_config(a) == canonical_config(b));
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);

    ScenarioConfig c = a;
    c.params.T = 2.5;
    CHECK(config_hash(c) != config_hash(a));
    ScenarioConfig d = a;
    d.solver.shoot_tol = 1e-8;
    CHECK(config_hash(d) != config_hash(a));
    // the output directory is not part of the provenance
    ScenarioConfig e = a;
    e.out_dir = "elsewhere";
    CHECK(config_hash(e) == config_hash(a));
}

TEST_CASE("every built-in preset parses into a sweep config") {
    CHECK(builtin_presets().size() >= 4);
    for (const auto& [name, text] : builtin_presets()) {
        CAPTURE(name);
        const ScenarioConfig cfg = parse_config(text);
        CHECK(!cfg.sweep.axis.empty());
        CHECK(!cfg.sweep.values.empty());
        CHECK(preset_text(name) == text);
    }
    CHECK_THROWS_AS(preset_text("figure-of-eight"), ConfigError);
}
