#include "lme/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <thread>
#include <vector>

#include "json.hpp"
#include "lme/errors.hpp"
#include "lme/solver_fixedpoint.hpp"
#include "lme/solver_shooting.hpp"

namespace lme {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open for writing: " + path.string());
    out << body;
    if (!out) throw ConfigError("write failed: " + path.string());
}

SigmaX sigma_x_from_double(double v) {
    if (v == 0.0) return SigmaX::zero();
    if (std::isinf(v)) return SigmaX::infinite();
    return SigmaX::finite(v);
}

ScenarioConfig cell_config(const ScenarioConfig& base, double value) {
    ScenarioConfig c = base;
    c.sweep = SweepSettings{};  // a cell is a single run
    if (base.sweep.axis == "sigma_x")
        c.params.sigma_x = sigma_x_from_double(value);
    else if (base.sweep.axis == "r")
        c.params.r = value;
    else if (base.sweep.axis == "lambda")
        c.lambda = value;
    else if (base.sweep.axis == "psi")
        c.params.psi = value;
    else if (base.sweep.axis == "gamma0")
        c.params.gamma0 = value;
    else if (base.sweep.axis == "T")
        c.params.T = value;
    return c;
}

std::string provenance(const ScenarioResult& res, const ScenarioConfig& cfg) {
    const TimeGrid& g = res.solution.coefficients.grid;
    std::string out;
    out += "# config_hash = " + config_hash(cfg) + "\n";
    out += std::string("# scenario = ") + to_string(cfg.scenario) +
           ", route = " + res.route + "\n";
    out += "# grid: T = " + fmt(g.t1) + ", n_steps = " +
           std::to_string(g.n_steps) + ", dt = " + fmt(g.dt()) + "\n";
    out += "# tolerances: shoot = " + fmt(cfg.solver.shoot_tol) +
           ", fixed_point = " + fmt(cfg.solver.fixed_point_tol) +
           ", foc = " + fmt(kAcceptFocTol) +
           ", boundary = " + fmt(kAcceptBoundaryTol) + "\n";
    return out;
}

constexpr const char* kCoefficientHeader =
    "t,beta0,beta1,beta2,beta3,alpha0,alpha2,alpha3,delta0,delta1,delta2,"
    "gamma,chi,v0,v1,v2,v3,v4,v5,v6,v7,v8,v9";

void append_coefficient_row(std::string& out, const ScenarioResult& res,
                            int i) {
    const CoefficientPoint& q = res.solution.coefficients.points[i];
    const std::array<double, 10>& vv = res.solution.value.v[i];
    const double cols[23] = {res.solution.coefficients.grid.time(i),
                             q.beta[0],  q.beta[1], q.beta[2], q.beta[3],
                             q.alpha0,   q.alpha2,  q.alpha3,  q.delta[0],
                             q.delta[1], q.delta[2], q.gamma,  q.chi,
                             vv[0],      vv[1],     vv[2],     vv[3],
                             vv[4],      vv[5],     vv[6],     vv[7],
                             vv[8],      vv[9]};
    for (int c = 0; c < 23; ++c) {
        if (c) out += ',';
        out += fmt(cols[c]);
    }
    out += '\n';
}

json simulation_summary(const SimulatedEnsemble& ens,
                        const ScenarioConfig& cfg) {
    const PayoffEstimate pe = payoff_estimate(ens);
    json s;
    s["n_paths"] = ens.n_paths;
    s["dt"] = ens.dt;
    s["seed"] = ens.seed;
    s["substeps"] = cfg.sim.noise_substeps;
    s["payoff_mean"] = pe.mean;
    s["payoff_se"] = pe.se;
    s["adaptation_mean"] = pe.adaptation_mean;
    s["adaptation_se"] = pe.adaptation_se;
    s["coordination_mean"] = pe.coordination_mean;
    s["coordination_se"] = pe.coordination_se;
    s["representation_sup"] = ens.representation_sup;
    s["strategy_identity_sup"] = ens.strategy_identity_sup;
    return s;
}

json tolerances_json(const ScenarioConfig& cfg) {
    json t;
    t["shoot"] = cfg.solver.shoot_tol;
    t["fixed_point"] = cfg.solver.fixed_point_tol;
    t["foc"] = kAcceptFocTol;
    t["boundary"] = kAcceptBoundaryTol;
    t["value_closure"] = kAcceptValueClosureTol;
    return t;
}

}  // namespace

PayoffSpec scenario_payoffs(const ScenarioConfig& cfg) {
    switch (cfg.scenario) {
        case ScenarioId::leadership_public:
        case ScenarioId::leadership_nofeedback:
        case ScenarioId::leadership_interior:
            return payoff_sets::leadership();
        case ScenarioId::common_value_lambda:
            return payoff_sets::leadership_common(cfg.lambda);
        case ScenarioId::conflict_of_interest:
            return payoff_sets::conflict_of_interest();
        case ScenarioId::reputation:
            return payoff_sets::reputation();
        case ScenarioId::custom_payoffs:
            return cfg.custom;
    }
    throw ConfigError("unhandled scenario id");
}

TerminalPayoffSpec scenario_terminal(const ScenarioConfig& cfg) {
    TerminalPayoffSpec term;
    if (cfg.scenario == ScenarioId::reputation) term.psi2 = -cfg.params.psi;
    return term;
}

ScenarioResult solve_scenario(const ScenarioConfig& cfg) {
    ScenarioResult res;
    res.spec = scenario_payoffs(cfg);
    res.term = scenario_terminal(cfg);
    const GameParams& p = cfg.params;

    ShootResult sh;
    if (p.sigma_x.is_zero()) {
        res.solution = solve_public(res.spec, p, cfg.solver.shoot_tol,
                                    res.term, cfg.solver.max_probes, &sh);
        res.route = "shooting-public";
        res.solver_residual = std::abs(sh.residual);
    } else if (p.sigma_x.is_infinite()) {
        res.solution = solve_nofeedback(res.spec, p, cfg.solver.shoot_tol,
                                        res.term, cfg.solver.max_probes, &sh);
        res.route = "shooting-nofeedback";
        res.solver_residual = std::abs(sh.residual);
    } else if (cfg.scenario != ScenarioId::common_value_lambda &&
               res.spec.uhat_hatatheta == 0.0) {
        res.solution =
            solve_private_interior(res.spec, p, cfg.solver.shoot_tol, res.term,
                                   cfg.solver.max_probes, &sh);
        res.route = "shooting-interior";
        res.solver_residual = std::abs(sh.residual);
    } else {
        GapPoint gp;
        res.solution =
            solve_fixed_point(res.spec, p, res.term,
                              cfg.solver.fixed_point_tol, cfg.solver.max_iter,
                              &gp);
        res.route = "fixed-point";
        res.solver_residual = gp.residual;
    }

    const Diagnostics& d = res.solution.diagnostics;
    const InvariantReport& inv = d.invariants;
    const double boundary_max = *std::max_element(
        d.boundary_residuals.begin(), d.boundary_residuals.end());
    const auto add = [&res](const char* name, bool ok) {
        res.checks.emplace_back(name, ok);
    };
    add("foc_residual", d.foc_max_residual <= kAcceptFocTol);
    add("boundary_residuals", boundary_max <= kAcceptBoundaryTol);
    add("gamma_positive", inv.gamma_positive);
    add("gamma_monotone", inv.gamma_monotone);
    add("chi_in_range", inv.chi_in_range);
    add("alpha3_nonzero", inv.min_alpha3_abs > 0.0);
    add("value_closure", inv.max_abs_v3 <= kAcceptValueClosureTol);
    if (inv.beta_sum_applicable)
        add("action_weights_sum", inv.max_beta_sum_dev <= kAcceptBoundaryTol);
    if (inv.chi_map_applicable)
        add("chi_closed_form", inv.max_chi_map_dev <= kAcceptBoundaryTol);
    res.accepted = std::all_of(res.checks.begin(), res.checks.end(),
                               [](const auto& c) { return c.second; });

    if (cfg.scenario == ScenarioId::reputation &&
        p.psi >= p.sigma_y * p.sigma_y / p.gamma0)
        res.notes.push_back(
            "uniqueness not guaranteed: psi >= sigma_y^2 / gamma0");
    return res;
}

std::string coefficients_csv(const ScenarioResult& res,
                             const ScenarioConfig& cfg) {
    std::string out = provenance(res, cfg);
    out += kCoefficientHeader;
    out += '\n';
    const int n = static_cast<int>(res.solution.coefficients.points.size());
    for (int i = 0; i < n; ++i) append_coefficient_row(out, res, i);
    return out;
}

std::string simulation_csv(const SimulatedEnsemble& ens,
                           const ScenarioConfig& cfg) {
    std::string out;
    out += "# config_hash = " + config_hash(cfg) + "\n";
    out += "# n_paths = " + std::to_string(ens.n_paths) +
           ", dt = " + fmt(ens.dt) + ", seed = " + std::to_string(ens.seed) +
           ", substeps = " + std::to_string(cfg.sim.noise_substeps) + "\n";
    out += "path,theta,payoff_discounted,adaptation_cost,coordination_cost\n";
    for (int q = 0; q < ens.n_paths; ++q) {
        out += std::to_string(q);
        out += ',';
        out += fmt(ens.theta[q]);
        out += ',';
        out += fmt(ens.payoff_discounted[q]);
        out += ',';
        out += fmt(ens.adaptation_cost[q]);
        out += ',';
        out += fmt(ens.coordination_cost[q]);
        out += '\n';
    }
    return out;
}

std::string diagnostics_json(const ScenarioResult& res,
                             const ScenarioConfig& cfg,
                             const SimulatedEnsemble* ens) {
    const TimeGrid& g = res.solution.coefficients.grid;
    json j;
    j["accepted"] = res.accepted;
    j["checks"] = json::object();
    for (const auto& [name, ok] : res.checks) j["checks"][name] = ok;
    j["config_hash"] = config_hash(cfg);
    j["error"] = nullptr;
    j["grid"] = {{"T", g.t1}, {"dt", g.dt()}, {"n_steps", g.n_steps}};
    j["notes"] = res.notes;
    j["residuals"] = {
        {"boundary", res.solution.diagnostics.boundary_residuals},
        {"foc_max", res.solution.diagnostics.foc_max_residual},
        {"solver", res.solver_residual}};
    j["route"] = res.route;
    j["scenario"] = to_string(cfg.scenario);
    j["simulation"] = ens ? simulation_summary(*ens, cfg) : json(nullptr);
    j["tolerances"] = tolerances_json(cfg);
    return j.dump(2) + "\n";
}

std::string error_diagnostics_json(const std::string& error_type,
                                   const std::string& message,
                                   const ScenarioConfig& cfg) {
    json j;
    j["accepted"] = false;
    j["checks"] = json::object();
    j["config_hash"] = config_hash(cfg);
    j["error"] = {{"type", error_type}, {"message", message}};
    j["grid"] = {{"T", cfg.params.T}, {"dt", nullptr}, {"n_steps", nullptr}};
    j["notes"] = json::array();
    j["residuals"] = nullptr;
    j["route"] = "";
    j["scenario"] = to_string(cfg.scenario);
    j["simulation"] = nullptr;
    j["tolerances"] = tolerances_json(cfg);
    return j.dump(2) + "\n";
}

std::string error_tag(const std::exception& err) {
    if (dynamic_cast<const ConfigError*>(&err)) return "config_error";
    if (dynamic_cast<const GridMismatch*>(&err)) return "grid_mismatch";
    if (dynamic_cast<const NoBracket*>(&err)) return "no_bracket";
    if (dynamic_cast<const IvpBlowUp*>(&err)) return "ivp_blow_up";
    if (dynamic_cast<const BlowUp*>(&err)) return "blow_up";
    if (dynamic_cast<const NoConvergence*>(&err)) return "no_convergence";
    if (dynamic_cast<const ChiSaturated*>(&err)) return "chi_saturated";
    if (dynamic_cast<const AlphaVanishes*>(&err)) return "alpha_vanishes";
    if (dynamic_cast<const NoStaticEquilibrium*>(&err))
        return "no_static_equilibrium";
    if (dynamic_cast<const DegenerateTerminal*>(&err))
        return "degenerate_terminal";
    if (dynamic_cast<const NonConcave*>(&err)) return "non_concave";
    if (dynamic_cast<const SingularMatching*>(&err)) return "singular_matching";
    if (dynamic_cast<const ZeroSignalResponse*>(&err))
        return "zero_signal_response";
    if (dynamic_cast<const DenominatorDegenerate*>(&err))
        return "denominator_degenerate";
    if (dynamic_cast<const NonFiniteDerivative*>(&err))
        return "non_finite_derivative";
    if (dynamic_cast<const Error*>(&err)) return "solver_error";
    return "error";
}

int run_scenario(const ScenarioConfig& cfg, bool with_simulation,
                 std::ostream& log) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const fs::path dir(cfg.out_dir);

    ScenarioResult res;
    try {
        res = solve_scenario(cfg);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        write_file(dir / "diagnostics.json",
                   error_diagnostics_json(error_tag(e), e.what(), cfg));
        log << "solver failed (" << error_tag(e) << "): " << e.what() << "\n";
        return 2;
    }

    write_file(dir / "coefficients.csv", coefficients_csv(res, cfg));
    log << "wrote " << (dir / "coefficients.csv").string() << "\n";

    SimulatedEnsemble ens;
    bool have_sim = false;
    if (with_simulation) {
        const double dt = cfg.sim.dt > 0.0 ? cfg.sim.dt
                                           : res.solution.coefficients.grid.dt();
        ens = simulate_paths(res.solution, res.spec, cfg.params,
                             cfg.sim.n_paths, dt, cfg.sim.seed, std::nullopt,
                             {}, cfg.sim.noise_substeps, false, res.term);
        write_file(dir / "simulation.csv", simulation_csv(ens, cfg));
        log << "wrote " << (dir / "simulation.csv").string() << "\n";
        have_sim = true;
    }
    write_file(dir / "diagnostics.json",
               diagnostics_json(res, cfg, have_sim ? &ens : nullptr));
    log << "wrote " << (dir / "diagnostics.json").string() << "\n";

    if (!res.accepted) {
        log << "verification failed:";
        for (const auto& [name, ok] : res.checks)
            if (!ok) log << " " << name;
        log << "\n";
        return 3;
    }
    log << "accepted (route " << res.route
        << ", solver residual " << fmt(res.solver_residual) << ")\n";
    return 0;
}

int run_check(const ScenarioConfig& cfg, std::ostream& log) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const fs::path dir(cfg.out_dir);

    ScenarioResult res;
    try {
        res = solve_scenario(cfg);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        write_file(dir / "diagnostics.json",
                   error_diagnostics_json(error_tag(e), e.what(), cfg));
        log << "solver failed (" << error_tag(e) << "): " << e.what() << "\n";
        return 2;
    }
    for (const auto& [name, ok] : res.checks)
        log << "check " << name << ": " << (ok ? "pass" : "fail") << "\n";
    for (const std::string& note : res.notes) log << "note: " << note << "\n";
    write_file(dir / "diagnostics.json", diagnostics_json(res, cfg));
    log << "wrote " << (dir / "diagnostics.json").string() << "\n";
    return res.accepted ? 0 : 3;
}

int run_sweep(const ScenarioConfig& cfg, std::ostream& log) {
    if (cfg.sweep.axis.empty())
        throw ConfigError("sweep requires sweep.axis and sweep.values");
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const fs::path dir(cfg.out_dir);

    struct Cell {
        double value = 0.0;
        std::string status;  // "ok" or an error tag
        std::string message;
        bool solved = false;
        ScenarioResult res;
        ScenarioConfig config;
    };
    std::vector<Cell> cells(cfg.sweep.values.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        cells[i].value = cfg.sweep.values[i];
        cells[i].config = cell_config(cfg, cells[i].value);
    }

    std::atomic<std::size_t> next{0};
    const auto worker = [&cells, &next]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            Cell& cell = cells[i];
            try {
                cell.res = solve_scenario(cell.config);
                cell.status = "ok";
                cell.solved = true;
            } catch (const Error& e) {
                cell.status = error_tag(e);
                cell.message = e.what();
            } catch (const std::exception& e) {
                cell.status = "error";
                cell.message = e.what();
            }
        }
    };
    const int n_workers = std::max(
        1, std::min<int>(cfg.sweep.workers, static_cast<int>(cells.size())));
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    std::string csv;
    csv += "# config_hash = " + config_hash(cfg) + "\n";
    csv += std::string("# scenario = ") + to_string(cfg.scenario) +
           ", axis = " + cfg.sweep.axis + "\n";
    csv += "axis,value,status,";
    csv += kCoefficientHeader;
    csv += '\n';
    json jcells = json::array();
    for (const Cell& cell : cells) {
        const std::string value_str =
            std::isinf(cell.value) ? "inf" : fmt(cell.value);
        json jc;
        jc["value"] = std::isinf(cell.value) ? json("inf") : json(cell.value);
        jc["status"] = cell.status;
        jc["message"] = cell.message;
        if (cell.solved) {
            const auto& pts = cell.res.solution.coefficients.points;
            const int n = static_cast<int>(pts.size());
            for (int i = 0; i < n; i += cfg.sweep.stride) {
                csv += cfg.sweep.axis + "," + value_str + ",ok,";
                append_coefficient_row(csv, cell.res, i);
            }
            if ((n - 1) % cfg.sweep.stride != 0) {
                csv += cfg.sweep.axis + "," + value_str + ",ok,";
                append_coefficient_row(csv, cell.res, n - 1);
            }
            jc["accepted"] = cell.res.accepted;
            jc["route"] = cell.res.route;
            jc["residual"] = cell.res.solver_residual;
            jc["gamma_T"] = pts.back().gamma;
            jc["chi_T"] = pts.back().chi;
            jc["alpha3_0"] = pts.front().alpha3;
            jc["alpha3_T"] = pts.back().alpha3;
            jc["beta1_0"] = pts.front().beta[1];
        } else {
            csv += cfg.sweep.axis + "," + value_str + "," + cell.status;
            for (int c = 0; c < 23; ++c) csv += ',';
            csv += '\n';
            jc["accepted"] = false;
            jc["route"] = nullptr;
            jc["residual"] = nullptr;
            jc["gamma_T"] = nullptr;
            jc["chi_T"] = nullptr;
            jc["alpha3_0"] = nullptr;
            jc["alpha3_T"] = nullptr;
            jc["beta1_0"] = nullptr;
        }
        jcells.push_back(jc);
        log << "cell " << cfg.sweep.axis << " = " << value_str << ": "
            << cell.status << "\n";
    }
    write_file(dir / "sweep.csv", csv);
    json j;
    j["axis"] = cfg.sweep.axis;
    j["cells"] = jcells;
    j["config_hash"] = config_hash(cfg);
    j["scenario"] = to_string(cfg.scenario);
    j["workers"] = cfg.sweep.workers;
    write_file(dir / "sweep.json", j.dump(2) + "\n");
    log << "wrote " << (dir / "sweep.csv").string() << " and "
        << (dir / "sweep.json").string() << "\n";
    return 0;
}

}  // namespace lme
