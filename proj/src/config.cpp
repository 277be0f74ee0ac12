#include "lme/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "lme/errors.hpp"

namespace lme {

namespace {

const std::pair<ScenarioId, const char*> kScenarioNames[] = {
    {ScenarioId::leadership_public, "leadership_public"},
    {ScenarioId::leadership_nofeedback, "leadership_nofeedback"},
    {ScenarioId::leadership_interior, "leadership_interior"},
    {ScenarioId::common_value_lambda, "common_value_lambda"},
    {ScenarioId::conflict_of_interest, "conflict_of_interest"},
    {ScenarioId::reputation, "reputation"},
    {ScenarioId::custom_payoffs, "custom_payoffs"},
};

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& value,
                    bool allow_inf = false) {
    const std::string v = trim(value);
    if (v == "inf" || v == "+inf") {
        if (!allow_inf)
            throw ConfigError(key + " must be a finite number, got \"" + v +
                              "\"");
        return std::numeric_limits<double>::infinity();
    }
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || v.empty() || errno == ERANGE ||
        !(allow_inf || std::isfinite(x)))
        throw ConfigError(key + " is not a valid number: \"" + v + "\"");
    return x;
}

long long parse_int(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    errno = 0;
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size() || v.empty() || errno == ERANGE)
        throw ConfigError(key + " is not a valid integer: \"" + v + "\"");
    return x;
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    errno = 0;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size() || v.empty() || errno == ERANGE ||
        v.front() == '-')
        throw ConfigError(key + " is not a valid unsigned integer: \"" + v +
                          "\"");
    return static_cast<std::uint64_t>(x);
}

std::vector<double> parse_list(const std::string& key, const std::string& value,
                               bool allow_inf) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_double(key, item, allow_inf));
    if (out.empty()) throw ConfigError(key + " must list at least one value");
    return out;
}

SigmaX sigma_x_from_value(const std::string& key, double v) {
    if (std::isinf(v)) return SigmaX::infinite();
    if (v == 0.0) return SigmaX::zero();
    if (v < 0.0) throw ConfigError(key + " must be nonnegative");
    return SigmaX::finite(v);
}

std::string format_double(double v) {
    if (std::isinf(v)) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// consumes raw[key] if present; tracks what was seen
class KeyBag {
  public:
    explicit KeyBag(const std::string& text) {
        std::stringstream ss(text);
        std::string line;
        int lineno = 0;
        while (std::getline(ss, line)) {
            ++lineno;
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(lineno) +
                                  " is not a key = value pair: \"" + line +
                                  "\"");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError("line " + std::to_string(lineno) +
                                  " has an empty key");
            if (!raw_.emplace(key, value).second)
                throw ConfigError("duplicate key " + key);
        }
    }

    bool has(const std::string& key) const { return raw_.count(key) > 0; }

    bool take(const std::string& key, std::string* value) {
        const auto it = raw_.find(key);
        if (it == raw_.end()) return false;
        *value = it->second;
        raw_.erase(it);
        return true;
    }

    void finish() const {
        if (raw_.empty()) return;
        std::string msg = "unknown key(s):";
        for (const auto& [k, v] : raw_) msg += " " + k;
        throw ConfigError(msg);
    }

  private:
    std::map<std::string, std::string> raw_;
};

const char* kSweepAxes[] = {"sigma_x", "r", "lambda", "psi", "gamma0", "T"};

}  // namespace

const char* to_string(ScenarioId id) {
    for (const auto& [sid, name] : kScenarioNames)
        if (sid == id) return name;
    return "unknown";
}

ScenarioId scenario_from_string(const std::string& name) {
    for (const auto& [sid, sname] : kScenarioNames)
        if (name == sname) return sid;
    std::string msg = "unknown scenario \"" + name + "\"; expected one of:";
    for (const auto& [sid, sname] : kScenarioNames)
        msg += std::string(" ") + sname;
    throw ConfigError(msg);
}

ScenarioConfig parse_config(const std::string& text) {
    KeyBag bag(text);
    ScenarioConfig cfg;
    std::string v;

    if (!bag.take("scenario", &v))
        throw ConfigError("missing required key: scenario");
    cfg.scenario = scenario_from_string(trim(v));

    // ---- game block
    bool sigma_x_given = false;
    if (bag.take("game.sigma_x", &v)) {
        cfg.params.sigma_x =
            sigma_x_from_value("game.sigma_x", parse_double("game.sigma_x", v, true));
        sigma_x_given = true;
    }
    if (bag.take("game.sigma_y", &v))
        cfg.params.sigma_y = parse_double("game.sigma_y", v);
    if (bag.take("game.gamma0", &v))
        cfg.params.gamma0 = parse_double("game.gamma0", v);
    if (bag.take("game.r", &v)) cfg.params.r = parse_double("game.r", v);
    if (bag.take("game.T", &v)) cfg.params.T = parse_double("game.T", v);
    if (bag.take("game.mu", &v)) cfg.params.mu = parse_double("game.mu", v);
    if (bag.take("game.nu", &v)) cfg.params.nu = parse_double("game.nu", v);
    const bool psi_given = bag.take("game.psi", &v);
    if (psi_given) cfg.params.psi = parse_double("game.psi", v);
    if (!(cfg.params.sigma_y > 0.0))
        throw ConfigError("game.sigma_y must be positive");
    if (!(cfg.params.gamma0 > 0.0))
        throw ConfigError("game.gamma0 must be positive");
    if (cfg.params.r < 0.0) throw ConfigError("game.r must be nonnegative");
    if (!(cfg.params.T > 0.0)) throw ConfigError("game.T must be positive");
    if (cfg.params.nu != 0.0)
        throw ConfigError(
            "game.nu: only nu = 0 (public signal driven by the myopic action "
            "alone) is solvable");

    // ---- payoff block
    const bool lambda_given = bag.take("payoff.lambda", &v);
    if (lambda_given) {
        cfg.lambda = parse_double("payoff.lambda", v);
        if (cfg.lambda < 0.0 || cfg.lambda > 1.0)
            throw ConfigError("payoff.lambda must lie in [0, 1]");
    }
    bool any_custom = false;
    const auto custom_field = [&](const char* key, double* slot) {
        std::string raw;
        if (bag.take(key, &raw)) {
            *slot = parse_double(key, raw);
            any_custom = true;
        }
    };
    custom_field("payoff.u_atheta", &cfg.custom.u_atheta);
    custom_field("payoff.u_ahata", &cfg.custom.u_ahata);
    custom_field("payoff.u_hatahata", &cfg.custom.u_hatahata);
    custom_field("payoff.u_thetatheta", &cfg.custom.u_thetatheta);
    custom_field("payoff.u_hatatheta", &cfg.custom.u_hatatheta);
    custom_field("payoff.u0", &cfg.custom.u0);
    custom_field("payoff.u_hat0", &cfg.custom.u_hat0);
    custom_field("payoff.u_theta0", &cfg.custom.u_theta0);
    custom_field("payoff.u_const", &cfg.custom.u_const);
    custom_field("payoff.uhat_hatatheta", &cfg.custom.uhat_hatatheta);
    custom_field("payoff.uhat_hataa", &cfg.custom.uhat_hataa);
    custom_field("payoff.uhat0", &cfg.custom.uhat0);
    custom_field("payoff.scale_u", &cfg.custom.scale_u);
    custom_field("payoff.scale_uhat", &cfg.custom.scale_uhat);

    // ---- solver block
    if (bag.take("solver.tol", &v))
        cfg.solver.shoot_tol = parse_double("solver.tol", v);
    if (bag.take("solver.fixed_point_tol", &v))
        cfg.solver.fixed_point_tol = parse_double("solver.fixed_point_tol", v);
    if (bag.take("solver.max_probes", &v))
        cfg.solver.max_probes = static_cast<int>(parse_int("solver.max_probes", v));
    if (bag.take("solver.max_iter", &v))
        cfg.solver.max_iter = static_cast<int>(parse_int("solver.max_iter", v));
    if (!(cfg.solver.shoot_tol > 0.0))
        throw ConfigError("solver.tol must be positive");
    if (!(cfg.solver.fixed_point_tol > 0.0))
        throw ConfigError("solver.fixed_point_tol must be positive");
    if (cfg.solver.max_probes < 4)
        throw ConfigError("solver.max_probes must be at least 4");
    if (cfg.solver.max_iter < 1)
        throw ConfigError("solver.max_iter must be at least 1");

    // ---- sim block
    if (bag.take("sim.n_paths", &v))
        cfg.sim.n_paths = static_cast<int>(parse_int("sim.n_paths", v));
    if (bag.take("sim.dt", &v)) cfg.sim.dt = parse_double("sim.dt", v);
    if (bag.take("sim.seed", &v)) cfg.sim.seed = parse_seed("sim.seed", v);
    if (bag.take("sim.substeps", &v))
        cfg.sim.noise_substeps = static_cast<int>(parse_int("sim.substeps", v));
    if (cfg.sim.n_paths < 1) throw ConfigError("sim.n_paths must be positive");
    if (cfg.sim.dt < 0.0) throw ConfigError("sim.dt must be nonnegative");
    if (cfg.sim.noise_substeps < 1)
        throw ConfigError("sim.substeps must be positive");

    // ---- sweep block
    const bool has_axis = bag.take("sweep.axis", &v);
    if (has_axis) {
        cfg.sweep.axis = trim(v);
        const bool known =
            std::any_of(std::begin(kSweepAxes), std::end(kSweepAxes),
                        [&](const char* a) { return cfg.sweep.axis == a; });
        if (!known)
            throw ConfigError(
                "sweep.axis must be one of: sigma_x, r, lambda, psi, gamma0, T");
        std::string vals;
        if (!bag.take("sweep.values", &vals))
            throw ConfigError("sweep.axis requires sweep.values");
        cfg.sweep.values = parse_list("sweep.values", vals,
                                      cfg.sweep.axis == "sigma_x");
        for (double x : cfg.sweep.values) {
            if (cfg.sweep.axis == "sigma_x" && x < 0.0)
                throw ConfigError("sweep.values: sigma_x must be nonnegative");
            if (cfg.sweep.axis == "r" && x < 0.0)
                throw ConfigError("sweep.values: r must be nonnegative");
            if (cfg.sweep.axis == "lambda" && (x < 0.0 || x > 1.0))
                throw ConfigError("sweep.values: lambda must lie in [0, 1]");
            if ((cfg.sweep.axis == "gamma0" || cfg.sweep.axis == "T") &&
                !(x > 0.0))
                throw ConfigError("sweep.values: " + cfg.sweep.axis +
                                  " must be positive");
        }
    } else if (bag.has("sweep.values")) {
        throw ConfigError("sweep.values requires sweep.axis");
    }
    if (bag.take("sweep.workers", &v))
        cfg.sweep.workers = static_cast<int>(parse_int("sweep.workers", v));
    if (bag.take("sweep.stride", &v))
        cfg.sweep.stride = static_cast<int>(parse_int("sweep.stride", v));
    if (cfg.sweep.workers < 1)
        throw ConfigError("sweep.workers must be positive");
    if (cfg.sweep.stride < 1) throw ConfigError("sweep.stride must be positive");

    if (bag.take("output.dir", &v)) {
        cfg.out_dir = trim(v);
        if (cfg.out_dir.empty()) throw ConfigError("output.dir must not be empty");
    }
    bag.finish();

    // ---- scenario-specific requirements and regime coherence
    const bool sweeps_sigma_x = cfg.sweep.axis == "sigma_x";
    switch (cfg.scenario) {
        case ScenarioId::leadership_public:
            if (!sigma_x_given)
                cfg.params.sigma_x = SigmaX::zero();
            else if (!cfg.params.sigma_x.is_zero() && !sweeps_sigma_x)
                throw ConfigError(
                    "leadership_public requires game.sigma_x = 0");
            break;
        case ScenarioId::leadership_nofeedback:
            if (!sigma_x_given)
                cfg.params.sigma_x = SigmaX::infinite();
            else if (!cfg.params.sigma_x.is_infinite() && !sweeps_sigma_x)
                throw ConfigError(
                    "leadership_nofeedback requires game.sigma_x = inf");
            break;
        case ScenarioId::leadership_interior:
        case ScenarioId::conflict_of_interest:
            if (sigma_x_given && !cfg.params.sigma_x.is_finite() &&
                !sweeps_sigma_x)
                throw ConfigError(std::string(to_string(cfg.scenario)) +
                                  " requires finite positive game.sigma_x");
            break;
        case ScenarioId::common_value_lambda:
            if (!lambda_given)
                throw ConfigError(
                    "common_value_lambda requires payoff.lambda");
            if (sigma_x_given && !cfg.params.sigma_x.is_finite() &&
                !sweeps_sigma_x)
                throw ConfigError(
                    "common_value_lambda requires finite positive game.sigma_x");
            break;
        case ScenarioId::reputation:
            if (!psi_given)
                throw ConfigError("reputation requires game.psi");
            if (!sigma_x_given)
                throw ConfigError(
                    "reputation requires game.sigma_x = 0 or inf");
            if (cfg.params.sigma_x.is_finite() && !sweeps_sigma_x)
                throw ConfigError(
                    "reputation supports only the public (sigma_x = 0) and "
                    "no-feedback (sigma_x = inf) regimes");
            break;
        case ScenarioId::custom_payoffs: {
            if (!any_custom)
                throw ConfigError(
                    "custom_payoffs requires at least one payoff.* key");
            const AssumptionReport rep = validate_assumptions(cfg.custom);
            if (!rep.pass())
                throw ConfigError(
                    "custom payoffs violate the standing assumptions "
                    "(signaling nontrivial, myopic response present, flow "
                    "coupling, best replies intersecting)");
            break;
        }
    }
    if (cfg.scenario != ScenarioId::custom_payoffs && any_custom)
        throw ConfigError(
            "payoff.u*/scale* keys are only valid with scenario = "
            "custom_payoffs");
    if (cfg.scenario != ScenarioId::common_value_lambda && lambda_given)
        throw ConfigError(
            "payoff.lambda is only valid with scenario = common_value_lambda");
    if (cfg.scenario != ScenarioId::reputation && psi_given)
        throw ConfigError("game.psi is only valid with scenario = reputation");
    if (cfg.sweep.axis == "lambda" &&
        cfg.scenario != ScenarioId::common_value_lambda)
        throw ConfigError(
            "sweep.axis = lambda requires scenario = common_value_lambda");
    if (cfg.sweep.axis == "psi" && cfg.scenario != ScenarioId::reputation)
        throw ConfigError("sweep.axis = psi requires scenario = reputation");
    return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string canonical_config(const ScenarioConfig& cfg) {
    std::string out;
    const auto kv = [&out](const std::string& k, const std::string& v) {
        out += k;
        out += " = ";
        out += v;
        out += '\n';
    };
    kv("scenario", to_string(cfg.scenario));
    kv("game.T", format_double(cfg.params.T));
    kv("game.gamma0", format_double(cfg.params.gamma0));
    kv("game.mu", format_double(cfg.params.mu));
    kv("game.nu", format_double(cfg.params.nu));
    kv("game.psi", format_double(cfg.params.psi));
    kv("game.r", format_double(cfg.params.r));
    kv("game.sigma_x", cfg.params.sigma_x.is_zero()
                           ? "0"
                           : (cfg.params.sigma_x.is_infinite()
                                  ? "inf"
                                  : format_double(cfg.params.sigma_x.value)));
    kv("game.sigma_y", format_double(cfg.params.sigma_y));
    kv("payoff.lambda", format_double(cfg.lambda));
    if (cfg.scenario == ScenarioId::custom_payoffs) {
        kv("payoff.scale_u", format_double(cfg.custom.scale_u));
        kv("payoff.scale_uhat", format_double(cfg.custom.scale_uhat));
        kv("payoff.u0", format_double(cfg.custom.u0));
        kv("payoff.u_ahata", format_double(cfg.custom.u_ahata));
        kv("payoff.u_atheta", format_double(cfg.custom.u_atheta));
        kv("payoff.u_const", format_double(cfg.custom.u_const));
        kv("payoff.u_hat0", format_double(cfg.custom.u_hat0));
        kv("payoff.u_hatahata", format_double(cfg.custom.u_hatahata));
        kv("payoff.u_hatatheta", format_double(cfg.custom.u_hatatheta));
        kv("payoff.u_theta0", format_double(cfg.custom.u_theta0));
        kv("payoff.u_thetatheta", format_double(cfg.custom.u_thetatheta));
        kv("payoff.uhat0", format_double(cfg.custom.uhat0));
        kv("payoff.uhat_hataa", format_double(cfg.custom.uhat_hataa));
        kv("payoff.uhat_hatatheta", format_double(cfg.custom.uhat_hatatheta));
    }
    kv("sim.dt", format_double(cfg.sim.dt));
    kv("sim.n_paths", std::to_string(cfg.sim.n_paths));
    kv("sim.seed", std::to_string(cfg.sim.seed));
    kv("sim.substeps", std::to_string(cfg.sim.noise_substeps));
    kv("solver.fixed_point_tol", format_double(cfg.solver.fixed_point_tol));
    kv("solver.max_iter", std::to_string(cfg.solver.max_iter));
    kv("solver.max_probes", std::to_string(cfg.solver.max_probes));
    kv("solver.tol", format_double(cfg.solver.shoot_tol));
    if (!cfg.sweep.axis.empty()) {
        kv("sweep.axis", cfg.sweep.axis);
        std::string vals;
        for (std::size_t i = 0; i < cfg.sweep.values.size(); ++i) {
            if (i) vals += ", ";
            vals += format_double(cfg.sweep.values[i]);
        }
        kv("sweep.values", vals);
        kv("sweep.stride", std::to_string(cfg.sweep.stride));
    }
    return out;
}

std::string config_hash(const ScenarioConfig& cfg) {
    const std::string canon = canonical_config(cfg);
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

const std::vector<std::pair<std::string, std::string>>& builtin_presets() {
    static const std::vector<std::pair<std::string, std::string>> presets = {
        {"noise-sweep",
         "scenario = leadership_interior\n"
         "game.sigma_y = 1.5\n"
         "game.gamma0 = 1\n"
         "game.T = 2\n"
         "game.r = 0\n"
         "sweep.axis = sigma_x\n"
         "sweep.values = 0, 0.1, 0.75, 2, 10, inf\n"
         "sweep.stride = 40\n"},
        {"noise-sweep-discounted",
         "scenario = leadership_interior\n"
         "game.sigma_y = 1.5\n"
         "game.gamma0 = 1\n"
         "game.T = 2\n"
         "game.r = 1\n"
         "sweep.axis = sigma_x\n"
         "sweep.values = 0, 0.1, 0.75, 2, 10, inf\n"
         "sweep.stride = 40\n"},
        {"weight-sweep",
         "scenario = common_value_lambda\n"
         "payoff.lambda = 0.5\n"
         "game.sigma_x = 1\n"
         "game.sigma_y = 1.5\n"
         "game.gamma0 = 1\n"
         "game.T = 2\n"
         "sweep.axis = lambda\n"
         "sweep.values = 0, 0.5, 1\n"
         "sweep.stride = 40\n"},
        {"horizon-map",
         "scenario = common_value_lambda\n"
         "payoff.lambda = 0.5\n"
         "game.sigma_x = 1\n"
         "game.sigma_y = 1.5\n"
         "game.gamma0 = 1\n"
         "game.T = 2.5\n"
         "sweep.axis = gamma0\n"
         "sweep.values = 0.5, 1, 2\n"
         "sweep.stride = 40\n"},
        {"reputation-regimes",
         "scenario = reputation\n"
         "game.psi = 1.125\n"
         "game.sigma_x = 0\n"
         "game.sigma_y = 1.5\n"
         "game.gamma0 = 1\n"
         "game.T = 2\n"
         "sweep.axis = sigma_x\n"
         "sweep.values = 0, inf\n"
         "sweep.stride = 40\n"},
    };
    return presets;
}

std::string preset_text(const std::string& name) {
    for (const auto& [pname, text] : builtin_presets())
        if (pname == name) return text;
    std::string msg = "unknown preset \"" + name + "\"; available:";
    for (const auto& [pname, text] : builtin_presets()) msg += " " + pname;
    throw ConfigError(msg);
}

}  // namespace lme
