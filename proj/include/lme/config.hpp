#pragma once
// Scenario configuration: a flat "section.key = value" text format with '#'
// comments, schema validation, named built-in presets, and a canonical
// rendering whose FNV-1a hash stamps every output artifact.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lme/payoffs.hpp"

namespace lme {

enum class ScenarioId {
    leadership_public,
    leadership_nofeedback,
    leadership_interior,
    common_value_lambda,
    conflict_of_interest,
    reputation,
    custom_payoffs,
};

const char* to_string(ScenarioId id);
ScenarioId scenario_from_string(const std::string& name);  // throws ConfigError

struct SolverSettings {
    double shoot_tol = 1e-9;
    double fixed_point_tol = 1e-10;
    int max_probes = 32;
    int max_iter = 400;
};

struct SimSettings {
    int n_paths = 1000;
    double dt = 0.0;  // 0: reuse the solution grid step
    std::uint64_t seed = 12345;
    int noise_substeps = 1;
};

struct SweepSettings {
    std::string axis;  // sigma_x | r | lambda | psi | gamma0 | T (empty: none)
    std::vector<double> values;
    int workers = 1;
    int stride = 1;  // keep every stride-th grid row in the sweep table
};

struct ScenarioConfig {
    ScenarioId scenario = ScenarioId::leadership_interior;
    GameParams params;
    double lambda = 0.0;  // myopic weight on matching the type (common-value family)
    PayoffSpec custom;    // custom_payoffs only
    SolverSettings solver;
    SimSettings sim;
    SweepSettings sweep;
    std::string out_dir = ".";
};

// Parses and validates a config text. Unknown or duplicate keys, malformed
// numbers, out-of-range values, and scenario/regime mismatches all throw
// ConfigError with the offending key in the message. "inf" is accepted for
// game.sigma_x and for sweep.values on the sigma_x axis.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config_file(const std::string& path);  // ConfigError on I/O

// Deterministic full rendering of the effective configuration (defaults
// included, keys sorted); config_hash is the FNV-1a-64 of this string.
std::string canonical_config(const ScenarioConfig& cfg);
std::string config_hash(const ScenarioConfig& cfg);  // 16 hex digits

// Built-in sweep presets: {name, config text}.
const std::vector<std::pair<std::string, std::string>>& builtin_presets();
std::string preset_text(const std::string& name);  // throws ConfigError

}  // namespace lme
