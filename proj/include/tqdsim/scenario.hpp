#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tqdsim/dynamics.hpp"
#include "tqdsim/observables.hpp"

namespace tqdsim {

using Json = nlohmann::json;

// Per-sweep parameter ranges; empty vectors mean "use the scenario default".
struct SweepRanges {
    std::vector<double> delta_prime;
    std::vector<double> interval;
    std::vector<int> n_b;
    std::vector<double> n_th;
};

// Fully resolved description of one simulation run or sweep.
struct ScenarioConfig {
    std::string scenario;
    double tau = -0.95;
    double alpha = 1.1;
    double delta_prime = 60.0;
    DissipationRates rates{0.015, 0.015, 5e-4, 100.0};
    std::array<int, 3> initial{1, 0, 0};        // (cavity1, mech, cavity2) occupations
    std::array<int, 3> dims{2, 2, 2};           // Fock truncation per mode
    std::array<double, 2> window{-2.0, 8.0};    // integration span
    double tolerance = 1e-9;                    // relative solver tolerance
    int grid_points = kDefaultGridPoints;
    bool parallel = true;
    double truncation_threshold = kDefaultTruncationThreshold;
    int max_mech_dim = 48;                      // mechanical cutoff escalation cap
    SweepRanges sweep;
};

// Ordered list of (scenario name, one-line description).
const std::vector<std::pair<std::string, std::string>>& scenario_catalog();

// Family defaults for the named scenario (throws ConfigError on an unknown
// name).  Dissipative scenarios start the transfer window at t = 0 and use a
// 10-level mechanical cutoff with a relaxed density-matrix tolerance.
ScenarioConfig make_default_config(const std::string& scenario);

// Overlays a strict-keyed JSON document onto a config.  Unknown or mistyped
// keys raise ConfigError.  When ignore_scenario_key is true a "scenario"
// entry in the JSON is skipped (the CLI flag takes precedence).
void apply_json(ScenarioConfig& cfg, const Json& j, bool ignore_scenario_key = false);

// Range/consistency validation; throws ConfigError with the offending key.
void validate_config(const ScenarioConfig& cfg);

// Canonical JSON form of a resolved config (sorted keys, deterministic dump).
Json config_to_json(const ScenarioConfig& cfg);

// FNV-1a 64-bit hash of the canonical config dump, as 16 hex digits.
std::string config_hash(const ScenarioConfig& cfg);

// Applies one `path.to.key=value` override to a raw JSON document.  The value
// is parsed as JSON when possible and treated as a bare string otherwise.
// Paths address object keys only; arrays are replaced wholesale.
void apply_override(Json& j, const std::string& key_equals_value);

// Swept-table output: one row per point, sorted by the swept value(s).
struct SweepTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ScenarioResult {
    ScenarioConfig config;
    std::vector<double> times;               // empty for sweep scenarios
    PopulationSeries pops;                   // empty for sweep scenarios
    std::optional<TimeSeries> fidelity;      // dissipative runs
    std::optional<TimeSeries> overlap;       // dark-mode overlap where defined
    std::optional<SweepTable> sweep;         // sweep scenarios
    Json summary;                            // full summary.json payload
};

ScenarioResult run_adiabatic(const ScenarioConfig& cfg);
ScenarioResult run_tqd_mode_matrix(const ScenarioConfig& cfg);
ScenarioResult run_tqd_detuned(const ScenarioConfig& cfg);
ScenarioResult run_beam_splitter(const ScenarioConfig& cfg);
ScenarioResult run_dissipative(const ScenarioConfig& cfg);
ScenarioResult sweep_detuning(const ScenarioConfig& cfg);
ScenarioResult sweep_interval(const ScenarioConfig& cfg);
ScenarioResult sweep_thermal(const ScenarioConfig& cfg);

// Validates and dispatches on cfg.scenario.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

// Writes populations.csv (time-resolved runs), sweep.csv (sweeps) and
// summary.json into `dir`, creating it if needed.  Identical configs produce
// byte-identical files.
void write_outputs(const ScenarioResult& result, const std::filesystem::path& dir);

// Shortest round-trip decimal form of v with 12 significant digits.
std::string format_double(double v);

// Entry point behind the `simulate` binary; returns the process exit code
// (0 success, 2 configuration error, 3 solver failure, 4 truncation alarm).
int cli_main(int argc, const char* const* argv);

} // namespace tqdsim
