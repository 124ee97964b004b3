#include "tqdsim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <future>
#include <numeric>
#include <sstream>

namespace tqdsim {

// ---------------------------------------------------------------------------
// Catalog and defaults
// ---------------------------------------------------------------------------

const std::vector<std::pair<std::string, std::string>>& scenario_catalog() {
    static const std::vector<std::pair<std::string, std::string>> catalog{
        {"adiabatic", "resonant red-sideband transfer riding the instantaneous dark mode"},
        {"tqd-mode-matrix", "counterdiabatic 3x3 generator alone (exact dark-mode following)"},
        {"tqd-detuned", "physical counterdiabatic transfer via detuned cavities"},
        {"beam-splitter", "adiabatically eliminated direct cavity-cavity swap model"},
        {"dissipative", "detuned transfer with cavity decay and a thermal mechanical bath"},
        {"sweep-detuning", "max mechanical excitation versus cavity detuning"},
        {"sweep-interval", "transfer robustness versus pulse-interval shift"},
        {"sweep-thermal", "max transfer fidelity versus initial phonons and bath occupancy"},
    };
    return catalog;
}

namespace {

bool is_known_scenario(const std::string& name) {
    for (const auto& [n, d] : scenario_catalog()) {
        if (n == name) return true;
    }
    return false;
}

bool is_dissipative_family(const std::string& name) {
    return name == "dissipative" || name == "sweep-thermal";
}

std::string known_scenario_names() {
    std::string names;
    for (const auto& [n, d] : scenario_catalog()) {
        if (!names.empty()) names += ", ";
        names += n;
    }
    return names;
}

} // namespace

ScenarioConfig make_default_config(const std::string& scenario) {
    if (!is_known_scenario(scenario)) {
        throw ConfigError("unknown scenario '" + scenario + "'; expected one of: " +
                          known_scenario_names());
    }
    ScenarioConfig cfg;
    cfg.scenario = scenario;
    cfg.sweep.delta_prime = {30.0, 45.0, 60.0, 90.0, 120.0};
    cfg.sweep.interval = {-0.46, 0.0, 0.46};
    cfg.sweep.n_b = {0, 1, 2, 3};
    cfg.sweep.n_th = {0.0, 50.0, 100.0, 200.0, 400.0};
    if (is_dissipative_family(scenario)) {
        // The lossy transfer is timed from t = 0 (the fidelity window starts
        // at the beginning of the pulse overlap) and needs a mechanical
        // cutoff able to hold thermal excitation.
        cfg.dims = {2, 10, 2};
        cfg.window = {0.0, 8.0};
        cfg.tolerance = 1e-8;
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// JSON <-> config
// ---------------------------------------------------------------------------

namespace {

double as_number(const Json& v, const std::string& where) {
    if (!v.is_number()) {
        throw ConfigError("'" + where + "' must be a number");
    }
    return v.get<double>();
}

int as_int(const Json& v, const std::string& where) {
    if (!v.is_number_integer()) {
        throw ConfigError("'" + where + "' must be an integer");
    }
    return v.get<int>();
}

bool as_bool(const Json& v, const std::string& where) {
    if (!v.is_boolean()) {
        throw ConfigError("'" + where + "' must be a boolean");
    }
    return v.get<bool>();
}

std::string as_string(const Json& v, const std::string& where) {
    if (!v.is_string()) {
        throw ConfigError("'" + where + "' must be a string");
    }
    return v.get<std::string>();
}

void check_keys(const Json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) {
            if (key == a) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) +
                              "'");
        }
    }
}

void apply_rates(DissipationRates& rates, const Json& j) {
    if (!j.is_object()) {
        throw ConfigError("'rates' must be an object");
    }
    check_keys(j, "rates", {"kappa1", "kappa2", "gamma_m", "n_th"});
    if (j.contains("kappa1")) rates.kappa1 = as_number(j["kappa1"], "rates.kappa1");
    if (j.contains("kappa2")) rates.kappa2 = as_number(j["kappa2"], "rates.kappa2");
    if (j.contains("gamma_m")) rates.gamma_m = as_number(j["gamma_m"], "rates.gamma_m");
    if (j.contains("n_th")) rates.n_th = as_number(j["n_th"], "rates.n_th");
}

void apply_initial(std::array<int, 3>& initial, const Json& j) {
    if (!j.is_object()) {
        throw ConfigError("'initial' must be an object with keys cavity1, mech, cavity2");
    }
    check_keys(j, "initial", {"cavity1", "mech", "cavity2"});
    if (j.contains("cavity1")) initial[kCavity1] = as_int(j["cavity1"], "initial.cavity1");
    if (j.contains("mech")) initial[kMech] = as_int(j["mech"], "initial.mech");
    if (j.contains("cavity2")) initial[kCavity2] = as_int(j["cavity2"], "initial.cavity2");
}

template <class T, std::size_t N>
void apply_fixed_array(std::array<T, N>& out, const Json& j, const std::string& where,
                       bool integer) {
    if (!j.is_array() || j.size() != N) {
        throw ConfigError("'" + where + "' must be an array of " + std::to_string(N) +
                          " entries");
    }
    for (std::size_t i = 0; i < N; ++i) {
        const std::string slot = where + "[" + std::to_string(i) + "]";
        out[i] = integer ? static_cast<T>(as_int(j[i], slot))
                         : static_cast<T>(as_number(j[i], slot));
    }
}

std::vector<double> as_number_list(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError("'" + where + "' must be a non-empty array of numbers");
    }
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(as_number(j[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

std::vector<int> as_int_list(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError("'" + where + "' must be a non-empty array of integers");
    }
    std::vector<int> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(as_int(j[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

void apply_sweep(SweepRanges& sweep, const Json& j) {
    if (!j.is_object()) {
        throw ConfigError("'sweep' must be an object");
    }
    check_keys(j, "sweep", {"delta_prime", "interval", "n_b", "n_th"});
    if (j.contains("delta_prime")) sweep.delta_prime = as_number_list(j["delta_prime"], "sweep.delta_prime");
    if (j.contains("interval")) sweep.interval = as_number_list(j["interval"], "sweep.interval");
    if (j.contains("n_b")) sweep.n_b = as_int_list(j["n_b"], "sweep.n_b");
    if (j.contains("n_th")) sweep.n_th = as_number_list(j["n_th"], "sweep.n_th");
}

} // namespace

void apply_json(ScenarioConfig& cfg, const Json& j, bool ignore_scenario_key) {
    if (!j.is_object()) {
        throw ConfigError("config document must be a JSON object");
    }
    check_keys(j, "",
               {"scenario", "tau", "alpha", "delta_prime", "rates", "initial", "dims", "window",
                "tolerance", "grid_points", "parallel", "truncation_threshold", "max_mech_dim",
                "sweep"});
    if (j.contains("scenario") && !ignore_scenario_key) {
        const std::string name = as_string(j["scenario"], "scenario");
        if (name != cfg.scenario) {
            throw ConfigError("config names scenario '" + name + "' but defaults were built for '" +
                              cfg.scenario + "'");
        }
    }
    if (j.contains("tau")) cfg.tau = as_number(j["tau"], "tau");
    if (j.contains("alpha")) cfg.alpha = as_number(j["alpha"], "alpha");
    if (j.contains("delta_prime")) cfg.delta_prime = as_number(j["delta_prime"], "delta_prime");
    if (j.contains("rates")) apply_rates(cfg.rates, j["rates"]);
    if (j.contains("initial")) apply_initial(cfg.initial, j["initial"]);
    if (j.contains("dims")) apply_fixed_array(cfg.dims, j["dims"], "dims", true);
    if (j.contains("window")) apply_fixed_array(cfg.window, j["window"], "window", false);
    if (j.contains("tolerance")) cfg.tolerance = as_number(j["tolerance"], "tolerance");
    if (j.contains("grid_points")) cfg.grid_points = as_int(j["grid_points"], "grid_points");
    if (j.contains("parallel")) cfg.parallel = as_bool(j["parallel"], "parallel");
    if (j.contains("truncation_threshold")) {
        cfg.truncation_threshold = as_number(j["truncation_threshold"], "truncation_threshold");
    }
    if (j.contains("max_mech_dim")) cfg.max_mech_dim = as_int(j["max_mech_dim"], "max_mech_dim");
    if (j.contains("sweep")) apply_sweep(cfg.sweep, j["sweep"]);
}

void validate_config(const ScenarioConfig& cfg) {
    if (!is_known_scenario(cfg.scenario)) {
        throw ConfigError("unknown scenario '" + cfg.scenario + "'; expected one of: " +
                          known_scenario_names());
    }
    if (!std::isfinite(cfg.tau)) throw ConfigError("'tau' must be finite");
    if (!std::isfinite(cfg.alpha) || cfg.alpha <= 0.0) {
        throw ConfigError("'alpha' must be a positive number");
    }
    if (!std::isfinite(cfg.delta_prime) || cfg.delta_prime <= 0.0) {
        throw ConfigError("'delta_prime' must be a positive number");
    }
    validate_rates(cfg.rates);
    for (int m = 0; m < kNumModes; ++m) {
        if (cfg.dims[m] < 2) {
            throw ConfigError("'dims' entries must be at least 2");
        }
        if (cfg.initial[m] < 0 || cfg.initial[m] >= cfg.dims[m]) {
            throw ConfigError("'initial' occupation " + std::to_string(cfg.initial[m]) +
                              " of mode " + std::to_string(m) +
                              " lies outside the truncation dimension " +
                              std::to_string(cfg.dims[m]));
        }
    }
    if (!std::isfinite(cfg.window[0]) || !std::isfinite(cfg.window[1]) ||
        !(cfg.window[0] < cfg.window[1])) {
        throw ConfigError("'window' must be [t0, t1] with t0 < t1");
    }
    if (!(cfg.tolerance > 0.0) || !(cfg.tolerance <= 1.0)) {
        throw ConfigError("'tolerance' must lie in (0, 1]");
    }
    if (cfg.grid_points < 2) {
        throw ConfigError("'grid_points' must be at least 2");
    }
    if (!(cfg.truncation_threshold > 0.0)) {
        throw ConfigError("'truncation_threshold' must be positive");
    }
    if (cfg.max_mech_dim < cfg.dims[kMech]) {
        throw ConfigError("'max_mech_dim' must be at least the mechanical dimension");
    }
    for (double v : cfg.sweep.delta_prime) {
        if (!std::isfinite(v) || v <= 0.0) {
            throw ConfigError("'sweep.delta_prime' values must be positive");
        }
    }
    for (double v : cfg.sweep.interval) {
        if (!std::isfinite(v)) throw ConfigError("'sweep.interval' values must be finite");
    }
    for (int v : cfg.sweep.n_b) {
        if (v < 0) throw ConfigError("'sweep.n_b' values must be non-negative");
    }
    for (double v : cfg.sweep.n_th) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ConfigError("'sweep.n_th' values must be non-negative");
        }
    }
    if (cfg.sweep.delta_prime.empty() || cfg.sweep.interval.empty() || cfg.sweep.n_b.empty() ||
        cfg.sweep.n_th.empty()) {
        throw ConfigError("sweep ranges must not be empty");
    }
}

Json config_to_json(const ScenarioConfig& cfg) {
    Json j;
    j["scenario"] = cfg.scenario;
    j["tau"] = cfg.tau;
    j["alpha"] = cfg.alpha;
    j["delta_prime"] = cfg.delta_prime;
    j["rates"] = {{"kappa1", cfg.rates.kappa1},
                  {"kappa2", cfg.rates.kappa2},
                  {"gamma_m", cfg.rates.gamma_m},
                  {"n_th", cfg.rates.n_th}};
    j["initial"] = {{"cavity1", cfg.initial[kCavity1]},
                    {"mech", cfg.initial[kMech]},
                    {"cavity2", cfg.initial[kCavity2]}};
    j["dims"] = cfg.dims;
    j["window"] = cfg.window;
    j["tolerance"] = cfg.tolerance;
    j["grid_points"] = cfg.grid_points;
    j["parallel"] = cfg.parallel;
    j["truncation_threshold"] = cfg.truncation_threshold;
    j["max_mech_dim"] = cfg.max_mech_dim;
    j["sweep"] = {{"delta_prime", cfg.sweep.delta_prime},
                  {"interval", cfg.sweep.interval},
                  {"n_b", cfg.sweep.n_b},
                  {"n_th", cfg.sweep.n_th}};
    return j;
}

namespace {

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace

std::string config_hash(const ScenarioConfig& cfg) {
    const std::uint64_t h = fnv1a64(config_to_json(cfg).dump());
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 0; i < 16; ++i) {
        buf[15 - i] = hex[(h >> (4 * i)) & 0xF];
    }
    buf[16] = '\0';
    return std::string(buf);
}

void apply_override(Json& j, const std::string& key_equals_value) {
    const auto eq = key_equals_value.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("--set expects key=value; got '" + key_equals_value + "'");
    }
    const std::string path = key_equals_value.substr(0, eq);
    const std::string value_str = key_equals_value.substr(eq + 1);

    Json value;
    try {
        value = Json::parse(value_str);
    } catch (const Json::exception&) {
        value = value_str; // bare strings are allowed unquoted
    }

    std::vector<std::string> tokens;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        tokens.push_back(path.substr(start, dot == std::string::npos ? dot : dot - start));
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    for (const auto& tok : tokens) {
        if (tok.empty()) {
            throw ConfigError("--set path '" + path + "' contains an empty segment");
        }
    }

    Json* cur = &j;
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        if (!cur->is_object() && !cur->is_null()) {
            throw ConfigError("--set path '" + path + "' descends into a non-object; "
                              "arrays must be replaced wholesale, e.g. --set window=[0,8]");
        }
        cur = &((*cur)[tokens[i]]);
    }
    if (cur->is_array()) {
        throw ConfigError("--set path '" + path + "' descends into a non-object; "
                          "arrays must be replaced wholesale, e.g. --set window=[0,8]");
    }
    (*cur)[tokens.back()] = value;
}

// ---------------------------------------------------------------------------
// Formatting and output files
// ---------------------------------------------------------------------------

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

namespace {

std::string csv_row(const std::vector<double>& values) {
    std::string row;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) row += ',';
        row += format_double(values[i]);
    }
    row += '\n';
    return row;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot open output file '" + path.string() + "' for writing");
    }
    out << content;
    if (!out) {
        throw ConfigError("failed while writing '" + path.string() + "'");
    }
}

Json diagnostics_json(const Diagnostics& d) {
    Json j;
    j["steps_accepted"] = d.steps_accepted;
    j["steps_rejected"] = d.steps_rejected;
    j["rhs_evaluations"] = d.rhs_evaluations;
    j["rel_tol"] = d.rel_tol;
    j["norm_drift"] = d.norm_drift;
    j["hermiticity_defect"] = d.hermiticity_defect;
    j["min_eigenvalue"] = d.min_eigenvalue;
    j["positivity_violation"] = d.positivity_violation;
    j["mech_dim"] = d.mech_dim;
    j["truncation_retries"] = d.truncation_retries;
    return j;
}

Json base_summary(const ScenarioConfig& cfg) {
    Json j;
    j["scenario"] = cfg.scenario;
    j["config"] = config_to_json(cfg);
    j["config_hash"] = config_hash(cfg);
    return j;
}

bool single_excitation_initial(const ScenarioConfig& cfg) {
    return cfg.initial[0] + cfg.initial[1] + cfg.initial[2] == 1;
}

// Mean of the series over the trailing 10% of the window.
double stabilized_mean(const TimeSeries& series, const std::array<double, 2>& window) {
    const double cutoff = window[1] - 0.1 * (window[1] - window[0]);
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < series.times.size(); ++i) {
        if (series.times[i] >= cutoff) {
            sum += series.values[i];
            ++count;
        }
    }
    if (count == 0) {
        throw ConfigError("output grid too coarse to compute a stabilized population");
    }
    return sum / count;
}

template <class Fn>
auto parallel_map(std::size_t n, bool parallel, Fn&& fn)
    -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<R> out(n);
    if (!parallel || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = fn(i);
        }
        return out;
    }
    std::vector<std::future<R>> futures;
    futures.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        futures.push_back(std::async(std::launch::async, [i, &fn] { return fn(i); }));
    }
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = futures[i].get();
    }
    return out;
}

// Cached operator structure for H(t) = diag + g1(t) X1 + g2(t) X2.
struct CoupledModel {
    CouplingSchedule schedule;
    Matrix static_part;
    Matrix x1;
    Matrix x2;

    OperatorFn h_fn() const {
        return [sp = static_part, x1m = x1, x2m = x2, s = schedule](double t, Matrix& h) {
            h = sp;
            h += s.g1(t) * x1m;
            h += s.g2(t) * x2m;
        };
    }
};

CoupledModel make_rwa_model(const FockSpace& space, const CouplingSchedule& s,
                            const std::array<double, 2>& deltas) {
    Matrix static_part = deltas[0] * number_op(space, kCavity1);
    static_part += deltas[1] * number_op(space, kCavity2);
    return CoupledModel{s, std::move(static_part), exchange(space, kCavity1, kMech),
                        exchange(space, kCavity2, kMech)};
}

CoupledModel make_detuned_model(const FockSpace& space, const CouplingSchedule& couplings,
                                double delta_prime) {
    Matrix static_part = delta_prime * number_op(space, kCavity1);
    static_part += delta_prime * number_op(space, kCavity2);
    return CoupledModel{couplings, std::move(static_part), exchange(space, kCavity1, kMech),
                        exchange(space, kCavity2, kMech)};
}

CouplingSchedule detuned_schedule(const ScenarioConfig& cfg, double delta_prime) {
    return physical_couplings(delta_prime, fitted_gprime(cfg.tau, cfg.alpha));
}

Json populations_results(const PopulationSeries& pops) {
    Json j;
    j["final_population_cavity1"] = pops.cavity1.values.back();
    j["final_population_mech"] = pops.mech.values.back();
    j["final_population_cavity2"] = pops.cavity2.values.back();
    j["max_phonon"] = max_phonon(pops);
    return j;
}

void attach_overlap(ScenarioResult& result, const TimeSeries& overlap) {
    result.overlap = overlap;
    const double min_overlap = *std::min_element(overlap.values.begin(), overlap.values.end());
    result.summary["results"]["min_dark_mode_overlap"] = min_overlap;
    result.summary["results"]["final_dark_mode_overlap"] = overlap.values.back();
}

} // namespace

// ---------------------------------------------------------------------------
// Scenario runners
// ---------------------------------------------------------------------------

ScenarioResult run_adiabatic(const ScenarioConfig& cfg) {
    const CouplingSchedule s = adiabatic_pulses(cfg.tau);
    validate_schedule(s, cfg.window[0], cfg.window[1]);
    const FockSpace space = make_space(cfg.dims);
    const CoupledModel model = make_rwa_model(space, s, {0.0, 0.0});
    const Vector psi0 = basis_state(space, cfg.initial);

    const StateTrajectory traj =
        evolve_state(model.h_fn(), psi0, cfg.window, cfg.tolerance, cfg.grid_points);

    ScenarioResult result;
    result.config = cfg;
    result.times = traj.times;
    result.pops = populations(traj, space);
    result.summary = base_summary(cfg);
    result.summary["results"] = populations_results(result.pops);
    result.summary["diagnostics"] = diagnostics_json(traj.diagnostics);
    if (single_excitation_initial(cfg)) {
        attach_overlap(result, dark_mode_overlap(traj, space, s));
    }
    return result;
}

ScenarioResult run_tqd_mode_matrix(const ScenarioConfig& cfg) {
    if (!single_excitation_initial(cfg)) {
        throw ConfigError("tqd-mode-matrix runs in the single-excitation picture; "
                          "'initial' must contain exactly one excitation");
    }
    const CouplingSchedule s = adiabatic_pulses(cfg.tau);
    validate_schedule(s, cfg.window[0], cfg.window[1]);

    Eigen::Vector3cd v0 = Eigen::Vector3cd::Zero();
    for (int m = 0; m < kNumModes; ++m) {
        if (cfg.initial[m] == 1) v0(m) = 1.0;
    }
    const ModeMatrixFn m_fn = [s](double t) { return mode_matrix_tqd(s, t).m; };
    const ModeTrajectory traj =
        evolve_mode_vector(m_fn, v0, cfg.window, cfg.tolerance, cfg.grid_points);

    ScenarioResult result;
    result.config = cfg;
    result.times = traj.times;
    result.pops = populations(traj);
    result.summary = base_summary(cfg);
    result.summary["results"] = populations_results(result.pops);
    result.summary["diagnostics"] = diagnostics_json(traj.diagnostics);
    attach_overlap(result, dark_mode_overlap(traj, s));
    return result;
}

ScenarioResult run_tqd_detuned(const ScenarioConfig& cfg) {
    const CouplingSchedule couplings = detuned_schedule(cfg, cfg.delta_prime);
    validate_schedule(couplings, cfg.window[0], cfg.window[1]);
    const FockSpace space = make_space(cfg.dims);
    const CoupledModel model = make_detuned_model(space, couplings, cfg.delta_prime);
    const Vector psi0 = basis_state(space, cfg.initial);

    const StateTrajectory traj =
        evolve_state(model.h_fn(), psi0, cfg.window, cfg.tolerance, cfg.grid_points);

    ScenarioResult result;
    result.config = cfg;
    result.times = traj.times;
    result.pops = populations(traj, space);
    result.summary = base_summary(cfg);
    result.summary["results"] = populations_results(result.pops);
    result.summary["diagnostics"] = diagnostics_json(traj.diagnostics);
    return result;
}

ScenarioResult run_beam_splitter(const ScenarioConfig& cfg) {
    const CouplingSchedule couplings = detuned_schedule(cfg, cfg.delta_prime);
    const FockSpace space = make_space(cfg.dims);

    // H(t) = (d' + W1) n1 + (d' + W2) n2 + W(t) (a1^dag a2 + h.c.);
    // the Stark shifts and swap rate carry all time dependence.
    const Matrix n1 = number_op(space, kCavity1);
    const Matrix n2 = number_op(space, kCavity2);
    const Matrix xc = exchange(space, kCavity1, kCavity2);
    const double dp = cfg.delta_prime;
    const OperatorFn h_fn = [n1, n2, xc, couplings, dp](double t, Matrix& h) {
        const auto shifts = cavity_shifts(couplings, dp, t);
        h = (dp + shifts[0]) * n1;
        h += (dp + shifts[1]) * n2;
        h += beam_splitter_rate(couplings, dp, t) * xc;
    };
    const Vector psi0 = basis_state(space, cfg.initial);

    const StateTrajectory traj =
        evolve_state(h_fn, psi0, cfg.window, cfg.tolerance, cfg.grid_points);

    ScenarioResult result;
    result.config = cfg;
    result.times = traj.times;
    result.pops = populations(traj, space);
    result.summary = base_summary(cfg);
    result.summary["results"] = populations_results(result.pops);
    result.summary["diagnostics"] = diagnostics_json(traj.diagnostics);
    return result;
}

// ---------------------------------------------------------------------------
// Dissipative core (with mechanical-cutoff escalation)
// ---------------------------------------------------------------------------

namespace {

int next_mech_dim(int current) {
    return std::max(current + 1, static_cast<int>(std::ceil(current * 1.5)));
}

struct DissipativeCell {
    double max_fidelity = 0.0;
    double t_at_max = 0.0;
    double final_fidelity = 0.0;
    Diagnostics diagnostics;
};

// Runs the lossy detuned transfer for one (n_b, n_th) cell, escalating the
// mechanical cutoff by 1.5x (capped at cfg.max_mech_dim) whenever the
// truncation alarm fires.  `observe` receives (space, trajectory) of the
// successful attempt when trajectory storage is requested.
template <class Attempt>
auto with_mech_escalation(const ScenarioConfig& cfg, int n_b, Attempt&& attempt) {
    int mech_dim = std::max(cfg.dims[kMech], n_b + 2);
    if (mech_dim > cfg.max_mech_dim) {
        throw ConfigError("initial mechanical occupation " + std::to_string(n_b) +
                          " does not fit below max_mech_dim " + std::to_string(cfg.max_mech_dim));
    }
    int retries = 0;
    for (;;) {
        try {
            return attempt(mech_dim, retries);
        } catch (const TruncationError&) {
            if (mech_dim >= cfg.max_mech_dim) {
                throw;
            }
            mech_dim = std::min(cfg.max_mech_dim, next_mech_dim(mech_dim));
            ++retries;
        }
    }
}

DissipativeCell dissipative_cell(const ScenarioConfig& cfg, int n_b, double n_th) {
    return with_mech_escalation(cfg, n_b, [&](int mech_dim, int retries) {
        const FockSpace space = make_space({cfg.dims[0], mech_dim, cfg.dims[2]});
        const CouplingSchedule couplings = detuned_schedule(cfg, cfg.delta_prime);
        const CoupledModel model = make_detuned_model(space, couplings, cfg.delta_prime);
        const Vector psi0 = basis_state(space, {cfg.initial[kCavity1], n_b, cfg.initial[kCavity2]});
        const Matrix rho0 = psi0 * psi0.adjoint();
        DissipationRates rates = cfg.rates;
        rates.n_th = n_th;

        const DensityTrajectory traj =
            evolve_lindblad(space, model.h_fn(), rho0, rates, cfg.window, cfg.tolerance,
                            cfg.grid_points, cfg.truncation_threshold);

        const TimeSeries fid = fidelity_series(traj, space);
        DissipativeCell cell;
        const auto it = std::max_element(fid.values.begin(), fid.values.end());
        cell.max_fidelity = *it;
        cell.t_at_max = fid.times[static_cast<std::size_t>(it - fid.values.begin())];
        cell.final_fidelity = fid.values.back();
        cell.diagnostics = traj.diagnostics;
        cell.diagnostics.truncation_retries = retries;
        return cell;
    });
}

struct DissipativeRun {
    DensityTrajectory traj;
    FockSpace space;
    int retries = 0;
};

DissipativeRun dissipative_full_run(const ScenarioConfig& cfg) {
    return with_mech_escalation(cfg, cfg.initial[kMech], [&](int mech_dim, int retries) {
        const FockSpace space = make_space({cfg.dims[0], mech_dim, cfg.dims[2]});
        const CouplingSchedule couplings = detuned_schedule(cfg, cfg.delta_prime);
        const CoupledModel model = make_detuned_model(space, couplings, cfg.delta_prime);
        const Vector psi0 =
            basis_state(space, {cfg.initial[kCavity1], cfg.initial[kMech], cfg.initial[kCavity2]});
        const Matrix rho0 = psi0 * psi0.adjoint();

        DensityTrajectory traj =
            evolve_lindblad(space, model.h_fn(), rho0, cfg.rates, cfg.window, cfg.tolerance,
                            cfg.grid_points, cfg.truncation_threshold);
        traj.diagnostics.truncation_retries = retries;
        return DissipativeRun{std::move(traj), space, retries};
    });
}

} // namespace

ScenarioResult run_dissipative(const ScenarioConfig& cfg) {
    DissipativeRun run = dissipative_full_run(cfg);

    ScenarioResult result;
    result.config = cfg;
    result.times = run.traj.times;
    result.pops = populations(run.traj, run.space);
    const TimeSeries fid = fidelity_series(run.traj, run.space);
    result.fidelity = fid;

    const auto it = std::max_element(fid.values.begin(), fid.values.end());
    result.summary = base_summary(cfg);
    result.summary["results"] = populations_results(result.pops);
    result.summary["results"]["max_fidelity"] = *it;
    result.summary["results"]["t_at_max_fidelity"] =
        fid.times[static_cast<std::size_t>(it - fid.values.begin())];
    result.summary["results"]["final_fidelity"] = fid.values.back();
    result.summary["diagnostics"] = diagnostics_json(run.traj.diagnostics);
    return result;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

ScenarioResult sweep_detuning(const ScenarioConfig& cfg) {
    std::vector<double> values = cfg.sweep.delta_prime;
    std::sort(values.begin(), values.end());

    struct Point {
        double max_phonon = 0.0;
        double final_population = 0.0;
        Diagnostics diagnostics;
    };
    const auto points = parallel_map(values.size(), cfg.parallel, [&](std::size_t i) {
        ScenarioConfig point_cfg = cfg;
        point_cfg.delta_prime = values[i];
        const CouplingSchedule couplings = detuned_schedule(point_cfg, values[i]);
        validate_schedule(couplings, cfg.window[0], cfg.window[1]);
        const FockSpace space = make_space(cfg.dims);
        const CoupledModel model = make_detuned_model(space, couplings, values[i]);
        const Vector psi0 = basis_state(space, cfg.initial);
        const StateTrajectory traj =
            evolve_state(model.h_fn(), psi0, cfg.window, cfg.tolerance, cfg.grid_points);
        const PopulationSeries pops = populations(traj, space);
        return Point{max_phonon(pops), pops.cavity2.values.back(), traj.diagnostics};
    });

    ScenarioResult result;
    result.config = cfg;
    result.summary = base_summary(cfg);
    SweepTable table;
    table.columns = {"delta_prime", "max_phonon"};
    Json rows = Json::array();
    for (std::size_t i = 0; i < values.size(); ++i) {
        table.rows.push_back({values[i], points[i].max_phonon});
        Json row;
        row["delta_prime"] = values[i];
        row["max_phonon"] = points[i].max_phonon;
        row["final_population_cavity2"] = points[i].final_population;
        row["diagnostics"] = diagnostics_json(points[i].diagnostics);
        rows.push_back(row);
    }
    result.sweep = std::move(table);
    result.summary["results"]["rows"] = std::move(rows);
    return result;
}

ScenarioResult sweep_interval(const ScenarioConfig& cfg) {
    std::vector<double> values = cfg.sweep.interval;
    std::sort(values.begin(), values.end());

    struct Point {
        double stabilized = 0.0;
        double final_population = 0.0;
        Diagnostics diagnostics;
    };
    const auto points = parallel_map(values.size(), cfg.parallel, [&](std::size_t i) {
        // A positive shift makes the first coupling pulse start earlier.
        CouplingSchedule couplings = detuned_schedule(cfg, cfg.delta_prime);
        couplings.pulse1.center -= values[i];
        validate_schedule(couplings, cfg.window[0], cfg.window[1]);
        const FockSpace space = make_space(cfg.dims);
        const CoupledModel model = make_detuned_model(space, couplings, cfg.delta_prime);
        const Vector psi0 = basis_state(space, cfg.initial);
        const StateTrajectory traj =
            evolve_state(model.h_fn(), psi0, cfg.window, cfg.tolerance, cfg.grid_points);
        const PopulationSeries pops = populations(traj, space);
        return Point{stabilized_mean(pops.cavity2, cfg.window), pops.cavity2.values.back(),
                     traj.diagnostics};
    });

    ScenarioResult result;
    result.config = cfg;
    result.summary = base_summary(cfg);
    SweepTable table;
    table.columns = {"interval", "stabilized_population"};
    Json rows = Json::array();
    for (std::size_t i = 0; i < values.size(); ++i) {
        table.rows.push_back({values[i], points[i].stabilized});
        Json row;
        row["interval"] = values[i];
        row["stabilized_population"] = points[i].stabilized;
        row["final_population_cavity2"] = points[i].final_population;
        row["diagnostics"] = diagnostics_json(points[i].diagnostics);
        rows.push_back(row);
    }
    result.sweep = std::move(table);
    result.summary["results"]["rows"] = std::move(rows);
    return result;
}

ScenarioResult sweep_thermal(const ScenarioConfig& cfg) {
    std::vector<int> nb_values = cfg.sweep.n_b;
    std::sort(nb_values.begin(), nb_values.end());
    std::vector<double> nth_values = cfg.sweep.n_th;
    std::sort(nth_values.begin(), nth_values.end());

    struct CellParams {
        int n_b;
        double n_th;
    };
    std::vector<CellParams> cells;
    for (int nb : nb_values) {
        for (double nth : nth_values) {
            cells.push_back({nb, nth});
        }
    }

    const auto results = parallel_map(cells.size(), cfg.parallel, [&](std::size_t i) {
        return dissipative_cell(cfg, cells[i].n_b, cells[i].n_th);
    });

    ScenarioResult result;
    result.config = cfg;
    result.summary = base_summary(cfg);
    SweepTable table;
    table.columns = {"n_b", "n_th", "max_fidelity"};
    Json rows = Json::array();
    double best = 0.0, worst = 1.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        table.rows.push_back(
            {static_cast<double>(cells[i].n_b), cells[i].n_th, results[i].max_fidelity});
        best = std::max(best, results[i].max_fidelity);
        worst = std::min(worst, results[i].max_fidelity);
        Json row;
        row["n_b"] = cells[i].n_b;
        row["n_th"] = cells[i].n_th;
        row["max_fidelity"] = results[i].max_fidelity;
        row["t_at_max_fidelity"] = results[i].t_at_max;
        row["diagnostics"] = diagnostics_json(results[i].diagnostics);
        rows.push_back(row);
    }
    result.sweep = std::move(table);
    result.summary["results"]["rows"] = std::move(rows);
    result.summary["results"]["best_fidelity"] = best;
    result.summary["results"]["worst_fidelity"] = worst;
    result.summary["results"]["spread"] = best - worst;
    return result;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    validate_config(cfg);
    if (cfg.scenario == "adiabatic") return run_adiabatic(cfg);
    if (cfg.scenario == "tqd-mode-matrix") return run_tqd_mode_matrix(cfg);
    if (cfg.scenario == "tqd-detuned") return run_tqd_detuned(cfg);
    if (cfg.scenario == "beam-splitter") return run_beam_splitter(cfg);
    if (cfg.scenario == "dissipative") return run_dissipative(cfg);
    if (cfg.scenario == "sweep-detuning") return sweep_detuning(cfg);
    if (cfg.scenario == "sweep-interval") return sweep_interval(cfg);
    if (cfg.scenario == "sweep-thermal") return sweep_thermal(cfg);
    throw ConfigError("unknown scenario '" + cfg.scenario + "'");
}

void write_outputs(const ScenarioResult& result, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory '" + dir.string() + "': " +
                          ec.message());
    }

    if (!result.times.empty()) {
        std::string csv = "t,pop_cavity1,pop_mech,pop_cavity2";
        if (result.fidelity) csv += ",fidelity";
        csv += '\n';
        for (std::size_t i = 0; i < result.times.size(); ++i) {
            std::vector<double> row{result.times[i], result.pops.cavity1.values[i],
                                    result.pops.mech.values[i], result.pops.cavity2.values[i]};
            if (result.fidelity) row.push_back(result.fidelity->values[i]);
            csv += csv_row(row);
        }
        write_text_file(dir / "populations.csv", csv);
    }

    if (result.sweep) {
        std::string csv;
        for (std::size_t i = 0; i < result.sweep->columns.size(); ++i) {
            if (i > 0) csv += ',';
            csv += result.sweep->columns[i];
        }
        csv += '\n';
        for (const auto& row : result.sweep->rows) {
            csv += csv_row(row);
        }
        write_text_file(dir / "sweep.csv", csv);
    }

    write_text_file(dir / "summary.json", result.summary.dump(2) + "\n");
}

} // namespace tqdsim
