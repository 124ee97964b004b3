#pragma once

#include <stdexcept>
#include <string>

namespace tqdsim {

// Invalid user-facing input: bad scenario name, malformed config, parameter
// out of range, unknown key, dimension mismatch.  CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

// Numerical integration failure: step-size underflow, non-finite state,
// degenerate evaluation mid-run, violated solver postcondition.
// CLI exit code 3.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what_arg, double t)
        : std::runtime_error(what_arg + " (t = " + std::to_string(t) + ")"), time(t) {}
    double time;
};

// Mechanical Fock-space truncation alarm: the population of the highest
// retained mechanical level exceeded the configured threshold, so the
// truncated simulation is no longer trustworthy.  Rerun with a larger
// mechanical cutoff.  CLI exit code 4.
class TruncationError : public std::runtime_error {
public:
    TruncationError(const std::string& what_arg, double t, double top_population, int mech_dim)
        : std::runtime_error(what_arg),
          time(t),
          top_population(top_population),
          mech_dim(mech_dim) {}
    double time;
    double top_population;
    int mech_dim;
};

} // namespace tqdsim
