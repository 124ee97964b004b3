#include "tqdsim/pulses.hpp"

#include <string>

namespace tqdsim {

CouplingSchedule adiabatic_pulses(double tau) {
    CouplingSchedule s;
    s.pulse1 = GaussianPulse{3.0, 2.4 - tau, 1.0};
    s.pulse2 = GaussianPulse{-3.0, 2.4, 1.0};
    return s;
}

void validate_schedule(const CouplingSchedule& s, double t0, double t1, int samples) {
    if (!(t1 > t0)) {
        throw ConfigError("schedule window must satisfy t0 < t1");
    }
    if (samples < 2) {
        throw ConfigError("schedule validation needs at least 2 samples");
    }
    for (int i = 0; i < samples; ++i) {
        const double t = t0 + (t1 - t0) * static_cast<double>(i) / (samples - 1);
        if (!(s.g0(t) >= kDegenerateCoupling)) {
            throw ConfigError("coupling schedule is degenerate (g0 < 1e-14) at t = " +
                              std::to_string(t) + "; shrink the window or raise the pulses");
        }
    }
}

namespace {

void check_degenerate(const CouplingSchedule& s, double t) {
    if (!(s.g0(t) >= kDegenerateCoupling)) {
        throw SolverError("degenerate mixing angle: g0 < 1e-14", t);
    }
}

} // namespace

double mixing_angle(const CouplingSchedule& s, double t) {
    check_degenerate(s, t);
    return std::atan2(s.g1(t), -s.g2(t));
}

double mixing_angle_rate(const CouplingSchedule& s, double t) {
    check_degenerate(s, t);
    return counterdiabatic_G_unchecked(s, t);
}

double counterdiabatic_G(const CouplingSchedule& s, double t) {
    return mixing_angle_rate(s, t);
}

double counterdiabatic_G_unchecked(const CouplingSchedule& s, double t) {
    const double g1 = s.g1(t);
    const double g2 = s.g2(t);
    const double denom = g1 * g1 + g2 * g2;
    if (denom == 0.0) {
        return 0.0; // limit far outside the pulse support
    }
    return (g1 * s.dg2(t) - s.dg1(t) * g2) / denom;
}

GaussianPulse fitted_gprime(double tau, double alpha) {
    if (!(tau < 0.0)) {
        throw ConfigError("fitted counterdiabatic pulse requires tau < 0; got tau = " +
                          std::to_string(tau));
    }
    if (!(alpha > 0.0)) {
        throw ConfigError("fitted counterdiabatic pulse requires alpha > 0; got alpha = " +
                          std::to_string(alpha));
    }
    return GaussianPulse{-tau, 2.4 - tau / 2.0, alpha};
}

CouplingSchedule physical_couplings(double delta_prime, const GaussianPulse& gprime) {
    if (!(delta_prime > 0.0)) {
        throw ConfigError("physical couplings require delta_prime > 0; got " +
                          std::to_string(delta_prime));
    }
    if (!(gprime.amplitude > 0.0) || !(gprime.width > 0.0)) {
        throw ConfigError("physical couplings require a positive-amplitude, "
                          "positive-width counterdiabatic pulse");
    }
    // With G1 = G2 = sqrt(delta' A) exp(-(w/2)(t-c)^2) the product identity
    // G1 G2 / delta' = A exp(-w (t-c)^2) holds exactly.
    const GaussianPulse g{std::sqrt(delta_prime * gprime.amplitude), gprime.center,
                          gprime.width / 2.0};
    return CouplingSchedule{g, g};
}

} // namespace tqdsim
