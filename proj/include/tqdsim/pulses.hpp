#pragma once

#include <cmath>

#include "tqdsim/errors.hpp"

namespace tqdsim {

// Gaussian pulse  A * exp(-w * (t - c)^2)  with amplitude A, center c and
// inverse-square width coefficient w > 0.
struct GaussianPulse {
    double amplitude = 0.0;
    double center = 0.0;
    double width = 1.0;

    double value(double t) const {
        const double dt = t - center;
        return amplitude * std::exp(-width * dt * dt);
    }

    // d/dt of value(t), analytic.
    double derivative(double t) const {
        const double dt = t - center;
        return -2.0 * width * dt * value(t);
    }
};

// Pair of time-dependent cavity-mechanical couplings g1(t), g2(t).
struct CouplingSchedule {
    GaussianPulse pulse1;
    GaussianPulse pulse2;

    double g1(double t) const { return pulse1.value(t); }
    double g2(double t) const { return pulse2.value(t); }
    double dg1(double t) const { return pulse1.derivative(t); }
    double dg2(double t) const { return pulse2.derivative(t); }

    // Root-sum-square coupling g0(t) = sqrt(g1^2 + g2^2).
    double g0(double t) const { return std::hypot(g1(t), g2(t)); }
};

// Below this root-sum-square coupling the mixing angle is numerically
// degenerate and guarded evaluators refuse to proceed.
inline constexpr double kDegenerateCoupling = 1e-14;

// Counter-intuitively ordered Gaussian coupling pair
//   g1(t) =  3 exp(-(t - 2.4 + tau)^2),   g2(t) = -3 exp(-(t - 2.4)^2);
// tau < 0 makes pulse 1 peak before pulse 2.
CouplingSchedule adiabatic_pulses(double tau);

// Throws ConfigError if g0 dips below kDegenerateCoupling anywhere on the
// sampled window [t0, t1].
void validate_schedule(const CouplingSchedule& s, double t0, double t1, int samples = 2001);

// Mixing angle theta(t) = atan2(g1, -g2) of the instantaneous dark mode
// [cos theta, 0, sin theta].  Throws SolverError when g0 < kDegenerateCoupling.
double mixing_angle(const CouplingSchedule& s, double t);

// d theta/dt evaluated analytically: (g1 g2' - g1' g2) / g0^2.
// Throws SolverError when g0 < kDegenerateCoupling.
double mixing_angle_rate(const CouplingSchedule& s, double t);

// Counterdiabatic cavity-cavity coupling G(t); identical to the mixing-angle
// rate.  Throws SolverError when g0 < kDegenerateCoupling.
double counterdiabatic_G(const CouplingSchedule& s, double t);

// Unguarded algebraic form of G(t) = (g1 g2' - g1' g2)/g0^2.  Returns the
// correct limit 0 when the denominator underflows to zero; intended for
// quadrature over the full pulse support where g0 is tiny but G is still
// well conditioned (a ratio of same-scale exponentials).
double counterdiabatic_G_unchecked(const CouplingSchedule& s, double t);

// Single-Gaussian surrogate G'(t) = -tau * exp(-alpha (t - (2.4 - tau/2))^2)
// fitted to the counterdiabatic coupling of adiabatic_pulses(tau).
// Requires tau < 0 and alpha > 0.
GaussianPulse fitted_gprime(double tau, double alpha);

// Equal physical red-sideband couplings G1 = G2 = sqrt(delta_prime * A_G')
// centered like G' with half its width coefficient, such that
// G1(t) G2(t) / delta_prime == G'(t) exactly.  Requires delta_prime > 0 and a
// positive-amplitude G'.
CouplingSchedule physical_couplings(double delta_prime, const GaussianPulse& gprime);

} // namespace tqdsim
