#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "tqdsim/errors.hpp"

namespace tqdsim {

// Adaptive step-size control for the embedded Runge-Kutta integrator.
// The error estimate is measured against atol + rtol * |y| componentwise.
struct StepControl {
    double rtol = 1e-9;
    double atol = 1e-12;
    double safety = 0.9;
    double min_factor = 0.2;
    double max_factor = 5.0;
    double initial_step = 0.0; // 0 = choose automatically
};

struct StepStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evaluations = 0;
};

namespace dopri {

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                        a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
// Fifth-order weights (also the last stage row: first-same-as-last).
inline constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                        b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// Difference between the 5th- and embedded 4th-order weights.
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Fourth-order dense-output coefficients.
inline constexpr double d1 = -12715105075.0 / 11282082432.0;
inline constexpr double d3 = 87487479700.0 / 32700410799.0;
inline constexpr double d4 = -10690763975.0 / 1880347072.0;
inline constexpr double d5 = 701980252875.0 / 199316789632.0;
inline constexpr double d6 = -1453857185.0 / 822651844.0;
inline constexpr double d7 = 69997945.0 / 29380423.0;

// Weighted RMS of |err_i| / (atol + rtol * max(|ya_i|, |yb_i|)).
template <class State>
double error_norm(const State& err, const State& ya, const State& yb, double atol, double rtol) {
    const auto* e = err.data();
    const auto* a = ya.data();
    const auto* b = yb.data();
    const Eigen::Index n = err.size();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sc = atol + rtol * std::max(std::abs(a[i]), std::abs(b[i]));
        const double q = std::abs(e[i]) / sc;
        sum += q * q;
    }
    return std::sqrt(sum / static_cast<double>(n));
}

template <class State>
double scaled_rms(const State& v, const State& ref, double atol, double rtol) {
    const auto* p = v.data();
    const auto* r = ref.data();
    const Eigen::Index n = v.size();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sc = atol + rtol * std::abs(r[i]);
        const double q = std::abs(p[i]) / sc;
        sum += q * q;
    }
    return std::sqrt(sum / static_cast<double>(n));
}

} // namespace dopri

// Integrates dy/dt = rhs(t, y) from t0 to t1 with the Dormand-Prince 5(4)
// pair, emitting dense-output interpolations at the requested times.
//
//   Rhs:     void(double t, const State& y, State& dydt)
//   Emit:    void(std::size_t index, double t, const State& y), called once
//            per entry of out_times, in order
//   Monitor: void(double t, const State& y), called after every accepted
//            step; may throw to abort the integration
//
// out_times must be non-decreasing and contained in [t0, t1].  State is any
// dense Eigen vector/matrix type with contiguous storage.
template <class State, class Rhs, class Emit, class Monitor>
StepStats integrate_dopri5(Rhs&& rhs, const State& y0, double t0, double t1,
                           const std::vector<double>& out_times, Emit&& emit,
                           const StepControl& ctrl, Monitor&& monitor) {
    namespace dp = dopri;
    if (!(t1 > t0)) {
        throw ConfigError("integration span must satisfy t0 < t1");
    }
    if (!(ctrl.rtol > 0.0) || !(ctrl.atol >= 0.0)) {
        throw ConfigError("integration tolerances must be positive");
    }
    const double span = t1 - t0;
    const double t_eps = 1e-12 * std::max({1.0, std::abs(t0), std::abs(t1)});
    for (std::size_t i = 0; i < out_times.size(); ++i) {
        if (out_times[i] < t0 - t_eps || out_times[i] > t1 + t_eps ||
            (i > 0 && out_times[i] < out_times[i - 1])) {
            throw ConfigError("output times must be non-decreasing and inside the span");
        }
    }

    StepStats stats;
    State y = y0;
    State ynew = y0, ytmp = y0, yerr = y0;
    State k1 = y0, k2 = y0, k3 = y0, k4 = y0, k5 = y0, k6 = y0, k7 = y0;
    State rc2 = y0, rc3 = y0, rc4 = y0, rc5 = y0, yout = y0;

    double t = t0;
    rhs(t, y, k1);
    ++stats.rhs_evaluations;

    double h = ctrl.initial_step;
    if (!(h > 0.0)) {
        // Starting-step heuristic based on the size of y, f and a cheap
        // Euler probe of the local curvature.
        const double d0 = dp::scaled_rms(y, y, ctrl.atol, ctrl.rtol);
        const double d1n = dp::scaled_rms(k1, y, ctrl.atol, ctrl.rtol);
        double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * (d0 / d1n);
        h0 = std::min(h0, span);
        ytmp = y + h0 * k1;
        rhs(t + h0, ytmp, k2);
        ++stats.rhs_evaluations;
        yerr = k2 - k1;
        const double d2 = dp::scaled_rms(yerr, y, ctrl.atol, ctrl.rtol) / h0;
        const double dm = std::max(d1n, d2);
        const double h1 = (dm <= 1e-15) ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        h = std::min({100.0 * h0, h1, span});
        if (!std::isfinite(h) || h <= 0.0) {
            // A non-finite right-hand side poisons the heuristic; start from
            // a small finite step and let the error control sort it out.
            h = 1e-6 * span;
        }
    }

    std::size_t oi = 0;
    while (oi < out_times.size() && out_times[oi] <= t0 + t_eps) {
        emit(oi, out_times[oi], y);
        ++oi;
    }

    bool just_rejected = false;
    while (t < t1 - t_eps) {
        h = std::min(h, t1 - t);
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            throw SolverError("step size underflow", t);
        }

        ytmp = y + (h * dp::a21) * k1;
        rhs(t + dp::c2 * h, ytmp, k2);
        ytmp = y + h * (dp::a31 * k1 + dp::a32 * k2);
        rhs(t + dp::c3 * h, ytmp, k3);
        ytmp = y + h * (dp::a41 * k1 + dp::a42 * k2 + dp::a43 * k3);
        rhs(t + dp::c4 * h, ytmp, k4);
        ytmp = y + h * (dp::a51 * k1 + dp::a52 * k2 + dp::a53 * k3 + dp::a54 * k4);
        rhs(t + dp::c5 * h, ytmp, k5);
        ytmp = y + h * (dp::a61 * k1 + dp::a62 * k2 + dp::a63 * k3 + dp::a64 * k4 + dp::a65 * k5);
        rhs(t + h, ytmp, k6);
        ynew = y + h * (dp::b1 * k1 + dp::b3 * k3 + dp::b4 * k4 + dp::b5 * k5 + dp::b6 * k6);
        rhs(t + h, ynew, k7);
        stats.rhs_evaluations += 6;

        yerr = h * (dp::e1 * k1 + dp::e3 * k3 + dp::e4 * k4 + dp::e5 * k5 + dp::e6 * k6 +
                    dp::e7 * k7);
        const double err = dp::error_norm(yerr, y, ynew, ctrl.atol, ctrl.rtol);

        if (!(err <= 1.0)) { // also catches NaN
            ++stats.rejected;
            just_rejected = true;
            const double fac = std::isfinite(err)
                                   ? std::max(ctrl.min_factor, ctrl.safety * std::pow(err, -0.2))
                                   : ctrl.min_factor;
            h *= std::min(fac, 1.0);
            continue;
        }

        ++stats.accepted;
        monitor(t + h, ynew);

        if (oi < out_times.size() && out_times[oi] <= t + h + t_eps) {
            // Build the quartic dense-output polynomial for this step.
            rc2 = ynew - y;
            rc3 = h * k1 - rc2;
            rc4 = rc2 - h * k7 - rc3;
            rc5 = h * (dp::d1 * k1 + dp::d3 * k3 + dp::d4 * k4 + dp::d5 * k5 + dp::d6 * k6 +
                       dp::d7 * k7);
            while (oi < out_times.size() && out_times[oi] <= t + h + t_eps) {
                const double theta = std::clamp((out_times[oi] - t) / h, 0.0, 1.0);
                yout = y + theta * (rc2 + (1.0 - theta) * (rc3 + theta * (rc4 + (1.0 - theta) * rc5)));
                emit(oi, out_times[oi], yout);
                ++oi;
            }
        }

        t += h;
        std::swap(y, ynew);
        std::swap(k1, k7); // first-same-as-last

        double fac = ctrl.safety * ((err > 0.0) ? std::pow(err, -0.2) : ctrl.max_factor);
        const double facmax = just_rejected ? 1.0 : ctrl.max_factor;
        h *= std::clamp(fac, ctrl.min_factor, facmax);
        just_rejected = false;
    }

    // Emit any leftover grid points (rounding residue at the right endpoint).
    while (oi < out_times.size()) {
        emit(oi, out_times[oi], y);
        ++oi;
    }
    return stats;
}

template <class State, class Rhs, class Emit>
StepStats integrate_dopri5(Rhs&& rhs, const State& y0, double t0, double t1,
                           const std::vector<double>& out_times, Emit&& emit,
                           const StepControl& ctrl) {
    return integrate_dopri5(std::forward<Rhs>(rhs), y0, t0, t1, out_times,
                            std::forward<Emit>(emit), ctrl, [](double, const State&) {});
}

} // namespace tqdsim
