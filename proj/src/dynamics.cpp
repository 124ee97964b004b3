#include "tqdsim/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

namespace tqdsim {

namespace {

constexpr Complex kMinusI{0.0, -1.0};

using SpMat = Eigen::SparseMatrix<Complex>;

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

void check_tol(double tol) {
    if (!(tol > 0.0) || !(tol <= 1.0)) {
        throw ConfigError("solver tolerance must lie in (0, 1]; got " + std::to_string(tol));
    }
}

StepControl make_control(double tol) {
    StepControl ctrl;
    ctrl.rtol = tol;
    ctrl.atol = 1e-12;
    return ctrl;
}

} // namespace

void validate_rates(const DissipationRates& rates) {
    if (!(rates.kappa1 >= 0.0) || !(rates.kappa2 >= 0.0) || !(rates.gamma_m >= 0.0) ||
        !(rates.n_th >= 0.0)) {
        throw ConfigError("dissipation rates kappa1, kappa2, gamma_m and occupancy n_th "
                          "must all be non-negative");
    }
}

std::vector<double> output_grid(double t0, double t1, int n) {
    if (!(t1 > t0)) {
        throw ConfigError("output grid requires t0 < t1");
    }
    if (n < 2) {
        throw ConfigError("output grid needs at least 2 points; got " + std::to_string(n));
    }
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i) {
        grid[i] = t0 + (t1 - t0) * static_cast<double>(i) / (n - 1);
    }
    grid.front() = t0;
    grid.back() = t1;
    return grid;
}

ModeTrajectory evolve_mode_vector(const ModeMatrixFn& matrix_fn, const Eigen::Vector3cd& v0,
                                  const std::array<double, 2>& span, double tol,
                                  int grid_points) {
    check_tol(tol);
    ModeTrajectory traj;
    traj.times = output_grid(span[0], span[1], grid_points);
    traj.states.resize(traj.times.size());

    auto rhs = [&](double t, const Eigen::Vector3cd& v, Eigen::Vector3cd& dv) {
        dv.noalias() = matrix_fn(t) * v;
        dv *= kMinusI;
    };
    auto emit = [&](std::size_t i, double, const Eigen::Vector3cd& v) { traj.states[i] = v; };

    const StepStats stats =
        integrate_dopri5(rhs, v0, span[0], span[1], traj.times, emit, make_control(tol));

    traj.diagnostics.steps_accepted = stats.accepted;
    traj.diagnostics.steps_rejected = stats.rejected;
    traj.diagnostics.rhs_evaluations = stats.rhs_evaluations;
    traj.diagnostics.rel_tol = tol;
    const double norm0 = v0.norm();
    double drift = 0.0;
    for (const auto& v : traj.states) {
        drift = std::max(drift, std::abs(v.norm() - norm0));
    }
    traj.diagnostics.norm_drift = drift;
    // Local error control admits O(steps * tol) worst-case norm drift; a
    // drift beyond that headroom signals a defective right-hand side.
    const double drift_bound = 100.0 * tol * std::max(1.0, static_cast<double>(stats.accepted));
    if (!(drift < drift_bound)) {
        throw SolverError("mode-vector norm drift " + sci(drift) + " exceeds the blow-up guard " +
                              sci(drift_bound) + " for the declared tolerance",
                          span[1]);
    }
    return traj;
}

Eigen::Matrix3cd propagator(const ModeMatrixFn& matrix_fn, const std::array<double, 2>& span,
                            double tol) {
    check_tol(tol);
    auto rhs = [&](double t, const Eigen::Matrix3cd& u, Eigen::Matrix3cd& du) {
        du.noalias() = matrix_fn(t) * u;
        du *= kMinusI;
    };
    Eigen::Matrix3cd result = Eigen::Matrix3cd::Identity();
    const std::vector<double> out{span[1]};
    auto emit = [&](std::size_t, double, const Eigen::Matrix3cd& u) { result = u; };
    integrate_dopri5(rhs, Eigen::Matrix3cd::Identity().eval(), span[0], span[1], out, emit,
                     make_control(tol));
    const double defect =
        (result.adjoint() * result - Eigen::Matrix3cd::Identity()).cwiseAbs().maxCoeff();
    if (!(defect < 10.0 * tol)) {
        throw SolverError("propagator unitarity defect " + sci(defect) +
                              " exceeds 10x the declared tolerance",
                          span[1]);
    }
    return result;
}

StateTrajectory evolve_state(const OperatorFn& h_fn, const Vector& psi0,
                             const std::array<double, 2>& span, double tol, int grid_points) {
    check_tol(tol);
    if (psi0.size() == 0) {
        throw ConfigError("initial state vector is empty");
    }
    StateTrajectory traj;
    traj.times = output_grid(span[0], span[1], grid_points);
    traj.states.resize(traj.times.size());

    Matrix hbuf;
    auto rhs = [&](double t, const Vector& psi, Vector& dpsi) {
        h_fn(t, hbuf);
        dpsi.noalias() = hbuf * psi;
        dpsi *= kMinusI;
    };
    auto emit = [&](std::size_t i, double, const Vector& psi) { traj.states[i] = psi; };

    const StepStats stats =
        integrate_dopri5(rhs, psi0, span[0], span[1], traj.times, emit, make_control(tol));

    traj.diagnostics.steps_accepted = stats.accepted;
    traj.diagnostics.steps_rejected = stats.rejected;
    traj.diagnostics.rhs_evaluations = stats.rhs_evaluations;
    traj.diagnostics.rel_tol = tol;
    const double norm0 = psi0.norm();
    double drift = 0.0;
    for (const auto& psi : traj.states) {
        drift = std::max(drift, std::abs(psi.norm() - norm0));
    }
    traj.diagnostics.norm_drift = drift;
    // Same blow-up guard as the mode-vector solver: roundoff accumulates
    // with the step count even when every local error is within tolerance.
    const double drift_bound = 100.0 * tol * std::max(1.0, static_cast<double>(stats.accepted));
    if (!(drift < drift_bound)) {
        throw SolverError("state norm drift " + sci(drift) + " exceeds the blow-up guard " +
                              sci(drift_bound) + " for the declared tolerance",
                          span[1]);
    }
    return traj;
}

namespace {

struct Channel {
    double rate;
    SpMat a;   // jump operator
    SpMat ad;  // its adjoint
    SpMat ada; // a^dag a
};

std::vector<Channel> make_channels(const FockSpace& space, const DissipationRates& rates) {
    std::vector<Channel> channels;
    auto add = [&](double rate, const Matrix& a_dense) {
        if (rate == 0.0) {
            return; // exact closed-system limit: absent channels contribute nothing
        }
        Channel ch;
        ch.rate = rate;
        ch.a = a_dense.sparseView();
        ch.ad = Matrix(a_dense.adjoint()).sparseView();
        ch.ada = Matrix(a_dense.adjoint() * a_dense).sparseView();
        channels.push_back(std::move(ch));
    };
    const Matrix a1 = ladder(space, kCavity1);
    const Matrix a2 = ladder(space, kCavity2);
    const Matrix b = ladder(space, kMech);
    add(rates.kappa1, a1);
    add(rates.kappa2, a2);
    add(rates.gamma_m * (rates.n_th + 1.0), b);
    add(rates.gamma_m * rates.n_th, Matrix(b.adjoint()));
    return channels;
}

} // namespace

DensityTrajectory evolve_lindblad(const FockSpace& space, const OperatorFn& h_fn,
                                  const Matrix& rho0, const DissipationRates& rates,
                                  const std::array<double, 2>& span, double tol, int grid_points,
                                  double truncation_threshold) {
    check_tol(tol);
    validate_rates(rates);
    if (!(truncation_threshold > 0.0)) {
        throw ConfigError("truncation threshold must be positive");
    }
    const int d = space.dim();
    if (rho0.rows() != d || rho0.cols() != d) {
        throw ConfigError("initial density matrix dimension does not match the Fock space");
    }
    const double scale = std::max(1.0, rho0.cwiseAbs().maxCoeff());
    if ((rho0 - rho0.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw ConfigError("initial density matrix is not Hermitian");
    }
    if (std::abs(rho0.trace() - Complex(1.0)) > 1e-8) {
        throw ConfigError("initial density matrix must have unit trace");
    }

    // Flat indices of the highest retained mechanical level.
    std::vector<int> top_idx;
    for (int i = 0; i < d; ++i) {
        if (space.occupation(i, kMech) == space.dims[kMech] - 1) {
            top_idx.push_back(i);
        }
    }
    auto top_population = [&](const Matrix& rho) {
        double p = 0.0;
        for (int i : top_idx) {
            p += rho(i, i).real();
        }
        return p;
    };

    auto channels = make_channels(space, rates);

    Matrix hbuf, tmp1 = Matrix::Zero(d, d), tmp2 = Matrix::Zero(d, d);
    auto rhs = [&](double t, const Matrix& rho, Matrix& drho) {
        h_fn(t, hbuf);
        const SpMat hs = hbuf.sparseView();
        drho.noalias() = hs * rho;
        tmp1.noalias() = rho * hs;
        drho -= tmp1;
        drho *= kMinusI;
        for (const auto& ch : channels) {
            tmp1.noalias() = ch.a * rho;
            tmp2.noalias() = tmp1 * ch.ad;
            drho += ch.rate * tmp2;
            tmp1.noalias() = ch.ada * rho;
            drho -= (0.5 * ch.rate) * tmp1;
            tmp2.noalias() = rho * ch.ada;
            drho -= (0.5 * ch.rate) * tmp2;
        }
    };

    auto monitor = [&](double t, const Matrix& rho) {
        const double p = top_population(rho);
        if (p > truncation_threshold) {
            throw TruncationError(
                "top mechanical Fock level holds population " + sci(p) +
                    " at t = " + std::to_string(t) + " (mechanical dim " +
                    std::to_string(space.dims[kMech]) + "); rerun with a larger mechanical cutoff",
                t, p, space.dims[kMech]);
        }
    };
    monitor(span[0], rho0);

    DensityTrajectory traj;
    traj.times = output_grid(span[0], span[1], grid_points);
    traj.states.resize(traj.times.size());
    auto emit = [&](std::size_t i, double, const Matrix& rho) { traj.states[i] = rho; };

    const StepStats stats =
        integrate_dopri5(rhs, rho0, span[0], span[1], traj.times, emit, make_control(tol), monitor);

    traj.diagnostics.steps_accepted = stats.accepted;
    traj.diagnostics.steps_rejected = stats.rejected;
    traj.diagnostics.rhs_evaluations = stats.rhs_evaluations;
    traj.diagnostics.rel_tol = tol;
    traj.diagnostics.mech_dim = space.dims[kMech];

    const double trace0 = rho0.trace().real();
    double trace_drift = 0.0;
    double herm_defect = 0.0;
    for (const auto& rho : traj.states) {
        trace_drift = std::max(trace_drift, std::abs(rho.trace().real() - trace0));
        herm_defect = std::max(herm_defect, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    }
    traj.diagnostics.norm_drift = trace_drift;
    traj.diagnostics.hermiticity_defect = herm_defect;

    // Positivity is monitored on a thinned subset of snapshots (eigensolves
    // are the dominant cost at large mechanical cutoffs), never enforced.
    const std::size_t stride = std::max<std::size_t>(1, traj.states.size() / 60);
    double min_eig = 0.0;
    for (std::size_t i = 0; i < traj.states.size(); i += stride) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(traj.states[i], Eigen::EigenvaluesOnly);
        min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    }
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(traj.states.back(), Eigen::EigenvaluesOnly);
        min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    }
    traj.diagnostics.min_eigenvalue = min_eig;
    traj.diagnostics.positivity_violation = min_eig < -100.0 * tol;

    if (!(trace_drift < tol)) {
        throw SolverError("density-matrix trace drift " + sci(trace_drift) +
                              " exceeds the declared tolerance",
                          span[1]);
    }
    if (!(herm_defect < 10.0 * tol)) {
        throw SolverError("density-matrix Hermiticity defect " + sci(herm_defect) +
                              " exceeds 10x the declared tolerance",
                          span[1]);
    }
    return traj;
}

} // namespace tqdsim
