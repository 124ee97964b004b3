#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "tqdsim/fock.hpp"
#include "tqdsim/integrate.hpp"

namespace tqdsim {

// Fills `h` with the (Hermitian) operator at time t; may resize `h`.
using OperatorFn = std::function<void(double t, Matrix& h)>;

// Returns the 3x3 single-excitation generator at time t.
using ModeMatrixFn = std::function<Eigen::Matrix3cd(double t)>;

struct DissipationRates {
    double kappa1 = 0.0;  // cavity-1 photon decay
    double kappa2 = 0.0;  // cavity-2 photon decay
    double gamma_m = 0.0; // mechanical damping
    double n_th = 0.0;    // thermal occupancy of the mechanical bath
};

// Throws ConfigError unless all rates and the occupancy are >= 0.
void validate_rates(const DissipationRates& rates);

struct Diagnostics {
    long steps_accepted = 0;
    long steps_rejected = 0;
    long rhs_evaluations = 0;
    double rel_tol = 0.0;
    // Max over the output grid of |norm - initial norm| (vectors) or
    // |trace - initial trace| (density matrices).
    double norm_drift = 0.0;
    // Density matrices only: max |rho - rho^dag| entry over the grid.
    double hermiticity_defect = 0.0;
    // Density matrices only: smallest eigenvalue seen on sampled snapshots.
    double min_eigenvalue = 0.0;
    // True when min_eigenvalue < -100 * rel_tol (monitored, never enforced).
    bool positivity_violation = false;
    // Filled by the scenario layer for dissipative runs.
    int mech_dim = 0;
    int truncation_retries = 0;
};

template <class State>
struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    Diagnostics diagnostics;
};

using ModeTrajectory = Trajectory<Eigen::Vector3cd>;
using StateTrajectory = Trajectory<Vector>;
using DensityTrajectory = Trajectory<Matrix>;

// n >= 2 evenly spaced points covering [t0, t1] inclusive.
std::vector<double> output_grid(double t0, double t1, int n);

inline constexpr int kDefaultGridPoints = 600;
inline constexpr double kDefaultTruncationThreshold = 1e-6;

// Integrates dv/dt = -i M(t) v.  The achieved norm drift is recorded in the
// diagnostics; drift beyond 100 * tol * steps (the worst case local error
// control admits) aborts with SolverError.
ModeTrajectory evolve_mode_vector(const ModeMatrixFn& matrix_fn, const Eigen::Vector3cd& v0,
                                  const std::array<double, 2>& span, double tol,
                                  int grid_points = kDefaultGridPoints);

// Propagator U(t1, t0) of dU/dt = -i M(t) U.  Postcondition:
// max|U^dag U - I| < 10 * tol (SolverError otherwise).
Eigen::Matrix3cd propagator(const ModeMatrixFn& matrix_fn, const std::array<double, 2>& span,
                            double tol);

// Integrates the Schrodinger equation d|psi>/dt = -i H(t) |psi>.  Norm drift
// is recorded in the diagnostics and guarded at 100 * tol * steps.
StateTrajectory evolve_state(const OperatorFn& h_fn, const Vector& psi0,
                             const std::array<double, 2>& span, double tol,
                             int grid_points = kDefaultGridPoints);

// Integrates the Lindblad master equation
//   drho/dt = -i[H, rho] + kappa1 L[a1] + kappa2 L[a2]
//             + gamma_m (n_th + 1) L[b] + gamma_m n_th L[b^dag]
// with L[A]rho = A rho A^dag - {A^dag A, rho}/2, using operators truncated to
// `space`.  Aborts with TruncationError if the top mechanical level ever
// holds more than `truncation_threshold` population.  Postconditions: trace
// drift < tol and Hermiticity defect < 10 * tol over the output grid;
// positivity is monitored (min eigenvalue recorded, violations beyond
// 100 * tol flagged in the diagnostics, never enforced).
DensityTrajectory evolve_lindblad(const FockSpace& space, const OperatorFn& h_fn,
                                  const Matrix& rho0, const DissipationRates& rates,
                                  const std::array<double, 2>& span, double tol,
                                  int grid_points = kDefaultGridPoints,
                                  double truncation_threshold = kDefaultTruncationThreshold);

} // namespace tqdsim
