#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "tqdsim/fock.hpp"
#include "tqdsim/pulses.hpp"

namespace tqdsim {

enum class ModeMatrixKind { Adiabatic, Counterdiabatic, Effective };

// 3x3 single-excitation generator M(t) in the (cavity1, mech, cavity2)
// ordering; amplitudes evolve as dv/dt = -i M(t) v.  Hermitian for all three
// constructions.
struct ModeMatrix {
    Eigen::Matrix3cd m;
    ModeMatrixKind kind;
};

// Tridiagonal generator [[d1, g1, 0], [g1, 0, g2], [0, g2, d2]] of the
// red-sideband chain with cavity detunings (d1, d2).
ModeMatrix mode_matrix_adiabatic(const CouplingSchedule& s, const std::array<double, 2>& deltas,
                                 double t);

// Counterdiabatic generator i*[[0,0,-G],[0,0,0],[G,0,0]] with
// G = counterdiabatic_G(s, t); the mechanical row/column vanish.
// Throws SolverError on degenerate g0.
ModeMatrix mode_matrix_tqd(const CouplingSchedule& s, double t);

// Effective cavity-cavity generator [[0,0,W],[0,0,0],[W,0,0]] with
// W = G1(t) G2(t) / delta_prime.  Requires delta_prime > 0.
ModeMatrix mode_matrix_effective(const CouplingSchedule& couplings, double delta_prime, double t);

struct Eigenmode {
    double value;
    Eigen::Vector3cd vector;
};

// Instantaneous normal modes, ascending by eigenvalue.  Each eigenvector's
// largest-magnitude component (lowest index on ties) is rotated onto the
// positive real axis.  Throws ConfigError on non-Hermitian input.
std::vector<Eigenmode> eigenmodes(const Eigen::Matrix3cd& m);
std::vector<Eigenmode> eigenmodes(const ModeMatrix& m);

// Zero-eigenvalue dark mode [cos theta, 0, sin theta] of the resonant
// tridiagonal generator.  Throws SolverError on degenerate g0.
Eigen::Vector3cd dark_mode(const CouplingSchedule& s, double t);

// Full-space Hamiltonian sum_i d_i a_i^dag a_i + g_i(t)(a_i^dag b + b^dag a_i)
// of the rotating-wave red-sideband model with cavity detunings (d1, d2).
Matrix hamiltonian_rwa(const FockSpace& space, const CouplingSchedule& s,
                       const std::array<double, 2>& deltas, double t);

// Detuned transfer Hamiltonian delta' (n1 + n2) + sum_i G_i(t)(a_i^dag b + h.c.).
Matrix hamiltonian_detuned(const FockSpace& space, const CouplingSchedule& couplings,
                           double delta_prime, double t);

// Beam-splitter Hamiltonian after adiabatic elimination of the mechanics:
// sum_i (delta' + W_i(t)) n_i + W(t)(a1^dag a2 + a2^dag a1) with Stark shifts
// W_i = G_i^2/delta' and swap rate W = G1 G2 (1/delta' + 1/delta')/2.
// Acts as the identity on the mechanical factor.
Matrix hamiltonian_beam_splitter(const FockSpace& space, const CouplingSchedule& couplings,
                                 double delta_prime, double t);

// Cavity Stark shifts (G1^2/delta', G2^2/delta').
std::array<double, 2> cavity_shifts(const CouplingSchedule& couplings, double delta_prime,
                                    double t);

// Cavity-cavity swap rate G1 G2 (1/delta' + 1/delta')/2 = G1 G2/delta'.
double beam_splitter_rate(const CouplingSchedule& couplings, double delta_prime, double t);

// Rotating-frame change: H - shift * (n1 + n2).  Removing the common cavity
// shift delta' + W(t) puts the beam-splitter model in the frame of the
// effective cavity-cavity generator.
Matrix remove_cavity_shift(const FockSpace& space, const Matrix& h, double shift);

// 3x3 block of a full-space Hamiltonian on the single-excitation kets
// {|100>, |010>, |001>}, ordered as (cavity1, mech, cavity2).
Eigen::Matrix3cd single_excitation_block(const FockSpace& space, const Matrix& h);

} // namespace tqdsim
