#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "tqdsim/errors.hpp"

namespace tqdsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Fixed mode ordering used everywhere: 0 = cavity 1, 1 = mechanical, 2 = cavity 2.
inline constexpr int kCavity1 = 0;
inline constexpr int kMech = 1;
inline constexpr int kCavity2 = 2;
inline constexpr int kNumModes = 3;

// Truncated three-mode bosonic Fock space.  Basis kets |n1, nm, n2> are
// flattened lexicographically: flat = n1*(dm*d2) + nm*d2 + n2.
struct FockSpace {
    std::array<int, 3> dims{0, 0, 0};

    int dim() const { return dims[0] * dims[1] * dims[2]; }

    // Stride of one unit of occupation of `mode` in the flat index.
    int stride(int mode) const {
        switch (mode) {
            case 0: return dims[1] * dims[2];
            case 1: return dims[2];
            default: return 1;
        }
    }

    int index(const std::array<int, 3>& occ) const {
        return occ[0] * dims[1] * dims[2] + occ[1] * dims[2] + occ[2];
    }

    std::array<int, 3> occupations(int flat) const {
        const int d2 = dims[2];
        const int dm = dims[1];
        return {flat / (dm * d2), (flat / d2) % dm, flat % d2};
    }

    int occupation(int flat, int mode) const {
        switch (mode) {
            case 0: return flat / (dims[1] * dims[2]);
            case 1: return (flat / dims[2]) % dims[1];
            default: return flat % dims[2];
        }
    }
};

// Builds a space with the given per-mode truncation dimensions (each >= 2).
FockSpace make_space(const std::array<int, 3>& dims);

// Annihilation operator of `mode`: a|n> = sqrt(n)|n-1> on that factor,
// identity on the others.
Matrix ladder(const FockSpace& space, int mode);

// Number operator a_mode^dag a_mode (diagonal).
Matrix number_op(const FockSpace& space, int mode);

// Excitation-exchange coupling a_i^dag a_j + a_j^dag a_i for distinct modes.
Matrix exchange(const FockSpace& space, int mode_i, int mode_j);

// Normalized basis ket |occ[0], occ[1], occ[2]>.
Vector basis_state(const FockSpace& space, const std::array<int, 3>& occ);

// Partial trace of a density matrix over the modes NOT listed in `keep`.
// `keep` must be a non-empty strictly ascending subset of {0,1,2}; the result
// lives on the kept modes in the same lexicographic flattening.
Matrix partial_trace(const Matrix& rho, const FockSpace& space, const std::vector<int>& keep);

// Flat indices of the single-excitation kets |100>, |010>, |001> in the
// (cavity1, mech, cavity2) ordering used by the 3x3 mode-vector picture.
std::array<int, 3> single_excitation_indices(const FockSpace& space);

} // namespace tqdsim
