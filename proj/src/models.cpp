#include "tqdsim/models.hpp"

#include <cmath>
#include <string>

namespace tqdsim {

namespace {

constexpr Complex kI{0.0, 1.0};

void check_delta_prime(double delta_prime) {
    if (!(delta_prime > 0.0)) {
        throw ConfigError("delta_prime must be positive; got " + std::to_string(delta_prime));
    }
}

} // namespace

ModeMatrix mode_matrix_adiabatic(const CouplingSchedule& s, const std::array<double, 2>& deltas,
                                 double t) {
    Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
    const double g1 = s.g1(t);
    const double g2 = s.g2(t);
    m(0, 0) = deltas[0];
    m(2, 2) = deltas[1];
    m(0, 1) = g1;
    m(1, 0) = g1;
    m(1, 2) = g2;
    m(2, 1) = g2;
    return ModeMatrix{m, ModeMatrixKind::Adiabatic};
}

ModeMatrix mode_matrix_tqd(const CouplingSchedule& s, double t) {
    const double G = counterdiabatic_G(s, t);
    Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
    m(0, 2) = -kI * G;
    m(2, 0) = kI * G;
    return ModeMatrix{m, ModeMatrixKind::Counterdiabatic};
}

ModeMatrix mode_matrix_effective(const CouplingSchedule& couplings, double delta_prime, double t) {
    check_delta_prime(delta_prime);
    const double w = couplings.g1(t) * couplings.g2(t) / delta_prime;
    Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
    m(0, 2) = w;
    m(2, 0) = w;
    return ModeMatrix{m, ModeMatrixKind::Effective};
}

std::vector<Eigenmode> eigenmodes(const Eigen::Matrix3cd& m) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw ConfigError("eigenmodes requires a Hermitian matrix");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> solver(m);
    if (solver.info() != Eigen::Success) {
        throw ConfigError("eigenmode decomposition failed");
    }
    std::vector<Eigenmode> modes(3);
    for (int k = 0; k < 3; ++k) {
        Eigen::Vector3cd v = solver.eigenvectors().col(k);
        // Rotate the largest-magnitude component (lowest index on ties) onto
        // the positive real axis to fix the arbitrary phase deterministically.
        int imax = 0;
        double best = std::abs(v(0));
        for (int i = 1; i < 3; ++i) {
            const double a = std::abs(v(i));
            if (a > best) {
                best = a;
                imax = i;
            }
        }
        if (best > 0.0) {
            v *= std::conj(v(imax)) / best;
        }
        modes[k] = Eigenmode{solver.eigenvalues()(k), v};
    }
    return modes;
}

std::vector<Eigenmode> eigenmodes(const ModeMatrix& m) { return eigenmodes(m.m); }

Eigen::Vector3cd dark_mode(const CouplingSchedule& s, double t) {
    const double theta = mixing_angle(s, t);
    Eigen::Vector3cd v;
    v << std::cos(theta), 0.0, std::sin(theta);
    return v;
}

Matrix hamiltonian_rwa(const FockSpace& space, const CouplingSchedule& s,
                       const std::array<double, 2>& deltas, double t) {
    Matrix h = deltas[0] * number_op(space, kCavity1) + deltas[1] * number_op(space, kCavity2);
    h += s.g1(t) * exchange(space, kCavity1, kMech);
    h += s.g2(t) * exchange(space, kCavity2, kMech);
    return h;
}

Matrix hamiltonian_detuned(const FockSpace& space, const CouplingSchedule& couplings,
                           double delta_prime, double t) {
    check_delta_prime(delta_prime);
    Matrix h = delta_prime * (number_op(space, kCavity1) + number_op(space, kCavity2));
    h += couplings.g1(t) * exchange(space, kCavity1, kMech);
    h += couplings.g2(t) * exchange(space, kCavity2, kMech);
    return h;
}

Matrix hamiltonian_beam_splitter(const FockSpace& space, const CouplingSchedule& couplings,
                                 double delta_prime, double t) {
    check_delta_prime(delta_prime);
    const auto shifts = cavity_shifts(couplings, delta_prime, t);
    Matrix h = (delta_prime + shifts[0]) * number_op(space, kCavity1) +
               (delta_prime + shifts[1]) * number_op(space, kCavity2);
    h += beam_splitter_rate(couplings, delta_prime, t) * exchange(space, kCavity1, kCavity2);
    return h;
}

std::array<double, 2> cavity_shifts(const CouplingSchedule& couplings, double delta_prime,
                                    double t) {
    check_delta_prime(delta_prime);
    const double g1 = couplings.g1(t);
    const double g2 = couplings.g2(t);
    return {g1 * g1 / delta_prime, g2 * g2 / delta_prime};
}

double beam_splitter_rate(const CouplingSchedule& couplings, double delta_prime, double t) {
    check_delta_prime(delta_prime);
    return couplings.g1(t) * couplings.g2(t) * (1.0 / delta_prime + 1.0 / delta_prime) / 2.0;
}

Matrix remove_cavity_shift(const FockSpace& space, const Matrix& h, double shift) {
    if (h.rows() != space.dim() || h.cols() != space.dim()) {
        throw ConfigError("operator dimension does not match Fock space");
    }
    Matrix out = h;
    for (int i = 0; i < space.dim(); ++i) {
        out(i, i) -= shift * (space.occupation(i, kCavity1) + space.occupation(i, kCavity2));
    }
    return out;
}

Eigen::Matrix3cd single_excitation_block(const FockSpace& space, const Matrix& h) {
    if (h.rows() != space.dim() || h.cols() != space.dim()) {
        throw ConfigError("operator dimension does not match Fock space");
    }
    const auto idx = single_excitation_indices(space);
    Eigen::Matrix3cd block;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            block(r, c) = h(idx[r], idx[c]);
        }
    }
    return block;
}

} // namespace tqdsim
