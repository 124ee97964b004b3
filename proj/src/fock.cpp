#include "tqdsim/fock.hpp"

#include <algorithm>
#include <cmath>

namespace tqdsim {

namespace {

void check_mode(int mode) {
    if (mode < 0 || mode >= kNumModes) {
        throw ConfigError("mode index must be 0, 1, or 2; got " + std::to_string(mode));
    }
}

void check_space(const FockSpace& space) {
    for (int m = 0; m < kNumModes; ++m) {
        if (space.dims[m] < 2) {
            throw ConfigError("Fock dimension of mode " + std::to_string(m) +
                              " must be at least 2; got " + std::to_string(space.dims[m]));
        }
    }
}

} // namespace

FockSpace make_space(const std::array<int, 3>& dims) {
    FockSpace space{dims};
    check_space(space);
    return space;
}

Matrix ladder(const FockSpace& space, int mode) {
    check_space(space);
    check_mode(mode);
    const int d = space.dim();
    Matrix a = Matrix::Zero(d, d);
    const int step = space.stride(mode);
    for (int col = 0; col < d; ++col) {
        const int n = space.occupation(col, mode);
        if (n > 0) {
            a(col - step, col) = std::sqrt(static_cast<double>(n));
        }
    }
    return a;
}

Matrix number_op(const FockSpace& space, int mode) {
    check_space(space);
    check_mode(mode);
    const int d = space.dim();
    Matrix n = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        n(i, i) = static_cast<double>(space.occupation(i, mode));
    }
    return n;
}

Matrix exchange(const FockSpace& space, int mode_i, int mode_j) {
    check_space(space);
    check_mode(mode_i);
    check_mode(mode_j);
    if (mode_i == mode_j) {
        throw ConfigError("exchange coupling requires two distinct modes");
    }
    const int d = space.dim();
    Matrix x = Matrix::Zero(d, d);
    const int si = space.stride(mode_i);
    const int sj = space.stride(mode_j);
    const int di = space.dims[mode_i];
    for (int col = 0; col < d; ++col) {
        // a_i^dag a_j |col> = sqrt(n_j) sqrt(n_i + 1) |col - e_j + e_i>
        const int nj = space.occupation(col, mode_j);
        const int ni = space.occupation(col, mode_i);
        if (nj > 0 && ni + 1 < di) {
            const int row = col - sj + si;
            const double amp = std::sqrt(static_cast<double>(nj) * (ni + 1));
            x(row, col) += amp;
            x(col, row) += amp; // Hermitian conjugate term a_j^dag a_i
        }
    }
    return x;
}

Vector basis_state(const FockSpace& space, const std::array<int, 3>& occ) {
    check_space(space);
    for (int m = 0; m < kNumModes; ++m) {
        if (occ[m] < 0 || occ[m] >= space.dims[m]) {
            throw ConfigError("occupation " + std::to_string(occ[m]) + " of mode " +
                              std::to_string(m) + " outside truncation dimension " +
                              std::to_string(space.dims[m]));
        }
    }
    Vector v = Vector::Zero(space.dim());
    v(space.index(occ)) = 1.0;
    return v;
}

Matrix partial_trace(const Matrix& rho, const FockSpace& space, const std::vector<int>& keep) {
    check_space(space);
    const int d = space.dim();
    if (rho.rows() != d || rho.cols() != d) {
        throw ConfigError("density matrix dimension " + std::to_string(rho.rows()) + "x" +
                          std::to_string(rho.cols()) + " does not match Fock space dimension " +
                          std::to_string(d));
    }
    if (keep.empty() || keep.size() > 3) {
        throw ConfigError("partial_trace: keep must list between 1 and 3 modes");
    }
    for (std::size_t k = 0; k < keep.size(); ++k) {
        check_mode(keep[k]);
        if (k > 0 && keep[k] <= keep[k - 1]) {
            throw ConfigError("partial_trace: keep must be strictly ascending");
        }
    }

    std::vector<int> traced;
    for (int m = 0; m < kNumModes; ++m) {
        if (std::find(keep.begin(), keep.end(), m) == keep.end()) {
            traced.push_back(m);
        }
    }

    int kept_dim = 1;
    for (int m : keep) kept_dim *= space.dims[m];
    int traced_dim = 1;
    for (int m : traced) traced_dim *= space.dims[m];

    // Occupations of a reduced flat index, in the kept/traced mode lists.
    auto unflatten = [&](int flat, const std::vector<int>& modes) {
        std::vector<int> occ(modes.size());
        for (int k = static_cast<int>(modes.size()) - 1; k >= 0; --k) {
            const int dm = space.dims[modes[k]];
            occ[k] = flat % dm;
            flat /= dm;
        }
        return occ;
    };

    Matrix red = Matrix::Zero(kept_dim, kept_dim);
    for (int r = 0; r < kept_dim; ++r) {
        const auto occ_r = unflatten(r, keep);
        for (int c = 0; c < kept_dim; ++c) {
            const auto occ_c = unflatten(c, keep);
            Complex sum = 0.0;
            for (int tr = 0; tr < traced_dim; ++tr) {
                const auto occ_t = unflatten(tr, traced);
                std::array<int, 3> full_r{}, full_c{};
                for (std::size_t k = 0; k < keep.size(); ++k) {
                    full_r[keep[k]] = occ_r[k];
                    full_c[keep[k]] = occ_c[k];
                }
                for (std::size_t k = 0; k < traced.size(); ++k) {
                    full_r[traced[k]] = occ_t[k];
                    full_c[traced[k]] = occ_t[k];
                }
                sum += rho(space.index(full_r), space.index(full_c));
            }
            red(r, c) = sum;
        }
    }
    return red;
}

std::array<int, 3> single_excitation_indices(const FockSpace& space) {
    check_space(space);
    return {space.index({1, 0, 0}), space.index({0, 1, 0}), space.index({0, 0, 1})};
}

} // namespace tqdsim
