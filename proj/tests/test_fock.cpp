#include <doctest.h>

#include <complex>

#include "support/oracles.hpp"
#include "tqdsim/errors.hpp"
#include "tqdsim/fock.hpp"

using namespace tqdsim;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

} // namespace

TEST_CASE("flat indexing round-trips and strides follow lexicographic order") {
    const FockSpace space = make_space({2, 5, 3});
    CHECK(space.dim() == 30);
    CHECK(space.stride(kCavity1) == 15);
    CHECK(space.stride(kMech) == 3);
    CHECK(space.stride(kCavity2) == 1);

    int flat = 0;
    for (int n1 = 0; n1 < 2; ++n1) {
        for (int nm = 0; nm < 5; ++nm) {
            for (int n2 = 0; n2 < 3; ++n2) {
                const std::array<int, 3> occ{n1, nm, n2};
                CHECK(space.index(occ) == flat);
                CHECK(space.occupations(flat) == occ);
                CHECK(space.occupation(flat, kCavity1) == n1);
                CHECK(space.occupation(flat, kMech) == nm);
                CHECK(space.occupation(flat, kCavity2) == n2);
                ++flat;
            }
        }
    }
}

TEST_CASE("space construction rejects dimensions below two") {
    CHECK_THROWS_AS(make_space({1, 5, 3}), ConfigError);
    CHECK_THROWS_AS(make_space({2, 0, 3}), ConfigError);
    CHECK_THROWS_AS(make_space({2, 5, -1}), ConfigError);
}

TEST_CASE("basis states are one-hot and range-checked") {
    const FockSpace space = make_space({2, 4, 2});
    const Vector psi = basis_state(space, {1, 2, 0});
    CHECK(psi.size() == space.dim());
    CHECK(psi.norm() == doctest::Approx(1.0));
    CHECK(psi(space.index({1, 2, 0})) == std::complex<double>(1.0, 0.0));
    CHECK(psi.cwiseAbs().sum() == doctest::Approx(1.0));

    CHECK_THROWS_AS(basis_state(space, {2, 0, 0}), ConfigError);
    CHECK_THROWS_AS(basis_state(space, {0, -1, 0}), ConfigError);
    CHECK_THROWS_AS(basis_state(space, {0, 0, 2}), ConfigError);
}

TEST_CASE("ladder operators act as annihilators with sqrt(n) amplitudes") {
    const FockSpace space = make_space({2, 4, 3});
    for (int mode = 0; mode < kNumModes; ++mode) {
        const Matrix a = ladder(space, mode);
        for (int col = 0; col < space.dim(); ++col) {
            const auto occ = space.occupations(col);
            const Vector image = a * basis_state(space, occ);
            if (occ[mode] == 0) {
                CHECK(image.norm() == 0.0);
            } else {
                auto lowered = occ;
                lowered[mode] -= 1;
                CHECK(image.norm() == doctest::Approx(std::sqrt(occ[mode])));
                CHECK(std::abs(image(space.index(lowered)) - std::sqrt(occ[mode])) < 1e-15);
            }
        }
    }
}

TEST_CASE("number operator equals a^dag a and truncated commutator is diagonal") {
    const FockSpace space = make_space({2, 4, 3});
    for (int mode = 0; mode < kNumModes; ++mode) {
        const Matrix a = ladder(space, mode);
        const Matrix n = number_op(space, mode);
        CHECK(max_abs(Matrix(a.adjoint() * a - n)) < 1e-14);

        // [a, a^dag] = 1 everywhere except the top truncated level, where the
        // missing |d> ket turns the diagonal entry into -(d-1).
        const Matrix comm = a * a.adjoint() - a.adjoint() * a;
        const int d = space.dims[mode];
        for (int col = 0; col < space.dim(); ++col) {
            for (int row = 0; row < space.dim(); ++row) {
                const double expected =
                    (row != col) ? 0.0
                                 : (space.occupation(col, mode) == d - 1 ? -(d - 1.0) : 1.0);
                CHECK(std::abs(comm(row, col) - expected) < 1e-13);
            }
        }
    }
}

TEST_CASE("operators on distinct modes commute exactly") {
    const FockSpace space = make_space({2, 3, 2});
    const Matrix a1 = ladder(space, kCavity1);
    const Matrix b = ladder(space, kMech);
    const Matrix a2 = ladder(space, kCavity2);
    CHECK(max_abs(Matrix(a1 * b - b * a1)) == 0.0);
    CHECK(max_abs(Matrix(a1 * b.adjoint() - b.adjoint() * a1)) == 0.0);
    CHECK(max_abs(Matrix(a2 * b - b * a2)) == 0.0);
    CHECK(max_abs(Matrix(a1 * a2.adjoint() - a2.adjoint() * a1)) == 0.0);
}

TEST_CASE("exchange operator matches the ladder-product construction") {
    const FockSpace space = make_space({3, 4, 2});
    for (int i = 0; i < kNumModes; ++i) {
        for (int j = 0; j < kNumModes; ++j) {
            if (i == j) continue;
            const Matrix ai = ladder(space, i);
            const Matrix aj = ladder(space, j);
            const Matrix expected = ai.adjoint() * aj + aj.adjoint() * ai;
            const Matrix got = exchange(space, i, j);
            CHECK(max_abs(Matrix(got - expected)) < 1e-14);
            CHECK(max_abs(Matrix(got - got.adjoint())) == 0.0);
        }
    }
    CHECK_THROWS_AS(exchange(space, 1, 1), ConfigError);
    CHECK_THROWS_AS(exchange(space, 0, 3), ConfigError);
}

TEST_CASE("exchange conserves the total excitation number") {
    const FockSpace space = make_space({3, 3, 3});
    Matrix n_total = number_op(space, kCavity1);
    n_total += number_op(space, kMech);
    n_total += number_op(space, kCavity2);
    for (int mode : {kCavity1, kCavity2}) {
        const Matrix x = exchange(space, mode, kMech);
        CHECK(max_abs(Matrix(x * n_total - n_total * x)) < 1e-13);
    }
}

TEST_CASE("partial trace preserves trace and factors product states") {
    oracle::Rng rng(0x5eedf0c5u);
    const FockSpace space = make_space({2, 3, 2});

    // rho = |p><p| (x) |q><q| (x) |r><r| built by hand from flat indices.
    const Eigen::VectorXcd p = oracle::random_state(rng, 2);
    const Eigen::VectorXcd q = oracle::random_state(rng, 3);
    const Eigen::VectorXcd r = oracle::random_state(rng, 2);
    Vector psi(space.dim());
    for (int flat = 0; flat < space.dim(); ++flat) {
        const auto occ = space.occupations(flat);
        psi(flat) = p(occ[0]) * q(occ[1]) * r(occ[2]);
    }
    const Matrix rho = psi * psi.adjoint();

    const Matrix rho_1 = partial_trace(rho, space, {kCavity1});
    const Matrix rho_m = partial_trace(rho, space, {kMech});
    const Matrix rho_2 = partial_trace(rho, space, {kCavity2});
    CHECK(std::abs(rho_1.trace() - std::complex<double>(1.0)) < 1e-14);
    CHECK(max_abs(Matrix(rho_1 - Matrix(p * p.adjoint()))) < 1e-14);
    CHECK(max_abs(Matrix(rho_m - Matrix(q * q.adjoint()))) < 1e-14);
    CHECK(max_abs(Matrix(rho_2 - Matrix(r * r.adjoint()))) < 1e-14);

    // Keeping two modes of the product state factors likewise.
    const Matrix rho_12 = partial_trace(rho, space, {kCavity1, kCavity2});
    Eigen::MatrixXcd pr = Eigen::MatrixXcd::Zero(4, 4);
    for (int i1 = 0; i1 < 2; ++i1)
        for (int i2 = 0; i2 < 2; ++i2)
            for (int j1 = 0; j1 < 2; ++j1)
                for (int j2 = 0; j2 < 2; ++j2)
                    pr(i1 * 2 + i2, j1 * 2 + j2) =
                        p(i1) * r(i2) * std::conj(p(j1)) * std::conj(r(j2));
    CHECK(max_abs(Matrix(rho_12 - Matrix(pr))) < 1e-14);
}

TEST_CASE("partial trace of an entangled cavity pair keeps coherences") {
    const FockSpace space = make_space({2, 3, 2});
    // (|100> + |001>)/sqrt(2): mech factors out in |0>, cavities are Bell-like.
    Vector psi = Vector::Zero(space.dim());
    psi(space.index({1, 0, 0})) = 1.0 / std::sqrt(2.0);
    psi(space.index({0, 0, 1})) = 1.0 / std::sqrt(2.0);
    const Matrix rho = psi * psi.adjoint();

    const Matrix reduced = partial_trace(rho, space, {kCavity1, kCavity2});
    // Reduced basis index is n1 * d2 + n2.
    Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(4, 4);
    expected(2, 2) = 0.5; // |10>
    expected(1, 1) = 0.5; // |01>
    expected(2, 1) = 0.5;
    expected(1, 2) = 0.5;
    CHECK(max_abs(Matrix(reduced - Matrix(expected))) < 1e-14);

    // The mechanical factor is pure |0><0|.
    const Matrix mech = partial_trace(rho, space, {kMech});
    CHECK(std::abs(mech(0, 0) - std::complex<double>(1.0)) < 1e-14);
    CHECK(max_abs(mech) == doctest::Approx(1.0));
}

TEST_CASE("partial trace validates the keep list") {
    const FockSpace space = make_space({2, 2, 2});
    const Matrix rho = Matrix::Identity(8, 8) / 8.0;
    CHECK_THROWS_AS(partial_trace(rho, space, {}), ConfigError);
    CHECK_THROWS_AS(partial_trace(rho, space, {kCavity2, kCavity1}), ConfigError);
    CHECK_THROWS_AS(partial_trace(rho, space, {0, 0}), ConfigError);
    CHECK_THROWS_AS(partial_trace(rho, space, {0, 3}), ConfigError);
    const Matrix wrong = Matrix::Identity(4, 4) / 4.0;
    CHECK_THROWS_AS(partial_trace(wrong, space, {kMech}), ConfigError);
}

TEST_CASE("keeping every mode returns the state unchanged") {
    oracle::Rng rng(0xabcdefu);
    const FockSpace space = make_space({2, 2, 2});
    const Vector psi = oracle::random_state(rng, space.dim());
    const Matrix rho = psi * psi.adjoint();
    const Matrix kept = partial_trace(rho, space, {kCavity1, kMech, kCavity2});
    CHECK(max_abs(Matrix(kept - rho)) < 1e-15);
}

TEST_CASE("single-excitation indices follow the (cavity1, mech, cavity2) order") {
    const FockSpace space = make_space({2, 3, 4});
    const auto idx = single_excitation_indices(space);
    CHECK(idx[0] == space.index({1, 0, 0}));
    CHECK(idx[1] == space.index({0, 1, 0}));
    CHECK(idx[2] == space.index({0, 0, 1}));
    CHECK(idx[0] == 12);
    CHECK(idx[1] == 4);
    CHECK(idx[2] == 1);
}

TEST_CASE("operator construction is deterministic") {
    const FockSpace space = make_space({2, 6, 2});
    const Matrix a = ladder(space, kMech);
    const Matrix b = ladder(space, kMech);
    CHECK(max_abs(Matrix(a - b)) == 0.0);
    const Matrix x = exchange(space, kCavity1, kMech);
    const Matrix y = exchange(space, kCavity1, kMech);
    CHECK(max_abs(Matrix(x - y)) == 0.0);
}
