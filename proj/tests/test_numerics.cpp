#include <doctest.h>

#include <cstring>
#include <random>

#include "gridflow/cases.hpp"
#include "gridflow/numerics.hpp"
#include "gridflow/nr_solver.hpp"

using namespace gridflow;

namespace {

/// Independent elimination oracle: textbook Gauss elimination with partial
/// pivoting on the augmented matrix, no shared code with lu_factor/lu_solve.
std::vector<double> gauss_eliminate(DenseMatrix<double> a, std::vector<double> b) {
    const std::size_t n = a.rows();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            std::swap(b[k], b[p]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double acc = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) acc -= a(ii, j) * x[j];
        x[ii] = acc / a(ii, ii);
    }
    return x;
}

DenseMatrix<double> random_matrix(std::mt19937& rng, std::size_t n) {
    std::uniform_real_distribution<double> entry(-1.0, 1.0);
    DenseMatrix<double> m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m(i, j) = entry(rng);
        m(i, i) += 3.0;  // keep it comfortably nonsingular
    }
    return m;
}

}  // namespace

TEST_CASE("identity factors to identity with identity permutation") {
    const auto m = DenseMatrix<double>::identity(3);
    const auto f = lu_factor(m);
    CHECK(f.lu == m);
    CHECK(f.permutation == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("pivoting handles a pure permutation matrix") {
    DenseMatrix<double> m(2, 2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    const auto x = solve_linear_system(m, {1.0, 2.0});
    CHECK(x[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("multiply-then-solve round trip on a 6x6 system") {
    std::mt19937 rng(42);
    const auto a = random_matrix(rng, 6);
    const std::vector<double> x_true{1.0, -2.0, 0.5, 3.25, -0.125, 7.0};
    const auto b = a.multiply(x_true);
    const auto x = solve_linear_system(a, b);
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(std::abs(x[i] - x_true[i]) <= 1e-10 * std::abs(x_true[i]));
    // residual contract: ||A x - b||inf / ||b||inf small for tame systems
    const auto residual = a.multiply(x);
    double r = 0.0;
    for (std::size_t i = 0; i < 6; ++i) r = std::max(r, std::abs(residual[i] - b[i]));
    CHECK(r / infinity_norm(b) <= 1e-9);
}

TEST_CASE("diagonal scaling solve") {
    DenseMatrix<double> a(2, 2);
    a(0, 0) = 2.0;
    a(1, 1) = 2.0;
    const auto x = solve_linear_system(a, {4.0, 6.0});
    CHECK(x[0] == doctest::Approx(2.0));
    CHECK(x[1] == doctest::Approx(3.0));
}

TEST_CASE("rank-deficient matrix is reported singular") {
    DenseMatrix<double> a(2, 2, 1.0);
    CHECK_THROWS_AS(lu_factor(a), SingularMatrixError);
}

TEST_CASE("dimension mismatches are rejected") {
    DenseMatrix<double> a(3, 2);
    CHECK_THROWS_AS(lu_factor(a), DimensionMismatchError);
    const auto f = lu_factor(DenseMatrix<double>::identity(3));
    CHECK_THROWS_AS(lu_solve(f, std::vector<double>{1.0, 2.0}), DimensionMismatchError);
}

TEST_CASE("first-iteration Newton correction matches an independent elimination oracle") {
    const Network net = glover5();
    const AdmittanceMatrix ybus = build_ybus(net);
    const StateVector state = flat_start(net);
    std::vector<BusKind> roles;
    for (const auto& bus : net.buses) roles.push_back(bus.kind);
    const auto jac = jacobian(ybus, state, roles);
    const auto rhs = mismatch(net, power_injections(ybus, state), roles).stacked();

    const auto via_lu = solve_linear_system(jac, rhs);
    const auto via_oracle = gauss_eliminate(jac, rhs);
    REQUIRE(via_lu.size() == via_oracle.size());
    for (std::size_t i = 0; i < via_lu.size(); ++i)
        CHECK(std::abs(via_lu[i] - via_oracle[i]) <= 1e-10 * std::max(1.0, std::abs(via_oracle[i])));
}

TEST_CASE("P*A = L*U reconstruction within 1e-10 of the matrix norm") {
    std::mt19937 rng(7);
    for (const std::size_t n : {1u, 2u, 3u, 5u, 8u}) {
        const auto a = random_matrix(rng, n);
        const auto f = lu_factor(a);
        double norm_a = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) row += std::abs(a(i, j));
            norm_a = std::max(norm_a, row);
        }
        // rebuild L*U and compare against the permuted original
        auto lower = [&](std::size_t i, std::size_t k) {
            return k < i ? f.lu(i, k) : (k == i ? 1.0 : 0.0);
        };
        auto upper = [&](std::size_t k, std::size_t j) { return k <= j ? f.lu(k, j) : 0.0; };
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < n; ++k) acc += lower(i, k) * upper(k, j);
                CHECK(std::abs(acc - a(f.permutation[i], j)) <= 1e-10 * norm_a);
            }
        }
        // |L| entries bounded by 1 under partial pivoting
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) CHECK(std::abs(f.lu(i, j)) <= 1.0 + 1e-15);
    }
}

TEST_CASE("solve is bit-deterministic") {
    std::mt19937 rng(3);
    const auto a = random_matrix(rng, 5);
    const std::vector<double> b{1, 2, 3, 4, 5};
    const auto x1 = solve_linear_system(a, b);
    const auto x2 = solve_linear_system(a, b);
    CHECK(std::memcmp(x1.data(), x2.data(), x1.size() * sizeof(double)) == 0);
}

TEST_CASE("complex systems factor and solve through the same path") {
    DenseMatrix<Complex> a(2, 2);
    a(0, 0) = Complex(0, 1);
    a(0, 1) = Complex(1, 0);
    a(1, 0) = Complex(1, 0);
    a(1, 1) = Complex(0, 1);
    const std::vector<Complex> x_true{Complex(1, 2), Complex(-3, 0.5)};
    const auto b = a.multiply(x_true);
    const auto x = solve_linear_system(a, b);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(x[i] - x_true[i]) <= 1e-12);
}
