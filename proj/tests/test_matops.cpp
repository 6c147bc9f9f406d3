#include <doctest.h>

#include <cmath>

#include "tcbf/matops.hpp"
#include "tcbf/rng.hpp"

using namespace tcbf;
using mat::Matrix;
using mat::Vector;

namespace {

Matrix random_matrix(Rng& rng, std::size_t n, double scale = 1.0) {
    Matrix m(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) m(r, c) = rng.symmetric(scale);
    return m;
}

Matrix random_spd(Rng& rng, std::size_t n) {
    const Matrix a = random_matrix(rng, n);
    Matrix m = a.transposed() * a;
    for (std::size_t i = 0; i < n; ++i) m(i, i) += 0.5;
    return (m + m.transposed()) * 0.5;
}

}  // namespace

TEST_SUITE("matops") {

TEST_CASE("solve_linear identity returns rhs") {
    const Vector b{3.0, -1.0, 2.5};
    const Vector x = mat::solve_linear(Matrix::identity(3), b);
    for (std::size_t i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(b[i]).epsilon(1e-15));
}

TEST_CASE("solve_linear 2x2 against substitution") {
    const Matrix a(2, 2, {0.0, 1.0, -1.0, -1.0});
    const Vector x = mat::solve_linear(a, Vector{1.0, 0.0});
    CHECK(x[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("solve_linear rejects singular input with pivot index") {
    const Matrix a(2, 2, {1.0, 1.0, 1.0, 1.0});
    CHECK_THROWS_AS((void)mat::solve_linear(a, Vector{1.0, 0.0}), mat::SingularMatrixError);
    try {
        (void)mat::solve_linear(a, Vector{1.0, 0.0});
    } catch (const mat::SingularMatrixError& e) {
        CHECK(e.pivot_index() == 1);
    }
}

TEST_CASE("solve_linear backward residual on random systems") {
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + trial % 6;
        const Matrix a = random_matrix(rng, n, 2.0);
        Vector b(n);
        for (auto& v : b) v = rng.symmetric(2.0);
        Vector x;
        try {
            x = mat::solve_linear(a, b);
        } catch (const mat::SingularMatrixError&) {
            continue;  // random singular draw
        }
        const Vector ax = a * x;
        double resid = 0.0;
        for (std::size_t i = 0; i < n; ++i) resid = std::max(resid, std::abs(ax[i] - b[i]));
        const double bound =
            1e-9 * (a.max_abs() * mat::max_abs(x) + mat::max_abs(b));
        CHECK(resid <= bound);
    }
}

TEST_CASE("sym_eig diagonal and zero matrices") {
    const auto r = mat::sym_eig(Matrix::diag({2.0, 1.0}));
    CHECK(r.eigenvalues[0] == doctest::Approx(1.0));
    CHECK(r.eigenvalues[1] == doctest::Approx(2.0));

    const auto z = mat::sym_eig(Matrix(3, 3));
    for (double ev : z.eigenvalues) CHECK(ev == doctest::Approx(0.0));
}

TEST_CASE("sym_eig 2x2 from characteristic polynomial") {
    // trace 2.5, det 1.25 -> (2.5 +/- sqrt(1.25)) / 2
    const Matrix m(2, 2, {1.5, 0.5, 0.5, 1.0});
    const auto r = mat::sym_eig(m);
    CHECK(r.eigenvalues[0] == doctest::Approx(0.69098300562505258).epsilon(1e-12));
    CHECK(r.eigenvalues[1] == doctest::Approx(1.80901699437494742).epsilon(1e-12));
}

TEST_CASE("sym_eig rejects asymmetric input") {
    Matrix m(2, 2, {1.0, 0.5, 0.0, 1.0});
    CHECK_THROWS_AS((void)mat::sym_eig(m), std::invalid_argument);
}

TEST_CASE("sym_eig reconstruction and orthogonality on random spd") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + trial % 5;
        const Matrix m = random_spd(rng, n);
        const auto r = mat::sym_eig(m);
        const Matrix u = r.eigenvectors;
        Matrix recon(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k)
                    s += u(i, k) * r.eigenvalues[k] * u(j, k);
                recon(i, j) = s;
            }
        CHECK((recon - m).max_abs() <= 1e-9 * std::max(1.0, m.max_abs()));
        CHECK((u.transposed() * u - Matrix::identity(n)).max_abs() <= 1e-9);
    }
}

TEST_CASE("eigen extremes bound the quadratic form") {
    Rng rng(11);
    const Matrix m = random_spd(rng, 6);
    const auto r = mat::sym_eig(m);
    for (int trial = 0; trial < 1000; ++trial) {
        Vector z(6);
        for (auto& v : z) v = rng.symmetric(3.0);
        const double quad = mat::dot(z, m * z);
        const double n2 = mat::dot(z, z);
        CHECK(quad >= r.eigenvalues.front() * n2 - 1e-9);
        CHECK(quad <= r.eigenvalues.back() * n2 + 1e-9);
    }
}

TEST_CASE("cholesky identity and 2x2 factor") {
    CHECK((mat::cholesky(Matrix::identity(3)) - Matrix::identity(3)).max_abs() <= 1e-15);
    const Matrix m(2, 2, {4.0, 2.0, 2.0, 2.0});
    const Matrix l = mat::cholesky(m);
    CHECK(l(0, 0) == doctest::Approx(2.0));
    CHECK(l(1, 0) == doctest::Approx(1.0));
    CHECK(l(1, 1) == doctest::Approx(1.0));
    CHECK((l * l.transposed() - m).max_abs() <= 1e-14);
}

TEST_CASE("cholesky rejects indefinite matrix") {
    const Matrix m(2, 2, {1.0, 2.0, 2.0, 1.0});
    CHECK_THROWS_AS((void)mat::cholesky(m), mat::NotPositiveDefiniteError);
}

TEST_CASE("lyapunov solution for the 1D interface analogue") {
    const Matrix a(2, 2, {0.0, 1.0, -1.0, -1.0});
    const Matrix p = mat::solve_lyapunov(a, Matrix::identity(2));
    CHECK(p(0, 0) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(p(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lyapunov scalar balance A=-I, Q=2I") {
    const Matrix a(2, 2, {-1.0, 0.0, 0.0, -1.0});
    const Matrix p = mat::solve_lyapunov(a, Matrix::identity(2) * 2.0);
    CHECK((p - Matrix::identity(2)).max_abs() <= 1e-12);
}

TEST_CASE("lyapunov rejects non-Hurwitz A and indefinite Q") {
    const Matrix flip(2, 2, {0.0, 1.0, 1.0, 0.0});
    CHECK_THROWS_AS((void)mat::solve_lyapunov(flip, Matrix::identity(2)), std::invalid_argument);
    const Matrix a(2, 2, {0.0, 1.0, -1.0, -1.0});
    const Matrix bad_q(2, 2, {1.0, 2.0, 2.0, 1.0});
    CHECK_THROWS_AS((void)mat::solve_lyapunov(a, bad_q), mat::NotPositiveDefiniteError);
}

TEST_CASE("lyapunov residual and symmetry on random Hurwitz systems") {
    Rng rng(23);
    int built = 0;
    while (built < 20) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform(0.0, 4.99));
        Matrix a = random_matrix(rng, n, 1.5);
        for (std::size_t i = 0; i < n; ++i) a(i, i) -= 2.5;  // push spectrum left
        if (!mat::is_hurwitz(a)) continue;
        const Matrix q = random_spd(rng, n);
        const Matrix p = mat::solve_lyapunov(a, q);
        CHECK((p - p.transposed()).max_abs() <= 1e-12);
        const Matrix resid = a.transposed() * p + p * a + q;
        CHECK(resid.max_abs() <= 1e-9 * q.max_abs());
        CHECK(mat::is_positive_definite(p));
        ++built;
    }
}

TEST_CASE("is_hurwitz analytic 2x2 path and n>2 lyapunov path") {
    CHECK(mat::is_hurwitz(Matrix(2, 2, {0.0, 1.0, -1.0, -1.0})));
    CHECK_FALSE(mat::is_hurwitz(Matrix(2, 2, {0.0, 1.0, 1.0, 0.0})));
    Matrix a(4, 4);
    for (std::size_t i = 0; i < 4; ++i) a(i, i) = -1.0;
    a(0, 1) = 5.0;
    CHECK(mat::is_hurwitz(a));
    a(1, 1) = 1.0;  // unstable mode
    CHECK_FALSE(mat::is_hurwitz(a));
}

TEST_CASE("inverse via solve round-trips") {
    Rng rng(5);
    const Matrix a = random_spd(rng, 4);
    const Matrix inv = mat::inverse(a);
    CHECK((a * inv - Matrix::identity(4)).max_abs() <= 1e-10);
}

}  // TEST_SUITE
