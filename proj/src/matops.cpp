#include "tcbf/matops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tcbf::mat {

namespace {
constexpr double kPivotTol = 1e-12;
constexpr double kJacobiTol = 1e-12;
constexpr int kJacobiMaxSweeps = 100;
}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> entries)
    : rows_(rows), cols_(cols), a_(entries) {
    if (a_.size() != rows * cols) throw std::invalid_argument("matrix initializer size mismatch");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diag(const Vector& d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

bool Matrix::is_symmetric(double tol) const {
    if (!is_square()) return false;
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = r + 1; c < cols_; ++c)
            if (std::abs((*this)(r, c) - (*this)(c, r)) > tol) return false;
    return true;
}

bool Matrix::all_finite() const {
    return std::all_of(a_.begin(), a_.end(), [](double v) { return std::isfinite(v); });
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
}

Matrix& Matrix::operator+=(const Matrix& o) {
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : a_) v *= s;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matrix product shape mismatch");
    Matrix m(a.rows(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double ark = a(r, k);
            if (ark == 0.0) continue;
            for (std::size_t c = 0; c < b.cols(); ++c) m(r, c) += ark * b(k, c);
        }
    return m;
}

Vector operator*(const Matrix& a, const Vector& x) {
    if (a.cols() != x.size()) throw std::invalid_argument("matrix-vector shape mismatch");
    Vector y(a.rows(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < a.cols(); ++c) s += a(r, c) * x[c];
        y[r] = s;
    }
    return y;
}

double max_abs(const Vector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double dot(const Vector& a, const Vector& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

namespace {

struct Lu {
    Matrix lu;
    std::vector<std::size_t> perm;
};

Lu lu_factor(const Matrix& a) {
    if (!a.is_square()) throw std::invalid_argument("solve_linear requires a square matrix");
    const std::size_t n = a.rows();
    Lu f{a, std::vector<std::size_t>(n)};
    std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(f.lu(k, k));
        for (std::size_t r = k + 1; r < n; ++r) {
            const double v = std::abs(f.lu(r, k));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best <= kPivotTol) throw SingularMatrixError(k, best);
        if (piv != k) {
            for (std::size_t c = 0; c < n; ++c) std::swap(f.lu(k, c), f.lu(piv, c));
            std::swap(f.perm[k], f.perm[piv]);
        }
        for (std::size_t r = k + 1; r < n; ++r) {
            const double m = f.lu(r, k) / f.lu(k, k);
            f.lu(r, k) = m;
            for (std::size_t c = k + 1; c < n; ++c) f.lu(r, c) -= m * f.lu(k, c);
        }
    }
    return f;
}

Vector lu_solve(const Lu& f, const Vector& b) {
    const std::size_t n = f.perm.size();
    Vector y(n);
    for (std::size_t r = 0; r < n; ++r) {
        double s = b[f.perm[r]];
        for (std::size_t c = 0; c < r; ++c) s -= f.lu(r, c) * y[c];
        y[r] = s;
    }
    for (std::size_t ri = n; ri-- > 0;) {
        double s = y[ri];
        for (std::size_t c = ri + 1; c < n; ++c) s -= f.lu(ri, c) * y[c];
        y[ri] = s / f.lu(ri, ri);
    }
    return y;
}

}  // namespace

Vector solve_linear(const Matrix& a, const Vector& b) {
    if (b.size() != a.rows()) throw std::invalid_argument("solve_linear rhs size mismatch");
    return lu_solve(lu_factor(a), b);
}

Matrix solve_linear(const Matrix& a, const Matrix& b) {
    if (b.rows() != a.rows()) throw std::invalid_argument("solve_linear rhs shape mismatch");
    const Lu f = lu_factor(a);
    Matrix x(a.cols(), b.cols());
    Vector col(b.rows());
    for (std::size_t c = 0; c < b.cols(); ++c) {
        for (std::size_t r = 0; r < b.rows(); ++r) col[r] = b(r, c);
        const Vector xc = lu_solve(f, col);
        for (std::size_t r = 0; r < xc.size(); ++r) x(r, c) = xc[r];
    }
    return x;
}

Matrix inverse(const Matrix& a) { return solve_linear(a, Matrix::identity(a.rows())); }

Matrix cholesky(const Matrix& m) {
    if (!m.is_symmetric()) throw std::invalid_argument("cholesky requires a symmetric matrix");
    const std::size_t n = m.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= 0.0 || !std::isfinite(d)) throw NotPositiveDefiniteError(j);
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

bool is_positive_definite(const Matrix& m) {
    try {
        cholesky(m);
        return true;
    } catch (const NotPositiveDefiniteError&) {
        return false;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

SymEigResult sym_eig(const Matrix& m) {
    if (!m.is_square() || !m.is_symmetric(1e-12))
        throw std::invalid_argument("sym_eig requires a symmetric matrix (tol 1e-12)");
    const std::size_t n = m.rows();
    Matrix a = m;
    Matrix v = Matrix::identity(n);
    const double scale = std::max(1.0, m.max_abs());

    for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= kJacobiTol * scale) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= kJacobiTol * scale * 1e-3) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

    SymEigResult res;
    res.eigenvalues.resize(n);
    res.eigenvectors = Matrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        res.eigenvalues[c] = a(order[c], order[c]);
        for (std::size_t r = 0; r < n; ++r) res.eigenvectors(r, c) = v(r, order[c]);
    }
    return res;
}

bool is_hurwitz(const Matrix& a) {
    if (!a.is_square()) throw std::invalid_argument("is_hurwitz requires a square matrix");
    const std::size_t n = a.rows();
    if (n == 1) return a(0, 0) < 0.0;
    if (n == 2) {
        const double tr = a(0, 0) + a(1, 1);
        const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        return tr < 0.0 && det > 0.0;
    }
    // A'X + XA = -I is solvable with X > 0 iff A is Hurwitz.
    try {
        const Matrix at = a.transposed();
        const Matrix m = kron(Matrix::identity(n), at) + kron(at, Matrix::identity(n));
        Vector rhs(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) rhs[i * n + i] = -1.0;  // -vec(I)
        const Vector x = solve_linear(m, rhs);
        Matrix p(n, n);
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t r = 0; r < n; ++r) p(r, c) = x[c * n + r];
        Matrix ps = (p + p.transposed()) * 0.5;
        return is_positive_definite(ps);
    } catch (const SingularMatrixError&) {
        return false;  // some eigenvalue pair sums to zero
    }
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ar = 0; ar < a.rows(); ++ar)
        for (std::size_t ac = 0; ac < a.cols(); ++ac) {
            const double v = a(ar, ac);
            if (v == 0.0) continue;
            for (std::size_t br = 0; br < b.rows(); ++br)
                for (std::size_t bc = 0; bc < b.cols(); ++bc)
                    k(ar * b.rows() + br, ac * b.cols() + bc) = v * b(br, bc);
        }
    return k;
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
    if (!a.is_square()) throw std::invalid_argument("solve_lyapunov requires a square A");
    if (!q.is_symmetric(1e-12)) throw std::invalid_argument("solve_lyapunov requires symmetric Q");
    if (!is_positive_definite(q)) throw NotPositiveDefiniteError(0);
    if (!is_hurwitz(a)) throw std::invalid_argument("solve_lyapunov requires Hurwitz A");

    const std::size_t n = a.rows();
    const Matrix at = a.transposed();
    // Column-major vec: vec(A'P) = (I (x) A') vec(P), vec(PA) = (A' (x) I) vec(P).
    const Matrix m = kron(Matrix::identity(n), at) + kron(at, Matrix::identity(n));
    Vector rhs(n * n);
    for (std::size_t c = 0; c < n; ++c)
        for (std::size_t r = 0; r < n; ++r) rhs[c * n + r] = -q(r, c);
    const Vector x = solve_linear(m, rhs);
    Matrix p(n, n);
    for (std::size_t c = 0; c < n; ++c)
        for (std::size_t r = 0; r < n; ++r) p(r, c) = x[c * n + r];
    return (p + p.transposed()) * 0.5;
}

}  // namespace tcbf::mat
