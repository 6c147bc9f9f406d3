#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace tcbf::mat {

using Vector = std::vector<double>;

/// Raised by the linear solver when partial pivoting cannot find a usable pivot.
class SingularMatrixError : public std::runtime_error {
public:
    SingularMatrixError(std::size_t pivot_index, double pivot_value)
        : std::runtime_error("singular matrix: pivot " + std::to_string(pivot_index) +
                             " has magnitude " + std::to_string(pivot_value)),
          pivot_index_(pivot_index) {}
    std::size_t pivot_index() const noexcept { return pivot_index_; }

private:
    std::size_t pivot_index_;
};

/// Raised by Cholesky when the input is not positive definite. Besides plain
/// factorization failures this is how certificate invalidity shows up.
class NotPositiveDefiniteError : public std::runtime_error {
public:
    explicit NotPositiveDefiniteError(std::size_t index)
        : std::runtime_error("matrix not positive definite (failed at diagonal " +
                             std::to_string(index) + ")"),
          index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Dense row-major matrix. Everything in this project is tiny (n <= ~300 for
/// the trajectory KKT systems, n <= 6 for certificates), so no attempt is made
/// at blocking or sparsity.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}
    Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> entries);

    static Matrix identity(std::size_t n);
    static Matrix diag(const Vector& d);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

    Matrix transposed() const;
    bool is_square() const noexcept { return rows_ == cols_; }
    bool is_symmetric(double tol = 1e-12) const;
    bool all_finite() const;

    /// Largest absolute entry. Used for all the residual bounds in this module.
    double max_abs() const;

    Matrix& operator+=(const Matrix& o);
    Matrix& operator-=(const Matrix& o);
    Matrix& operator*=(double s);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> a_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, const Vector& x);

double max_abs(const Vector& v);
double dot(const Vector& a, const Vector& b);

/// Solve A x = b by LU with partial pivoting. Pivots with magnitude <= 1e-12
/// raise SingularMatrixError carrying the offending pivot index.
Vector solve_linear(const Matrix& a, const Vector& b);

/// Multi-RHS variant; columns of B solved independently against one factorization.
Matrix solve_linear(const Matrix& a, const Matrix& b);

Matrix inverse(const Matrix& a);

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
Matrix cholesky(const Matrix& m);

bool is_positive_definite(const Matrix& m);

struct SymEigResult {
    Vector eigenvalues;   // ascending
    Matrix eigenvectors;  // orthonormal columns, matching order
};

/// Cyclic Jacobi sweeps; off-diagonal threshold 1e-12 (relative to the matrix
/// scale), at most 100 sweeps. Input must be symmetric within 1e-12.
SymEigResult sym_eig(const Matrix& m);

/// Stability test without a Schur decomposition: analytic eigenvalues for
/// n <= 2, otherwise Lyapunov solvability with Q = I plus a PD check.
bool is_hurwitz(const Matrix& a);

/// Unique P > 0 with A'P + PA = -Q for Hurwitz A and symmetric PD Q.
/// Solved as the (n^2 x n^2) Kronecker linear system.
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace tcbf::mat
