#pragma once

#include <cstddef>
#include <vector>

#include "p2p/errors.hpp"

namespace p2p {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. All pool matrices are tiny (n <= ~16),
/// so the implementation favors clarity and numerical robustness over speed.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(const Vector& d);

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    Vector row(std::size_t i) const;
    Vector diagonal_entries() const;

    const std::vector<double>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Vector operator*(const Matrix& a, const Vector& x);
Matrix transpose(const Matrix& a);
Matrix outer(const Vector& a, const Vector& b);

// Small vector helpers; Vector is a plain std::vector<double> so these are
// named functions rather than operators.
Vector ones(std::size_t n);
Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);
Vector scaled(const Vector& a, double s);
Vector hadamard(const Vector& a, const Vector& b);
double dot(const Vector& a, const Vector& b);
double inf_norm(const Vector& a);
double inf_norm(const Matrix& a);
double sum(const Vector& a);

bool is_symmetric(const Matrix& m, double rel_tol = 1e-10);

/// Lower-triangular Cholesky factor L with L L^T = m.
/// Throws NotSymmetricError, or NotPositiveDefiniteError when a pivot falls
/// below the absolute tolerance 1e-12 (the failing pivot index is attached).
Matrix cholesky(const Matrix& m);

/// Solve m x = b by LU with partial pivoting (pivot tolerance 1e-12).
Vector solve(const Matrix& m, const Vector& b);
Matrix solve(const Matrix& m, const Matrix& b);

/// Inverse realized as a solve against identity columns.
Matrix inverse(const Matrix& m);

double determinant(const Matrix& m);

struct EigenDecomposition {
    Vector values;   // ascending
    Matrix vectors;  // column j pairs with values[j]
};

/// Cyclic Jacobi diagonalization for symmetric matrices. Sweeps until the
/// off-diagonal Frobenius norm drops below 1e-10 * ||m||_F (at most 100 sweeps).
EigenDecomposition eigen_sym(const Matrix& m);

struct MatrixNorms {
    double inf_norm;                // max absolute row sum
    double diag_dominance_margin;   // min_i (m_ii - sum_{j != i} |m_ij|), may be negative
};

MatrixNorms norms(const Matrix& m);

}  // namespace p2p
