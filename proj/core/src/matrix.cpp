#include "p2p/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace p2p {

namespace {

constexpr double kPivotTol = 1e-12;

void require(bool cond, const char* what) {
    if (!cond) throw DimensionError(what);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(const Vector& d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

Vector Matrix::row(std::size_t i) const {
    return Vector(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                  data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
}

Vector Matrix::diagonal_entries() const {
    Vector d(std::min(rows_, cols_));
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (*this)(i, i);
    return d;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix sum: shape mismatch");
    Matrix r(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) + b(i, j);
    return r;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix difference: shape mismatch");
    Matrix r(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) - b(i, j);
    return r;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), "matrix product: inner dimension mismatch");
    Matrix r(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t l = 0; l < a.cols(); ++l) {
            const double ail = a(i, l);
            if (ail == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += ail * b(l, j);
        }
    return r;
}

Matrix operator*(double s, const Matrix& a) {
    Matrix r(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = s * a(i, j);
    return r;
}

Vector operator*(const Matrix& a, const Vector& x) {
    require(a.cols() == x.size(), "matrix-vector product: dimension mismatch");
    Vector r(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r[i] += a(i, j) * x[j];
    return r;
}

Matrix transpose(const Matrix& a) {
    Matrix r(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r(j, i) = a(i, j);
    return r;
}

Matrix outer(const Vector& a, const Vector& b) {
    Matrix r(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r(i, j) = a[i] * b[j];
    return r;
}

Vector ones(std::size_t n) { return Vector(n, 1.0); }

Vector add(const Vector& a, const Vector& b) {
    require(a.size() == b.size(), "vector sum: length mismatch");
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

Vector sub(const Vector& a, const Vector& b) {
    require(a.size() == b.size(), "vector difference: length mismatch");
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

Vector scaled(const Vector& a, double s) {
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
    return r;
}

Vector hadamard(const Vector& a, const Vector& b) {
    require(a.size() == b.size(), "componentwise product: length mismatch");
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * b[i];
    return r;
}

double dot(const Vector& a, const Vector& b) {
    require(a.size() == b.size(), "dot product: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double inf_norm(const Vector& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

double inf_norm(const Matrix& a) {
    double m = 0.0;
    for (const double v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

double sum(const Vector& a) { return std::accumulate(a.begin(), a.end(), 0.0); }

bool is_symmetric(const Matrix& m, double rel_tol) {
    if (!m.square()) return false;
    double scale = std::max(1.0, inf_norm(m));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j)
            if (std::abs(m(i, j) - m(j, i)) > rel_tol * scale) return false;
    return true;
}

Matrix cholesky(const Matrix& m) {
    if (!m.square()) throw DimensionError("cholesky: matrix not square");
    if (!is_symmetric(m)) throw NotSymmetricError("cholesky: matrix not symmetric");
    const std::size_t n = m.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= kPivotTol) {
            throw NotPositiveDefiniteError(
                "cholesky: pivot " + std::to_string(j) + " is " + std::to_string(d), j);
        }
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

namespace {

// LU with partial pivoting, factored in place. perm holds the row order.
struct Lu {
    Matrix lu;
    std::vector<std::size_t> perm;
    int sign = 1;
};

Lu lu_factor(const Matrix& m) {
    if (!m.square()) throw DimensionError("solve: matrix not square");
    const std::size_t n = m.rows();
    Lu f{m, std::vector<std::size_t>(n)};
    for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(f.lu(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(f.lu(i, k)) > best) {
                best = std::abs(f.lu(i, k));
                piv = i;
            }
        }
        if (best <= kPivotTol) {
            throw SingularMatrixError(
                "solve: pivot " + std::to_string(k) + " below tolerance", k);
        }
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(piv, j));
            std::swap(f.perm[k], f.perm[piv]);
            f.sign = -f.sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            f.lu(i, k) /= f.lu(k, k);
            const double lik = f.lu(i, k);
            for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= lik * f.lu(k, j);
        }
    }
    return f;
}

Vector lu_solve(const Lu& f, const Vector& b) {
    const std::size_t n = f.perm.size();
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t j = ii + 1; j < n; ++j) x[ii] -= f.lu(ii, j) * x[j];
        x[ii] /= f.lu(ii, ii);
    }
    return x;
}

}  // namespace

Vector solve(const Matrix& m, const Vector& b) {
    if (m.rows() != b.size()) throw DimensionError("solve: right-hand side length mismatch");
    return lu_solve(lu_factor(m), b);
}

Matrix solve(const Matrix& m, const Matrix& b) {
    if (m.rows() != b.rows()) throw DimensionError("solve: right-hand side shape mismatch");
    const Lu f = lu_factor(m);
    Matrix x(b.rows(), b.cols());
    Vector col(b.rows());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        for (std::size_t i = 0; i < b.rows(); ++i) col[i] = b(i, j);
        Vector xc = lu_solve(f, col);
        for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = xc[i];
    }
    return x;
}

Matrix inverse(const Matrix& m) { return solve(m, Matrix::identity(m.rows())); }

double determinant(const Matrix& m) {
    const Lu f = lu_factor(m);
    double d = f.sign;
    for (std::size_t i = 0; i < m.rows(); ++i) d *= f.lu(i, i);
    return d;
}

EigenDecomposition eigen_sym(const Matrix& m) {
    if (!m.square()) throw DimensionError("eigen_sym: matrix not square");
    if (!is_symmetric(m)) throw NotSymmetricError("eigen_sym: matrix not symmetric");
    const std::size_t n = m.rows();
    Matrix a = m;
    Matrix v = Matrix::identity(n);

    double frob = 0.0;
    for (const double x : m.data()) frob += x * x;
    frob = std::sqrt(frob);
    const double target = 1e-10 * frob;

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    constexpr int kMaxSweeps = 100;
    int sweep = 0;
    while (off_norm() > target) {
        if (++sweep > kMaxSweeps) {
            throw ConvergenceError("eigen_sym: no convergence after 100 sweeps");
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    const double apj = a(p, j), aqj = a(q, j);
                    a(p, j) = c * apj - s * aqj;
                    a(q, j) = s * apj + c * aqj;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

    EigenDecomposition out{Vector(n), Matrix(n, n)};
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

MatrixNorms norms(const Matrix& m) {
    if (!m.square()) throw DimensionError("norms: matrix not square");
    double nrm = 0.0;
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double row_abs = 0.0, off_abs = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            row_abs += std::abs(m(i, j));
            if (i != j) off_abs += std::abs(m(i, j));
        }
        nrm = std::max(nrm, row_abs);
        margin = std::min(margin, m(i, i) - off_abs);
    }
    return {nrm, margin};
}

}  // namespace p2p
