#pragma once

/**
 * @file matrix.hpp
 * @brief Dense matrix and vector algebra over semifield scalars.
 *
 * Matrices are immutable after construction in spirit: operations return new
 * values and never mutate their inputs, so they are safe to share across
 * threads. Storage is dense row-major; the networks this library targets stay
 * small (tens of nodes), so no sparse structure is kept.
 */

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "tropic/semiring.hpp"

namespace tropic {

class Matrix {
public:
    Matrix(int rows, int cols, Semifield k = Semifield::max_plus)
        : rows_(rows), cols_(cols), kind_(k), e_(check_dims(rows, cols), Scalar::zero(k)) {}

    static Matrix zeros(int rows, int cols, Semifield k = Semifield::max_plus) {
        return Matrix(rows, cols, k);
    }

    static Matrix identity(int n, Semifield k = Semifield::max_plus) {
        Matrix m(n, n, k);
        for (int i = 0; i < n; ++i) m.at(i, i) = Scalar::one(k);
        return m;
    }

    static Matrix diagonal(const std::vector<Scalar>& d, Semifield k = Semifield::max_plus) {
        Matrix m(static_cast<int>(d.size()), static_cast<int>(d.size()), k);
        for (std::size_t i = 0; i < d.size(); ++i) m.at(static_cast<int>(i), static_cast<int>(i)) = d[i];
        return m;
    }

    /// Build from IEEE doubles; the kind's zero sentinel (e.g. -inf for
    /// max_plus) maps to the zero element.
    static Matrix from_ieee(const std::vector<std::vector<double>>& rows,
                            Semifield k = Semifield::max_plus) {
        if (rows.empty() || rows[0].empty()) throw ShapeError("matrix must be nonempty");
        Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()), k);
        for (int i = 0; i < m.rows(); ++i) {
            if (static_cast<int>(rows[i].size()) != m.cols())
                throw ShapeError("ragged matrix literal");
            for (int j = 0; j < m.cols(); ++j) {
                double v = rows[i][j];
                m.at(i, j) = std::isfinite(v) ? Scalar::finite(v, k) : Scalar::zero(k);
            }
        }
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    Semifield kind() const { return kind_; }
    bool square() const { return rows_ == cols_; }

    const Scalar& at(int i, int j) const { return e_[static_cast<std::size_t>(i) * cols_ + j]; }
    Scalar& at(int i, int j) { return e_[static_cast<std::size_t>(i) * cols_ + j]; }

    void set(int i, int j, const Scalar& s) {
        if (s.kind() != kind_) throw KindMismatchError("matrix entry of foreign kind");
        e_[static_cast<std::size_t>(i) * cols_ + j] = s;
    }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && kind_ == o.kind_ && e_ == o.e_;
    }
    bool operator!=(const Matrix& o) const { return !(*this == o); }

    Matrix transpose() const {
        Matrix t(cols_, rows_, kind_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
        return t;
    }

    /// Every row has at least one nonzero entry.
    bool regular() const {
        for (int i = 0; i < rows_; ++i) {
            bool any = false;
            for (int j = 0; j < cols_ && !any; ++j) any = !at(i, j).is_zero();
            if (!any) return false;
        }
        return true;
    }

private:
    static std::size_t check_dims(int rows, int cols) {
        if (rows < 1 || cols < 1) throw ShapeError("matrix must be nonempty");
        return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    }

    int rows_, cols_;
    Semifield kind_;
    std::vector<Scalar> e_;
};

/// Column vector; treated as a cols=1 matrix for products.
class Vector {
public:
    explicit Vector(int dim, Semifield k = Semifield::max_plus)
        : kind_(k), e_(check_dim(dim), Scalar::zero(k)) {}

    static Vector from_ieee(const std::vector<double>& v, Semifield k = Semifield::max_plus) {
        Vector x(static_cast<int>(v.size()), k);
        for (std::size_t i = 0; i < v.size(); ++i)
            x[static_cast<int>(i)] = std::isfinite(v[i]) ? Scalar::finite(v[i], k) : Scalar::zero(k);
        return x;
    }

    /// All entries equal to the semiring one.
    static Vector ones(int dim, Semifield k = Semifield::max_plus) {
        Vector x(dim, k);
        for (int i = 0; i < dim; ++i) x[i] = Scalar::one(k);
        return x;
    }

    int dim() const { return static_cast<int>(e_.size()); }
    Semifield kind() const { return kind_; }
    const Scalar& operator[](int i) const { return e_[static_cast<std::size_t>(i)]; }
    Scalar& operator[](int i) { return e_[static_cast<std::size_t>(i)]; }

    bool operator==(const Vector& o) const { return kind_ == o.kind_ && e_ == o.e_; }
    bool operator!=(const Vector& o) const { return !(*this == o); }

    Matrix as_column() const {
        Matrix m(dim(), 1, kind_);
        for (int i = 0; i < dim(); ++i) m.at(i, 0) = e_[static_cast<std::size_t>(i)];
        return m;
    }

private:
    static int check_dim(int d) {
        if (d < 1) throw ShapeError("vector must be nonempty");
        return d;
    }

    Semifield kind_;
    std::vector<Scalar> e_;
};

namespace detail {
inline void require_same_kind(const Matrix& a, const Matrix& b, const char* op) {
    if (a.kind() != b.kind())
        throw KindMismatchError(std::string(op) + ": matrices of different kind");
}
} // namespace detail

/// Entrywise idempotent sum.
inline Matrix mat_add(const Matrix& a, const Matrix& b) {
    detail::require_same_kind(a, b, "mat_add");
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError("mat_add: shape mismatch");
    Matrix r(a.rows(), a.cols(), a.kind());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r.at(i, j) = oplus(a.at(i, j), b.at(i, j));
    return r;
}

/// Semiring matrix product.
inline Matrix mat_mul(const Matrix& a, const Matrix& b) {
    detail::require_same_kind(a, b, "mat_mul");
    if (a.cols() != b.rows()) throw ShapeError("mat_mul: inner dimensions disagree");
    Matrix r(a.rows(), b.cols(), a.kind());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            const Scalar& aik = a.at(i, k);
            if (aik.is_zero()) continue;
            for (int j = 0; j < b.cols(); ++j)
                r.at(i, j) = oplus(r.at(i, j), otimes(aik, b.at(k, j)));
        }
    return r;
}

/// Scalar multiple xA.
inline Matrix scalar_mul(const Scalar& x, const Matrix& a) {
    if (x.kind() != a.kind()) throw KindMismatchError("scalar_mul: kind mismatch");
    Matrix r(a.rows(), a.cols(), a.kind());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r.at(i, j) = otimes(x, a.at(i, j));
    return r;
}

inline Matrix operator+(const Matrix& a, const Matrix& b) { return mat_add(a, b); }
inline Matrix operator*(const Matrix& a, const Matrix& b) { return mat_mul(a, b); }
inline Matrix operator*(const Scalar& x, const Matrix& a) { return scalar_mul(x, a); }

inline Vector mat_vec(const Matrix& a, const Vector& x) {
    if (a.kind() != x.kind()) throw KindMismatchError("mat_vec: kind mismatch");
    if (a.cols() != x.dim()) throw ShapeError("mat_vec: shape mismatch");
    Vector r(a.rows(), a.kind());
    for (int i = 0; i < a.rows(); ++i) {
        Scalar acc = Scalar::zero(a.kind());
        for (int j = 0; j < a.cols(); ++j) acc = oplus(acc, otimes(a.at(i, j), x[j]));
        r[i] = acc;
    }
    return r;
}

inline Vector operator*(const Matrix& a, const Vector& x) { return mat_vec(a, x); }

/// Sum of all entries (the maximum entry in max_plus).
inline Scalar norm(const Matrix& a) {
    Scalar n = Scalar::zero(a.kind());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) n = oplus(n, a.at(i, j));
    return n;
}

inline Scalar norm(const Vector& x) {
    Scalar n = Scalar::zero(x.kind());
    for (int i = 0; i < x.dim(); ++i) n = oplus(n, x[i]);
    return n;
}

/// Sum of the diagonal entries.
inline Scalar trace(const Matrix& a) {
    if (!a.square()) throw ShapeError("trace: matrix not square");
    Scalar t = Scalar::zero(a.kind());
    for (int i = 0; i < a.rows(); ++i) t = oplus(t, a.at(i, i));
    return t;
}

/// k-th power by iterated multiplication, A^0 = I. Iteration (rather than
/// repeated squaring) keeps every intermediate product available to
/// convergence diagnostics.
inline Matrix mat_power(const Matrix& a, long long k) {
    if (!a.square()) throw ShapeError("mat_power: matrix not square");
    if (k < 0) throw DomainError("mat_power: negative exponent");
    Matrix r = Matrix::identity(a.rows(), a.kind());
    for (long long i = 0; i < k; ++i) r = mat_mul(r, a);
    return r;
}

/// u v^T outer product.
inline Matrix outer(const Vector& u, const Vector& v) {
    if (u.kind() != v.kind()) throw KindMismatchError("outer: kind mismatch");
    Matrix r(u.dim(), v.dim(), u.kind());
    for (int i = 0; i < u.dim(); ++i)
        for (int j = 0; j < v.dim(); ++j) r.at(i, j) = otimes(u[i], v[j]);
    return r;
}

/// v^T u, a scalar.
inline Scalar dot(const Vector& v, const Vector& u) {
    if (u.kind() != v.kind()) throw KindMismatchError("dot: kind mismatch");
    if (u.dim() != v.dim()) throw ShapeError("dot: dimension mismatch");
    Scalar acc = Scalar::zero(u.kind());
    for (int i = 0; i < u.dim(); ++i) acc = oplus(acc, otimes(v[i], u[i]));
    return acc;
}

/**
 * Spectral radius (maximum eigenvalue), evaluated by the trace formula
 *
 *   rho(A) = oplus_{m=1..n} tr^{1/m}(A^m),
 *
 * which equals the maximum cycle mean of the weighted digraph of A.
 * An all-zero matrix yields the zero element.
 */
inline Scalar spectral_radius(const Matrix& a) {
    if (!a.square()) throw ShapeError("spectral_radius: matrix not square");
    Scalar rho = Scalar::zero(a.kind());
    Matrix p = Matrix::identity(a.rows(), a.kind());
    for (int m = 1; m <= a.rows(); ++m) {
        p = mat_mul(p, a);
        Scalar t = trace(p);
        if (t.is_zero()) continue;
        // tr^{1/m}: in the plus kinds this is the arithmetic mean tr/m;
        // dividing (rather than multiplying by a rounded 1/m) keeps integer
        // inputs exact.
        Scalar root = is_plus_kind(a.kind())
                          ? Scalar::finite(t.value() / static_cast<double>(m), a.kind())
                          : power(t, 1.0 / m);
        rho = oplus(rho, root);
    }
    return rho;
}

/// Entrywise conversion to another semifield kind.
inline Matrix convert(const Matrix& a, Semifield target) {
    Matrix r(a.rows(), a.cols(), target);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r.at(i, j) = convert(a.at(i, j), target);
    return r;
}

} // namespace tropic
