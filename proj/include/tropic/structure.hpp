#pragma once

/**
 * @file structure.hpp
 * @brief Classification of special matrix types and skeleton decompositions.
 *
 * Covers the shapes with known Lyapunov closed forms: diagonal, triangular
 * (possibly after a simultaneous row/column permutation), similarity and
 * rank-1 matrices, plus skeleton factorizations A = B C with inner dimension
 * below n. Both numeric matrices and symbolic expression matrices are
 * handled; the symbolic side is what the decomposition evaluator consumes.
 */

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "tropic/expr.hpp"
#include "tropic/matrix.hpp"

namespace tropic {

// ---------------------------------------------------------------------------
// zero-pattern helpers (shared by the numeric and the symbolic sides)
// ---------------------------------------------------------------------------

enum class TriangularForm { lower, upper, permuted, none };

struct TrianglePattern {
    TriangularForm form = TriangularForm::none;
    std::vector<int> perm;  // node order making the matrix lower triangular
};

namespace detail {

/// Triangularity of a finite-entry mask, up to simultaneous permutation.
/// An off-diagonal finite entry (i, j) forces position(i) > position(j); the
/// required order exists iff that digraph is acyclic (Kahn, smallest first).
inline TrianglePattern triangular_pattern(const std::vector<std::vector<bool>>& finite) {
    const int n = static_cast<int>(finite.size());
    bool lower = true, upper = true;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (!finite[i][j] || i == j) continue;
            if (j > i) lower = false;
            if (j < i) upper = false;
        }
    if (lower) return {TriangularForm::lower, {}};
    if (upper) return {TriangularForm::upper, {}};

    std::vector<int> indegree(n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && finite[i][j]) ++indegree[i];  // edge j -> i
    std::vector<int> order;
    std::vector<bool> done(n, false);
    for (int step = 0; step < n; ++step) {
        int pick = -1;
        for (int v = 0; v < n && pick < 0; ++v)
            if (!done[v] && indegree[v] == 0) pick = v;
        if (pick < 0) return {TriangularForm::none, {}};
        done[pick] = true;
        order.push_back(pick);
        for (int i = 0; i < n; ++i)
            if (i != pick && !done[i] && finite[i][pick]) --indegree[i];
    }
    return {TriangularForm::permuted, order};
}

inline bool approx_eq(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace detail

// ---------------------------------------------------------------------------
// numeric classification
// ---------------------------------------------------------------------------

struct MatrixClass {
    enum class Tag {
        diagonal,
        triangular_lower,
        triangular_upper,
        triangular_permuted,
        similarity,
        rank_one,
        general
    };

    Tag tag = Tag::general;
    std::vector<int> perm;                             // triangular_permuted
    Scalar alpha = Scalar::zero(Semifield::max_plus);  // similarity coefficient
    std::optional<std::pair<Vector, Vector>> factors;  // rank-1 u, v

    bool is_triangular() const {
        return tag == Tag::diagonal || tag == Tag::triangular_lower ||
               tag == Tag::triangular_upper || tag == Tag::triangular_permuted;
    }
};

inline std::vector<std::vector<bool>> finite_mask(const Matrix& a) {
    std::vector<std::vector<bool>> m(a.rows(), std::vector<bool>(a.cols(), false));
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) m[i][j] = !a.at(i, j).is_zero();
    return m;
}

/**
 * Rank-1 factorization A = u v^T, or nothing when none exists. The finite
 * entries must form a row/column cross pattern and all 2x2 minors must be
 * balanced: a_ij + a_kl = a_il + a_kj within the relative tolerance.
 * u is normalized so its first finite entry is the semiring one.
 */
inline std::optional<std::pair<Vector, Vector>> rank_one_factorize(const Matrix& a,
                                                                   double tol = 1e-9) {
    const int n = a.rows(), m = a.cols();
    std::vector<int> rset, cset;
    std::vector<bool> rfin(n, false);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (!a.at(i, j).is_zero()) rfin[i] = true;
    for (int i = 0; i < n; ++i)
        if (rfin[i]) rset.push_back(i);
    if (rset.empty()) return std::nullopt;
    for (int j = 0; j < m; ++j)
        if (!a.at(rset[0], j).is_zero()) cset.push_back(j);
    // cross pattern: finite exactly on rset x cset
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            bool expect = rfin[i] && std::binary_search(cset.begin(), cset.end(), j);
            if (a.at(i, j).is_zero() == expect) return std::nullopt;
        }
    const int i0 = rset[0], j0 = cset[0];
    const double pivot = a.at(i0, j0).value();
    Vector u(n), v(m);
    for (int i : rset) u[i] = Scalar::finite(a.at(i, j0).value() - pivot);
    for (int j : cset) v[j] = a.at(i0, j);
    for (int i : rset)
        for (int j : cset)
            if (!detail::approx_eq(u[i].value() + v[j].value(), a.at(i, j).value(), tol))
                return std::nullopt;
    return std::make_pair(u, v);
}

/**
 * Most specific class of a square matrix, in the priority order
 * diagonal > triangular > similarity > rank-1 > general. Zero-pattern tests
 * are exact; similarity/rank-1 value equality uses a relative tolerance.
 */
inline MatrixClass classify(const Matrix& a, double tol = 1e-9) {
    if (!a.square()) throw ShapeError("classify: matrix not square");
    const int n = a.rows();
    MatrixClass out;

    bool diag = true;
    for (int i = 0; i < n && diag; ++i)
        for (int j = 0; j < n && diag; ++j)
            if (i != j && !a.at(i, j).is_zero()) diag = false;
    if (diag) {
        out.tag = MatrixClass::Tag::diagonal;
        return out;
    }

    TrianglePattern tp = detail::triangular_pattern(finite_mask(a));
    if (tp.form != TriangularForm::none) {
        out.tag = tp.form == TriangularForm::lower   ? MatrixClass::Tag::triangular_lower
                  : tp.form == TriangularForm::upper ? MatrixClass::Tag::triangular_upper
                                                     : MatrixClass::Tag::triangular_permuted;
        out.perm = tp.perm;
        return out;
    }

    // similarity: every column maximum equals the coefficient
    bool sim = true;
    Scalar alpha = Scalar::zero(a.kind());
    for (int j = 0; j < n && sim; ++j) {
        Scalar colmax = Scalar::zero(a.kind());
        for (int i = 0; i < n; ++i) colmax = oplus(colmax, a.at(i, j));
        if (colmax.is_zero()) {
            sim = false;
        } else if (j == 0) {
            alpha = colmax;
        } else {
            sim = detail::approx_eq(colmax.value(), alpha.value(), tol);
        }
    }
    if (sim) {
        out.tag = MatrixClass::Tag::similarity;
        out.alpha = alpha;
        return out;
    }

    if (auto f = rank_one_factorize(a, tol)) {
        out.tag = MatrixClass::Tag::rank_one;
        out.factors = std::move(f);
        return out;
    }
    return out;
}

// ---------------------------------------------------------------------------
// numeric skeleton decomposition
// ---------------------------------------------------------------------------

struct SkeletonDecomposition {
    Matrix b;  // n x r
    Matrix c;  // r x n
    bool backward_triangular = false;
};

namespace detail {

/// Residuated coefficients expressing target column t by the given columns:
/// x_s = min_i (t_i - a_is) over rows where a_is is finite. The combination
/// oplus_s x_s (x) col_s is the largest column <= t; equality means success.
inline std::vector<Scalar> residuate_columns(const Matrix& a, const std::vector<int>& cols,
                                             const std::vector<Scalar>& target) {
    std::vector<Scalar> x;
    x.reserve(cols.size());
    for (int s : cols) {
        bool any = false, forced_zero = false;
        double best = 0.0;
        for (int i = 0; i < a.rows(); ++i) {
            if (a.at(i, s).is_zero()) continue;
            if (target[static_cast<std::size_t>(i)].is_zero()) {
                forced_zero = true;
                break;
            }
            double q = target[static_cast<std::size_t>(i)].value() - a.at(i, s).value();
            best = any ? std::min(best, q) : q;
            any = true;
        }
        x.push_back(!any || forced_zero ? Scalar::zero(a.kind()) : Scalar::finite(best, a.kind()));
    }
    return x;
}

inline std::vector<Scalar> column_of(const Matrix& a, int j) {
    std::vector<Scalar> t;
    t.reserve(a.rows());
    for (int i = 0; i < a.rows(); ++i) t.push_back(a.at(i, j));
    return t;
}

inline bool combination_matches(const Matrix& a, const std::vector<int>& cols,
                                const std::vector<Scalar>& x, const std::vector<Scalar>& target,
                                double tol) {
    for (int i = 0; i < a.rows(); ++i) {
        Scalar r = Scalar::zero(a.kind());
        for (std::size_t s = 0; s < cols.size(); ++s) r = oplus(r, otimes(x[s], a.at(i, cols[s])));
        const Scalar& t = target[static_cast<std::size_t>(i)];
        if (r.is_zero() != t.is_zero()) return false;
        if (!r.is_zero() && !approx_eq(r.value(), t.value(), tol)) return false;
    }
    return true;
}

/// Zero out coefficients that are not needed for the combination to match;
/// keeps factors as sparse as residuation allows.
inline void minimize_coefficients(const Matrix& a, const std::vector<int>& cols,
                                  std::vector<Scalar>& x, const std::vector<Scalar>& target,
                                  double tol) {
    for (std::size_t s = 0; s < x.size(); ++s) {
        if (x[s].is_zero()) continue;
        Scalar saved = x[s];
        x[s] = Scalar::zero(a.kind());
        if (!combination_matches(a, cols, x, target, tol)) x[s] = saved;
    }
}

} // namespace detail

/**
 * Greedy column-basis skeleton decomposition A = B C with inner dimension
 * r < n: scan columns left to right, dropping each column that is a tropical
 * linear combination of the others (coefficients by residuation, then
 * verified). B keeps the basis columns, C holds the coefficients. Returns
 * nothing when no column is redundant. The backward_triangular flag reports
 * whether C B is triangular up to a simultaneous permutation.
 */
inline std::optional<SkeletonDecomposition> skeleton_decompose(const Matrix& a,
                                                               double tol = 1e-9) {
    if (!a.square()) throw ShapeError("skeleton_decompose: matrix not square");
    const int n = a.rows();
    std::vector<int> basis(n);
    std::iota(basis.begin(), basis.end(), 0);
    for (int j = 0; j < n; ++j) {
        auto it = std::find(basis.begin(), basis.end(), j);
        if (it == basis.end()) continue;
        std::vector<int> others;
        for (int s : basis)
            if (s != j) others.push_back(s);
        if (others.empty()) continue;
        auto target = detail::column_of(a, j);
        auto x = detail::residuate_columns(a, others, target);
        if (detail::combination_matches(a, others, x, target, tol)) basis.erase(it);
    }
    const int r = static_cast<int>(basis.size());
    if (r == n) return std::nullopt;

    Matrix b(n, r, a.kind());
    for (int i = 0; i < n; ++i)
        for (int s = 0; s < r; ++s) b.at(i, s) = a.at(i, basis[static_cast<std::size_t>(s)]);
    Matrix c(r, n, a.kind());
    for (int j = 0; j < n; ++j) {
        auto pos = std::find(basis.begin(), basis.end(), j);
        if (pos != basis.end()) {
            c.at(static_cast<int>(pos - basis.begin()), j) = Scalar::one(a.kind());
            continue;
        }
        auto target = detail::column_of(a, j);
        auto x = detail::residuate_columns(a, basis, target);
        if (!detail::combination_matches(a, basis, x, target, tol)) return std::nullopt;
        detail::minimize_coefficients(a, basis, x, target, tol);
        for (int s = 0; s < r; ++s) c.at(s, j) = x[static_cast<std::size_t>(s)];
    }

    SkeletonDecomposition d{b, c, false};
    d.backward_triangular =
        detail::triangular_pattern(finite_mask(mat_mul(c, b))).form != TriangularForm::none;
    return d;
}

/// True iff C B is triangular, possibly after a simultaneous permutation.
inline bool is_backward_triangular(const SkeletonDecomposition& d) {
    return detail::triangular_pattern(finite_mask(mat_mul(d.c, d.b))).form !=
           TriangularForm::none;
}

// ---------------------------------------------------------------------------
// symbolic classification
// ---------------------------------------------------------------------------

struct SymMatrixClass {
    MatrixClass::Tag tag = MatrixClass::Tag::general;
    std::vector<int> perm;
    Expr alpha;                                                // similarity coefficient
    std::optional<std::pair<std::vector<Expr>, std::vector<Expr>>> factors;  // rank-1 u, v

    bool is_triangular() const {
        return tag == MatrixClass::Tag::diagonal || tag == MatrixClass::Tag::triangular_lower ||
               tag == MatrixClass::Tag::triangular_upper ||
               tag == MatrixClass::Tag::triangular_permuted;
    }
};

inline std::vector<std::vector<bool>> finite_mask(const ExprMatrix& a) {
    std::vector<std::vector<bool>> m(a.rows(), std::vector<bool>(a.cols(), false));
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) m[i][j] = !a.at(i, j).is_zero();
    return m;
}

namespace detail {

inline std::optional<std::pair<std::vector<Expr>, std::vector<Expr>>> sym_rank_one(
    const ExprMatrix& a) {
    const int n = a.rows(), m = a.cols();
    std::vector<int> rset, cset;
    std::vector<bool> rfin(n, false);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (!a.at(i, j).is_zero()) rfin[i] = true;
    for (int i = 0; i < n; ++i)
        if (rfin[i]) rset.push_back(i);
    if (rset.empty()) return std::nullopt;
    for (int j = 0; j < m; ++j)
        if (!a.at(rset[0], j).is_zero()) cset.push_back(j);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            bool expect = rfin[i] && std::binary_search(cset.begin(), cset.end(), j);
            if (a.at(i, j).is_zero() == expect) return std::nullopt;
        }
    const int i0 = rset[0];
    // pivot column whose anchor entry is a monomial, so rows divide cleanly
    for (int j0 : cset) {
        const Expr& pivot = a.at(i0, j0);
        if (!pivot.is_monomial()) continue;
        std::vector<Expr> u(n), v(m);
        for (int i : rset) u[static_cast<std::size_t>(i)] =
            a.at(i, j0).div_monomial(pivot.monomials()[0]);
        for (int j : cset) v[static_cast<std::size_t>(j)] = a.at(i0, j);
        bool ok = true;
        for (int i : rset)
            for (int j : cset)
                if (otimes(u[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]) !=
                    a.at(i, j)) {
                    ok = false;
                    break;
                }
        if (ok) return std::make_pair(u, v);
    }
    return std::nullopt;
}

} // namespace detail

/// Classification of a symbolic matrix: structural zero-pattern plus exact
/// normal-form value identities.
inline SymMatrixClass sym_classify(const ExprMatrix& a) {
    if (!a.square()) throw ShapeError("sym_classify: matrix not square");
    const int n = a.rows();
    SymMatrixClass out;

    bool diag = true;
    for (int i = 0; i < n && diag; ++i)
        for (int j = 0; j < n && diag; ++j)
            if (i != j && !a.at(i, j).is_zero()) diag = false;
    if (diag) {
        out.tag = MatrixClass::Tag::diagonal;
        return out;
    }

    TrianglePattern tp = detail::triangular_pattern(finite_mask(a));
    if (tp.form != TriangularForm::none) {
        out.tag = tp.form == TriangularForm::lower   ? MatrixClass::Tag::triangular_lower
                  : tp.form == TriangularForm::upper ? MatrixClass::Tag::triangular_upper
                                                     : MatrixClass::Tag::triangular_permuted;
        out.perm = tp.perm;
        return out;
    }

    bool sim = true;
    Expr alpha;
    for (int j = 0; j < n && sim; ++j) {
        Expr colmax;
        for (int i = 0; i < n; ++i) colmax = oplus(colmax, a.at(i, j));
        if (colmax.is_zero())
            sim = false;
        else if (j == 0)
            alpha = colmax;
        else
            sim = (colmax == alpha);
    }
    if (sim) {
        out.tag = MatrixClass::Tag::similarity;
        out.alpha = alpha;
        return out;
    }

    if (auto f = detail::sym_rank_one(a)) {
        out.tag = MatrixClass::Tag::rank_one;
        out.factors = std::move(f);
        return out;
    }
    return out;
}

// ---------------------------------------------------------------------------
// symbolic skeleton decomposition
// ---------------------------------------------------------------------------

struct SymSkeleton {
    ExprMatrix b;  // n x r
    ExprMatrix c;  // r x n
    bool from_rows = false;  // found by the row-basis (transposed) route
};

namespace detail {

/// Best coefficient x with x (x) source <= target found inside the monomial-
/// combination hypothesis class: candidate monomials are quotients of target
/// terms by source terms, filtered by the exact domination test and joined
/// by oplus. Returns the zero expression when nothing fits.
inline Expr sym_residual_coefficient(const std::vector<Expr>& source,
                                     const std::vector<Expr>& target) {
    const std::size_t n = source.size();
    for (std::size_t i = 0; i < n; ++i)
        if (!source[i].is_zero() && target[i].is_zero()) return Expr::zero();

    std::vector<Monomial> candidates;
    for (std::size_t i = 0; i < n; ++i) {
        if (source[i].is_zero()) continue;
        for (const Monomial& ms : source[i].monomials())
            for (const Monomial& mt : target[i].monomials()) {
                Expr q = Expr::from_monomials({mt}).div_monomial(ms);
                const Monomial& cand = q.monomials()[0];
                // only service-time products qualify as factor entries;
                // inverse powers would couple the factors
                bool nonneg = true;
                for (const auto& [leaf, e] : cand.pows) nonneg &= e >= 0;
                if (nonneg) candidates.push_back(cand);
            }
    }
    Expr x;
    for (const Monomial& cand : candidates) {
        Expr mu = Expr::from_monomials({cand});
        bool fits = true;
        for (std::size_t i = 0; i < n && fits; ++i)
            fits = expr_leq(otimes(mu, source[i]), target[i]);
        if (fits) x = oplus(x, mu);
    }
    return x;
}

inline std::vector<Expr> sym_column(const ExprMatrix& a, int j) {
    std::vector<Expr> t;
    t.reserve(a.rows());
    for (int i = 0; i < a.rows(); ++i) t.push_back(a.at(i, j));
    return t;
}

inline bool sym_combination_matches(const ExprMatrix& a, const std::vector<int>& cols,
                                    const std::vector<Expr>& x, const std::vector<Expr>& target) {
    for (int i = 0; i < a.rows(); ++i) {
        Expr r;
        for (std::size_t s = 0; s < cols.size(); ++s)
            r = oplus(r, otimes(x[s], a.at(i, cols[s])));
        if (r != target[static_cast<std::size_t>(i)]) return false;
    }
    return true;
}

/// Drop coefficients, then single monomials, that contribute nothing to the
/// match. Residuation alone returns the maximal coefficients, which may
/// reference service times the factorization does not actually need; sparse
/// coefficients are what make independent factors possible.
inline void sym_minimize_coefficients(const ExprMatrix& a, const std::vector<int>& cols,
                                      std::vector<Expr>& x, const std::vector<Expr>& target) {
    for (std::size_t s = 0; s < x.size(); ++s) {
        if (x[s].is_zero()) continue;
        Expr saved = x[s];
        x[s] = Expr::zero();
        if (!sym_combination_matches(a, cols, x, target)) x[s] = saved;
    }
    for (std::size_t s = 0; s < x.size(); ++s) {
        if (x[s].is_zero() || x[s].is_monomial()) continue;
        std::vector<Monomial> ms = x[s].monomials();
        for (std::size_t m = 0; m < ms.size() && ms.size() > 1;) {
            std::vector<Monomial> without = ms;
            without.erase(without.begin() + static_cast<std::ptrdiff_t>(m));
            Expr saved = x[s];
            x[s] = Expr::from_monomials(without);
            if (sym_combination_matches(a, cols, x, target)) {
                ms = std::move(without);
            } else {
                x[s] = saved;
                ++m;
            }
        }
    }
}

inline std::optional<SymSkeleton> sym_skeleton_columns(const ExprMatrix& a) {
    const int n = a.rows();
    std::vector<int> basis(n);
    std::iota(basis.begin(), basis.end(), 0);
    for (int j = 0; j < n; ++j) {
        auto it = std::find(basis.begin(), basis.end(), j);
        if (it == basis.end()) continue;
        std::vector<int> others;
        for (int s : basis)
            if (s != j) others.push_back(s);
        if (others.empty()) continue;
        auto target = sym_column(a, j);
        std::vector<Expr> x;
        x.reserve(others.size());
        for (int s : others) x.push_back(sym_residual_coefficient(sym_column(a, s), target));
        if (sym_combination_matches(a, others, x, target)) basis.erase(it);
    }
    const int r = static_cast<int>(basis.size());
    if (r == n) return std::nullopt;

    SymSkeleton d{ExprMatrix(n, r), ExprMatrix(r, n), false};
    for (int i = 0; i < n; ++i)
        for (int s = 0; s < r; ++s) d.b.at(i, s) = a.at(i, basis[static_cast<std::size_t>(s)]);
    for (int j = 0; j < n; ++j) {
        auto pos = std::find(basis.begin(), basis.end(), j);
        if (pos != basis.end()) {
            d.c.at(static_cast<int>(pos - basis.begin()), j) = Expr::one();
            continue;
        }
        auto target = sym_column(a, j);
        std::vector<Expr> x;
        x.reserve(basis.size());
        for (int s : basis) x.push_back(sym_residual_coefficient(sym_column(a, s), target));
        if (!sym_combination_matches(a, basis, x, target)) return std::nullopt;
        sym_minimize_coefficients(a, basis, x, target);
        for (int s = 0; s < r; ++s) d.c.at(s, j) = x[static_cast<std::size_t>(s)];
    }
    return d;
}

} // namespace detail

/**
 * Candidate skeleton decompositions of a square symbolic matrix, found by a
 * greedy column-basis search and by its row (transposed) dual. Either may be
 * empty; both factorizations satisfy B C = A exactly when present. The caller
 * picks by its own criteria (factor independence, triangularity of C B).
 */
inline std::vector<SymSkeleton> sym_skeleton_candidates(const ExprMatrix& a) {
    if (!a.square()) throw ShapeError("sym_skeleton_candidates: matrix not square");
    std::vector<SymSkeleton> out;
    if (auto cols = detail::sym_skeleton_columns(a)) out.push_back(std::move(*cols));
    if (auto rows = detail::sym_skeleton_columns(a.transpose())) {
        // transpose back: A^T = B~ C~  =>  A = C~^T B~^T
        SymSkeleton d{rows->c.transpose(), rows->b.transpose(), true};
        out.push_back(std::move(d));
    }
    return out;
}

/// Triangularity (up to simultaneous permutation) of the product C B.
inline TrianglePattern backward_pattern(const SymSkeleton& d) {
    return detail::triangular_pattern(finite_mask(mat_mul(d.c, d.b)));
}

} // namespace tropic
