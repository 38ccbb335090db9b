#pragma once

/**
 * @file expr.hpp
 * @brief Symbolic max-plus expressions over service-time variables.
 *
 * An expression is kept in canonical normal form: a set of monomials
 * combined by oplus, each monomial a constant plus a multiset of tau
 * leaves (a leaf is the service time of node `node` at cycle `k + lag`).
 * Building with tau/constant/oplus/otimes covers the usual expression DAG;
 * normalization happens on the fly.
 *
 * Absorption uses the fact that service times are nonnegative: a monomial
 * is dropped when another term has a pointwise-greater exponent vector and
 * a greater-or-equal constant. Canonical forms of the matrices in this
 * library therefore match what one writes by hand, e.g. one oplus tau -> tau.
 */

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tropic/errors.hpp"
#include "tropic/matrix.hpp"
#include "tropic/semiring.hpp"

namespace tropic {

/// One service-time variable: node index and cycle lag (0 = cycle k, 1 = k+1, ...).
struct TauLeaf {
    int node = 0;
    int lag = 0;

    auto operator<=>(const TauLeaf&) const = default;
};

/// A tropical monomial: coeff otimes prod tau^exp. Exponents may be negative
/// (they arise from symbolic division); pows is sorted by leaf and free of zeros.
struct Monomial {
    double coeff = 0.0;
    std::vector<std::pair<TauLeaf, int>> pows;

    bool operator==(const Monomial& o) const { return coeff == o.coeff && pows == o.pows; }
};

namespace detail {

inline Monomial monomial_mul(const Monomial& a, const Monomial& b) {
    Monomial r;
    r.coeff = a.coeff + b.coeff;
    r.pows.reserve(a.pows.size() + b.pows.size());
    std::size_t i = 0, j = 0;
    while (i < a.pows.size() || j < b.pows.size()) {
        if (j == b.pows.size() || (i < a.pows.size() && a.pows[i].first < b.pows[j].first)) {
            r.pows.push_back(a.pows[i++]);
        } else if (i == a.pows.size() || b.pows[j].first < a.pows[i].first) {
            r.pows.push_back(b.pows[j++]);
        } else {
            int e = a.pows[i].second + b.pows[j].second;
            if (e != 0) r.pows.emplace_back(a.pows[i].first, e);
            ++i, ++j;
        }
    }
    return r;
}

/// a >= b as functions of nonnegative taus.
inline bool monomial_dominates(const Monomial& a, const Monomial& b) {
    if (a.coeff < b.coeff) return false;
    std::size_t i = 0, j = 0;
    while (i < a.pows.size() || j < b.pows.size()) {
        if (j == b.pows.size()) {
            if (a.pows[i].second < 0) return false;  // extra negative power
            ++i;
        } else if (i == a.pows.size() || b.pows[j].first < a.pows[i].first) {
            if (b.pows[j].second > 0) return false;  // b has a power a lacks
            ++j;
        } else if (a.pows[i].first < b.pows[j].first) {
            if (a.pows[i].second < 0) return false;
            ++i;
        } else {
            if (a.pows[i].second < b.pows[j].second) return false;
            ++i, ++j;
        }
    }
    return true;
}

inline bool monomial_less(const Monomial& a, const Monomial& b) {
    if (a.pows != b.pows) return a.pows < b.pows;
    return a.coeff < b.coeff;
}

} // namespace detail

class Expr {
public:
    Expr() = default;  // the semiring zero

    static Expr zero() { return Expr(); }
    static Expr one() { return constant(0.0); }

    static Expr constant(double c) {
        Expr e;
        Monomial m;
        m.coeff = c;
        e.terms_.push_back(std::move(m));
        return e;
    }

    /// From a max_plus scalar; the zero element maps to the zero expression.
    static Expr constant(const Scalar& s) {
        if (s.kind() != Semifield::max_plus)
            throw KindMismatchError("Expr::constant expects a max_plus scalar");
        return s.is_zero() ? zero() : constant(s.value());
    }

    static Expr tau(int node, int lag = 0) {
        Expr e;
        Monomial m;
        m.pows.emplace_back(TauLeaf{node, lag}, 1);
        e.terms_.push_back(std::move(m));
        return e;
    }

    static Expr from_monomials(std::vector<Monomial> ms) {
        Expr e;
        e.terms_ = std::move(ms);
        e.normalize();
        return e;
    }

    bool is_zero() const { return terms_.empty(); }
    bool is_monomial() const { return terms_.size() == 1; }
    bool is_constant() const { return terms_.size() == 1 && terms_[0].pows.empty(); }
    bool is_one() const { return is_constant() && terms_[0].coeff == 0.0; }

    const std::vector<Monomial>& monomials() const { return terms_; }

    bool operator==(const Expr& o) const { return terms_ == o.terms_; }
    bool operator!=(const Expr& o) const { return !(*this == o); }

    /// Evaluate under the assignment tau(node, lag) -> double.
    template <class F>
    double eval(F&& tau_value) const {
        double best = -std::numeric_limits<double>::infinity();
        for (const Monomial& m : terms_) {
            double v = m.coeff;
            for (const auto& [leaf, e] : m.pows) v += e * tau_value(leaf.node, leaf.lag);
            best = std::max(best, v);
        }
        return best;
    }

    /// All distinct leaves used by the expression.
    std::set<TauLeaf> leaves() const {
        std::set<TauLeaf> out;
        for (const Monomial& m : terms_)
            for (const auto& [leaf, e] : m.pows) out.insert(leaf);
        return out;
    }

    /// Same expression one cycle later: every lag bumped by delta.
    Expr shift_lag(int delta) const {
        Expr e;
        e.terms_ = terms_;
        for (Monomial& m : e.terms_)
            for (auto& [leaf, exp] : m.pows) leaf.lag += delta;
        for (Monomial& m : e.terms_)
            std::sort(m.pows.begin(), m.pows.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
        std::sort(e.terms_.begin(), e.terms_.end(), detail::monomial_less);
        return e;
    }

    /// Quotient by a monomial (exponents subtract; always defined symbolically).
    Expr div_monomial(const Monomial& d) const {
        Monomial inv;
        inv.coeff = -d.coeff;
        inv.pows = d.pows;
        for (auto& [leaf, e] : inv.pows) e = -e;
        Expr r;
        r.terms_.reserve(terms_.size());
        for (const Monomial& m : terms_) r.terms_.push_back(detail::monomial_mul(m, inv));
        r.normalize();
        return r;
    }

    /// Componentwise minimum of exponents/constants over all terms; the
    /// largest monomial g with this = g otimes (this / g).
    std::optional<Monomial> common_monomial_factor() const {
        if (terms_.empty()) return std::nullopt;
        Monomial g;
        g.coeff = terms_[0].coeff;
        std::map<TauLeaf, int> exps(terms_[0].pows.begin(), terms_[0].pows.end());
        for (std::size_t t = 1; t < terms_.size(); ++t) {
            g.coeff = std::min(g.coeff, terms_[t].coeff);
            std::map<TauLeaf, int> cur(terms_[t].pows.begin(), terms_[t].pows.end());
            for (auto& [leaf, e] : exps) {
                auto it = cur.find(leaf);
                e = std::min(e, it == cur.end() ? 0 : it->second);
            }
            for (const auto& [leaf, e] : cur)
                if (!exps.count(leaf)) exps[leaf] = std::min(0, e);
        }
        for (const auto& [leaf, e] : exps)
            if (e != 0) g.pows.emplace_back(leaf, e);
        return g;
    }

    std::string to_string() const;

    friend Expr oplus(const Expr& a, const Expr& b);
    friend Expr otimes(const Expr& a, const Expr& b);

private:
    void normalize() {
        for (Monomial& m : terms_)
            std::sort(m.pows.begin(), m.pows.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
        std::sort(terms_.begin(), terms_.end(), detail::monomial_less);
        terms_.erase(std::unique(terms_.begin(), terms_.end()), terms_.end());
        // pairwise absorption; after deduplication domination is strict
        std::vector<Monomial> kept;
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            bool dominated = false;
            for (std::size_t j = 0; j < terms_.size() && !dominated; ++j)
                dominated = i != j && detail::monomial_dominates(terms_[j], terms_[i]);
            if (!dominated) kept.push_back(terms_[i]);
        }
        terms_ = std::move(kept);
    }

    std::vector<Monomial> terms_;
};

inline Expr oplus(const Expr& a, const Expr& b) {
    Expr r;
    r.terms_.reserve(a.terms_.size() + b.terms_.size());
    r.terms_.insert(r.terms_.end(), a.terms_.begin(), a.terms_.end());
    r.terms_.insert(r.terms_.end(), b.terms_.begin(), b.terms_.end());
    r.normalize();
    return r;
}

inline Expr otimes(const Expr& a, const Expr& b) {
    Expr r;
    r.terms_.reserve(a.terms_.size() * b.terms_.size());
    for (const Monomial& ma : a.terms_)
        for (const Monomial& mb : b.terms_) r.terms_.push_back(detail::monomial_mul(ma, mb));
    r.normalize();
    return r;
}

inline Expr operator+(const Expr& a, const Expr& b) { return oplus(a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return otimes(a, b); }

/// a <= b as functions of nonnegative service times (normal-form test).
inline bool expr_leq(const Expr& a, const Expr& b) { return oplus(a, b) == b; }

inline std::string Expr::to_string() const {
    if (terms_.empty()) return "-inf";
    std::ostringstream os;
    bool first_term = true;
    for (const Monomial& m : terms_) {
        if (!first_term) os << " (+) ";
        first_term = false;
        bool wrote = false;
        if (m.coeff != 0.0 || m.pows.empty()) {
            os << m.coeff;
            wrote = true;
        }
        for (const auto& [leaf, e] : m.pows) {
            if (wrote) os << "*";
            os << "t" << leaf.node;
            for (int p = 0; p < leaf.lag && p < 3; ++p) os << '\'';  // t2' = tau_{2,k+1}
            if (leaf.lag >= 3 || leaf.lag < 0) os << "@" << leaf.lag;
            if (e != 1) os << "^" << e;
            wrote = true;
        }
    }
    return os.str();
}

/**
 * @brief Dense matrix of symbolic expressions (max_plus).
 */
class ExprMatrix {
public:
    ExprMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
        if (rows < 1 || cols < 1) throw ShapeError("expr matrix must be nonempty");
        e_.resize(static_cast<std::size_t>(rows) * cols);
    }

    static ExprMatrix identity(int n) {
        ExprMatrix m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = Expr::one();
        return m;
    }

    static ExprMatrix zeros(int rows, int cols) { return ExprMatrix(rows, cols); }

    /// Lift a numeric max_plus matrix into expressions.
    static ExprMatrix from_matrix(const Matrix& a) {
        if (a.kind() != Semifield::max_plus)
            throw KindMismatchError("ExprMatrix expects max_plus");
        ExprMatrix m(a.rows(), a.cols());
        for (int i = 0; i < a.rows(); ++i)
            for (int j = 0; j < a.cols(); ++j) m.at(i, j) = Expr::constant(a.at(i, j));
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    const Expr& at(int i, int j) const { return e_[static_cast<std::size_t>(i) * cols_ + j]; }
    Expr& at(int i, int j) { return e_[static_cast<std::size_t>(i) * cols_ + j]; }

    bool operator==(const ExprMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && e_ == o.e_;
    }
    bool operator!=(const ExprMatrix& o) const { return !(*this == o); }

    ExprMatrix transpose() const {
        ExprMatrix t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
        return t;
    }

    ExprMatrix shift_lag(int delta) const {
        ExprMatrix r(rows_, cols_);
        for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] = e_[i].shift_lag(delta);
        return r;
    }

    /// oplus over all entries.
    Expr norm_expr() const {
        Expr n;
        for (const Expr& e : e_) n = oplus(n, e);
        return n;
    }

    Expr trace_expr() const {
        if (!square()) throw ShapeError("trace of a non-square expr matrix");
        Expr t;
        for (int i = 0; i < rows_; ++i) t = oplus(t, at(i, i));
        return t;
    }

    std::set<TauLeaf> leaves() const {
        std::set<TauLeaf> out;
        for (const Expr& e : e_)
            for (const TauLeaf& l : e.leaves()) out.insert(l);
        return out;
    }

    /// Evaluate every entry into a numeric max_plus matrix.
    template <class F>
    Matrix eval(F&& tau_value) const {
        Matrix m(rows_, cols_, Semifield::max_plus);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) {
                const Expr& e = at(i, j);
                if (!e.is_zero()) m.at(i, j) = Scalar::finite(e.eval(tau_value));
            }
        return m;
    }

private:
    int rows_, cols_;
    std::vector<Expr> e_;
};

inline ExprMatrix mat_add(const ExprMatrix& a, const ExprMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError("expr mat_add: shape mismatch");
    ExprMatrix r(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r.at(i, j) = oplus(a.at(i, j), b.at(i, j));
    return r;
}

inline ExprMatrix mat_mul(const ExprMatrix& a, const ExprMatrix& b) {
    if (a.cols() != b.rows()) throw ShapeError("expr mat_mul: inner dimensions disagree");
    ExprMatrix r(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            const Expr& aik = a.at(i, k);
            if (aik.is_zero()) continue;
            for (int j = 0; j < b.cols(); ++j) {
                if (b.at(k, j).is_zero()) continue;
                r.at(i, j) = oplus(r.at(i, j), otimes(aik, b.at(k, j)));
            }
        }
    return r;
}

inline ExprMatrix operator+(const ExprMatrix& a, const ExprMatrix& b) { return mat_add(a, b); }
inline ExprMatrix operator*(const ExprMatrix& a, const ExprMatrix& b) { return mat_mul(a, b); }

inline ExprMatrix mat_power(const ExprMatrix& a, int k) {
    if (!a.square()) throw ShapeError("expr mat_power: matrix not square");
    if (k < 0) throw DomainError("expr mat_power: negative exponent");
    ExprMatrix r = ExprMatrix::identity(a.rows());
    for (int i = 0; i < k; ++i) r = mat_mul(r, a);
    return r;
}

} // namespace tropic
