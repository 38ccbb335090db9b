#pragma once

/**
 * @file process.hpp
 * @brief The random matrix process A(k) and its expectation machinery.
 *
 * A process couples a symbolic matrix with service-time distributions. Every
 * tau leaf (node, lag) resolves, at cycle k, to the draw of the node's stream
 * at index stride*(k+lag)+offset, through the counter-based RNG. Identity
 * bindings give the usual one-stream-per-node i.i.d. setup; non-identity
 * bindings let several nodes read one stream at interleaved indices (the
 * round-robin construction).
 */

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "tropic/distribution.hpp"
#include "tropic/expr.hpp"
#include "tropic/matrix.hpp"
#include "tropic/rng.hpp"

namespace tropic {

/// Where a node's service times come from: stream id and affine index map.
struct StreamBinding {
    int stream = 0;
    long long stride = 1;
    long long offset = 0;
};

namespace detail {
// replication id bases keeping estimator, expectation and existence draws
// in disjoint key spaces
inline constexpr std::uint64_t kExpectationReplicationBase = 0x4000000000000000ULL;
inline constexpr std::uint64_t kExistenceReplicationBase = 0x2000000000000000ULL;
} // namespace detail

class RandomMatrixProcess {
public:
    /// One stream per node, drawn at index k+lag (the i.i.d. setup).
    RandomMatrixProcess(ExprMatrix exprs, std::vector<ServiceDistribution> node_dists,
                        std::uint64_t seed)
        : exprs_(std::move(exprs)), streams_(std::move(node_dists)), seed_(seed) {
        bindings_.resize(streams_.size());
        for (std::size_t i = 0; i < bindings_.size(); ++i)
            bindings_[i].stream = static_cast<int>(i);
        check_leaves();
    }

    /// Explicit stream table and per-node bindings.
    RandomMatrixProcess(ExprMatrix exprs, std::vector<ServiceDistribution> stream_dists,
                        std::vector<StreamBinding> bindings, std::uint64_t seed)
        : exprs_(std::move(exprs)),
          streams_(std::move(stream_dists)),
          bindings_(std::move(bindings)),
          seed_(seed) {
        check_leaves();
    }

    int dim() const { return exprs_.rows(); }
    const ExprMatrix& exprs() const { return exprs_; }
    std::uint64_t seed() const { return seed_; }
    int node_count() const { return static_cast<int>(bindings_.size()); }

    const ServiceDistribution& node_distribution(int node) const {
        return streams_[static_cast<std::size_t>(bindings_[static_cast<std::size_t>(node)].stream)];
    }

    double node_mean(int node) const { return node_distribution(node).mean(); }

    /// tau_{node, k+lag} under the given replication.
    double tau_value(int node, int lag, long long k, std::uint64_t replication) const {
        const StreamBinding& b = bindings_[static_cast<std::size_t>(node)];
        RngKey key{seed_, replication, static_cast<std::uint64_t>(b.stream),
                   static_cast<std::uint64_t>(b.stride * (k + lag) + b.offset)};
        return streams_[static_cast<std::size_t>(b.stream)].sample(key);
    }

    /// Sample of the state transition matrix at cycle k; a pure function of
    /// (seed, replication, k).
    Matrix sample(long long k, std::uint64_t replication = 0) const {
        return exprs_.eval(
            [&](int node, int lag) { return tau_value(node, lag, k, replication); });
    }

    /// Do two leaves denote the same random variable at a common cycle k?
    bool same_variable(const TauLeaf& a, const TauLeaf& b) const {
        const StreamBinding& ba = bindings_[static_cast<std::size_t>(a.node)];
        const StreamBinding& bb = bindings_[static_cast<std::size_t>(b.node)];
        if (ba.stream != bb.stream) return false;
        if (ba.stride != bb.stride) return true;  // conservative
        return ba.stride * a.lag + ba.offset == bb.stride * b.lag + bb.offset;
    }

    /// Conservative independence: no leaf of one set aliases a leaf of the other.
    bool independent_leaf_sets(const std::set<TauLeaf>& xs, const std::set<TauLeaf>& ys) const {
        for (const TauLeaf& x : xs)
            for (const TauLeaf& y : ys)
                if (same_variable(x, y)) return false;
        return true;
    }

    /// Same streams and seed, different symbolic matrix (decomposition chains).
    RandomMatrixProcess with_exprs(ExprMatrix exprs) const {
        return RandomMatrixProcess(std::move(exprs), streams_, bindings_, seed_);
    }

    RandomMatrixProcess with_seed(std::uint64_t seed) const {
        return RandomMatrixProcess(exprs_, streams_, bindings_, seed);
    }

private:
    void check_leaves() const {
        for (const TauLeaf& l : exprs_.leaves()) {
            if (l.node < 0 || l.node >= static_cast<int>(bindings_.size()))
                throw ShapeError("expression references a node with no distribution");
            int s = bindings_[static_cast<std::size_t>(l.node)].stream;
            if (s < 0 || s >= static_cast<int>(streams_.size()))
                throw ShapeError("node bound to a missing stream");
        }
    }

    ExprMatrix exprs_;
    std::vector<ServiceDistribution> streams_;
    std::vector<StreamBinding> bindings_;
    std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// expectations
// ---------------------------------------------------------------------------

/// Scalar expectation of an expression: the value, its standard error
/// (0 for analytic routes) and whether a closed form was used.
struct Expectation {
    double value = -std::numeric_limits<double>::infinity();
    double std_error = 0.0;
    bool analytic = true;
};

namespace detail {

/// Replace leaves of deterministic streams by their constant values.
inline Expr substitute_deterministic(const Expr& e, const RandomMatrixProcess& p) {
    std::vector<Monomial> out;
    for (const Monomial& m : e.monomials()) {
        Monomial r;
        r.coeff = m.coeff;
        for (const auto& [leaf, exp] : m.pows) {
            const ServiceDistribution& d = p.node_distribution(leaf.node);
            if (d.is_deterministic())
                r.coeff += exp * d.mean();
            else
                r.pows.emplace_back(leaf, exp);
        }
        out.push_back(std::move(r));
    }
    return Expr::from_monomials(std::move(out));
}

/// E max(c, X) for X ~ Exp(rate) and a constant c >= 0.
inline double emax_const_exponential(double c, double rate) {
    return c + std::exp(-rate * c) / rate;
}

} // namespace detail

/**
 * @brief Expectations of expressions under a process's service-time laws.
 *
 * Analytic routes: pure products (linearity of expectation), a common
 * monomial factor peeled off any max, the maximum of two independent
 * exponential leaves, and the maximum of a constant and one exponential
 * leaf. Everything else falls back to Monte Carlo with the configured
 * sample count, reporting a standard error.
 */
class ExpectationEngine {
public:
    ExpectationEngine(const RandomMatrixProcess& p, long long samples)
        : p_(&p), samples_(samples < 1 ? 1 : samples) {}

    Expectation expect(const Expr& raw, long long base_cycle = 1) const {
        if (raw.is_zero()) return {};
        Expr e = detail::substitute_deterministic(raw, *p_);

        if (e.is_monomial()) return {monomial_mean(e.monomials()[0]), 0.0, true};

        // peel the common factor: E[g (x) r] = E[g] + E[r]
        Monomial g = *e.common_monomial_factor();
        Expr r = e.div_monomial(g);
        double base = monomial_mean(g);

        if (auto closed = residual_closed_form(r))
            return {base + *closed, 0.0, true};

        auto [mc, se] = monte_carlo(r, base_cycle);
        return {base + mc, se, false};
    }

    long long samples() const { return samples_; }

private:
    double monomial_mean(const Monomial& m) const {
        double v = m.coeff;
        for (const auto& [leaf, exp] : m.pows) v += exp * p_->node_mean(leaf.node);
        return v;
    }

    // closed forms for the residual max after factoring
    std::optional<double> residual_closed_form(const Expr& r) const {
        const auto& ms = r.monomials();
        bool all_const = true;
        for (const Monomial& m : ms) all_const &= m.pows.empty();
        if (all_const) {
            double v = ms[0].coeff;
            for (const Monomial& m : ms) v = std::max(v, m.coeff);
            return v;
        }
        if (ms.size() != 2) return std::nullopt;

        auto single_exp_leaf = [&](const Monomial& m) -> std::optional<TauLeaf> {
            if (m.coeff != 0.0 || m.pows.size() != 1 || m.pows[0].second != 1)
                return std::nullopt;
            const TauLeaf& l = m.pows[0].first;
            if (p_->node_distribution(l.node).kind() != ServiceDistribution::Kind::exponential)
                return std::nullopt;
            return l;
        };

        auto rate = [&](const TauLeaf& l) { return 1.0 / p_->node_mean(l.node); };

        auto la = single_exp_leaf(ms[0]);
        auto lb = single_exp_leaf(ms[1]);
        if (la && lb && !p_->same_variable(*la, *lb)) {
            double a = rate(*la), b = rate(*lb);
            return 1.0 / a + 1.0 / b - 1.0 / (a + b);
        }
        // constant vs one exponential leaf
        if (ms[0].pows.empty() && lb && ms[0].coeff >= 0.0)
            return detail::emax_const_exponential(ms[0].coeff, rate(*lb));
        if (ms[1].pows.empty() && la && ms[1].coeff >= 0.0)
            return detail::emax_const_exponential(ms[1].coeff, rate(*la));
        return std::nullopt;
    }

    std::pair<double, double> monte_carlo(const Expr& e, long long base_cycle) const {
        double sum = 0.0, sumsq = 0.0;
        for (long long i = 0; i < samples_; ++i) {
            std::uint64_t rep = detail::kExpectationReplicationBase + static_cast<std::uint64_t>(i);
            double v = e.eval([&](int node, int lag) {
                return p_->tau_value(node, lag, base_cycle, rep);
            });
            sum += v;
            sumsq += v * v;
        }
        double n = static_cast<double>(samples_);
        double mean = sum / n;
        double var = std::max(0.0, (sumsq - n * mean * mean) / std::max(1.0, n - 1.0));
        return {mean, std::sqrt(var / n)};
    }

    const RandomMatrixProcess* p_;
    long long samples_;
};

/// Entrywise expectation estimate of E A(1); zero entries stay zero.
struct ExpectedMatrix {
    Matrix mean;
    std::vector<std::vector<double>> std_errors;
};

inline ExpectedMatrix expected_matrix(const RandomMatrixProcess& p, long long samples = 100000) {
    ExpectationEngine eng(p, samples);
    const ExprMatrix& e = p.exprs();
    ExpectedMatrix out{Matrix(e.rows(), e.cols()),
                       std::vector<std::vector<double>>(
                           static_cast<std::size_t>(e.rows()),
                           std::vector<double>(static_cast<std::size_t>(e.cols()), 0.0))};
    for (int i = 0; i < e.rows(); ++i)
        for (int j = 0; j < e.cols(); ++j) {
            if (e.at(i, j).is_zero()) continue;
            Expectation ex = eng.expect(e.at(i, j));
            out.mean.at(i, j) = Scalar::finite(ex.value);
            out.std_errors[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                ex.std_error;
        }
    return out;
}

// ---------------------------------------------------------------------------
// existence conditions
// ---------------------------------------------------------------------------

/// Diagnostics for the existence of the Lyapunov exponent: E||A_1|| finite
/// and rho(E A_1) above the zero element.
struct KingmanDiagnostics {
    bool ok = false;
    bool e_norm_finite = false;
    Scalar rho_of_mean = Scalar::zero(Semifield::max_plus);
    double e_norm_estimate = -std::numeric_limits<double>::infinity();
};

inline KingmanDiagnostics kingman_check(const RandomMatrixProcess& p, long long samples = 2000) {
    KingmanDiagnostics d;
    Expr norm_expr = p.exprs().norm_expr();
    if (!norm_expr.is_zero()) {
        double sum = 0.0;
        bool all_finite = true;
        for (long long i = 0; i < samples; ++i) {
            std::uint64_t rep = detail::kExistenceReplicationBase + static_cast<std::uint64_t>(i);
            double v =
                norm_expr.eval([&](int n, int l) { return p.tau_value(n, l, 1, rep); });
            if (!std::isfinite(v)) all_finite = false;
            sum += v;
        }
        d.e_norm_finite = all_finite && std::isfinite(sum);
        d.e_norm_estimate = sum / static_cast<double>(samples);
    }
    d.rho_of_mean = spectral_radius(expected_matrix(p, samples).mean);
    d.ok = d.e_norm_finite && !d.rho_of_mean.is_zero();
    return d;
}

} // namespace tropic
