#pragma once

/**
 * @file lyapunov.hpp
 * @brief Lyapunov exponent of a random matrix process, three ways.
 *
 * Monte Carlo simulates lambda = lim ||A(1)...A(k)||^{1/k}. The closed-form
 * evaluator dispatches on the symbolic matrix class (diagonal and triangular:
 * tr E A_1; similarity: E ||A_1||; rank 1: E v^T(1) u(2)). The decomposition
 * driver factors A(k) = B(k) C(k): when C B is triangular and the factors are
 * independent, lambda = tr E[C(1) B(2)]; otherwise the chain continues on
 * A'(k) = C(k) B(k+1), retrying the closed forms first.
 */

#include <atomic>
#include <cmath>
#include <cstdint>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "tropic/process.hpp"
#include "tropic/structure.hpp"

namespace tropic {

enum class Method {
    monte_carlo,
    diagonal,
    triangular,
    similarity,
    rank_one,
    backward_skeleton,
    decomposition_chain,
    spectral_radius
};

inline const char* name(Method m) {
    switch (m) {
        case Method::monte_carlo: return "monte_carlo";
        case Method::diagonal: return "diagonal";
        case Method::triangular: return "triangular";
        case Method::similarity: return "similarity";
        case Method::rank_one: return "rank_one";
        case Method::backward_skeleton: return "backward_skeleton";
        case Method::decomposition_chain: return "decomposition_chain";
        case Method::spectral_radius: return "spectral_radius";
    }
    return "?";
}

struct LyapunovEstimate {
    double lambda = 0.0;
    double std_error = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    Method method = Method::monte_carlo;
    int chain_depth = 0;                    // decomposition steps taken
    std::optional<Method> inner_method;     // closed form reached by a chain
    long long k_used = 0;
    int replications = 0;
    std::uint64_t seed = 0;
    std::optional<double> throughput;       // 1/lambda when lambda > 0
    // (k, mean running estimate) at decades up to k_used
    std::vector<std::pair<long long, double>> checkpoints;
};

namespace detail {

inline void finish(LyapunovEstimate& e) {
    if (e.lambda > 0.0) e.throughput = 1.0 / e.lambda;
}

/// two-sided 97.5% Student-t quantile for small samples, 1.96 beyond
inline double t_quantile_975(int df) {
    static constexpr double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365,
                                       2.306,  2.262, 2.228, 2.201, 2.179, 2.160, 2.145,
                                       2.131,  2.120, 2.110, 2.101, 2.093, 2.086, 2.080,
                                       2.074,  2.069, 2.064, 2.060, 2.056, 2.052, 2.048,
                                       2.045,  2.042};
    if (df < 1) return 1.96;
    if (df <= 30) return table[df - 1];
    return 1.96;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

struct MonteCarloOptions {
    long long k = 10000;
    int replications = 20;
    /// steps discarded before the estimate's increment starts; -1 picks k/10.
    /// Differencing past the burn-in removes the O(1/k) transient, so a
    /// deterministic system reports its cycle mean exactly.
    long long burn_in = -1;
    /// subtract the integer part of the running maximum every N steps
    /// (0 = never); offsets are integers so integer-valued paths stay exact
    int renorm_every = 0;
    /// propagate the full matrix product A(1)...A(k) instead of the state
    /// vector x(k) = A^T(k) x(k-1); the two agree exactly, at n^3 vs n^2 cost
    bool matrix_mode = false;
    bool override_existence = false;
    long long existence_samples = 2000;
    int threads = 1;
};

namespace detail {

struct ReplicationResult {
    double lambda = 0.0;
    std::vector<std::pair<long long, double>> checkpoints;
};

/// One replication: propagate, difference past the burn-in.
inline ReplicationResult run_replication(const RandomMatrixProcess& p, std::uint64_t rep,
                                         const MonteCarloOptions& opt,
                                         const std::vector<long long>& checkpoint_ks) {
    const int n = p.dim();
    const double neg_inf = -std::numeric_limits<double>::infinity();
    long long burn = opt.burn_in >= 0 ? std::min(opt.burn_in, opt.k - 1) : opt.k / 10;

    // state: either the vector x (transposed propagation) or the product P
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    std::vector<double> pm;  // row-major product, matrix mode
    if (opt.matrix_mode) {
        pm.assign(static_cast<std::size_t>(n) * n, neg_inf);
        for (int i = 0; i < n; ++i) pm[static_cast<std::size_t>(i) * n + i] = 0.0;
    }
    double offset = 0.0;  // accumulated renormalization shifts
    double base_total = 0.0;

    auto current_norm = [&]() {
        double m = neg_inf;
        if (opt.matrix_mode)
            for (double v : pm) m = std::max(m, v);
        else
            for (double v : x) m = std::max(m, v);
        return m;
    };

    ReplicationResult out;
    std::vector<double> nx(static_cast<std::size_t>(n));
    std::vector<double> npm;
    if (opt.matrix_mode) npm.resize(static_cast<std::size_t>(n) * n);
    std::vector<double> entry(static_cast<std::size_t>(n) * n);

    std::size_t next_cp = 0;
    for (long long k = 1; k <= opt.k; ++k) {
        // sample A(k) into a raw buffer (-inf for the zero element)
        const ExprMatrix& ex = p.exprs();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const Expr& e = ex.at(i, j);
                entry[static_cast<std::size_t>(i) * n + j] =
                    e.is_zero() ? neg_inf
                                : e.eval([&](int node, int lag) {
                                      return p.tau_value(node, lag, k, rep);
                                  });
            }

        if (opt.matrix_mode) {
            // P <- P * A(k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double best = neg_inf;
                    for (int l = 0; l < n; ++l)
                        best = std::max(best, pm[static_cast<std::size_t>(i) * n + l] +
                                                  entry[static_cast<std::size_t>(l) * n + j]);
                    npm[static_cast<std::size_t>(i) * n + j] = best;
                }
            pm.swap(npm);
        } else {
            // x <- A^T(k) x
            for (int j = 0; j < n; ++j) {
                double best = neg_inf;
                for (int i = 0; i < n; ++i)
                    best = std::max(best, entry[static_cast<std::size_t>(i) * n + j] +
                                              x[static_cast<std::size_t>(i)]);
                nx[static_cast<std::size_t>(j)] = best;
            }
            x.swap(nx);
        }

        if (opt.renorm_every > 0 && k % opt.renorm_every == 0) {
            double shift = std::floor(current_norm());
            if (std::isfinite(shift) && shift != 0.0) {
                offset += shift;
                if (opt.matrix_mode)
                    for (double& v : pm) v -= shift;
                else
                    for (double& v : x) v -= shift;
            }
        }

        if (k == burn) base_total = offset + current_norm();
        if (next_cp < checkpoint_ks.size() && k == checkpoint_ks[next_cp]) {
            double est = k > burn ? (offset + current_norm() - base_total) /
                                        static_cast<double>(k - burn)
                                  : (offset + current_norm()) / static_cast<double>(k);
            out.checkpoints.emplace_back(k, est);
            ++next_cp;
        }
    }

    double total = offset + current_norm();
    out.lambda = burn > 0 ? (total - base_total) / static_cast<double>(opt.k - burn)
                          : total / static_cast<double>(opt.k);
    return out;
}

} // namespace detail

/**
 * Monte Carlo estimate over independent replications. Throws ExistenceError
 * when the Kingman-style existence check fails and no override is set.
 * Deterministic for a fixed seed at any thread count: replications own
 * disjoint RNG substreams and are reduced in index order.
 */
inline LyapunovEstimate estimate_monte_carlo(const RandomMatrixProcess& p,
                                             const MonteCarloOptions& opt = {}) {
    if (opt.k < 1) throw DomainError("monte carlo: k must be >= 1");
    if (opt.replications < 2) throw DomainError("monte carlo: need at least 2 replications");
    if (!opt.override_existence) {
        KingmanDiagnostics kd = kingman_check(p, opt.existence_samples);
        if (!kd.ok)
            throw ExistenceError(
                "existence conditions unverified (E||A1|| finite: " +
                std::string(kd.e_norm_finite ? "yes" : "no") + ", rho(E A1) finite: " +
                std::string(kd.rho_of_mean.is_zero() ? "no" : "yes") +
                "); use the override to estimate anyway");
    }

    std::vector<long long> cps;
    for (long long c = 100; c < opt.k; c *= 10) cps.push_back(c);
    cps.push_back(opt.k);

    std::vector<detail::ReplicationResult> results(static_cast<std::size_t>(opt.replications));
    int threads = std::max(1, opt.threads);
    if (threads == 1) {
        for (int r = 0; r < opt.replications; ++r)
            results[static_cast<std::size_t>(r)] =
                detail::run_replication(p, static_cast<std::uint64_t>(r), opt, cps);
    } else {
        std::vector<std::future<void>> futs;
        std::atomic<int> next{0};
        for (int t = 0; t < threads; ++t)
            futs.push_back(std::async(std::launch::async, [&]() {
                for (int r = next.fetch_add(1); r < opt.replications; r = next.fetch_add(1))
                    results[static_cast<std::size_t>(r)] =
                        detail::run_replication(p, static_cast<std::uint64_t>(r), opt, cps);
            }));
        for (auto& f : futs) f.get();
    }

    LyapunovEstimate est;
    est.method = Method::monte_carlo;
    est.k_used = opt.k;
    est.replications = opt.replications;
    est.seed = p.seed();

    double sum = 0.0;
    for (const auto& r : results) sum += r.lambda;
    est.lambda = sum / static_cast<double>(opt.replications);
    double ss = 0.0;
    for (const auto& r : results) ss += (r.lambda - est.lambda) * (r.lambda - est.lambda);
    double var = ss / static_cast<double>(opt.replications - 1);
    est.std_error = std::sqrt(var / static_cast<double>(opt.replications));
    double t = detail::t_quantile_975(opt.replications - 1);
    est.ci_lo = est.lambda - t * est.std_error;
    est.ci_hi = est.lambda + t * est.std_error;

    for (std::size_t c = 0; c < cps.size(); ++c) {
        double mean = 0.0;
        for (const auto& r : results) mean += r.checkpoints[c].second;
        est.checkpoints.emplace_back(cps[c], mean / static_cast<double>(opt.replications));
    }
    detail::finish(est);
    return est;
}

// ---------------------------------------------------------------------------
// closed forms
// ---------------------------------------------------------------------------

namespace detail {

/// tr(E M) for a symbolic square matrix: the maximum of the diagonal
/// expectations, carrying the standard error of the attaining entry.
inline LyapunovEstimate trace_of_expectation(const ExprMatrix& m, const ExpectationEngine& eng,
                                             Method method) {
    LyapunovEstimate est;
    est.method = method;
    bool any = false;
    for (int i = 0; i < m.rows(); ++i) {
        if (m.at(i, i).is_zero()) continue;
        Expectation ex = eng.expect(m.at(i, i));
        if (!any || ex.value > est.lambda) {
            est.lambda = ex.value;
            est.std_error = ex.std_error;
            any = true;
        }
    }
    if (!any) throw DomainError("trace of expectation: all-zero diagonal");
    est.ci_lo = est.lambda - 1.96 * est.std_error;
    est.ci_hi = est.lambda + 1.96 * est.std_error;
    finish(est);
    return est;
}

inline LyapunovEstimate from_expectation(const Expectation& ex, Method method) {
    LyapunovEstimate est;
    est.method = method;
    est.lambda = ex.value;
    est.std_error = ex.std_error;
    est.ci_lo = est.lambda - 1.96 * est.std_error;
    est.ci_hi = est.lambda + 1.96 * est.std_error;
    finish(est);
    return est;
}

inline std::optional<LyapunovEstimate> closed_form_for(const ExprMatrix& a,
                                                       const RandomMatrixProcess& p,
                                                       long long esamples) {
    ExpectationEngine eng(p, esamples);
    SymMatrixClass cls = sym_classify(a);
    switch (cls.tag) {
        case MatrixClass::Tag::diagonal:
            return trace_of_expectation(a, eng, Method::diagonal);
        case MatrixClass::Tag::triangular_lower:
        case MatrixClass::Tag::triangular_upper:
        case MatrixClass::Tag::triangular_permuted:
            // the trace is permutation invariant
            return trace_of_expectation(a, eng, Method::triangular);
        case MatrixClass::Tag::similarity:
            return from_expectation(eng.expect(a.norm_expr()), Method::similarity);
        case MatrixClass::Tag::rank_one: {
            const auto& [u, v] = *cls.factors;
            // lambda = E[v^T(1) u(2)]
            Expr s;
            for (std::size_t i = 0; i < u.size(); ++i)
                s = oplus(s, otimes(v[i], u[i].shift_lag(1)));
            return from_expectation(eng.expect(s), Method::rank_one);
        }
        default: return std::nullopt;
    }
}

} // namespace detail

/**
 * Closed-form evaluation for processes whose symbolic matrix classifies as
 * diagonal, triangular, similarity or rank 1. Expectations carry standard
 * errors only when they needed sampling. Returns nothing for general
 * matrices.
 */
inline std::optional<LyapunovEstimate> evaluate_closed_form(const RandomMatrixProcess& p,
                                                            long long esamples = 100000) {
    auto est = detail::closed_form_for(p.exprs(), p, esamples);
    if (est) est->seed = p.seed();
    return est;
}

// ---------------------------------------------------------------------------
// decomposition method
// ---------------------------------------------------------------------------

/**
 * The decomposition driver. At each depth it factors the current symbolic
 * matrix A(k) = B(k) C(k) by the skeleton search (column route, then row
 * route). A factorization with independent factors and triangular C B ends
 * the chain with lambda = tr E[C(1) B(2)]. Otherwise the chain continues on
 * A'(k) = C(k) B(k+1) (lags bumped on B), retrying the closed forms first.
 *
 * Throws DependencyError when every triangular candidate was rejected only
 * because its factors share service times. Returns nothing when no progress
 * is possible within max_depth.
 */
inline std::optional<LyapunovEstimate> evaluate_by_decomposition(const RandomMatrixProcess& p,
                                                                 int max_depth = 4,
                                                                 long long esamples = 100000) {
    if (max_depth < 1) throw DomainError("decomposition: max_depth must be >= 1");
    ExpectationEngine eng(p, esamples);
    ExprMatrix a = p.exprs();
    bool dependency_blocked = false;

    for (int depth = 0; depth < max_depth; ++depth) {
        auto candidates = sym_skeleton_candidates(a);

        // exact exit: independent factors and a triangular C B
        for (const SymSkeleton& cand : candidates) {
            if (backward_pattern(cand).form == TriangularForm::none) continue;
            if (!p.independent_leaf_sets(cand.b.leaves(), cand.c.leaves())) {
                dependency_blocked = true;
                continue;
            }
            ExprMatrix aprime = mat_mul(cand.c, cand.b.shift_lag(1));
            LyapunovEstimate est =
                detail::trace_of_expectation(aprime, eng, Method::backward_skeleton);
            est.chain_depth = depth;
            est.seed = p.seed();
            return est;
        }

        if (candidates.empty()) break;

        // continue the chain on A'(k) = C(k) B(k+1); prefer independent factors
        const SymSkeleton* pick = nullptr;
        for (const SymSkeleton& cand : candidates)
            if (p.independent_leaf_sets(cand.b.leaves(), cand.c.leaves())) {
                pick = &cand;
                break;
            }
        if (!pick) pick = &candidates.front();

        a = mat_mul(pick->c, pick->b.shift_lag(1));

        if (auto inner = detail::closed_form_for(a, p, esamples)) {
            inner->inner_method = inner->method;
            inner->method = Method::decomposition_chain;
            inner->chain_depth = depth + 1;
            inner->seed = p.seed();
            return inner;
        }
    }

    if (dependency_blocked)
        throw DependencyError(
            "backward triangular factorizations found, but their factors share "
            "service times; the trace evaluation needs independent factors");
    return std::nullopt;
}

/// Exact exponent of a process with a fixed (deterministic) matrix: the
/// spectral radius of its single sample.
inline LyapunovEstimate evaluate_spectral_radius(const Matrix& a) {
    LyapunovEstimate est;
    est.method = Method::spectral_radius;
    Scalar rho = spectral_radius(a);
    if (rho.is_zero()) throw DomainError("spectral radius is the zero element");
    est.lambda = rho.value();
    est.ci_lo = est.ci_hi = est.lambda;
    detail::finish(est);
    return est;
}

} // namespace tropic
