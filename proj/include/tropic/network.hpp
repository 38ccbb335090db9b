#pragma once

/**
 * @file network.hpp
 * @brief Fork-join queueing networks compiled into max-plus dynamic systems.
 *
 * A network is an oriented graph of single-server FCFS nodes with join
 * (wait for one customer from every predecessor) and fork (emit one customer
 * per successor) operations, initial customer counts c_i, buffer capacities
 * b_i and optionally a blocking rule. Compilation builds the partial-graph
 * matrices G_m and H_m, the diagonal service matrix T_k, and the state
 * transition matrices A_m(k) of the multi-delay recursion
 *
 *   x(k) = (+)_m A_m(k) x(k-m),
 *
 * then lifts the recursion to a first-order companion system when M > 1.
 */

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tropic/expr.hpp"
#include "tropic/matrix.hpp"
#include "tropic/process.hpp"

namespace tropic {

enum class Blocking { none, manufacturing, communication };

inline const char* name(Blocking b) {
    switch (b) {
        case Blocking::none: return "none";
        case Blocking::manufacturing: return "manufacturing";
        case Blocking::communication: return "communication";
    }
    return "?";
}

/// An unbounded count (infinite initial customers or buffer capacity).
using Count = std::optional<long long>;  // nullopt = infinite

struct NetworkSpec {
    int n = 0;
    std::vector<std::pair<int, int>> arcs;      // 0-based (from, to)
    std::vector<Count> initial_customers;       // c_i; infinite marks a source
    std::vector<Count> buffer_capacity;         // b_i
    Blocking blocking = Blocking::none;
    std::vector<ServiceDistribution> service;   // per node
    std::vector<int> labels;                    // external ids for reports

    std::vector<int> predecessors(int i) const {
        std::vector<int> out;
        for (auto [a, b] : arcs)
            if (b == i) out.push_back(a);
        return out;
    }
    std::vector<int> successors(int i) const {
        std::vector<int> out;
        for (auto [a, b] : arcs)
            if (a == i) out.push_back(b);
        return out;
    }
    bool is_source(int i) const { return predecessors(i).empty(); }
};

/// A spec plus its sampling wiring: distributions per stream and the
/// node-to-stream bindings (non-identity for the round-robin expansion).
struct NetworkModel {
    NetworkSpec spec;
    std::vector<ServiceDistribution> streams;
    std::vector<StreamBinding> bindings;
};

inline NetworkModel make_model(NetworkSpec spec) {
    NetworkModel m;
    m.spec = std::move(spec);
    m.streams = m.spec.service;
    m.bindings.resize(static_cast<std::size_t>(m.spec.n));
    for (int i = 0; i < m.spec.n; ++i) m.bindings[static_cast<std::size_t>(i)].stream = i;
    return m;
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

namespace detail {

/// Arcs of the partial graph G_0: (i, j) with c_j = 0.
inline std::vector<std::pair<int, int>> g0_arcs(const NetworkSpec& s) {
    std::vector<std::pair<int, int>> out;
    for (auto [i, j] : s.arcs) {
        const Count& c = s.initial_customers[static_cast<std::size_t>(j)];
        if (c && *c == 0) out.push_back({i, j});
    }
    return out;
}

/// Longest path (in arcs) of a DAG given by arc list; nullopt when cyclic.
inline std::optional<int> dag_longest_path(int n, const std::vector<std::pair<int, int>>& arcs) {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    std::vector<int> indeg(static_cast<std::size_t>(n), 0);
    for (auto [a, b] : arcs) {
        adj[static_cast<std::size_t>(a)].push_back(b);
        ++indeg[static_cast<std::size_t>(b)];
    }
    std::vector<int> order, depth(static_cast<std::size_t>(n), 0);
    std::vector<int> q;
    for (int v = 0; v < n; ++v)
        if (indeg[static_cast<std::size_t>(v)] == 0) q.push_back(v);
    while (!q.empty()) {
        int v = q.back();
        q.pop_back();
        order.push_back(v);
        for (int w : adj[static_cast<std::size_t>(v)]) {
            depth[static_cast<std::size_t>(w)] =
                std::max(depth[static_cast<std::size_t>(w)], depth[static_cast<std::size_t>(v)] + 1);
            if (--indeg[static_cast<std::size_t>(w)] == 0) q.push_back(w);
        }
    }
    if (static_cast<int>(order.size()) != n) return std::nullopt;
    return *std::max_element(depth.begin(), depth.end());
}

} // namespace detail

/// Structural checks first (counts, sources, buffers), then G_0 acyclicity.
inline void validate(const NetworkSpec& s) {
    if (s.n < 1) throw ModelInvalidError("network needs at least one node");
    if (static_cast<int>(s.initial_customers.size()) != s.n ||
        static_cast<int>(s.buffer_capacity.size()) != s.n ||
        static_cast<int>(s.service.size()) != s.n)
        throw ModelInvalidError("per-node fields must have one entry per node");
    std::set<std::pair<int, int>> seen;
    for (auto [a, b] : s.arcs) {
        if (a < 0 || a >= s.n || b < 0 || b >= s.n)
            throw ModelInvalidError("arc references a missing node");
        if (!seen.insert({a, b}).second) throw ModelInvalidError("duplicate arc");
    }
    for (int i = 0; i < s.n; ++i) {
        const Count& c = s.initial_customers[static_cast<std::size_t>(i)];
        const Count& b = s.buffer_capacity[static_cast<std::size_t>(i)];
        std::string node = "node " + std::to_string(s.labels.empty()
                                                        ? i
                                                        : s.labels[static_cast<std::size_t>(i)]);
        if (c && *c < 0) throw ModelInvalidError(node + ": negative initial customer count");
        if (b && *b < 0) throw ModelInvalidError(node + ": negative buffer capacity");
        if (s.is_source(i) && c)
            throw ModelInvalidError(node + " is a source and must have infinite customers");
        if (!s.is_source(i) && !c)
            throw ModelInvalidError(node + " is not a source and needs a finite customer count");
        if (b && (!c || *b < *c))
            throw ModelInvalidError(node + ": buffer capacity below initial customers");
        if (b && s.blocking == Blocking::none)
            throw ModelInvalidError(node + ": finite buffer requires a blocking rule");
    }
    if (!detail::dag_longest_path(s.n, detail::g0_arcs(s)))
        throw ModelInvalidError("the partial graph G_0 has a cycle");
}

/// Length (in arcs) of the longest path of the acyclic partial graph G_0.
inline int longest_path(const NetworkSpec& s) {
    auto r = detail::dag_longest_path(s.n, detail::g0_arcs(s));
    if (!r) throw ModelInvalidError("the partial graph G_0 has a cycle");
    return *r;
}

// ---------------------------------------------------------------------------
// partial graph matrices
// ---------------------------------------------------------------------------

struct PartialGraphs {
    std::vector<Matrix> g;  // G_0 .. G_M (padded with zero matrices)
    std::vector<Matrix> h;  // H_1 .. H_M2 (empty when all buffers are infinite)
    int max_customers = 0;  // M1
    int max_buffer_plus_one = 0;  // M2
    int max_delay = 1;      // M = max(M1, M2, 1)
};

/// The adjacency matrices G_m (arcs into nodes with c_j = m) and H_m (arcs
/// toward nodes with b_j = m - 1), with G padded by zero matrices when the
/// buffer horizon exceeds the customer horizon.
inline PartialGraphs build_partial_graphs(const NetworkSpec& s) {
    validate(s);
    PartialGraphs out;
    for (int i = 0; i < s.n; ++i) {
        const Count& c = s.initial_customers[static_cast<std::size_t>(i)];
        if (c) out.max_customers = std::max(out.max_customers, static_cast<int>(*c));
        const Count& b = s.buffer_capacity[static_cast<std::size_t>(i)];
        if (b) out.max_buffer_plus_one = std::max(out.max_buffer_plus_one, static_cast<int>(*b) + 1);
    }
    out.max_delay = std::max({out.max_customers, out.max_buffer_plus_one, 1});

    for (int m = 0; m <= out.max_delay; ++m) out.g.push_back(Matrix::zeros(s.n, s.n));
    for (auto [i, j] : s.arcs) {
        const Count& c = s.initial_customers[static_cast<std::size_t>(j)];
        if (c && *c <= out.max_delay)
            out.g[static_cast<std::size_t>(*c)].at(i, j) = Scalar::one(Semifield::max_plus);
    }
    for (int m = 1; m <= out.max_buffer_plus_one; ++m) out.h.push_back(Matrix::zeros(s.n, s.n));
    for (auto [i, j] : s.arcs) {
        const Count& b = s.buffer_capacity[static_cast<std::size_t>(j)];
        if (b) out.h[static_cast<std::size_t>(*b)].at(i, j) = Scalar::one(Semifield::max_plus);
    }
    return out;
}

// ---------------------------------------------------------------------------
// compilation
// ---------------------------------------------------------------------------

struct CompiledModel {
    NetworkModel model;
    int max_delay = 1;           // M
    int longest_path_len = 0;    // r
    std::vector<ExprMatrix> delay_matrices;  // A_1(k) .. A_M(k)
    RandomMatrixProcess lifted;  // first-order process of dimension n*M
};

namespace detail {

inline ExprMatrix to_expr(const Matrix& m) { return ExprMatrix::from_matrix(m); }

/// Companion lifting of x(k) = (+)_m A_m(k) x(k-m): state (x(k),...,x(k-M+1)),
/// top block row A_1..A_M, identity blocks on the subdiagonal.
inline ExprMatrix companion(const std::vector<ExprMatrix>& a) {
    const int m = static_cast<int>(a.size());
    const int n = a[0].rows();
    ExprMatrix out(n * m, n * m);
    for (int blk = 0; blk < m; ++blk)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out.at(i, blk * n + j) = a[static_cast<std::size_t>(blk)].at(i, j);
    for (int blk = 1; blk < m; ++blk)
        for (int i = 0; i < n; ++i)
            out.at(blk * n + i, (blk - 1) * n + i) = Expr::one();
    return out;
}

} // namespace detail

/**
 * Build the A_m(k) expression matrices per the blocking rule and lift them
 * to a first-order process. With no blocking,
 *
 *   A_1(k) = (I (+) T_k G_0^T)^r T_k (I (+) G_1^T),
 *   A_m(k) = (I (+) T_k G_0^T)^r T_k G_m^T;
 *
 * manufacturing blocking adds H_m outside the T_k product, communication
 * blocking adds it inside.
 */
inline CompiledModel compile(const NetworkModel& model, std::uint64_t seed) {
    const NetworkSpec& s = model.spec;
    PartialGraphs pg = build_partial_graphs(s);
    const int n = s.n;
    const int r = longest_path(s);
    const int m_delay = pg.max_delay;

    ExprMatrix t(n, n);
    for (int i = 0; i < n; ++i) t.at(i, i) = Expr::tau(i, 0);

    ExprMatrix eye = ExprMatrix::identity(n);
    ExprMatrix l = mat_power(mat_add(eye, mat_mul(t, detail::to_expr(pg.g[0].transpose()))), r);

    auto h_or_zero = [&](int m) {
        return m <= pg.max_buffer_plus_one ? detail::to_expr(pg.h[static_cast<std::size_t>(m - 1)])
                                           : ExprMatrix::zeros(n, n);
    };

    std::vector<ExprMatrix> a;
    for (int m = 1; m <= m_delay; ++m) {
        ExprMatrix gmt = detail::to_expr(pg.g[static_cast<std::size_t>(m)].transpose());
        ExprMatrix core = m == 1 ? mat_add(eye, gmt) : gmt;
        switch (s.blocking) {
            case Blocking::none:
                a.push_back(mat_mul(l, mat_mul(t, core)));
                break;
            case Blocking::manufacturing:
                a.push_back(mat_mul(l, mat_add(mat_mul(t, core), h_or_zero(m))));
                break;
            case Blocking::communication:
                a.push_back(mat_mul(l, mat_mul(t, mat_add(core, h_or_zero(m)))));
                break;
        }
    }

    ExprMatrix lifted_exprs = a.size() == 1 ? a[0] : detail::companion(a);
    RandomMatrixProcess lifted(std::move(lifted_exprs), model.streams, model.bindings, seed);
    return CompiledModel{model, m_delay, r, std::move(a), std::move(lifted)};
}

// ---------------------------------------------------------------------------
// trajectories
// ---------------------------------------------------------------------------

/// Departure epochs x(1..steps) by direct evaluation of the multi-delay
/// recursion, from x(0) = the all-one vector and x(k) = zero for k < 0.
inline std::vector<std::vector<double>> direct_trajectory(const CompiledModel& c,
                                                          long long steps,
                                                          std::uint64_t replication = 0) {
    const int n = c.model.spec.n;
    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> history;  // x(0), x(1), ...
    history.emplace_back(static_cast<std::size_t>(n), 0.0);
    for (long long k = 1; k <= steps; ++k) {
        std::vector<double> x(static_cast<std::size_t>(n), neg_inf);
        for (int m = 1; m <= c.max_delay; ++m) {
            if (k - m < 0) continue;
            const std::vector<double>& prev = history[static_cast<std::size_t>(k - m)];
            const ExprMatrix& am = c.delay_matrices[static_cast<std::size_t>(m - 1)];
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const Expr& e = am.at(i, j);
                    if (e.is_zero() || prev[static_cast<std::size_t>(j)] == neg_inf) continue;
                    double v = e.eval([&](int node, int lag) {
                        return c.lifted.tau_value(node, lag, k, replication);
                    });
                    x[static_cast<std::size_t>(i)] =
                        std::max(x[static_cast<std::size_t>(i)],
                                 v + prev[static_cast<std::size_t>(j)]);
                }
        }
        history.push_back(std::move(x));
    }
    history.erase(history.begin());
    return history;
}

/// The same epochs through the companion lifting: propagate the stacked
/// state and read its first block.
inline std::vector<std::vector<double>> lifted_trajectory(const CompiledModel& c,
                                                          long long steps,
                                                          std::uint64_t replication = 0) {
    const int n = c.model.spec.n;
    const int dim = c.lifted.dim();
    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> y(static_cast<std::size_t>(dim), neg_inf);
    for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = 0.0;

    std::vector<std::vector<double>> out;
    std::vector<double> ny(static_cast<std::size_t>(dim));
    for (long long k = 1; k <= steps; ++k) {
        const ExprMatrix& ex = c.lifted.exprs();
        for (int i = 0; i < dim; ++i) {
            double best = neg_inf;
            for (int j = 0; j < dim; ++j) {
                const Expr& e = ex.at(i, j);
                if (e.is_zero() || y[static_cast<std::size_t>(j)] == neg_inf) continue;
                double v = e.eval([&](int node, int lag) {
                    return c.lifted.tau_value(node, lag, k, replication);
                });
                best = std::max(best, v + y[static_cast<std::size_t>(j)]);
            }
            ny[static_cast<std::size_t>(i)] = best;
        }
        y.swap(ny);
        out.emplace_back(y.begin(), y.begin() + n);
    }
    return out;
}

// ---------------------------------------------------------------------------
// presets
// ---------------------------------------------------------------------------

namespace presets {

inline NetworkModel open_tandem(const std::vector<ServiceDistribution>& services) {
    const int n = static_cast<int>(services.size());
    if (n < 2) throw ModelInvalidError("open tandem needs at least 2 nodes");
    NetworkSpec s;
    s.n = n;
    for (int i = 0; i + 1 < n; ++i) s.arcs.push_back({i, i + 1});
    s.initial_customers.assign(static_cast<std::size_t>(n), Count{0});
    s.initial_customers[0] = std::nullopt;  // source
    s.buffer_capacity.assign(static_cast<std::size_t>(n), std::nullopt);
    s.service = services;
    return make_model(std::move(s));
}

inline NetworkModel closed_tandem(const std::vector<ServiceDistribution>& services) {
    const int n = static_cast<int>(services.size());
    if (n < 2) throw ModelInvalidError("closed tandem needs at least 2 nodes");
    NetworkSpec s;
    s.n = n;
    for (int i = 0; i < n; ++i) s.arcs.push_back({i, (i + 1) % n});
    s.initial_customers.assign(static_cast<std::size_t>(n), Count{1});
    s.buffer_capacity.assign(static_cast<std::size_t>(n), std::nullopt);
    s.service = services;
    return make_model(std::move(s));
}

/// Open tandem with finite buffers under a blocking rule; one capacity per
/// node (infinite when omitted).
inline NetworkModel blocked_tandem(const std::vector<ServiceDistribution>& services,
                                   const std::vector<Count>& buffers, Blocking rule) {
    NetworkModel m = open_tandem(services);
    if (buffers.size() != m.spec.buffer_capacity.size())
        throw ModelInvalidError("one buffer capacity per node");
    m.spec.buffer_capacity = buffers;
    m.spec.blocking = rule;
    return m;
}

/// The five-node fork-join network: a source feeding a fork node inside a
/// feedback loop, parallel branches joining at the sink.
inline NetworkModel fork_join_5(const std::vector<ServiceDistribution>& services) {
    if (services.size() != 5) throw ModelInvalidError("fork_join_5 needs 5 services");
    NetworkSpec s;
    s.n = 5;
    s.arcs = {{0, 1}, {1, 2}, {1, 3}, {2, 1}, {2, 4}, {3, 4}};
    s.initial_customers = {std::nullopt, Count{0}, Count{1}, Count{0}, Count{1}};
    s.buffer_capacity.assign(5, std::nullopt);
    s.service = services;
    return make_model(std::move(s));
}

/**
 * Round-robin routing of one arrival stream over l queues, replaced by its
 * equivalent fork-join network of 2l nodes: a ring of l routing nodes (one
 * initial customer at the first) feeding the queues, every routing node
 * reading the arrival stream at interleaved indices
 * tau_{i k} = tau_{0, k l - 2 l + i}.
 */
inline NetworkModel round_robin(int l, const ServiceDistribution& arrival,
                                const std::vector<ServiceDistribution>& services) {
    if (l < 2) throw ModelInvalidError("round robin needs at least 2 queues");
    if (static_cast<int>(services.size()) != l)
        throw ModelInvalidError("one service distribution per queue");
    NetworkSpec s;
    s.n = 2 * l;
    for (int i = 0; i < l; ++i) s.arcs.push_back({l + i, i});          // ring feeds queue i
    for (int i = 0; i < l; ++i) s.arcs.push_back({l + i, l + (i + 1) % l});  // the ring
    s.initial_customers.assign(static_cast<std::size_t>(2 * l), Count{0});
    s.initial_customers[static_cast<std::size_t>(l)] = Count{1};
    s.buffer_capacity.assign(static_cast<std::size_t>(2 * l), std::nullopt);
    s.service = services;
    for (int i = 0; i < l; ++i) s.service.push_back(arrival);

    NetworkModel m;
    m.spec = std::move(s);
    m.streams = services;
    m.streams.push_back(arrival);  // stream l: the shared arrival stream
    m.bindings.resize(static_cast<std::size_t>(2 * l));
    for (int i = 0; i < l; ++i) m.bindings[static_cast<std::size_t>(i)] = {i, 1, 0};
    for (int i = l; i < 2 * l; ++i)
        m.bindings[static_cast<std::size_t>(i)] = {l, l, (i + 1) - 2 * l};
    return m;
}

} // namespace presets

} // namespace tropic
