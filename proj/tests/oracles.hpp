#pragma once

// Independent test oracles. These deliberately avoid the library's own
// evaluation paths: cycle means by brute-force enumeration, expectations by
// closed forms or naive averaging.

#include <functional>
#include <optional>
#include <vector>

#include "tropic/matrix.hpp"

namespace oracles {

// Maximum mean weight over all simple cycles of the digraph of A, where the
// walk interpretation of tropical powers gives edge u -> v the weight A[v][u].
// Enumerates every simple cycle whose smallest vertex is the start vertex.
// Returns nothing for an acyclic pattern.
inline std::optional<double> max_cycle_mean(const tropic::Matrix& a) {
    const int n = a.rows();
    std::optional<double> best;
    std::vector<int> path;
    std::vector<bool> on_path(n, false);

    auto weight = [&](int u, int v) -> std::optional<double> {
        const tropic::Scalar& s = a.at(v, u);
        if (s.is_zero()) return std::nullopt;
        return s.value();
    };

    for (int start = 0; start < n; ++start) {
        std::function<void(int, double)> dfs = [&](int u, double sum) {
            for (int v = start; v < n; ++v) {
                auto w = weight(u, v);
                if (!w) continue;
                if (v == start) {
                    double mean = (sum + *w) / static_cast<double>(path.size() + 1);
                    if (!best || mean > *best) best = mean;
                } else if (!on_path[v]) {
                    on_path[v] = true;
                    path.push_back(v);
                    dfs(v, sum + *w);
                    path.pop_back();
                    on_path[v] = false;
                }
            }
        };
        on_path[start] = true;
        dfs(start, 0.0);
        on_path[start] = false;
    }
    return best;
}

// E max(X, Y) for independent exponentials with rates a and b.
inline double emax_two_exponentials(double a, double b) {
    return 1.0 / a + 1.0 / b - 1.0 / (a + b);
}

} // namespace oracles
