#pragma once

// Expected symbolic state matrices of the six reference scenarios, written
// out entry by entry (0-based nodes). These are the displayed forms the
// compiler must reproduce expression-for-expression.

#include "tropic/expr.hpp"

namespace fixtures {

using tropic::Expr;
using tropic::ExprMatrix;

inline Expr t(int node, int lag = 0) { return Expr::tau(node, lag); }

// open tandem, infinite buffers: cumulative products below the diagonal
inline ExprMatrix open_tandem(int n) {
    ExprMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            Expr e = Expr::one();
            for (int l = j; l <= i; ++l) e = e * t(l);
            a.at(i, j) = e;
        }
    return a;
}

// closed tandem, one initial customer per node
inline ExprMatrix closed_tandem(int n) {
    ExprMatrix a(n, n);
    for (int i = 0; i < n; ++i) {
        a.at(i, i) = t(i);
        a.at(i, (i + n - 1) % n) = t(i);
    }
    return a;
}

// three-node tandem, manufacturing blocking, b = (inf, inf, 0)
inline ExprMatrix manufacturing_tandem_3() {
    ExprMatrix a(3, 3);
    a.at(0, 0) = t(0);
    a.at(1, 0) = t(0) * t(1);
    a.at(1, 1) = t(1);
    a.at(1, 2) = Expr::one();
    a.at(2, 0) = t(0) * t(1) * t(2);
    a.at(2, 1) = t(1) * t(2);
    a.at(2, 2) = t(2);
    return a;
}

// three-node tandem, communication blocking, b = (inf, 0, 0)
inline ExprMatrix communication_tandem_3() {
    ExprMatrix a(3, 3);
    a.at(0, 0) = t(0);
    a.at(0, 1) = t(0);
    a.at(1, 0) = t(0) * t(1);
    a.at(1, 1) = t(0) * t(1);
    a.at(1, 2) = t(1);
    a.at(2, 0) = t(0) * t(1) * t(2);
    a.at(2, 1) = t(0) * t(1) * t(2);
    a.at(2, 2) = t(1) * t(2);
    return a;
}

// five-node fork-join network with a feedback loop around the fork node
inline ExprMatrix fork_join_5() {
    ExprMatrix a(5, 5);
    a.at(0, 0) = t(0);
    a.at(1, 0) = t(0) * t(1);
    a.at(1, 1) = t(1) * t(2);
    a.at(1, 2) = t(1) * t(2);
    a.at(2, 1) = t(2);
    a.at(2, 2) = t(2);
    a.at(3, 0) = t(0) * t(1) * t(3);
    a.at(3, 1) = t(1) * t(2) * t(3);
    a.at(3, 2) = t(1) * t(2) * t(3);
    a.at(3, 3) = t(3);
    a.at(4, 2) = t(4);
    a.at(4, 3) = t(4);
    a.at(4, 4) = t(4);
    return a;
}

// round-robin system with two queues, as the equivalent 4-node fork-join
inline ExprMatrix round_robin_2() {
    ExprMatrix a(4, 4);
    a.at(0, 0) = t(0);
    a.at(0, 2) = t(0) * t(2);
    a.at(0, 3) = t(0) * t(2);
    a.at(1, 1) = t(1);
    a.at(1, 2) = t(1) * t(2) * t(3);
    a.at(1, 3) = t(1) * t(2) * t(3);
    a.at(2, 2) = t(2);
    a.at(2, 3) = t(2);
    a.at(3, 2) = t(2) * t(3);
    a.at(3, 3) = t(2) * t(3);
    return a;
}

} // namespace fixtures
