#include <catch2/catch_amalgamated.hpp>

#include <memory>
#include <random>

#include "tropic/expr.hpp"

using namespace tropic;

namespace {

// Naive expression tree, evaluated without any simplification; the oracle
// for normal-form preservation.
struct Node {
    enum class Kind { zero, constant, tau, oplus, otimes } kind;
    double c = 0.0;
    int node = 0, lag = 0;
    std::shared_ptr<Node> l, r;

    double eval(const std::vector<std::vector<double>>& tau) const {
        switch (kind) {
            case Kind::zero: return -std::numeric_limits<double>::infinity();
            case Kind::constant: return c;
            case Kind::tau: return tau[node][lag];
            case Kind::oplus: return std::max(l->eval(tau), r->eval(tau));
            case Kind::otimes: return l->eval(tau) + r->eval(tau);
        }
        return 0.0;
    }
};

using NodePtr = std::shared_ptr<Node>;

struct Built {
    NodePtr tree;
    Expr expr;
};

Built random_expr(std::mt19937_64& g, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 4);
    std::uniform_int_distribution<int> nodes(0, 3);
    std::uniform_int_distribution<int> lags(0, 1);
    std::uniform_real_distribution<double> cs(-2.0, 4.0);
    int what = pick(g);
    auto n = std::make_shared<Node>();
    if (what == 0) {
        n->kind = Node::Kind::zero;
        return {n, Expr::zero()};
    }
    if (what == 1) {
        n->kind = Node::Kind::constant;
        n->c = cs(g);
        return {n, Expr::constant(n->c)};
    }
    if (what == 2) {
        n->kind = Node::Kind::tau;
        n->node = nodes(g);
        n->lag = lags(g);
        return {n, Expr::tau(n->node, n->lag)};
    }
    Built a = random_expr(g, depth - 1);
    Built b = random_expr(g, depth - 1);
    n->l = a.tree;
    n->r = b.tree;
    if (what == 3) {
        n->kind = Node::Kind::oplus;
        return {n, oplus(a.expr, b.expr)};
    }
    n->kind = Node::Kind::otimes;
    return {n, otimes(a.expr, b.expr)};
}

} // namespace

TEST_CASE("normal form basics") {
    Expr t0 = Expr::tau(0), t1 = Expr::tau(1);
    CHECK(oplus(t0, t0) == t0);
    CHECK(oplus(t0, Expr::zero()) == t0);
    CHECK(otimes(t0, Expr::one()) == t0);
    CHECK(otimes(t0, Expr::zero()).is_zero());
    CHECK(oplus(t0, t1) == oplus(t1, t0));
    CHECK(otimes(t0, t1) == otimes(t1, t0));

    // nonnegativity-based absorption: 1 (+) tau = tau, tau (+) tau*tau' = tau*tau'
    CHECK(oplus(Expr::one(), t0) == t0);
    CHECK(oplus(t0, otimes(t0, t1)) == otimes(t0, t1));
    // but a positive constant is not absorbed by a bare leaf
    CHECK(oplus(Expr::constant(2.0), t0) != t0);
}

TEST_CASE("distributivity at the normal-form level") {
    Expr t0 = Expr::tau(0), t1 = Expr::tau(1), t2 = Expr::tau(2);
    CHECK(otimes(t0, oplus(t1, t2)) == oplus(otimes(t0, t1), otimes(t0, t2)));
}

TEST_CASE("normalization preserves evaluation on random expression trees") {
    std::mt19937_64 gen(0xe59ULL);
    std::uniform_real_distribution<double> tau_val(0.0, 5.0);
    for (int rep = 0; rep < 400; ++rep) {
        Built b = random_expr(gen, 4);
        for (int trial = 0; trial < 25; ++trial) {
            std::vector<std::vector<double>> tau(4, std::vector<double>(2));
            for (auto& row : tau)
                for (double& v : row) v = tau_val(gen);
            double naive = b.tree->eval(tau);
            double normalized = b.expr.is_zero()
                                    ? -std::numeric_limits<double>::infinity()
                                    : b.expr.eval([&](int n, int l) { return tau[n][l]; });
            if (std::isinf(naive))
                CHECK(std::isinf(normalized));
            else
                CHECK_THAT(normalized, Catch::Matchers::WithinRel(naive, 1e-12) ||
                                           Catch::Matchers::WithinAbs(naive, 1e-12));
        }
    }
}

TEST_CASE("lag shifting and division") {
    Expr e = otimes(Expr::tau(0, 0), Expr::tau(1, 1));
    CHECK(e.shift_lag(1) == otimes(Expr::tau(0, 1), Expr::tau(1, 2)));

    Expr q = e.div_monomial(Expr::tau(0).monomials()[0]);
    CHECK(q == Expr::tau(1, 1));
    CHECK(otimes(q, Expr::tau(0)) == e);  // inverse powers cancel

    Expr with_inverse = Expr::one().div_monomial(Expr::tau(2).monomials()[0]);
    CHECK(with_inverse.eval([](int, int) { return 3.0; }) == -3.0);
}

TEST_CASE("common monomial factor") {
    Expr t0 = Expr::tau(0), t1 = Expr::tau(1), t2 = Expr::tau(2);
    Expr e = oplus(otimes(t0, t1), otimes(t0, t2));
    auto g = e.common_monomial_factor();
    REQUIRE(g.has_value());
    CHECK(Expr::from_monomials({*g}) == t0);
    CHECK(e.div_monomial(*g) == oplus(t1, t2));
}

TEST_CASE("expression matrices multiply like the displayed tandem product") {
    // (I (+) T G0^T) T for a two-node tandem: cumulative sums below the diagonal
    ExprMatrix t(2, 2);
    t.at(0, 0) = Expr::tau(0);
    t.at(1, 1) = Expr::tau(1);
    ExprMatrix g0t(2, 2);
    g0t.at(1, 0) = Expr::one();
    ExprMatrix l = mat_add(ExprMatrix::identity(2), mat_mul(t, g0t));
    ExprMatrix a = mat_mul(l, t);
    CHECK(a.at(0, 0) == Expr::tau(0));
    CHECK(a.at(0, 1).is_zero());
    CHECK(a.at(1, 0) == otimes(Expr::tau(0), Expr::tau(1)));
    CHECK(a.at(1, 1) == Expr::tau(1));

    Matrix sample = a.eval([](int node, int) { return node == 0 ? 1.0 : 2.0; });
    CHECK(sample == Matrix::from_ieee({{1, -std::numeric_limits<double>::infinity()}, {3, 2}}));
}
