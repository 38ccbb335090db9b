#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tropic/process.hpp"

using namespace tropic;

namespace {

Expr t(int node, int lag = 0) { return Expr::tau(node, lag); }

// open tandem n=2 symbolic matrix
ExprMatrix tandem2() {
    ExprMatrix a(2, 2);
    a.at(0, 0) = t(0);
    a.at(1, 0) = t(0) * t(1);
    a.at(1, 1) = t(1);
    return a;
}

} // namespace

TEST_CASE("sampling is a pure function of seed, replication and cycle") {
    RandomMatrixProcess p(tandem2(),
                          {ServiceDistribution::exponential(1.0),
                           ServiceDistribution::exponential(2.0)},
                          42);
    Matrix a1 = p.sample(1), a1_again = p.sample(1);
    CHECK(a1 == a1_again);
    CHECK(p.sample(2) != a1);
    CHECK(p.sample(1, 7) != a1);

    RandomMatrixProcess q(tandem2(),
                          {ServiceDistribution::exponential(1.0),
                           ServiceDistribution::exponential(2.0)},
                          43);
    CHECK(q.sample(1) != a1);
    CHECK(q.with_seed(42).sample(1) == a1);
}

TEST_CASE("deterministic services reproduce the displayed tandem sample") {
    RandomMatrixProcess p(tandem2(),
                          {ServiceDistribution::deterministic(1.0),
                           ServiceDistribution::deterministic(2.0)},
                          1);
    CHECK(p.sample(5) ==
          Matrix::from_ieee({{1, -std::numeric_limits<double>::infinity()}, {3, 2}}));
}

TEST_CASE("lag-1 leaves read the next generation exactly") {
    ExprMatrix m(1, 1);
    m.at(0, 0) = t(0, 1);
    RandomMatrixProcess lagged(m, {ServiceDistribution::exponential(1.0)}, 7);
    ExprMatrix m0(1, 1);
    m0.at(0, 0) = t(0, 0);
    RandomMatrixProcess plain(m0, {ServiceDistribution::exponential(1.0)}, 7);
    for (long long k = 1; k <= 20; ++k)
        CHECK(lagged.sample(k) == plain.sample(k + 1));
}

TEST_CASE("stream bindings alias and separate variables correctly") {
    // two nodes reading one stream at odd/even indices
    ExprMatrix m(2, 2);
    m.at(0, 0) = t(0);
    m.at(1, 1) = t(1);
    std::vector<StreamBinding> bind{{0, 2, -1}, {0, 2, 0}};
    RandomMatrixProcess p(m, {ServiceDistribution::exponential(1.0)}, bind, 5);

    CHECK_FALSE(p.same_variable({0, 0}, {1, 0}));  // indices 2k-1 vs 2k
    CHECK(p.same_variable({0, 0}, {0, 0}));
    CHECK_FALSE(p.same_variable({0, 0}, {0, 1}));
    // node 0 one cycle later equals node 0 at lag 1
    CHECK(p.tau_value(0, 1, 3, 0) == p.tau_value(0, 0, 4, 0));
    // the two nodes never collide: disjoint index parity
    for (long long k = 1; k < 10; ++k)
        for (int l0 = 0; l0 <= 1; ++l0)
            for (int l1 = 0; l1 <= 1; ++l1)
                CHECK(p.tau_value(0, l0, k, 0) != p.tau_value(1, l1, k, 0));
}

TEST_CASE("expected matrix: analytic products, closed-form maxima") {
    // entries: tau0, tau0*tau1 (analytic), tau1 (+) tau2' (closed form)
    ExprMatrix m(2, 2);
    m.at(0, 0) = t(0);
    m.at(0, 1) = t(0) * t(1);
    m.at(1, 0) = oplus(t(1), t(2, 1));
    RandomMatrixProcess p(m,
                          {ServiceDistribution::exponential(1.0),
                           ServiceDistribution::exponential(0.5),
                           ServiceDistribution::exponential(1.0)},
                          11);
    ExpectedMatrix em = expected_matrix(p, 20000);
    CHECK(em.mean.at(0, 0) == Scalar::finite(1.0));        // exact
    CHECK(em.mean.at(0, 1) == Scalar::finite(1.0 + 2.0));  // linearity, exact
    CHECK(em.std_errors[0][0] == 0.0);
    CHECK(em.std_errors[0][1] == 0.0);
    CHECK(em.mean.at(1, 1).is_zero());

    double expected = oracles::emax_two_exponentials(1.0, 0.5);
    CHECK_THAT(em.mean.at(1, 0).value(), Catch::Matchers::WithinAbs(expected, 1e-12));
}

TEST_CASE("expectation engine falls back to Monte Carlo with a standard error") {
    // max of three leaves has no closed form here
    ExprMatrix m(1, 1);
    m.at(0, 0) = oplus(oplus(t(0), t(1)), t(2));
    RandomMatrixProcess p(m,
                          {ServiceDistribution::uniform(0.0, 1.0),
                           ServiceDistribution::uniform(0.0, 1.0),
                           ServiceDistribution::uniform(0.0, 1.0)},
                          3);
    ExpectationEngine eng(p, 200000);
    Expectation ex = eng.expect(m.at(0, 0));
    CHECK_FALSE(ex.analytic);
    CHECK(ex.std_error > 0.0);
    // E max of three iid U(0,1) = 3/4
    CHECK_THAT(ex.value, Catch::Matchers::WithinAbs(0.75, 5 * ex.std_error + 1e-3));
}

TEST_CASE("the closed form E max(xi, eta) is confirmed by brute force") {
    ExprMatrix m(1, 1);
    m.at(0, 0) = oplus(t(0), t(1));
    RandomMatrixProcess p(m,
                          {ServiceDistribution::exponential(1.0),
                           ServiceDistribution::exponential(1.0)},
                          17);
    ExpectationEngine eng(p, 10);
    Expectation ex = eng.expect(m.at(0, 0));
    CHECK(ex.analytic);
    CHECK(ex.value == 1.5);

    // independent brute force with a separate generator
    std::mt19937_64 gen(0x600dULL);
    std::exponential_distribution<double> e1(1.0);
    double sum = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) sum += std::max(e1(gen), e1(gen));
    CHECK_THAT(sum / n, Catch::Matchers::WithinAbs(1.5, 0.005));
}

TEST_CASE("deterministic leaves collapse to constants") {
    ExprMatrix m(1, 1);
    m.at(0, 0) = oplus(t(0), oplus(t(1) * t(2), t(3)));
    RandomMatrixProcess p(m,
                          {ServiceDistribution::deterministic(1.0),
                           ServiceDistribution::deterministic(2.0),
                           ServiceDistribution::deterministic(3.0),
                           ServiceDistribution::deterministic(4.0)},
                          9);
    ExpectationEngine eng(p, 10);
    Expectation ex = eng.expect(m.at(0, 0));
    CHECK(ex.analytic);
    CHECK(ex.value == 5.0);  // max(1, 2+3, 4)
    CHECK(ex.std_error == 0.0);
}

TEST_CASE("truncated normal sampling and mean agree") {
    ServiceDistribution d = ServiceDistribution::normal(0.5, 1.0);
    double analytic = d.mean();
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double v = d.sample({99, 0, 0, static_cast<std::uint64_t>(i)});
        REQUIRE(v >= 0.0);
        sum += v;
    }
    CHECK_THAT(sum / n, Catch::Matchers::WithinAbs(analytic, 0.01));
}

TEST_CASE("distribution literals parse and round-trip") {
    CHECK(ServiceDistribution::parse("det(2.5)") == ServiceDistribution::deterministic(2.5));
    CHECK(ServiceDistribution::parse("exp(2)") == ServiceDistribution::exponential(2.0));
    CHECK(ServiceDistribution::parse(" unif(0, 2) ") == ServiceDistribution::uniform(0, 2));
    CHECK(ServiceDistribution::parse("norm(1,0.5)") == ServiceDistribution::normal(1, 0.5));
    CHECK_THROWS_AS(ServiceDistribution::parse("exp()"), ParseError);
    CHECK_THROWS_AS(ServiceDistribution::parse("gamma(1,2)"), ParseError);
    CHECK_THROWS_AS(ServiceDistribution::parse("exp(-1)"), ParseError);
    for (const char* lit : {"det(2.5)", "exp(2)", "unif(0,2)", "norm(1,0.5)"})
        CHECK(ServiceDistribution::parse(ServiceDistribution::parse(lit).to_string()) ==
              ServiceDistribution::parse(lit));
}

TEST_CASE("expectation inequalities hold within three standard errors") {
    std::mt19937_64 gen(0x2b3ULL);
    std::uniform_real_distribution<double> rate(0.5, 2.0);
    for (int rep = 0; rep < 12; ++rep) {
        auto randmat = [&](int base) {
            ExprMatrix m(3, 3);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) m.at(i, j) = t(base + (3 * i + j) % 5);
            return m;
        };
        ExprMatrix am = randmat(0), bm = randmat(5);
        std::vector<ServiceDistribution> dists;
        for (int i = 0; i < 10; ++i) dists.push_back(ServiceDistribution::exponential(rate(gen)));

        std::uint64_t seed = gen();
        RandomMatrixProcess pa(am, dists, seed), pb(bm, dists, seed);
        RandomMatrixProcess psum(mat_add(am, bm), dists, seed);
        RandomMatrixProcess pprod(mat_mul(am, bm), dists, seed);

        const long long s = 20000;
        ExpectedMatrix ea = expected_matrix(pa, s), eb = expected_matrix(pb, s);
        ExpectedMatrix esum = expected_matrix(psum, s), eprod = expected_matrix(pprod, s);

        const double slack = 0.05;  // covers the rhs means' own sampling noise

        // E(A (+) B) >= EA (+) EB entrywise
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                Scalar rhs = oplus(ea.mean.at(i, j), eb.mean.at(i, j));
                CHECK(esum.mean.at(i, j).value() + 3.0 * (esum.std_errors[i][j] + slack) >=
                      rhs.value());
            }
        // E(AB) >= EA EB entrywise
        Matrix eaeb = mat_mul(ea.mean, eb.mean);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(eprod.mean.at(i, j).value() + 3.0 * (eprod.std_errors[i][j] + slack) >=
                      eaeb.at(i, j).value());

        // E||A|| >= ||EA|| and E tr A >= tr EA
        ExpectationEngine eng(pa, s);
        Expectation enorm = eng.expect(am.norm_expr());
        Expectation etr = eng.expect(am.trace_expr());
        CHECK(enorm.value + 3.0 * (enorm.std_error + slack) >= norm(ea.mean).value());
        CHECK(etr.value + 3.0 * (etr.std_error + slack) >= trace(ea.mean).value());

        // scalars: E(xi (+) eta) >= Exi (+) Eeta, E(xi eta) = Exi Eeta
        Expectation emax = eng.expect(oplus(t(0), t(1)));
        CHECK(emax.value + 3.0 * (emax.std_error + 1e-9) >=
              std::max(pa.node_mean(0), pa.node_mean(1)));
        Expectation eprod_scalar = eng.expect(t(0) * t(1));
        CHECK_THAT(eprod_scalar.value, Catch::Matchers::WithinAbs(
                                           pa.node_mean(0) + pa.node_mean(1), 1e-12));
    }
}

TEST_CASE("kingman existence check") {
    // any tandem with finite-mean services is fine
    RandomMatrixProcess p(tandem2(),
                          {ServiceDistribution::exponential(1.0),
                           ServiceDistribution::exponential(2.0)},
                          21);
    KingmanDiagnostics d = kingman_check(p, 500);
    CHECK(d.ok);
    CHECK(d.e_norm_finite);
    CHECK_FALSE(d.rho_of_mean.is_zero());

    // nilpotent fixed matrix: strictly triangular, zero diagonal
    ExprMatrix nil(2, 2);
    nil.at(1, 0) = Expr::constant(3.0);
    RandomMatrixProcess pn(nil, {ServiceDistribution::exponential(1.0)}, 22);
    KingmanDiagnostics dn = kingman_check(pn, 100);
    CHECK_FALSE(dn.ok);
    CHECK(dn.rho_of_mean.is_zero());

    // all-zero matrix process
    RandomMatrixProcess pz(ExprMatrix(2, 2), {ServiceDistribution::exponential(1.0)}, 23);
    KingmanDiagnostics dz = kingman_check(pz, 100);
    CHECK_FALSE(dz.ok);
    CHECK_FALSE(dz.e_norm_finite);
}
