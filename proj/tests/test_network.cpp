#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fixtures.hpp"
#include "tropic/network.hpp"

using namespace tropic;

namespace {

std::vector<ServiceDistribution> exp_services(int n, double rate = 1.0) {
    return std::vector<ServiceDistribution>(static_cast<std::size_t>(n),
                                            ServiceDistribution::exponential(rate));
}

} // namespace

TEST_CASE("validation localizes the first violated invariant") {
    // source with a finite customer count
    NetworkModel m = presets::open_tandem(exp_services(3));
    m.spec.initial_customers[0] = Count{1};
    CHECK_THROWS_AS(validate(m.spec), ModelInvalidError);

    // non-source with an infinite count
    m = presets::open_tandem(exp_services(3));
    m.spec.initial_customers[1] = std::nullopt;
    CHECK_THROWS_AS(validate(m.spec), ModelInvalidError);

    // buffer below the initial customers
    m = presets::closed_tandem(exp_services(2));
    m.spec.blocking = Blocking::manufacturing;
    m.spec.buffer_capacity[0] = Count{0};
    CHECK_THROWS_AS(validate(m.spec), ModelInvalidError);

    // finite buffer without a blocking rule
    m = presets::open_tandem(exp_services(3));
    m.spec.buffer_capacity[2] = Count{1};
    CHECK_THROWS_AS(validate(m.spec), ModelInvalidError);

    // cyclic G_0: a closed ring with no customers anywhere
    m = presets::closed_tandem(exp_services(3));
    for (auto& c : m.spec.initial_customers) c = Count{0};
    CHECK_THROWS_AS(validate(m.spec), ModelInvalidError);
    CHECK_THROWS_AS(longest_path(m.spec), ModelInvalidError);

    CHECK_NOTHROW(validate(presets::fork_join_5(exp_services(5)).spec));
}

TEST_CASE("partial graphs of the reference networks") {
    // open tandem: G_0 is the path, no G_1, M = 1 effective
    PartialGraphs pg = build_partial_graphs(presets::open_tandem(exp_services(4)).spec);
    CHECK(pg.max_customers == 0);
    CHECK(pg.max_delay == 1);
    for (int i = 0; i + 1 < 4; ++i) CHECK(pg.g[0].at(i, i + 1).is_one());
    CHECK(norm(pg.g[1]).is_zero());
    CHECK(pg.h.empty());

    // closed tandem: G_0 empty, G_1 the cycle adjacency, M = 1
    pg = build_partial_graphs(presets::closed_tandem(exp_services(3)).spec);
    CHECK(norm(pg.g[0]).is_zero());
    for (int i = 0; i < 3; ++i) CHECK(pg.g[1].at(i, (i + 1) % 3).is_one());
    CHECK(pg.max_delay == 1);

    // manufacturing tandem n=3, b3=0: H_1 flags the arc into the full buffer
    NetworkModel mfg = presets::blocked_tandem(
        exp_services(3), {std::nullopt, std::nullopt, Count{0}}, Blocking::manufacturing);
    pg = build_partial_graphs(mfg.spec);
    CHECK(pg.max_buffer_plus_one == 1);
    REQUIRE(pg.h.size() == 1);
    CHECK(pg.h[0].at(1, 2).is_one());
    CHECK(norm(mat_add(pg.h[0], Matrix::zeros(3, 3))) == Scalar::one(Semifield::max_plus));
}

TEST_CASE("longest path of G_0") {
    CHECK(longest_path(presets::open_tandem(exp_services(5)).spec) == 4);
    CHECK(longest_path(presets::fork_join_5(exp_services(5)).spec) == 2);
    CHECK(longest_path(presets::closed_tandem(exp_services(3)).spec) == 0);
}

TEST_CASE("compilation reproduces the displayed matrices symbol for symbol") {
    std::uint64_t seed = 7;

    SECTION("open tandem") {
        for (int n : {2, 3, 5}) {
            CompiledModel c = compile(presets::open_tandem(exp_services(n)), seed);
            CHECK(c.max_delay == 1);
            CHECK(c.delay_matrices[0] == fixtures::open_tandem(n));
        }
    }
    SECTION("closed tandem") {
        for (int n : {2, 4}) {
            CompiledModel c = compile(presets::closed_tandem(exp_services(n)), seed);
            CHECK(c.delay_matrices[0] == fixtures::closed_tandem(n));
        }
    }
    SECTION("manufacturing blocking") {
        CompiledModel c = compile(
            presets::blocked_tandem(exp_services(3), {std::nullopt, std::nullopt, Count{0}},
                                    Blocking::manufacturing),
            seed);
        CHECK(c.delay_matrices[0] == fixtures::manufacturing_tandem_3());
    }
    SECTION("communication blocking") {
        CompiledModel c = compile(
            presets::blocked_tandem(exp_services(3), {std::nullopt, Count{0}, Count{0}},
                                    Blocking::communication),
            seed);
        CHECK(c.delay_matrices[0] == fixtures::communication_tandem_3());
    }
    SECTION("fork-join") {
        CompiledModel c = compile(presets::fork_join_5(exp_services(5)), seed);
        CHECK(c.longest_path_len == 2);
        CHECK(c.delay_matrices[0] == fixtures::fork_join_5());
    }
    SECTION("round robin l=2") {
        CompiledModel c = compile(
            presets::round_robin(2, ServiceDistribution::exponential(1.0), exp_services(2)),
            seed);
        CHECK(c.longest_path_len == 2);
        CHECK(c.delay_matrices[0] == fixtures::round_robin_2());
    }
}

TEST_CASE("deterministic tandem sample matches the displayed values") {
    CompiledModel c = compile(presets::open_tandem({ServiceDistribution::deterministic(1.0),
                                                    ServiceDistribution::deterministic(2.0)}),
                              1);
    CHECK(c.lifted.sample(1) ==
          Matrix::from_ieee({{1, -std::numeric_limits<double>::infinity()}, {3, 2}}));
}

TEST_CASE("blocking rules with infinite buffers reduce to the unblocked model") {
    for (Blocking rule : {Blocking::manufacturing, Blocking::communication}) {
        NetworkModel open = presets::open_tandem(exp_services(4));
        NetworkModel blocked = open;
        blocked.spec.blocking = rule;
        CompiledModel a = compile(open, 3), b = compile(blocked, 3);
        REQUIRE(a.delay_matrices.size() == b.delay_matrices.size());
        for (std::size_t i = 0; i < a.delay_matrices.size(); ++i)
            CHECK(a.delay_matrices[i] == b.delay_matrices[i]);
    }
}

TEST_CASE("every reference scenario yields regular samples") {
    std::vector<NetworkModel> models;
    models.push_back(presets::open_tandem(exp_services(3)));
    models.push_back(presets::closed_tandem(exp_services(2)));
    models.push_back(presets::blocked_tandem(
        exp_services(3), {std::nullopt, std::nullopt, Count{0}}, Blocking::manufacturing));
    models.push_back(presets::blocked_tandem(
        exp_services(3), {std::nullopt, Count{0}, Count{0}}, Blocking::communication));
    models.push_back(presets::fork_join_5(exp_services(5)));
    models.push_back(
        presets::round_robin(2, ServiceDistribution::exponential(1.0), exp_services(2)));
    for (const auto& m : models) {
        CompiledModel c = compile(m, 99);
        for (long long k = 1; k <= 20; ++k) CHECK(c.lifted.sample(k).regular());
    }
}

TEST_CASE("departure epochs are nondecreasing along every sampled path") {
    std::vector<NetworkModel> models;
    models.push_back(presets::open_tandem(exp_services(3)));
    models.push_back(presets::fork_join_5(exp_services(5)));
    models.push_back(presets::blocked_tandem(
        exp_services(3), {std::nullopt, Count{0}, Count{0}}, Blocking::communication));
    for (const auto& m : models) {
        CompiledModel c = compile(m, 123);
        for (std::uint64_t rep = 0; rep < 5; ++rep) {
            auto traj = direct_trajectory(c, 60, rep);
            for (std::size_t k = 1; k < traj.size(); ++k)
                for (std::size_t i = 0; i < traj[k].size(); ++i)
                    CHECK(traj[k][i] >= traj[k - 1][i]);
        }
    }
}

TEST_CASE("round robin reads the arrival stream at interleaved indices") {
    ServiceDistribution arrival = ServiceDistribution::exponential(1.0);
    CompiledModel c =
        compile(presets::round_robin(2, arrival, exp_services(2)), 2024);
    // node 2 reads indices 2k-1, node 3 reads 2k: together the whole stream
    for (long long k = 1; k <= 10; ++k) {
        double a = c.lifted.tau_value(2, 0, k, 0);
        double b = c.lifted.tau_value(3, 0, k, 0);
        RngKey ka{2024, 0, 2, static_cast<std::uint64_t>(2 * k - 1)};
        RngKey kb{2024, 0, 2, static_cast<std::uint64_t>(2 * k)};
        CHECK(a == arrival.sample(ka));
        CHECK(b == arrival.sample(kb));
    }
}

TEST_CASE("multi-delay recursion: lifting equals direct evaluation exactly") {
    // a genuine M=2 network: two-node ring with two customers parked at node 0
    NetworkSpec s;
    s.n = 2;
    s.arcs = {{0, 1}, {1, 0}};
    s.initial_customers = {Count{2}, Count{0}};
    s.buffer_capacity = {std::nullopt, std::nullopt};
    s.service = exp_services(2);
    NetworkModel ring = make_model(std::move(s));

    CompiledModel c = compile(ring, 31);
    REQUIRE(c.max_delay == 2);
    CHECK(c.lifted.dim() == 4);
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        auto direct = direct_trajectory(c, 50, rep);
        auto lifted = lifted_trajectory(c, 50, rep);
        REQUIRE(direct.size() == lifted.size());
        for (std::size_t k = 0; k < direct.size(); ++k) CHECK(direct[k] == lifted[k]);
    }

    // an M=1 model forced into a two-block lifted form
    CompiledModel one = compile(presets::closed_tandem(exp_services(2)), 8);
    CompiledModel forced = one;
    forced.max_delay = 2;
    forced.delay_matrices.push_back(ExprMatrix::zeros(2, 2));
    forced.lifted = RandomMatrixProcess(
        ExprMatrix(4, 4), forced.model.streams, forced.model.bindings, 8);
    {
        ExprMatrix comp(4, 4);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) comp.at(i, j) = one.delay_matrices[0].at(i, j);
        comp.at(2, 0) = Expr::one();
        comp.at(3, 1) = Expr::one();
        forced.lifted = RandomMatrixProcess(comp, forced.model.streams, forced.model.bindings, 8);
    }
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        auto plain = direct_trajectory(one, 50, rep);
        auto direct = direct_trajectory(forced, 50, rep);
        auto lifted = lifted_trajectory(forced, 50, rep);
        for (std::size_t k = 0; k < plain.size(); ++k) {
            CHECK(plain[k] == direct[k]);
            CHECK(plain[k] == lifted[k]);
        }
    }
}
