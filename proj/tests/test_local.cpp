#include <doctest.h>

#include <probelab/graph.hpp>
#include <probelab/local.hpp>
#include <probelab/probe.hpp>

#include <algorithm>
#include <climits>
#include <set>

using namespace probelab;

namespace {

std::vector<std::vector<int>> floyd(const PortedGraph & g)
{
    const auto n = g.node_count();
    std::vector<std::vector<int>> d(n, std::vector<int>(n, INT_MAX / 4));
    for (NodeIndex v = 0; v < n; ++v) {
        d[v][v] = 0;
        for (const auto & e : g.ports(v))
            d[v][e.neighbor] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    return d;
}

// Smallest ID in the ball plus the number of ball nodes, modulo the alphabet.
LocalAlgorithm min_id_alg(int radius)
{
    return {"min-id", radius, 97, [](const Ball & b, const ModelConfig &) {
                NodeId m = b.nodes.begin()->first;
                return std::vector<Symbol>{static_cast<Symbol>((m + b.nodes.size()) % 97)};
            }};
}

std::size_t max_power_degree(const PortedGraph & g, int k)
{
    auto gk = power_graph(g, k);
    std::size_t d = 0;
    for (NodeIndex v = 0; v < gk.node_count(); ++v)
        d = std::max<std::size_t>(d, gk.degree(v));
    return d;
}

} // namespace

TEST_CASE("parnas-ron probe bounds")
{
    auto k4 = make_complete(4);
    auto cfg = ModelConfig::volume(1);
    for (NodeIndex v = 0; v < 4; ++v) {
        auto t0 = run_query(parnas_ron(min_id_alg(0)), k4, Query{k4.id(v), std::nullopt}, cfg);
        CHECK(t0.probe_count <= 3);
        auto t1 = run_query(parnas_ron(min_id_alg(1)), k4, Query{k4.id(v), std::nullopt}, cfg);
        CHECK(t1.probe_count <= 12);
    }
}

TEST_CASE("parnas-ron equals the global LOCAL simulation")
{
    auto cfg = ModelConfig::volume(3);
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        auto g = gen_edge_colored_tree(5 + seed % 20, 3, seed);
        const int radius = static_cast<int>(seed % 3);
        auto alg = min_id_alg(radius);
        const auto global = simulate_local(alg, g, cfg);
        for (NodeIndex v = 0; v < g.node_count(); ++v) {
            auto t = run_query(parnas_ron(alg), g, Query{g.id(v), std::nullopt}, cfg);
            REQUIRE(t.ok());
            REQUIRE(t.output == global[v]);
        }
    }
}

TEST_CASE("log-star coloring is a proper distance-k coloring")
{
    auto p2 = make_path(2);
    auto r2 = logstar_coloring(p2, 1);
    CHECK(r2.colors[0] != r2.colors[1]);

    auto c64 = make_cycle(64);
    auto rc = logstar_coloring(c64, 2);
    const auto dc = floyd(c64);
    for (NodeIndex u = 0; u < 64; ++u)
        for (NodeIndex v = u + 1; v < 64; ++v)
            if (dc[u][v] <= 2)
                CHECK(rc.colors[u] != rc.colors[v]);

    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const std::size_t n = 32 << (seed % 4);
        auto g = seed % 2 ? gen_random_regular(n, 3, 3, seed) : gen_edge_colored_tree(n, 3, seed);
        assign_random_ids(g, std::uint64_t{1} << 40, seed);
        const int k = 1 + static_cast<int>(seed % 2);
        auto r = logstar_coloring(g, k);
        const auto d = floyd(g);
        for (NodeIndex u = 0; u < n; ++u) {
            REQUIRE(r.colors[u] < r.palette);
            for (NodeIndex v = u + 1; v < n; ++v)
                if (d[u][v] <= k)
                    REQUIRE(r.colors[u] != r.colors[v]);
        }
        const auto dk = max_power_degree(g, k);
        REQUIRE(r.D >= dk);
        REQUIRE(r.palette <= r.D * r.D + 1);
    }

    auto dup = make_path(3);
    dup.set_ids({5, 5, 6});
    CHECK_THROWS(logstar_coloring(dup, 1));
}

TEST_CASE("log-star schedule barely grows with the ID range")
{
    for (std::uint64_t D : {2, 6, 30}) {
        const auto a = ColoringSchedule::make(static_cast<unsigned __int128>(1) << 32, D);
        const auto b = ColoringSchedule::make(static_cast<unsigned __int128>(1) << 64, D);
        CHECK(b.iterations() <= a.iterations() + 2);
        CHECK(a.palette() == b.palette());
    }
}

TEST_CASE("query-mode coloring equals the global coloring")
{
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        auto g = gen_random_regular(64, 3, 3, seed);
        const int k = 1 + static_cast<int>(seed % 2);
        const auto global = logstar_coloring(g, k);
        auto alg = logstar_coloring_algorithm(k, 3, 0);
        for (NodeIndex v = 0; v < g.node_count(); ++v) {
            auto t = run_query(alg, g, Query{g.id(v), std::nullopt}, ModelConfig::volume(1));
            REQUIRE(t.ok());
            REQUIRE(t.output[0] == static_cast<Symbol>(global.colors[v]));
        }
    }
}

TEST_CASE("MIS from a coloring")
{
    auto single = make_path(1);
    CHECK(mis_from_coloring(single, {0}) == std::vector<char>{1});

    auto c4 = make_cycle(4);
    auto s = mis_from_coloring(c4, {0, 1, 0, 1});
    CHECK(s == std::vector<char>{1, 0, 1, 0});
    auto s2 = mis_from_coloring(c4, {1, 0, 1, 0});
    CHECK(s2 == std::vector<char>{0, 1, 0, 1});

    CHECK_THROWS(mis_from_coloring(c4, {0, 0, 1, 1}));

    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        const std::size_t n = 6 + 2 * (seed % 20);
        auto g = seed % 2 ? gen_random_regular(n, 3, 3, seed) : gen_edge_colored_tree(n, 4, seed);
        const int k = 1 + static_cast<int>(seed % 3);
        auto in = mis_from_coloring(g, logstar_coloring(g, k).colors, k);
        const auto d = floyd(g);
        for (NodeIndex u = 0; u < n; ++u) {
            bool dominated = in[u];
            for (NodeIndex v = 0; v < n; ++v) {
                if (v == u || d[u][v] > k)
                    continue;
                REQUIRE(!(in[u] && in[v]));
                dominated = dominated || in[v];
            }
            REQUIRE(dominated);
        }
    }
}

TEST_CASE("MIS query algorithm agrees with the global sweep")
{
    auto g = gen_random_regular(96, 3, 3, 4);
    for (int k : {1, 2}) {
        const auto col = logstar_coloring(g, k);
        const auto in = mis_from_coloring(g, col.colors, k);
        auto alg = mis_algorithm(k, 3, 0);
        for (NodeIndex v = 0; v < g.node_count(); ++v) {
            auto t = run_query(alg, g, Query{g.id(v), std::nullopt}, ModelConfig::volume(1));
            REQUIRE(t.ok());
            REQUIRE(t.output[0] == in[v]);
        }
    }
}

TEST_CASE("lifting through the coloring")
{
    ProbeAlgorithm constant{"constant", 2, [](Oracle &) { return std::vector<Symbol>{1}; }};
    auto tree = gen_edge_colored_tree(40, 3, 2);
    auto lifted_const = lift_via_coloring(constant, 8, 0, 3, 0);
    for (NodeIndex v = 0; v < tree.node_count(); ++v) {
        auto t = run_query(lifted_const, tree, Query{tree.id(v), std::nullopt}, ModelConfig::volume(1));
        REQUIRE(t.ok());
        REQUIRE(t.output == std::vector<Symbol>{1});
    }

    // Orient each edge toward the larger (synthetic) ID.
    ProbeAlgorithm toward_larger{"toward-larger", 2, [](Oracle & o) {
                                     auto a = o.probe(o.root().id, *o.query().port);
                                     return std::vector<Symbol>{a.node.id > o.root().id ? Out : In};
                                 }};
    auto c = make_cycle(256);
    auto lifted = lift_via_coloring(toward_larger, 32, 1, 2, 0);
    auto l = HalfEdgeLabeling::for_graph(c, 2);
    for (NodeIndex v = 0; v < c.node_count(); ++v)
        for (Port p = 1; p <= 2; ++p) {
            auto t = run_query(lifted, c, Query{c.id(v), p}, ModelConfig::volume(1));
            REQUIRE(t.ok());
            l.at(v, p) = t.output[0];
        }
    CHECK(verify_solution(c, l, SinklessProblem{3}).valid());
}

TEST_CASE("lifted probe cost is bounded by base cost times coloring cost")
{
    ProbeAlgorithm one_hop{"one-hop", 2, [](Oracle & o) {
                               LocalView view(o);
                               Symbol s = 0;
                               for (auto w : view.neighbors(o.root().id))
                                   s ^= static_cast<Symbol>(w & 1);
                               return std::vector<Symbol>{s};
                           }};
    const std::uint64_t n0 = 4;
    const int r = 1;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto tree = gen_edge_colored_tree(60, 3, seed);
        auto coloring = logstar_coloring_algorithm(static_cast<int>(n0) + r, 3, 0);
        std::uint64_t color_cost = 0;
        for (NodeIndex v = 0; v < tree.node_count(); ++v)
            color_cost = std::max(color_cost,
                run_query(coloring, tree, Query{tree.id(v), std::nullopt}, ModelConfig::volume(1)).probe_count);
        auto lifted = lift_via_coloring(one_hop, n0, r, 3, 0);
        for (NodeIndex v = 0; v < tree.node_count(); v += 7) {
            auto base = run_query(one_hop, tree, Query{tree.id(v), std::nullopt}, ModelConfig::volume(1));
            auto t = run_query(lifted, tree, Query{tree.id(v), std::nullopt}, ModelConfig::volume(1));
            REQUIRE(t.ok());
            // each base probe costs one real probe plus one coloring, and the root is colored too
            REQUIRE(t.probe_count <= base.probe_count + (base.probe_count + 1) * color_cost);
        }
    }
}
