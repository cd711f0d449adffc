#include <doctest.h>

#include <probelab/graph.hpp>
#include <probelab/lll.hpp>
#include <probelab/rng.hpp>
#include <probelab/sinkless.hpp>

#include <algorithm>
#include <climits>
#include <numeric>
#include <set>

using namespace probelab;

namespace {

std::vector<int> bfs(const PortedGraph & g, NodeIndex s)
{
    std::vector<int> d(g.node_count(), INT_MAX);
    std::vector<NodeIndex> q{s};
    d[s] = 0;
    for (std::size_t i = 0; i < q.size(); ++i)
        for (const auto & e : g.ports(q[i]))
            if (d[e.neighbor] == INT_MAX) {
                d[e.neighbor] = d[q[i]] + 1;
                q.push_back(e.neighbor);
            }
    return d;
}

NodeIndex find_root(std::vector<NodeIndex> & parent, NodeIndex x)
{
    while (parent[x] != x)
        x = parent[x] = parent[parent[x]];
    return x;
}

// Smallest k from the requested one whose contracted instance passes the criterion.
SinklessConfig passing_config(const PortedGraph & g, int k)
{
    SinklessConfig cfg;
    for (cfg.k = k; cfg.k <= 6; ++cfg.k) {
        auto inst = contracted_lll(cluster_decompose(g, cfg.k, sinkless_palette(g, cfg)));
        if (inst.events().empty() || check_criterion(inst, Criterion{Criterion::Kind::Polynomial, cfg.lll.c}).holds)
            return cfg;
    }
    FAIL("no k passes");
    return cfg;
}

} // namespace

TEST_CASE("so-as-lll dependency degree by brute force")
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto g = gen_random_regular(48, 4, 3, seed);
        auto inst = so_as_lll(g, 3);
        CHECK(inst.events().size() == 48);
        CHECK(inst.vars().size() == g.edge_count());
        // Events depend iff their nodes are adjacent.
        std::size_t d = 0;
        for (NodeIndex v = 0; v < g.node_count(); ++v) {
            std::set<NodeIndex> nb;
            for (const auto & e : g.ports(v))
                nb.insert(e.neighbor);
            d = std::max(d, nb.size());
        }
        CHECK(inst.max_degree() == d);
        CHECK(inst.max_probability() == Probability{1, 16});
    }
}

TEST_CASE("cluster decomposition")
{
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const int k = 1 + static_cast<int>(seed % 3);
        auto g = seed % 3 == 2 ? gen_edge_colored_tree(120, 4, seed) : gen_random_regular(120, 3 + seed % 3, 3, seed);
        auto dec = cluster_decompose(g, k);
        REQUIRE(dec.k == k);
        REQUIRE(std::is_sorted(dec.centers.begin(), dec.centers.end()));

        std::vector<std::vector<int>> dist(dec.centers.size());
        for (std::size_t i = 0; i < dec.centers.size(); ++i)
            dist[i] = bfs(g, *g.index_of(dec.centers[i]));

        // Centers are independent in G^k and dominate it.
        for (std::size_t i = 0; i < dec.centers.size(); ++i)
            for (std::size_t j = i + 1; j < dec.centers.size(); ++j)
                REQUIRE(dist[i][*g.index_of(dec.centers[j])] > k);
        for (NodeIndex v = 0; v < g.node_count(); ++v) {
            int best = INT_MAX;
            NodeId best_center = 0;
            for (std::size_t i = 0; i < dec.centers.size(); ++i)
                if (dist[i][v] < best) {
                    best = dist[i][v];
                    best_center = dec.centers[i];
                }
            REQUIRE(best <= k);
            REQUIRE(dec.center_of[v] == best_center);
        }

        std::size_t members = 0;
        std::size_t inter = 0;
        for (const auto & e : g.edges())
            inter += dec.center_of[e.u] != dec.center_of[e.v];
        REQUIRE(dec.contracted.size() == inter);

        for (const auto & c : dec.clusters) {
            members += c.members.size();
            std::set<NodeId> in(c.members.begin(), c.members.end());
            REQUIRE(in.count(c.center));
            for (auto m : c.members)
                REQUIRE(dec.center_of[*g.index_of(m)] == c.center);

            // Union-find over intra-cluster edges: a cycle shows up as a redundant edge.
            std::vector<NodeIndex> parent(g.node_count());
            std::iota(parent.begin(), parent.end(), 0);
            bool cycle = false;
            for (const auto & e : g.edges()) {
                if (!in.count(g.id(e.u)) || !in.count(g.id(e.v)))
                    continue;
                auto a = find_root(parent, e.u), b = find_root(parent, e.v);
                if (a == b)
                    cycle = true;
                else
                    parent[a] = b;
            }
            REQUIRE(c.cyclic == cycle);
            bool all_high = true;
            for (auto m : c.members)
                all_high = all_high && g.degree(*g.index_of(m)) >= 3;
            REQUIRE(c.has_event == (!cycle && all_high));

            std::size_t leaving = 0;
            for (auto m : c.members)
                for (const auto & e : g.ports(*g.index_of(m)))
                    leaving += !in.count(g.id(e.neighbor));
            REQUIRE(c.leaving.size() == leaving);
        }
        REQUIRE(members == g.node_count());

        auto inst = contracted_lll(dec);
        std::size_t events = 0;
        for (const auto & c : dec.clusters)
            if (c.has_event) {
                ++events;
                const auto & ev = inst.event(c.center);
                REQUIRE(ev.vbl == c.leaving);
                REQUIRE(ev.bad == std::vector<std::vector<Value>>{c.inward});
            }
        REQUIRE(inst.events().size() == events);
    }
}

TEST_CASE("cluster orientations")
{
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        auto g = gen_random_regular(96, 3 + seed % 2, 3, seed);
        auto dec = cluster_decompose(g, 1 + static_cast<int>(seed % 2));
        for (const auto & c : dec.clusters) {
            auto view = cluster_view(g, dec, c.center);
            std::vector<std::pair<NodeId, Port>> boundary;
            for (const auto & [u, ports] : view.adj)
                for (Port p = 1; p <= ports.size(); ++p)
                    if (!view.member(ports[p - 1].first))
                        boundary.push_back({u, p});

            for (std::uint64_t trial = 0; trial < 20; ++trial) {
                RandomTape t(hash_words(seed, {c.center, trial}));
                // trial 0: every leaving edge inward; otherwise one forced outward, the rest random.
                const std::size_t forced = boundary.empty() ? 0 : t.uniform(0, boundary.size());
                std::map<std::pair<NodeId, Port>, Orientation> bo;
                for (std::size_t i = 0; i < boundary.size(); ++i)
                    bo[boundary[i]] = trial == 0 ? In : (i == forced || t.uniform(1 + i, 2) ? Out : In);
                auto o = orient_cluster(view, c, [&](NodeId u, Port p) { return bo.at({u, p}); });

                for (const auto & [u, ports] : view.adj) {
                    bool out = false;
                    for (Port p = 1; p <= ports.size(); ++p) {
                        const auto [w, back] = ports[p - 1];
                        if (!view.member(w)) {
                            out = out || bo[{u, p}] == Out;
                            continue;
                        }
                        const auto a = o.at({u, p});
                        REQUIRE(a != o.at({w, back}));
                        out = out || a == Out;
                    }
                    if (c.cyclic)
                        REQUIRE(out);
                    else if (c.has_event && trial > 0)
                        REQUIRE(out);
                    else if (!c.has_event && ports.size() >= 3)
                        REQUIRE(out);
                }
            }
        }
    }
}

TEST_CASE("global sinkless orientation")
{
    for (auto g : {make_cycle(5), make_complete(4)}) {
        auto r = solve_sinkless(g, passing_config(g, 2), 1);
        CHECK(verify_solution(g, r.labeling, SinklessProblem{3}).valid());
    }
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        auto g = gen_random_regular(256, 3 + seed % 4, 3, seed);
        auto r = solve_sinkless(g, passing_config(g, 2), seed);
        REQUIRE(verify_solution(g, r.labeling, SinklessProblem{3}).valid());
        REQUIRE(r.lll.oversized.empty());
    }
}

TEST_CASE("query answers equal the global orientation")
{
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        auto g = gen_random_regular(64, 3 + seed, 3, seed);
        auto cfg = passing_config(g, 2);
        cfg.id_palette = sinkless_palette(g, cfg);
        const auto global = solve_sinkless(g, cfg, seed).labeling;
        const auto alg = sinkless_query_algorithm(cfg, g.delta(), seed);
        for (NodeIndex v = 0; v < g.node_count(); ++v)
            for (Port p = 1; p <= g.degree(v); ++p) {
                auto t = run_query(alg, g, Query{g.id(v), p}, ModelConfig::volume(seed));
                REQUIRE(t.ok());
                REQUIRE(t.output[0] == global.at(v, p));
            }
    }
}
