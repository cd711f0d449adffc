#include <doctest.h>

#include <probelab/graph.hpp>
#include <probelab/probe.hpp>

#include <deque>
#include <map>
#include <set>

using namespace probelab;

namespace {

ProbeAlgorithm constant_alg()
{
    return {"constant", 2, [](Oracle &) { return std::vector<Symbol>{1}; }};
}

// BFS to `radius`, outputs the smallest ID seen mod 2.
ProbeAlgorithm bfs_alg(int radius)
{
    return {"bfs", 2, [radius](Oracle & o) {
                LocalView view(o);
                std::map<NodeId, int> dist{{o.root().id, 0}};
                std::deque<NodeId> q{o.root().id};
                while (!q.empty()) {
                    NodeId u = q.front();
                    q.pop_front();
                    if (dist[u] == radius)
                        continue;
                    for (Port p = 1; p <= view.degree(u); ++p) {
                        NodeId w = view.neighbor(u, p);
                        if (dist.emplace(w, dist[u] + 1).second)
                            q.push_back(w);
                    }
                }
                return std::vector<Symbol>{static_cast<Symbol>(dist.begin()->first % 2)};
            }};
}

class CountingOracle : public GraphOracle {
public:
    using GraphOracle::GraphOracle;
    std::uint64_t calls = 0;

protected:
    ProbeAnswer resolve(NodeId id, Port port) override
    {
        ++calls;
        return GraphOracle::resolve(id, port);
    }
};

} // namespace

TEST_CASE("constant algorithm makes no probes")
{
    auto g = gen_random_regular(16, 3, 3, 1);
    auto t = run_query(constant_alg(), g, Query{g.id(3), std::nullopt}, ModelConfig::lca(1));
    CHECK(t.ok());
    CHECK(t.probe_count == 0);
    CHECK(t.output == std::vector<Symbol>{1});
}

TEST_CASE("volume forbids probing unseen ids")
{
    auto g = make_cycle(8);
    ProbeAlgorithm far{"far", 2, [&](Oracle & o) {
                           o.probe(g.id(4), 1);
                           return std::vector<Symbol>{0};
                       }};
    auto t = run_query(far, g, Query{g.id(0), std::nullopt}, ModelConfig::volume(1));
    CHECK_FALSE(t.ok());
    CHECK(t.failure->find(probe_error_name(ProbeError::Kind::FarProbeViolation)) != std::string::npos);

    auto lca = run_query(far, g, Query{g.id(0), std::nullopt}, ModelConfig::lca(1));
    CHECK(lca.ok());
    CHECK(lca.probe_count == 1);
}

TEST_CASE("port range and probe budget are enforced")
{
    auto g = make_cycle(8);
    ProbeAlgorithm bad_port{"bad", 2, [](Oracle & o) {
                                o.probe(o.root().id, 3);
                                return std::vector<Symbol>{0};
                            }};
    auto t = run_query(bad_port, g, Query{g.id(0), std::nullopt}, ModelConfig::volume(1));
    CHECK_FALSE(t.ok());
    CHECK(t.failure->find(probe_error_name(ProbeError::Kind::PortOutOfRange)) != std::string::npos);

    auto cfg = ModelConfig::volume(1);
    cfg.probe_budget = 3;
    auto tb = run_query(bfs_alg(2), g, Query{g.id(0), std::nullopt}, cfg);
    CHECK_FALSE(tb.ok());
    CHECK(tb.probe_count == 3);
    CHECK(tb.failure->find(probe_error_name(ProbeError::Kind::ProbeBudgetExceeded)) != std::string::npos);
}

TEST_CASE("radius-2 BFS on C8 takes four probes")
{
    auto g = make_cycle(8);
    for (NodeIndex v = 0; v < 8; ++v) {
        auto t = run_query(bfs_alg(2), g, Query{g.id(v), std::nullopt}, ModelConfig::volume(1));
        CHECK(t.ok());
        CHECK(t.probe_count == 4);
        CHECK(t.steps.size() == t.probe_count);
    }
}

TEST_CASE("replay determinism and query-order independence")
{
    auto g = gen_random_regular(64, 3, 3, 5);
    const auto cfg = ModelConfig::volume(9);
    std::map<NodeIndex, ProbeTranscript> forward;
    for (NodeIndex v = 0; v < g.node_count(); ++v)
        forward[v] = run_query(bfs_alg(3), g, Query{g.id(v), std::nullopt}, cfg);
    for (NodeIndex v = g.node_count(); v-- > 0;) {
        auto t = run_query(bfs_alg(3), g, Query{g.id(v), std::nullopt}, cfg);
        REQUIRE(t.dump() == forward[v].dump());
        REQUIRE(t.steps == forward[v].steps);
        REQUIRE(t.output == forward[v].output);
    }
}

TEST_CASE("volume transcripts only probe seen nodes")
{
    auto g = gen_random_regular(128, 3, 3, 2);
    for (NodeIndex v = 0; v < 32; ++v) {
        auto t = run_query(bfs_alg(4), g, Query{g.id(v), std::nullopt}, ModelConfig::volume(2));
        std::set<NodeId> seen{g.id(v)};
        for (const auto & s : t.steps) {
            REQUIRE(seen.count(s.id));
            seen.insert(s.answer.node.id);
        }
    }
}

TEST_CASE("probe metering matches oracle invocations")
{
    auto g = gen_random_regular(64, 4, 3, 8);
    for (NodeIndex v = 0; v < 16; ++v) {
        CountingOracle o(g, ModelConfig::volume(1), Query{g.id(v), std::nullopt});
        auto t = run_on_oracle(bfs_alg(2), o);
        REQUIRE(t.probe_count == o.calls);
        REQUIRE(t.steps.size() == o.calls);
    }
}

TEST_CASE("private randomness")
{
    auto cfg = ModelConfig::lca(42);
    cfg.randomness.kind = Randomness::Kind::Private;
    auto a = private_randomness(7, cfg);
    auto b = private_randomness(7, cfg);
    CHECK(a.prefix(256) == b.prefix(256));

    std::set<std::pair<std::uint64_t, std::uint64_t>> prefixes;
    for (NodeId id = 1; id <= 100000; ++id) {
        auto t = private_randomness(id, cfg);
        prefixes.insert({t.word(0), t.word(1)});
    }
    CHECK(prefixes.size() == 100000);

    auto shared = cfg;
    shared.randomness.kind = Randomness::Kind::Shared;
    CHECK(private_randomness(1, shared).prefix(128) == private_randomness(2, shared).prefix(128));
}

TEST_CASE("transcript dump format")
{
    auto g = make_cycle(8);
    auto t = run_query(bfs_alg(1), g, Query{g.id(0), std::nullopt}, ModelConfig::volume(1));
    const auto d = t.dump();
    CHECK(d.rfind("probe ", 0) == 0);
    CHECK(d.find(" -> ") != std::string::npos);
    CHECK(d.find("output " + std::to_string(t.output[0]) + " probes 2") != std::string::npos);
}

TEST_CASE("witness extraction and replay")
{
    auto g = gen_random_regular(64, 3, 3, 4);
    const auto cfg = ModelConfig::volume(3);

    auto empty = run_query(constant_alg(), g, Query{g.id(5), std::nullopt}, cfg);
    auto w0 = extract_witness({empty}, g);
    std::set<NodeIndex> core{5};
    for (const auto & e : g.ports(5))
        core.insert(e.neighbor);
    std::size_t pad = 0;
    for (auto u : core)
        for (const auto & e : g.ports(u))
            pad += !core.count(e.neighbor);
    CHECK(w0.probed == 1);
    CHECK(w0.core_size == core.size());
    CHECK(w0.graph.node_count() == core.size() + pad);
    for (NodeIndex v = 0; v < w0.graph.node_count(); ++v)
        CHECK(w0.graph.degree(v) == (w0.origin[v] == Witness::npos ? 1U : g.degree(w0.origin[v])));

    for (std::uint64_t trial = 0; trial < 1000; ++trial) {
        const NodeIndex v = static_cast<NodeIndex>(trial % g.node_count());
        const int radius = 1 + static_cast<int>(trial % 3);
        auto t = run_query(bfs_alg(radius), g, Query{g.id(v), std::nullopt}, cfg);
        auto w = extract_witness({t}, g);
        REQUIRE(w.core_size <= (g.delta() + 1) * w.probed);
        if (trial % 50 == 0) {
            auto r = run_query(bfs_alg(radius), w.graph, Query{g.id(v), std::nullopt}, cfg);
            REQUIRE(r.steps == t.steps);
            REQUIRE(r.output == t.output);
        }
    }

    auto path = make_path(40);
    auto ta = run_query(bfs_alg(2), path, Query{path.id(5), std::nullopt}, cfg);
    auto tb = run_query(bfs_alg(2), path, Query{path.id(30), std::nullopt}, cfg);
    auto w2 = extract_witness({ta, tb}, path);
    CHECK(is_forest(w2.graph));
    CHECK_FALSE(is_connected(w2.graph));
    CHECK(run_query(bfs_alg(2), w2.graph, Query{path.id(5), std::nullopt}, cfg).steps == ta.steps);
    CHECK(run_query(bfs_alg(2), w2.graph, Query{path.id(30), std::nullopt}, cfg).steps == tb.steps);

    auto other = make_cycle(40);
    CHECK_THROWS(extract_witness({ta}, other));
}
