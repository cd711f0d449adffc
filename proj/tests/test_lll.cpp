#include <doctest.h>

#include <probelab/graph.hpp>
#include <probelab/lll.hpp>
#include <probelab/rng.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace probelab;

namespace {

LllInstance single(std::vector<VarId> vbl, std::vector<std::vector<Value>> bad, Value domain = 2)
{
    std::vector<Variable> vars;
    for (auto x : vbl)
        vars.push_back({x, domain});
    return LllInstance(vars, {Event{1, vbl, bad}});
}

// Counts full assignments of every variable extending `partial` that hit a bad tuple of `e`.
Probability enumerate(const LllInstance & inst, const Event & e, const PartialAssignment & partial)
{
    std::vector<VarId> free;
    for (const auto & v : inst.vars())
        if (!partial.value(v.id))
            free.push_back(v.id);
    std::uint64_t total = 1;
    for (auto x : free)
        total *= inst.domain(x);
    std::uint64_t hits = 0;
    std::map<VarId, Value> a;
    for (std::uint64_t code = 0; code < total; ++code) {
        std::uint64_t c = code;
        for (auto x : free) {
            a[x] = static_cast<Value>(c % inst.domain(x));
            c /= inst.domain(x);
        }
        std::vector<Value> tuple;
        for (auto x : e.vbl)
            tuple.push_back(partial.value(x) ? *partial.value(x) : a[x]);
        if (std::find(e.bad.begin(), e.bad.end(), tuple) != e.bad.end())
            ++hits;
    }
    return Probability{hits, total};
}

bool avoided(const LllInstance & inst, const std::map<VarId, Value> & a)
{
    for (const auto & e : inst.events()) {
        std::vector<Value> t;
        for (auto x : e.vbl)
            t.push_back(a.at(x));
        if (std::find(e.bad.begin(), e.bad.end(), t) != e.bad.end())
            return false;
    }
    return true;
}

LllInstance random_small(std::uint64_t seed)
{
    RandomTape t(seed);
    const std::size_t nv = 2 + t.uniform(0, 15);
    std::vector<Variable> vars;
    for (std::size_t i = 0; i < nv; ++i)
        vars.push_back({static_cast<VarId>(10 + i), static_cast<Value>(2 + t.uniform(1 + i, 2))});
    std::vector<Event> events;
    std::uint64_t w = 100;
    for (EventId id = 0; id < 1 + t.uniform(50, 5); ++id) {
        std::set<VarId> s;
        const auto size = 1 + t.uniform(w++, std::min<std::uint64_t>(nv, 4));
        while (s.size() < size)
            s.insert(vars[t.uniform(w++, nv)].id);
        Event e{id, {s.begin(), s.end()}, {}};
        std::set<std::vector<Value>> bad;
        const auto nb = 1 + t.uniform(w++, 4);
        for (std::uint64_t b = 0; b < nb; ++b) {
            std::vector<Value> tuple;
            for (auto x : e.vbl)
                tuple.push_back(static_cast<Value>(t.uniform(w++, vars[x - 10].domain)));
            bad.insert(tuple);
        }
        e.bad.assign(bad.begin(), bad.end());
        events.push_back(e);
    }
    return LllInstance(vars, events);
}

} // namespace

TEST_CASE("event probability examples")
{
    auto one = single({1}, {{1}});
    CHECK(event_probability(one, 1, {}) == Probability{1, 2});

    auto eq = single({1, 2, 3}, {{0, 0, 0}, {1, 1, 1}});
    CHECK(event_probability(eq, 1, {}) == Probability{1, 4});

    auto g = make_star(4);
    auto so = so_as_lll(g, 3);
    REQUIRE(so.events().size() == 1);
    const auto & center = so.events()[0];
    CHECK(event_probability(so, center.id, {}) == Probability{1, 16});
    PartialAssignment partial;
    const auto & bad = center.bad.at(0);
    partial.set[center.vbl[0]] = 1 - bad[0];
    CHECK(event_probability(so, center.id, partial).zero());
}

TEST_CASE("event probability equals full enumeration")
{
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        auto inst = random_small(seed);
        RandomTape t(seed ^ 0xabcdef);
        PartialAssignment partial;
        for (const auto & v : inst.vars())
            if (t.uniform(v.id, 3) == 0)
                partial.set[v.id] = static_cast<Value>(t.uniform(v.id + 1000, v.domain));
        for (const auto & e : inst.events())
            REQUIRE(event_probability(inst, e.id, partial) == enumerate(inst, e, partial));
    }
}

TEST_CASE("scope limit")
{
    std::vector<VarId> vbl;
    for (VarId x = 0; x < 25; ++x)
        vbl.push_back(x);
    std::vector<Value> tuple(25, 0);
    CHECK_THROWS_AS(single(vbl, {tuple}), ScopeTooLarge);
}

TEST_CASE("criteria")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto g = gen_random_regular(32, 3, 3, seed);
        auto inst = so_as_lll(g, 3);
        // Brute-force dependency degree: events sharing a variable.
        std::size_t d = 0;
        for (const auto & a : inst.events()) {
            std::size_t deg = 0;
            for (const auto & b : inst.events()) {
                if (a.id == b.id)
                    continue;
                std::vector<VarId> common;
                std::set_intersection(a.vbl.begin(), a.vbl.end(), b.vbl.begin(), b.vbl.end(), std::back_inserter(common));
                deg += !common.empty();
            }
            d = std::max(d, deg);
        }
        auto v = check_criterion(inst, Criterion::parse("exp"));
        CHECK(v.p == Probability{1, 8});
        CHECK(v.d == d);
        CHECK(v.holds == (d <= 3));
    }

    auto certain = single({1}, {{0}, {1}});
    for (auto c : {"4pd", "exp", "poly:1"})
        CHECK_FALSE(check_criterion(certain, Criterion::parse(c)).holds);

    LllInstance empty({{1, 2}}, {});
    for (auto c : {"4pd", "exp", "poly:1"})
        CHECK(check_criterion(empty, Criterion::parse(c)).holds);

    for (std::uint64_t seed = 0; seed < 50; ++seed)
        CHECK(check_criterion(gen_random_lll(40, 30, seed), Criterion::parse("4pd")).holds);
}

TEST_CASE("pre-shattering")
{
    // Events already impossible: nothing frozen, nothing dangerous.
    LllInstance impossible({{1, 2}, {2, 2}}, {Event{1, {1, 2}, {}}, Event{2, {2}, {}}});
    ShatterConfig cfg;
    auto r = pre_shatter(impossible, cfg, 1);
    CHECK(r.dangerous.empty());
    CHECK(r.partial.set.size() == 2);
    CHECK(r.partial.frozen.empty());

    // One isolated event: tau = 1, everything set, dangerous iff the sample hits the bad tuple.
    auto lone = single({1, 2}, {{1, 1}});
    std::size_t dangerous = 0;
    const std::size_t runs = 10000;
    for (std::uint64_t seed = 0; seed < runs; ++seed) {
        auto s = pre_shatter(lone, cfg, seed);
        REQUIRE(s.partial.set.size() == 2);
        dangerous += !s.dangerous.empty();
    }
    CHECK(static_cast<double>(dangerous) / runs == doctest::Approx(0.25).epsilon(0.08));

    // Postcondition on SO-as-LLL: every conditional probability <= tau, set and frozen disjoint.
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto g = gen_random_regular(256, 6, 3, seed);
        auto inst = so_as_lll(g, 3);
        auto s = pre_shatter(inst, cfg, seed);
        for (auto x : s.partial.frozen)
            REQUIRE(s.partial.set.count(x) == 0);
        std::set<EventId> dang(s.dangerous.begin(), s.dangerous.end());
        for (const auto & e : inst.events()) {
            auto p = event_probability(inst, e.id, s.partial);
            REQUIRE(p.to_double() <= s.tau + 1e-12);
            REQUIRE(dang.count(e.id) == (p.zero() ? 0U : 1U));
        }
    }
}

TEST_CASE("dangerous rate per event on SO-as-LLL")
{
    // Measured exponent c1 with Pr[dangerous] = 6^-c1; the run records it as a lower bound.
    std::size_t dangerous = 0, events = 0;
    ShatterConfig cfg;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto inst = so_as_lll(gen_random_regular(256, 6, 3, seed), 3);
        auto s = pre_shatter(inst, cfg, seed);
        dangerous += s.dangerous.size();
        events += inst.events().size();
    }
    const double rate = static_cast<double>(dangerous) / static_cast<double>(events);
    MESSAGE("dangerous rate " << rate << ", c1 = " << -std::log(rate) / std::log(6.0));
    CHECK(rate < 1.0 / 6.0);
}

TEST_CASE("component solving")
{
    auto forced = single({1}, {{1}});
    auto a = solve_component(forced, {}, {1}, 0);
    CHECK(a.at(1) == 0);

    LllInstance pair({{1, 2}, {2, 2}, {3, 2}}, {Event{1, {1, 2}, {{0, 0}}}, Event{2, {2, 3}, {{1, 1}}}});
    auto b = solve_component(pair, {}, {1, 2}, 0);
    PartialAssignment filled;
    for (auto [x, v] : b)
        filled.set[x] = v;
    CHECK(event_probability(pair, 1, filled).zero());
    CHECK(event_probability(pair, 2, filled).zero());
    // Oracle: at least one of the 8 assignments avoids both events, and the solver picked one.
    std::size_t good = 0;
    for (Value x = 0; x < 2; ++x)
        for (Value y = 0; y < 2; ++y)
            for (Value z = 0; z < 2; ++z)
                good += !(x == 0 && y == 0) && !(y == 1 && z == 1);
    CHECK(good > 0);

    auto g = gen_random_regular(128, 6, 3, 3);
    auto so = so_as_lll(g, 3);
    const auto dep = dependency_graph(so);
    std::vector<EventId> comp;
    std::vector<char> seen(dep.node_count(), 0);
    std::vector<NodeIndex> q{0};
    seen[0] = 1;
    for (std::size_t i = 0; i < q.size() && comp.size() < 12; ++i) {
        comp.push_back(dep.id(q[i]));
        for (const auto & e : dep.ports(q[i]))
            if (!seen[e.neighbor]) {
                seen[e.neighbor] = 1;
                q.push_back(e.neighbor);
            }
    }
    REQUIRE(comp.size() == 12);
    auto c = solve_component(so, {}, comp, 5);
    std::map<VarId, Value> full;
    for (const auto & v : so.vars())
        full[v.id] = c.count(v.id) ? c.at(v.id) : sample_value(5, v.id, 2);
    auto l = orientation_from_assignment(g, full);
    for (auto id : comp) {
        const NodeIndex v = *g.index_of(id);
        bool out = false;
        for (Port p = 1; p <= g.degree(v); ++p)
            out = out || l.at(v, p) == Out;
        REQUIRE(out);
    }
}

TEST_CASE("moser-tardos")
{
    LllInstance none({{1, 2}}, {});
    CHECK(moser_tardos(none, 1).size() == 1);

    auto half = single({1}, {{1}});
    double total = 0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        std::uint64_t r = 0;
        moser_tardos(half, seed, 1000, &r);
        total += static_cast<double>(r);
    }
    CHECK(total / 10000 <= 1.05);

    auto g = gen_random_regular(256, 6, 3, 2);
    auto so = so_as_lll(g, 3);
    auto a = moser_tardos(so, 2);
    CHECK(avoided(so, a));
    CHECK(verify_solution(g, orientation_from_assignment(g, a), SinklessProblem{3}).valid());

    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto inst = gen_random_lll(30, 25, seed);
        REQUIRE(avoided(inst, moser_tardos(inst, seed)));
        REQUIRE(violated_events(inst, moser_tardos(inst, seed)).empty());
    }
}

TEST_CASE("so-as-lll shape")
{
    auto c5 = so_as_lll(make_cycle(5), 3);
    CHECK(c5.vars().size() == 5);
    CHECK(c5.events().empty());
    auto k4 = so_as_lll(make_complete(4), 3);
    CHECK(k4.vars().size() == 6);
    CHECK(k4.events().size() == 4);
    CHECK(k4.max_probability() == Probability{1, 8});
}

TEST_CASE("global solve and queries agree")
{
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        auto g = gen_random_regular(512, 6, 3, seed);
        auto inst = so_as_lll(g, 3);
        ShatterConfig cfg;
        auto sol = lll_solve(inst, cfg, seed);
        REQUIRE(avoided(inst, sol.assignment));
        LllQueryBatch batch(inst, cfg, seed, ModelConfig::lca(seed));
        std::map<VarId, Value> combined;
        for (const auto & e : inst.events()) {
            auto q = batch.run(e.id);
            REQUIRE(q.transcript.ok());
            for (auto [x, v] : q.values) {
                REQUIRE(sol.assignment.at(x) == v);
                auto [it, fresh] = combined.emplace(x, v);
                REQUIRE(it->second == v);
            }
        }
        CHECK(avoided(inst, combined));
    }
}

TEST_CASE("query on an all-safe instance stays local")
{
    // Disjoint events each with an impossible bad set: nothing is dangerous.
    std::vector<Variable> vars;
    std::vector<Event> events;
    for (VarId x = 0; x < 64; ++x)
        vars.push_back({x, 2});
    for (EventId e = 0; e < 32; ++e)
        events.push_back({e, {2 * e, 2 * e + 1}, {}});
    LllInstance inst(vars, events);
    ShatterConfig cfg;
    for (EventId e = 0; e < 32; ++e) {
        auto q = lll_query(inst, e, cfg, 3, ModelConfig::lca(3));
        REQUIRE(q.transcript.ok());
        CHECK(q.transcript.probe_count == 0);
        for (auto [x, v] : q.values)
            CHECK(v == sample_value(3, x, 2));
    }
}

TEST_CASE("file format")
{
    auto inst = gen_random_lll(20, 10, 4);
    auto text = write_lll(inst);
    auto back = read_lll(text);
    CHECK(write_lll(back) == text);
    CHECK_THROWS_AS(read_lll(text.substr(0, 30)), ParseError);
}
