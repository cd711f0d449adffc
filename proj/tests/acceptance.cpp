// Acceptance run: one PASS/FAIL line per criterion, always exits 0.
#include <probelab/adversary.hpp>
#include <probelab/bench.hpp>
#include <probelab/graph.hpp>
#include <probelab/idgraph.hpp>
#include <probelab/lll.hpp>
#include <probelab/rng.hpp>
#include <probelab/sinkless.hpp>

#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace probelab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

void report(int id, const std::string & name, double budget_s, const std::function<Outcome()> & body)
{
    const auto start = Clock::now();
    Outcome o;
    try {
        o = body();
    }
    catch (const std::exception & e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double took = seconds_since(start);
    const bool in_time = took <= budget_s;
    std::ostringstream line;
    line << "criterion " << id << " " << ((o.pass && in_time) ? "PASS" : "FAIL") << " [" << name << "] " << o.detail
         << "; time " << std::fixed;
    line.precision(2);
    line << took << " s (budget " << budget_s << " s)";
    if (!in_time)
        line << " over budget";
    std::cout << line.str() << std::endl;
}

bool avoided(const LllInstance & inst, const std::map<VarId, Value> & a)
{
    for (const auto & e : inst.events()) {
        std::vector<Value> t;
        for (auto x : e.vbl) {
            auto it = a.find(x);
            if (it == a.end())
                return false;
            t.push_back(it->second);
        }
        if (std::find(e.bad.begin(), e.bad.end(), t) != e.bad.end())
            return false;
    }
    return true;
}

SinklessConfig sinkless_config(const PortedGraph & g)
{
    SinklessConfig cfg;
    for (cfg.k = 2; cfg.k <= 6; ++cfg.k) {
        auto inst = contracted_lll(cluster_decompose(g, cfg.k, sinkless_palette(g, cfg)));
        if (inst.events().empty() || check_criterion(inst, Criterion{Criterion::Kind::Polynomial, cfg.lll.c}).holds)
            break;
    }
    cfg.k = std::min(cfg.k, 6);
    cfg.id_palette = sinkless_palette(g, cfg);
    return cfg;
}

// 1. Validity suites.
Outcome validity()
{
    std::ostringstream d;
    bool ok = true;

    const auto t0 = Clock::now();
    std::size_t mt_ok = 0, comp_ok = 0, instances = 0;
    for (std::uint64_t seed = 0; instances < 500; ++seed) {
        auto inst = gen_random_lll(40, 30, seed);
        if (!check_criterion(inst, Criterion::parse("4pd")).holds)
            continue;
        ++instances;
        mt_ok += avoided(inst, moser_tardos(inst, seed));
        std::vector<EventId> all;
        for (const auto & e : inst.events())
            all.push_back(e.id);
        auto a = solve_component(inst, {}, all, seed);
        for (const auto & v : inst.vars())
            a.emplace(v.id, sample_value(seed, v.id, v.domain));
        comp_ok += avoided(inst, a);
    }
    const double lll_time = seconds_since(t0);
    ok = ok && mt_ok == 500 && comp_ok == 500 && lll_time <= 2.0;
    d << "LLL: moser-tardos " << mt_ok << "/500, solve_component " << comp_ok << "/500 in " << lll_time << " s";

    const auto t1 = Clock::now();
    for (std::size_t n : {256, 1024, 4096})
        for (std::uint32_t delta : {3U, 4U}) {
            std::size_t valid = 0;
            for (std::uint64_t seed = 0; seed < 100; ++seed) {
                auto g = gen_random_regular(n, delta, 3, seed);
                try {
                    auto r = solve_sinkless(g, sinkless_config(g), seed);
                    valid += verify_solution(g, r.labeling, SinklessProblem{3}).valid();
                }
                catch (const std::exception &) {
                }
            }
            ok = ok && valid >= 99;
            d << "; sinkless n=" << n << " d=" << delta << ": " << valid << "/100";
        }
    const double so_time = seconds_since(t1);
    ok = ok && so_time <= 60.0;
    d << " (" << so_time << " s)";
    return {ok, d.str()};
}

// 2. Shattering surrogate.
Outcome shattering()
{
    std::ostringstream d;
    std::vector<double> ratio;
    for (std::size_t n : {256, 1024, 4096}) {
        std::size_t worst = 0;
        double mean = 0;
        for (std::uint64_t seed = 0; seed < 1000; ++seed) {
            auto inst = so_as_lll(gen_random_regular(n, 6, 3, seed), 3);
            auto s = pre_shatter(inst, ShatterConfig{}, seed);
            std::size_t largest = 0;
            for (const auto & c : dangerous_components(inst, s.dangerous))
                largest = std::max(largest, c.size());
            worst = std::max(worst, largest);
            mean += static_cast<double>(largest) / 1000.0;
        }
        const double lg = std::log2(static_cast<double>(n));
        ratio.push_back(static_cast<double>(worst) / lg);
        d << "n=" << n << ": max " << worst << " (/log2 n = " << ratio.back() << ", mean per-seed max " << mean
          << "); ";
    }
    bool ok = true;
    for (std::size_t i = 1; i < ratio.size(); ++i)
        ok = ok && ratio[i] <= 1.2 * ratio[i - 1];
    d << "non-increasing within 20%: " << (ok ? "yes" : "no");
    return {ok, d.str()};
}

// 3. Probe scaling.
Outcome probe_scaling()
{
    std::ostringstream d;
    bool ok = true;
    for (const std::string solver : {"lll", "sinkless"}) {
        ExperimentManifest m;
        m.command = "acceptance";
        m.solver = solver;
        m.ladder = {1024, 2048, 4096, 8192};
        m.seeds = {1, 2, 3};
        m.delta = solver == "lll" ? 6 : 3;
        m.query_sample = solver == "lll" ? std::nullopt : std::optional<std::uint64_t>{48};
        auto r = bench_probe_scaling(m);
        std::map<std::uint64_t, std::uint64_t> max_probes;
        std::uint64_t failures = 0;
        for (const auto & row : r.rows) {
            max_probes[row.n] = std::max(max_probes[row.n], row.max_probes);
            failures += row.failures;
        }
        d << solver << " max probes";
        for (auto [n, p] : max_probes)
            d << " " << n << ":" << p;
        d << " ratios";
        for (const auto & q : r.ratios) {
            d << " " << q.ratio;
            if (q.from >= 1024)
                ok = ok && q.ratio <= 1.6;
        }
        d << " failures " << failures << "; ";
    }
    return {ok, d.str()};
}

// 4. Exactness oracles.
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
        auto c = code;
        for (auto x : free) {
            a[x] = static_cast<Value>(c % inst.domain(x));
            c /= inst.domain(x);
        }
        std::vector<Value> tuple;
        for (auto x : e.vbl)
            tuple.push_back(partial.value(x) ? *partial.value(x) : a[x]);
        hits += std::find(e.bad.begin(), e.bad.end(), tuple) != e.bad.end();
    }
    return {hits, total};
}

IdGraph random_id_graph(std::uint32_t nV, std::uint32_t delta, double p, std::uint64_t seed)
{
    RandomTape t(seed);
    auto h = IdGraph::empty(nV, delta);
    std::uint64_t w = 0;
    for (std::uint32_t c = 1; c <= delta; ++c)
        for (Vertex a = 0; a < nV; ++a)
            for (Vertex b = a + 1; b < nV; ++b)
                if (t.unit(w++) < p)
                    h.add_edge(c, a, b);
    return h;
}

std::uint64_t count_oracle(const PortedGraph & t, const IdGraph & h)
{
    const auto n = t.node_count();
    std::vector<Vertex> label(n, 0);
    std::uint64_t total = 1, hits = 0;
    for (std::size_t i = 0; i < n; ++i)
        total *= h.nV;
    for (std::uint64_t code = 0; code < total; ++code) {
        auto c = code;
        for (std::size_t i = 0; i < n; ++i) {
            label[i] = static_cast<Vertex>(c % h.nV);
            c /= h.nV;
        }
        bool ok = true;
        for (const auto & e : t.edges())
            ok = ok && h.adjacent(static_cast<std::uint32_t>(t.edge_color(e.u, e.pu)), label[e.u], label[e.v]);
        hits += ok;
    }
    return hits;
}

Outcome exactness()
{
    std::ostringstream d;
    bool ok = true;

    auto t0 = Clock::now();
    std::size_t events = 0, agree = 0;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        RandomTape t(seed);
        const std::size_t nv = 1 + t.uniform(0, 16);
        std::vector<Variable> vars;
        for (std::size_t i = 0; i < nv; ++i)
            vars.push_back({i, static_cast<Value>(2 + (seed % 3 == 0 ? t.uniform(1 + i, 2) : 0))});
        std::vector<Event> evs;
        std::uint64_t w = 100;
        for (EventId id = 0; id < 1 + t.uniform(50, 6); ++id) {
            std::set<VarId> s;
            const auto size = 1 + t.uniform(w++, std::min<std::uint64_t>(nv, 5));
            while (s.size() < size)
                s.insert(t.uniform(w++, nv));
            Event e{id, {s.begin(), s.end()}, {}};
            std::set<std::vector<Value>> bad;
            for (std::uint64_t b = 0, nb = 1 + t.uniform(w++, 4); b < nb; ++b) {
                std::vector<Value> tuple;
                for (auto x : e.vbl)
                    tuple.push_back(static_cast<Value>(t.uniform(w++, vars[x].domain)));
                bad.insert(tuple);
            }
            e.bad.assign(bad.begin(), bad.end());
            evs.push_back(e);
        }
        LllInstance inst(vars, evs);
        PartialAssignment partial;
        for (const auto & v : inst.vars())
            if (t.uniform(1000 + v.id, 3) == 0)
                partial.set[v.id] = static_cast<Value>(t.uniform(2000 + v.id, v.domain));
        for (const auto & e : inst.events()) {
            ++events;
            agree += event_probability(inst, e.id, partial) == enumerate(inst, e, partial);
        }
    }
    const double ep_time = seconds_since(t0);
    ok = ok && agree == events && ep_time <= 10.0;
    d << "event_probability " << agree << "/" << events << " (" << ep_time << " s)";

    t0 = Clock::now();
    std::size_t pairs = 0, equal = 0;
    for (std::size_t n = 1; n <= 6; ++n)
        for (std::uint64_t ts = 0; ts < 2; ++ts) {
            auto tree = gen_edge_colored_tree(n, 3, ts);
            for (std::uint32_t nV = 2; nV <= 8; ++nV)
                for (std::uint64_t hs = 0; hs < 2; ++hs) {
                    auto h = random_id_graph(nV, 3, 0.5, hs * 100 + nV);
                    ++pairs;
                    equal += count_h_labelings(tree, h) == count_oracle(tree, h);
                }
        }
    const double count_time = seconds_since(t0);
    ok = ok && equal == pairs && count_time <= 10.0;
    d << "; count_h_labelings " << equal << "/" << pairs << " (" << count_time << " s)";

    std::size_t graphs = 0, power_ok = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t n = 8 + 8 * (seed % 8);
        auto g = seed % 2 ? gen_random_regular(n, 3, 3, seed) : gen_edge_colored_tree(n, 4, seed);
        std::vector<std::vector<int>> dist(n, std::vector<int>(n, INT_MAX / 4));
        for (NodeIndex v = 0; v < n; ++v) {
            dist[v][v] = 0;
            for (const auto & e : g.ports(v))
                dist[v][e.neighbor] = 1;
        }
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    dist[i][j] = std::min(dist[i][j], dist[i][k] + dist[k][j]);
        for (int k = 1; k <= 3; ++k) {
            ++graphs;
            auto gk = power_graph(g, k);
            bool same = true;
            for (NodeIndex u = 0; u < n; ++u) {
                std::set<NodeIndex> nb;
                for (const auto & e : gk.ports(u))
                    nb.insert(e.neighbor);
                for (NodeIndex v = 0; v < n; ++v)
                    same = same && (nb.count(v) == 1) == (v != u && dist[u][v] <= k);
            }
            power_ok += same;
        }
    }
    ok = ok && power_ok == graphs;
    d << "; power_graph " << power_ok << "/" << graphs;
    return {ok, d.str()};
}

// 5. ID graph construction.
Outcome id_graph()
{
    std::ostringstream d;
    std::size_t passed = 0;
    std::string why;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        try {
            auto h = build_id_graph(60, 3, 1, seed);
            passed += verify_id_graph(h).passes();
        }
        catch (const InfeasibleParameters & e) {
            why = e.what();
        }
    }
    d << passed << "/10 seeds pass Properties 1, 3, 4, 5";
    if (!why.empty())
        d << " (" << why << ")";
    return {passed >= 8, d.str()};
}

// 6. Zero-round impossibility.
Outcome zero_round()
{
    std::ostringstream d;
    bool ok = true;
    std::size_t corpus = 0, impossible = 0;
    for (std::uint64_t seed = 0; seed < 400 && corpus < 24; ++seed) {
        const std::uint32_t delta = 2 + seed % 2;
        const std::uint32_t nV = 4 + static_cast<std::uint32_t>(seed % (delta == 2 ? 13 : 9));
        auto h = random_id_graph(nV, delta, 0.55 + 0.05 * static_cast<double>(seed % 6), seed);
        if (!passes_p135(verify_id_graph(h)))
            continue;
        ++corpus;
        impossible += !zero_round_exhaustive(h).exists;
    }
    ok = ok && corpus > 0 && impossible == corpus;
    d << "Property-1/3/5 corpus: impossible on " << impossible << "/" << corpus;

    std::vector<IdGraph> violators;
    {
        auto h = IdGraph::empty(4, 2);
        for (std::uint32_t c = 1; c <= 2; ++c) {
            h.add_edge(c, 0, 1);
            h.add_edge(c, 2, 3);
        }
        violators.push_back(h);
    }
    for (std::uint32_t nV : {6U, 12U, 16U}) {
        auto h = IdGraph::empty(nV, 3);
        for (std::uint32_t c = 1; c <= 3; ++c)
            for (Vertex a = 0; a < nV; a += 2)
                h.add_edge(c, a, (a + 2 * c - 1) % nV);
        violators.push_back(h);
    }
    {
        auto h = IdGraph::empty(10, 2);
        for (std::uint32_t c = 1; c <= 2; ++c)
            for (Vertex a = 0; a < 10; ++a)
                h.add_edge(c, a, (a + 1) % 10);
        violators.push_back(h);
    }
    std::size_t exists = 0;
    for (const auto & h : violators) {
        auto r = zero_round_exhaustive(h);
        const bool good = r.exists && zero_round_map_correct(h, r.map) && !verify_id_graph(h).p5.pass;
        exists += good;
    }
    ok = ok && exists == violators.size();
    d << "; hand-built Property-5 violators: exists on " << exists << "/" << violators.size();
    return {ok, d.str()};
}

// 7. Fooling harness.
Outcome fooling()
{
    std::ostringstream d;
    bool ok = true;
    FoolingConfig cfg;
    cfg.n = 1000;
    const std::size_t girth = gen_high_girth_chromatic(2, cfg.n, 0).girth;
    for (const std::string name : {"constant", "greedy-bfs", "parity"}) {
        auto alg = coloring_baseline(name, 2, girth / 8);
        std::size_t runs = 10, escapes = 0, certs = 0;
        for (std::uint64_t seed = 0; seed < runs; ++seed) {
            auto out = fool_coloring_algorithm(alg, cfg, seed);
            if (out.escape) {
                ++escapes;
                continue;
            }
            certs += out.certificate && out.certificate->replay_ok && replay_certificate(alg, *out.certificate, girth);
        }
        const double rate = static_cast<double>(escapes) / static_cast<double>(runs);
        ok = ok && certs == runs - escapes && rate <= 0.1;
        d << name << ": certificates " << certs << "/" << runs - escapes << ", escape rate " << rate << "; ";
    }
    d << "n = " << girth;
    return {ok, d.str()};
}

// 8. Probability bounds.
Outcome probability_bounds()
{
    std::ostringstream d;
    bool ok = true;
    for (auto [q, m] : {std::pair<std::uint64_t, std::uint64_t>{50, 10000}, {100, 100000}}) {
        auto r = duplicate_id_rate(q, m, 100000, q + m);
        ok = ok && r.ratio >= 0.5 && r.ratio <= 2.0;
        d << "dup(q=" << q << ", m=" << m << ") rate " << r.rate << " bound " << r.bound << " ratio " << r.ratio << "; ";
    }
    struct Point {
        std::uint64_t N, marked, I;
    };
    for (auto p : {Point{10000, 10, 5}, Point{100000, 100, 10}, Point{1000000, 1000, 1}})
        for (auto s : {GuessStrategy::First, GuessStrategy::Random, GuessStrategy::Spread}) {
            auto r = guessing_game(p.N, p.marked, p.I, s, 10000, p.N + p.I);
            ok = ok && r.rate <= 3 * r.bound;
            d << "guess(N=" << p.N << ", marked=" << p.marked << ", I=" << p.I << ") " << r.rate << " <= 3x" << r.bound
              << "; ";
        }
    return {ok, d.str()};
}

// 9. Query/global consistency.
Outcome consistency()
{
    std::ostringstream d;
    std::size_t lll_q = 0, lll_eq = 0, so_q = 0, so_eq = 0;
    for (std::size_t n : {256, 512})
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            {
                auto inst = so_as_lll(gen_random_regular(n, 6, 3, seed), 3);
                ShatterConfig cfg;
                auto sol = lll_solve(inst, cfg, seed);
                LllQueryBatch batch(inst, cfg, seed, ModelConfig::lca(seed));
                for (const auto & e : inst.events()) {
                    ++lll_q;
                    auto q = batch.run(e.id);
                    bool same = q.transcript.ok();
                    for (auto [x, v] : q.values)
                        same = same && sol.assignment.at(x) == v;
                    lll_eq += same;
                }
            }
            {
                auto g = gen_random_regular(n, 3, 3, seed);
                auto cfg = sinkless_config(g);
                auto global = solve_sinkless(g, cfg, seed).labeling;
                auto alg = sinkless_query_algorithm(cfg, g.delta(), seed);
                const auto digest = g.digest();
                for (NodeIndex v = 0; v < g.node_count(); ++v)
                    for (Port p = 1; p <= g.degree(v); ++p) {
                        ++so_q;
                        auto t = run_query(alg, g, Query{g.id(v), p}, ModelConfig::volume(seed), digest);
                        so_eq += t.ok() && t.output[0] == global.at(v, p);
                    }
            }
        }
    d << "lll " << lll_eq << "/" << lll_q << " queries, sinkless " << so_eq << "/" << so_q << " queries (n in {256, 512}, 10 seeds)";
    return {lll_eq == lll_q && so_eq == so_q, d.str()};
}

} // namespace

int main()
{
    std::cout.setf(std::ios::fixed);
    std::cout.precision(3);
    report(1, "validity", 62, validity);
    report(2, "shattering", 120, shattering);
    report(3, "probe scaling", 120, probe_scaling);
    report(4, "exactness", 30, exactness);
    report(5, "id graph", 60, id_graph);
    report(6, "zero round", 30, zero_round);
    report(7, "fooling", 60, fooling);
    report(8, "probability bounds", 60, probability_bounds);
    report(9, "consistency", 60, consistency);
    return 0;
}
