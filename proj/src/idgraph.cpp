#include <probelab/idgraph.hpp>

#include <probelab/rng.hpp>

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

namespace probelab {

using nlohmann::json;
using boost::multiprecision::cpp_int;

IdGraph IdGraph::empty(std::uint32_t nV, std::uint32_t delta, std::uint32_t R)
{
    IdGraph h;
    h.nV = nV;
    h.delta = delta;
    h.R = R;
    h.layers.assign(delta, std::vector<std::vector<Vertex>>(nV));
    return h;
}

bool IdGraph::add_edge(std::uint32_t c, Vertex a, Vertex b)
{
    if (c == 0 || c > delta || a >= nV || b >= nV)
        throw ContractBreach("id graph edge out of range");
    if (a == b || adjacent(c, a, b))
        return false;
    auto & la = layers[c - 1][a];
    auto & lb = layers[c - 1][b];
    la.insert(std::lower_bound(la.begin(), la.end(), b), b);
    lb.insert(std::lower_bound(lb.begin(), lb.end(), a), a);
    return true;
}

bool IdGraph::adjacent(std::uint32_t c, Vertex a, Vertex b) const
{
    const auto & l = layers[c - 1][a];
    return std::binary_search(l.begin(), l.end(), b);
}

std::size_t IdGraph::union_degree(Vertex v) const
{
    std::size_t d = 0;
    for (const auto & layer : layers)
        d += layer[v].size();
    return d;
}

std::size_t IdGraph::edge_count(std::uint32_t c) const
{
    std::size_t s = 0;
    for (const auto & l : layers[c - 1])
        s += l.size();
    return s / 2;
}

std::string write_id_graph(const IdGraph & h)
{
    json j;
    j["nV"] = h.nV;
    j["delta"] = h.delta;
    j["R"] = h.R;
    json layers = json::array();
    for (std::uint32_t c = 1; c <= h.delta; ++c) {
        json edges = json::array();
        for (Vertex a = 0; a < h.nV; ++a)
            for (Vertex b : h.neighbors(c, a))
                if (a < b)
                    edges.push_back({a, b});
        layers.push_back(std::move(edges));
    }
    j["layers"] = std::move(layers);
    return j.dump(1) + "\n";
}

IdGraph read_id_graph(const std::string & text)
{
    json j;
    try {
        j = json::parse(text);
        auto h = IdGraph::empty(j.at("nV").get<std::uint32_t>(), j.at("delta").get<std::uint32_t>(),
            j.at("R").get<std::uint32_t>());
        auto layers = j.at("layers").get<std::vector<std::vector<std::array<Vertex, 2>>>>();
        if (layers.size() != h.delta)
            throw ParseError("layer count does not match delta");
        for (std::uint32_t c = 1; c <= h.delta; ++c)
            for (auto [a, b] : layers[c - 1]) {
                if (a >= h.nV || b >= h.nV || a == b)
                    throw ParseError("bad id graph edge");
                h.add_edge(c, a, b);
            }
        return h;
    }
    catch (const json::exception & e) {
        throw ParseError(std::string("bad id graph file: ") + e.what());
    }
}

namespace {

// Union multigraph as a list of (neighbor, edge index) per vertex.
struct UnionGraph {
    std::vector<std::vector<std::pair<Vertex, std::size_t>>> adj;
    std::vector<std::pair<Vertex, Vertex>> edges;
};

UnionGraph union_graph(const IdGraph & h)
{
    UnionGraph u;
    u.adj.resize(h.nV);
    for (std::uint32_t c = 1; c <= h.delta; ++c)
        for (Vertex a = 0; a < h.nV; ++a)
            for (Vertex b : h.neighbors(c, a))
                if (a < b) {
                    auto e = u.edges.size();
                    u.edges.emplace_back(a, b);
                    u.adj[a].emplace_back(b, e);
                    u.adj[b].emplace_back(a, e);
                }
    return u;
}

// Distance from a to b avoiding edge `skip`, explored up to `limit`; returns
// limit + 1 when farther.
std::size_t distance_avoiding(const UnionGraph & u, Vertex a, Vertex b, std::size_t skip, std::size_t limit,
    std::vector<int> & dist, std::vector<Vertex> & touched)
{
    std::deque<Vertex> q{a};
    dist[a] = 0;
    touched.push_back(a);
    std::size_t found = limit + 1;
    while (!q.empty()) {
        Vertex x = q.front();
        q.pop_front();
        if (x == b) {
            found = static_cast<std::size_t>(dist[x]);
            break;
        }
        if (static_cast<std::size_t>(dist[x]) >= limit)
            continue;
        for (auto [y, e] : u.adj[x]) {
            if (e == skip || dist[y] >= 0)
                continue;
            dist[y] = dist[x] + 1;
            touched.push_back(y);
            q.push_back(y);
        }
    }
    for (Vertex t : touched)
        dist[t] = -1;
    touched.clear();
    return found;
}

} // namespace

std::optional<std::size_t> union_girth(const IdGraph & h)
{
    auto u = union_graph(h);
    std::optional<std::size_t> best;
    std::vector<int> dist(h.nV, -1);
    std::vector<Vertex> touched;
    for (std::size_t e = 0; e < u.edges.size(); ++e) {
        std::size_t limit = best ? *best - 2 : h.nV;
        auto d = distance_avoiding(u, u.edges[e].first, u.edges[e].second, e, limit, dist, touched);
        if (d <= limit)
            best = d + 1;
    }
    return best;
}

namespace {

using Mask = std::uint64_t;

struct MisSolver {
    std::vector<Mask> nbr;
    Mask best_set = 0;
    int best = -1;

    void run(Mask p, Mask chosen, int size)
    {
        // Degree <= 1 vertices are always safe to take.
        for (bool again = true; again;) {
            again = false;
            for (Mask rest = p; rest; rest &= rest - 1) {
                int v = std::countr_zero(rest);
                if (std::popcount(nbr[v] & p) <= 1) {
                    chosen |= Mask{1} << v;
                    ++size;
                    p &= ~(nbr[v] | (Mask{1} << v));
                    again = true;
                    break;
                }
            }
        }
        if (size + std::popcount(p) <= best)
            return;
        if (!p) {
            best = size;
            best_set = chosen;
            return;
        }
        int pick = -1, deg = -1;
        for (Mask rest = p; rest; rest &= rest - 1) {
            int v = std::countr_zero(rest);
            int d = std::popcount(nbr[v] & p);
            if (d > deg) {
                deg = d;
                pick = v;
            }
        }
        Mask bit = Mask{1} << pick;
        if (deg == 2) {
            // Only cycles remain; dropping one vertex of a cycle loses nothing.
            run(p & ~bit, chosen, size);
            return;
        }
        run(p & ~(nbr[pick] | bit), chosen | bit, size + 1);
        run(p & ~bit, chosen, size);
    }
};

} // namespace

std::vector<Vertex> max_independent_set(const IdGraph & h, std::uint32_t c)
{
    if (h.nV > 64)
        throw ContractBreach("exact independent set needs nV <= 64");
    MisSolver s;
    s.nbr.assign(h.nV, 0);
    for (Vertex a = 0; a < h.nV; ++a)
        for (Vertex b : h.neighbors(c, a))
            s.nbr[a] |= Mask{1} << b;
    Mask all = h.nV == 64 ? ~Mask{0} : (Mask{1} << h.nV) - 1;
    s.run(all, 0, 0);
    std::vector<Vertex> out;
    for (Mask m = s.best_set; m; m &= m - 1)
        out.push_back(static_cast<Vertex>(std::countr_zero(m)));
    return out;
}

namespace {

std::uint64_t delta_pow10(std::uint32_t delta)
{
    std::uint64_t r = 1;
    for (int i = 0; i < 10; ++i) {
        if (r > std::numeric_limits<std::uint64_t>::max() / std::max<std::uint32_t>(delta, 1))
            return std::numeric_limits<std::uint64_t>::max();
        r *= delta;
    }
    return r;
}

} // namespace

std::string IdGraphReport::summary() const
{
    std::ostringstream s;
    auto line = [&](const char * name, const PropertyResult & p) {
        s << name << ": " << (p.pass ? "pass" : "FAIL") << (p.exact ? "" : " (not exact)") << " - " << p.detail
          << '\n';
    };
    line("property 1", p1);
    line("property 2", p2);
    line("property 3", p3);
    line("property 4", p4);
    line("property 5", p5);
    return s.str();
}

IdGraphReport verify_id_graph(const IdGraph & h)
{
    IdGraphReport r;
    r.p1.pass = h.layers.size() == h.delta;
    for (const auto & layer : h.layers)
        r.p1.pass = r.p1.pass && layer.size() == h.nV;
    r.p1.detail = r.p1.pass ? "common vertex set of size " + std::to_string(h.nV) : "layer vertex sets differ";

    r.p2.pass = true;
    r.p2.exact = false;
    r.p2.detail = "waived (desk scale)";

    const auto cap = delta_pow10(h.delta);
    r.p3.pass = true;
    for (std::uint32_t c = 1; c <= h.delta && r.p3.pass; ++c)
        for (Vertex v = 0; v < h.nV; ++v) {
            auto d = h.neighbors(c, v).size();
            if (d < 1 || d > cap) {
                r.p3.pass = false;
                r.p3.detail = "vertex " + std::to_string(v) + " has degree " + std::to_string(d) + " in layer "
                    + std::to_string(c);
                break;
            }
        }
    if (r.p3.pass)
        r.p3.detail = "all layer degrees in [1, delta^10]";

    r.girth = union_girth(h);
    const std::size_t need = 10 * static_cast<std::size_t>(h.R);
    r.p4.pass = !r.girth || *r.girth >= need;
    r.p4.detail = "union girth " + (r.girth ? std::to_string(*r.girth) : std::string("inf")) + ", need "
        + std::to_string(need);

    if (h.nV <= 64) {
        r.p5.pass = true;
        for (std::uint32_t c = 1; c <= h.delta; ++c) {
            auto is = max_independent_set(h, c);
            r.max_is.push_back(is.size());
            if (is.size() * h.delta >= h.nV && r.p5.pass) {
                r.p5.pass = false;
                r.p5.detail = "layer " + std::to_string(c) + " has an independent set of size "
                    + std::to_string(is.size()) + " >= nV/delta";
            }
        }
        if (r.p5.pass) {
            std::ostringstream s;
            s << "max independent sets";
            for (auto m : r.max_is)
                s << ' ' << m;
            s << " < " << h.nV << "/" << h.delta;
            r.p5.detail = s.str();
        }
    }
    else {
        // Greedy can only refute.
        r.p5.exact = false;
        r.p5.pass = true;
        r.p5.detail = "not exactly verified (nV > 64)";
        for (std::uint32_t c = 1; c <= h.delta; ++c) {
            std::vector<Vertex> order(h.nV);
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(),
                [&](Vertex a, Vertex b) { return h.neighbors(c, a).size() < h.neighbors(c, b).size(); });
            std::vector<char> blocked(h.nV, 0);
            std::size_t size = 0;
            for (Vertex v : order)
                if (!blocked[v]) {
                    ++size;
                    for (Vertex w : h.neighbors(c, v))
                        blocked[w] = 1;
                }
            if (size * h.delta >= h.nV) {
                r.p5.pass = false;
                r.p5.exact = true;
                r.p5.detail = "greedy independent set of size " + std::to_string(size) + " in layer "
                    + std::to_string(c);
                break;
            }
        }
    }
    return r;
}

bool passes_p135(const IdGraphReport & r)
{
    return r.p1.pass && r.p3.pass && r.p5.pass && r.p5.exact;
}

std::uint64_t moore_bound(std::uint32_t d, std::uint64_t g)
{
    if (g <= 2 || d <= 1)
        return d + 1ULL;
    const auto sat = std::numeric_limits<std::uint64_t>::max() / 4;
    auto add = [&](std::uint64_t a, std::uint64_t b) { return std::min(sat, a + b); };
    std::uint64_t term = 1, sum = 0;
    if (g % 2 == 0) {
        for (std::uint64_t i = 0; i < g / 2; ++i) {
            sum = add(sum, term);
            term = term > sat / d ? sat : term * (d - 1);
        }
        return std::min(sat, 2 * sum);
    }
    for (std::uint64_t i = 0; i < (g - 1) / 2; ++i) {
        sum = add(sum, term);
        term = term > sat / d ? sat : term * (d - 1);
    }
    return add(1, sum > sat / d ? sat : d * sum);
}

namespace {

std::optional<IdGraph> build_attempt(std::uint32_t nV, std::uint32_t delta, std::uint32_t R, std::uint64_t seed,
    std::uint32_t patch_budget)
{
    RandomTape tape(hash_words(seed, {0x69646772ULL, nV, delta, R}));
    const double p = std::min(1.0, static_cast<double>(delta) * delta / nV);
    auto h = IdGraph::empty(nV, delta, R);
    std::uint64_t draw = 0;
    for (std::uint32_t c = 1; c <= delta; ++c)
        for (Vertex a = 0; a < nV; ++a)
            for (Vertex b = a + 1; b < nV; ++b)
                if (tape.unit(draw++) < p)
                    h.add_edge(c, a, b);

    const std::size_t girth_need = 10 * static_cast<std::size_t>(R);
    const auto cap = delta_pow10(delta);

    // Vertices on short cycles: endpoints of edges closing a short cycle.
    std::vector<char> removed(nV, 0);
    {
        auto u = union_graph(h);
        std::vector<int> dist(nV, -1);
        std::vector<Vertex> touched;
        for (std::size_t e = 0; e < u.edges.size(); ++e) {
            auto [a, b] = u.edges[e];
            if (distance_avoiding(u, a, b, e, girth_need - 2, dist, touched) + 1 < girth_need)
                removed[a] = removed[b] = 1;
        }
    }
    for (Vertex v = 0; v < nV; ++v) {
        bool bad = h.union_degree(v) >= cap;
        for (std::uint32_t c = 1; c <= delta; ++c)
            bad = bad || h.neighbors(c, v).empty();
        if (bad)
            removed[v] = 1;
    }
    std::vector<Vertex> keep;
    std::vector<Vertex> remap(nV, 0);
    for (Vertex v = 0; v < nV; ++v)
        if (!removed[v]) {
            remap[v] = static_cast<Vertex>(keep.size());
            keep.push_back(v);
        }
    auto hp = IdGraph::empty(static_cast<std::uint32_t>(keep.size()), delta, R);
    for (std::uint32_t c = 1; c <= delta; ++c)
        for (Vertex a : keep)
            for (Vertex b : h.neighbors(c, a))
                if (a < b && !removed[b])
                    hp.add_edge(c, remap[a], remap[b]);
    if (hp.nV == 0)
        return std::nullopt;

    // Patch layer-isolated vertices with edges to far, low-degree vertices.
    std::uint32_t patches = 0;
    std::uint64_t pick = 0;
    RandomTape patch_tape(hash_combine(tape.key(), 0x7061746368ULL));
    for (Vertex v = 0; v < hp.nV; ++v)
        for (std::uint32_t c = 1; c <= delta; ++c) {
            if (!hp.neighbors(c, v).empty())
                continue;
            if (++patches > patch_budget)
                return std::nullopt;
            auto u = union_graph(hp);
            std::vector<int> dist(hp.nV, -1);
            std::deque<Vertex> q{v};
            dist[v] = 0;
            while (!q.empty()) {
                Vertex x = q.front();
                q.pop_front();
                if (static_cast<std::size_t>(dist[x]) + 1 >= girth_need)
                    continue;
                for (auto [y, e] : u.adj[x])
                    if (dist[y] < 0) {
                        dist[y] = dist[x] + 1;
                        q.push_back(y);
                    }
            }
            std::vector<Vertex> cand;
            for (Vertex w = 0; w < hp.nV; ++w)
                if (dist[w] < 0 && hp.union_degree(w) + 1 < cap)
                    cand.push_back(w);
            if (cand.empty())
                return std::nullopt;
            hp.add_edge(c, v, cand[patch_tape.uniform(pick++, cand.size())]);
        }
    return hp;
}

} // namespace

IdGraph build_id_graph(std::uint32_t nV, std::uint32_t delta, std::uint32_t R, std::uint64_t seed,
    const IdBuildOptions & opt)
{
    if (delta < 2 || R < 1)
        throw InfeasibleParameters("id graph needs delta >= 2 and R >= 1");
    const auto moore = moore_bound(delta, 10ULL * R);
    if (nV < moore)
        throw InfeasibleParameters("nV = " + std::to_string(nV) + " is below the Moore bound "
            + std::to_string(moore) + " for minimum degree " + std::to_string(delta) + " and girth "
            + std::to_string(10 * R));
    const std::uint32_t budget = opt.patch_budget ? opt.patch_budget : nV;
    for (std::uint32_t attempt = 0; attempt < opt.max_retries; ++attempt) {
        auto h = build_attempt(nV, delta, R, seed + attempt, budget);
        if (!h)
            continue;
        auto r = verify_id_graph(*h);
        if (r.p1.pass && r.p3.pass && r.p4.pass && r.p5.pass)
            return *h;
    }
    throw InfeasibleParameters("id graph construction failed after " + std::to_string(opt.max_retries)
        + " attempts");
}

std::optional<std::string> h_labeling_violation(const PortedGraph & g, const IdGraph & h)
{
    if (!g.has_edge_colors())
        return "graph has no edge colors";
    for (NodeIndex v = 0; v < g.node_count(); ++v)
        if (g.id(v) < 1 || g.id(v) > h.nV)
            return "id " + std::to_string(g.id(v)) + " is not a vertex of the id graph";
    for (const auto & e : g.edges()) {
        int c = g.edge_color(e.u, e.pu);
        if (c < 1 || static_cast<std::uint32_t>(c) > h.delta)
            return "edge color " + std::to_string(c) + " has no layer";
        if (!h.adjacent(static_cast<std::uint32_t>(c), IdGraph::to_vertex(g.id(e.u)), IdGraph::to_vertex(g.id(e.v))))
            return "ids " + std::to_string(g.id(e.u)) + " and " + std::to_string(g.id(e.v))
                + " are not adjacent in layer " + std::to_string(c);
    }
    return std::nullopt;
}

namespace {

struct TreeOrder {
    std::vector<NodeIndex> order;
    std::vector<NodeIndex> parent;
    std::vector<std::uint32_t> color; // color of the edge to the parent
};

TreeOrder bfs_tree(const PortedGraph & t)
{
    if (!t.has_edge_colors() && t.node_count() > 1)
        throw ContractBreach("tree needs edge colors");
    if (!is_forest(t) || !is_connected(t))
        throw ContractBreach("expected a tree");
    TreeOrder o;
    const auto n = t.node_count();
    o.parent.assign(n, 0);
    o.color.assign(n, 0);
    if (n == 0)
        return o;
    std::vector<char> seen(n, 0);
    o.order.push_back(0);
    seen[0] = 1;
    for (std::size_t i = 0; i < o.order.size(); ++i) {
        NodeIndex u = o.order[i];
        for (Port p = 1; p <= t.degree(u); ++p) {
            NodeIndex w = t.neighbor(u, p);
            if (seen[w])
                continue;
            seen[w] = 1;
            o.parent[w] = u;
            o.color[w] = static_cast<std::uint32_t>(t.edge_color(u, p));
            o.order.push_back(w);
        }
    }
    return o;
}

} // namespace

std::vector<Vertex> proper_h_labeling(const PortedGraph & tree, const IdGraph & h, std::uint64_t seed)
{
    auto o = bfs_tree(tree);
    const auto n = tree.node_count();
    for (std::size_t i = 1; i < n; ++i)
        if (o.color[o.order[i]] < 1 || o.color[o.order[i]] > h.delta)
            throw ContractBreach("tree edge color outside [delta]");
    std::vector<Vertex> label(n, 0);
    if (n == 0)
        return label;
    if (h.nV == 0)
        throw InfeasibleParameters("empty id graph");

    RandomTape tape(hash_words(seed, {0x6c6162656cULL}));
    std::vector<char> used(h.nV, 0);
    std::vector<std::vector<Vertex>> cand(n);
    std::vector<std::size_t> next(n, 0);
    std::uint64_t draws = 0;
    const std::uint64_t step_cap = 1'000'000;
    std::uint64_t steps = 0;

    auto candidates = [&](std::size_t i) {
        NodeIndex u = o.order[i];
        std::vector<Vertex> c;
        if (i == 0) {
            c.resize(h.nV);
            std::iota(c.begin(), c.end(), 0);
        }
        else {
            c = h.neighbors(o.color[u], label[o.parent[u]]);
        }
        for (std::size_t k = c.size(); k > 1; --k)
            std::swap(c[k - 1], c[tape.uniform(draws++, k)]);
        return c;
    };

    std::size_t i = 0;
    cand[0] = candidates(0);
    while (true) {
        if (++steps > step_cap)
            throw InfeasibleParameters("proper h-labeling search exceeded its step budget");
        NodeIndex u = o.order[i];
        bool placed = false;
        while (next[i] < cand[i].size()) {
            Vertex x = cand[i][next[i]++];
            if (!used[x]) {
                label[u] = x;
                used[x] = 1;
                placed = true;
                break;
            }
        }
        if (placed) {
            if (i + 1 == n)
                return label;
            ++i;
            cand[i] = candidates(i);
            next[i] = 0;
            continue;
        }
        if (i == 0)
            throw InfeasibleParameters("no injective proper h-labeling exists");
        --i;
        used[label[o.order[i]]] = 0;
    }
}

cpp_int count_h_labelings(const PortedGraph & tree, const IdGraph & h)
{
    auto o = bfs_tree(tree);
    const auto n = tree.node_count();
    if (n == 0)
        return 1;
    std::vector<std::vector<cpp_int>> f(n, std::vector<cpp_int>(h.nV, 1));
    for (std::size_t i = n; i-- > 1;) {
        NodeIndex w = o.order[i];
        NodeIndex u = o.parent[w];
        auto c = o.color[w];
        if (c < 1 || c > h.delta)
            throw ContractBreach("tree edge color outside [delta]");
        for (Vertex x = 0; x < h.nV; ++x) {
            cpp_int s = 0;
            for (Vertex y : h.neighbors(c, x))
                s += f[w][y];
            f[u][x] *= s;
        }
    }
    cpp_int total = 0;
    for (Vertex x = 0; x < h.nV; ++x)
        total += f[0][x];
    return total;
}

bool zero_round_map_correct(const IdGraph & h, const std::vector<std::uint32_t> & map)
{
    if (map.size() != h.nV)
        return false;
    for (Vertex a = 0; a < h.nV; ++a) {
        if (map[a] < 1 || map[a] > h.delta)
            return false;
        for (Vertex b : h.neighbors(map[a], a))
            if (map[b] == map[a])
                return false;
    }
    return true;
}

ZeroRoundResult zero_round_exhaustive(const IdGraph & h)
{
    if (h.nV > 16)
        throw ContractBreach("exhaustive zero-round search needs nV <= 16");
    ZeroRoundResult r;
    r.method = ZeroRoundResult::Method::Exhaustive;
    std::vector<std::uint32_t> map(h.nV, 0);
    auto fits = [&](Vertex v, std::uint32_t c) {
        for (Vertex w : h.neighbors(c, v))
            if (w < v && map[w] == c)
                return false;
        return true;
    };
    std::function<bool(Vertex)> go = [&](Vertex v) -> bool {
        if (v == h.nV)
            return true;
        for (std::uint32_t c = 1; c <= h.delta; ++c)
            if (fits(v, c)) {
                map[v] = c;
                if (go(v + 1))
                    return true;
            }
        map[v] = 0;
        return false;
    };
    r.exists = go(0);
    if (r.exists) {
        r.map = map;
        r.detail = "every color class is independent in its layer";
    }
    else {
        r.detail = "all " + std::to_string(h.delta) + "^" + std::to_string(h.nV) + " maps fail";
    }
    return r;
}

std::optional<ZeroRoundResult> zero_round_structural(const IdGraph & h)
{
    if (h.nV > 64)
        return std::nullopt;
    ZeroRoundResult r;
    r.method = ZeroRoundResult::Method::Structural;
    std::size_t worst = 0;
    for (std::uint32_t c = 1; c <= h.delta; ++c) {
        auto m = max_independent_set(h, c).size();
        r.max_is.push_back(m);
        if (m * h.delta >= h.nV)
            return std::nullopt;
        if (m >= worst) {
            worst = m;
            r.color = c;
        }
    }
    r.exists = false;
    r.detail = "some class has >= nV/delta vertices but every layer's independence number is below nV/delta";
    return r;
}

std::optional<ZeroRoundResult> zero_round_so_exists(const IdGraph & h)
{
    if (h.nV <= 16)
        return zero_round_exhaustive(h);
    return zero_round_structural(h);
}

std::vector<std::vector<Vertex>> radius_one_views(const IdGraph & h)
{
    std::vector<std::vector<Vertex>> out;
    std::vector<Vertex> view(h.delta + 1);
    std::function<void(std::uint32_t)> go = [&](std::uint32_t c) {
        if (c > h.delta) {
            out.push_back(view);
            return;
        }
        for (Vertex y : h.neighbors(c, view[0])) {
            if (std::find(view.begin() + 1, view.begin() + c, y) != view.begin() + c)
                continue;
            view[c] = y;
            go(c + 1);
        }
    };
    for (Vertex x = 0; x < h.nV; ++x) {
        view[0] = x;
        go(1);
    }
    return out;
}

EliminationResult eliminate_half_round(const RoundTable & alg, const IdGraph & h)
{
    if (h.delta != 3)
        throw TableTooLarge("round elimination is limited to delta = 3");
    if (h.nV > 12)
        throw TableTooLarge("round elimination is limited to nV <= 12");
    EliminationResult res;

    if (alg.radius == RoundTable::Radius::One) {
        auto views = radius_one_views(h);
        // out[(c, x, y)]: some view of x with color-c neighbor y orients c out, plus that view.
        std::map<std::vector<Vertex>, std::vector<Vertex>> out;
        for (const auto & v : views) {
            auto it = alg.table.find(v);
            if (it == alg.table.end())
                throw ContractBreach("table misses a radius-1 view");
            for (std::uint32_t c = 1; c <= h.delta; ++c)
                if (it->second >> (c - 1) & 1U)
                    out.emplace(std::vector<Vertex>{c, v[0], v[c]}, v);
        }
        RoundTable half;
        half.radius = RoundTable::Radius::Half;
        for (std::uint32_t c = 1; c <= h.delta; ++c)
            for (Vertex x = 0; x < h.nV; ++x)
                for (Vertex y : h.neighbors(c, x)) {
                    auto fx = out.find({c, x, y});
                    auto fy = out.find({c, y, x});
                    if (fx != out.end() && fy != out.end()) {
                        res.view_u = fx->second;
                        res.view_v = fy->second;
                        res.color = c;
                        res.detail = "views glue along a color-" + std::to_string(c)
                            + " edge with both endpoints oriented out";
                        return res;
                    }
                    half.table[{c, x, y}] = fx != out.end() ? 1U : 0U;
                }
        res.table = std::move(half);
        return res;
    }

    if (alg.radius == RoundTable::Radius::Half) {
        RoundTable zero;
        zero.radius = RoundTable::Radius::Zero;
        for (Vertex x = 0; x < h.nV; ++x) {
            std::uint32_t mask = 0;
            std::vector<Vertex> sink{x};
            for (std::uint32_t c = 1; c <= h.delta; ++c) {
                bool all = !h.neighbors(c, x).empty();
                Vertex witness = 0;
                for (Vertex y : h.neighbors(c, x)) {
                    auto it = alg.table.find({c, x, y});
                    if (it == alg.table.end())
                        throw ContractBreach("table misses an edge view");
                    if (!it->second) {
                        all = false;
                        witness = y;
                        break;
                    }
                }
                if (all)
                    mask |= 1U << (c - 1);
                else
                    sink.push_back(witness);
            }
            if (!mask) {
                res.view_u = sink;
                res.detail = "vertex " + std::to_string(x) + " becomes a sink";
                return res;
            }
            zero.table[{x}] = mask;
        }
        res.table = std::move(zero);
        return res;
    }
    throw ContractBreach("a 0-round table has nothing left to eliminate");
}

std::vector<std::uint32_t> zero_table_map(const RoundTable & t, const IdGraph & h)
{
    if (t.radius != RoundTable::Radius::Zero)
        throw ContractBreach("expected a 0-round table");
    std::vector<std::uint32_t> map(h.nV, 0);
    for (Vertex x = 0; x < h.nV; ++x) {
        auto it = t.table.find({x});
        if (it != t.table.end() && it->second)
            map[x] = static_cast<std::uint32_t>(std::countr_zero(it->second)) + 1;
    }
    return map;
}

} // namespace probelab
