#include <probelab/adversary.hpp>

#include <probelab/rng.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <unordered_set>

namespace probelab {

namespace {

bool colorable(const std::vector<std::uint64_t> & adj, std::uint32_t k, std::vector<int> & color, std::size_t left)
{
    if (left == 0)
        return true;
    const auto n = adj.size();
    // DSatur: most distinct neighbor colors first, then most uncolored neighbors.
    std::size_t best = n;
    int best_sat = -1, best_deg = -1;
    for (std::size_t v = 0; v < n; ++v) {
        if (color[v] >= 0)
            continue;
        std::uint64_t seen = 0;
        int deg = 0;
        for (std::size_t u = 0; u < n; ++u)
            if (adj[v] >> u & 1U) {
                if (color[u] >= 0)
                    seen |= std::uint64_t{1} << color[u];
                else
                    ++deg;
            }
        int sat = std::popcount(seen);
        if (sat > best_sat || (sat == best_sat && deg > best_deg)) {
            best = v;
            best_sat = sat;
            best_deg = deg;
        }
    }
    std::uint64_t used = 0;
    int max_color = -1;
    for (std::size_t u = 0; u < n; ++u) {
        if (adj[best] >> u & 1U && color[u] >= 0)
            used |= std::uint64_t{1} << color[u];
        max_color = std::max(max_color, color[u]);
    }
    // A fresh color is interchangeable with any other unused one.
    const auto limit = std::min<std::uint32_t>(k, static_cast<std::uint32_t>(max_color + 2));
    for (std::uint32_t c = 0; c < limit; ++c) {
        if (used >> c & 1U)
            continue;
        color[best] = static_cast<int>(c);
        if (colorable(adj, k, color, left - 1))
            return true;
    }
    color[best] = -1;
    return false;
}

std::uint64_t key_hash(std::uint64_t seed, std::uint64_t tag, const HostKey & x)
{
    std::uint64_t h = hash_words(seed, {tag, x.core, x.path.size()});
    for (Port p : x.path)
        h = hash_combine(h, p);
    return h;
}

// Random maximal graph with girth >= 5 and degree <= delta: scan all pairs in
// random order, keep an edge when both ends have room and are >= 4 apart.
PortedGraph random_girth5_graph(std::size_t n, std::uint32_t delta, std::uint64_t seed)
{
    RandomTape t(seed);
    std::vector<std::pair<NodeIndex, NodeIndex>> pairs;
    for (NodeIndex a = 0; a < n; ++a)
        for (NodeIndex b = a + 1; b < n; ++b)
            pairs.push_back({a, b});
    for (std::size_t k = pairs.size(); k > 1; --k)
        std::swap(pairs[k - 1], pairs[t.uniform(k, k)]);
    std::vector<std::vector<NodeIndex>> adj(n);
    std::vector<int> dist(n, -1);
    auto far = [&](NodeIndex a, NodeIndex b) {
        std::fill(dist.begin(), dist.end(), -1);
        std::vector<NodeIndex> q{a};
        dist[a] = 0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            if (dist[q[i]] >= 3)
                continue;
            for (auto y : adj[q[i]])
                if (dist[y] < 0) {
                    dist[y] = dist[q[i]] + 1;
                    q.push_back(y);
                }
        }
        return dist[b] < 0;
    };
    std::vector<std::pair<NodeIndex, NodeIndex>> edges;
    for (auto [a, b] : pairs)
        if (adj[a].size() < delta && adj[b].size() < delta && far(a, b)) {
            adj[a].push_back(b);
            adj[b].push_back(a);
            edges.push_back({a, b});
        }
    return graph_from_edges(n, edges, delta);
}

} // namespace

std::uint32_t chromatic_number_exact(const PortedGraph & g)
{
    const auto n = g.node_count();
    if (n > 64)
        throw InfeasibleParameters("exact chromatic number is limited to 64 nodes");
    if (n == 0)
        return 0;
    std::vector<std::uint64_t> adj(n, 0);
    for (NodeIndex v = 0; v < n; ++v)
        for (const auto & e : g.ports(v))
            adj[v] |= std::uint64_t{1} << e.neighbor;
    for (std::uint32_t k = 1;; ++k) {
        std::vector<int> color(n, -1);
        if (colorable(adj, k, color, n))
            return k;
    }
}

HighGirthGraph gen_high_girth_chromatic(std::uint32_t c, std::size_t n, std::uint64_t seed)
{
    HighGirthGraph r;
    if (c < 2)
        throw InfeasibleParameters("need at least 2 colors");
    if (c == 2) {
        std::size_t len = std::max<std::size_t>(n, 3);
        if (len % 2 == 0)
            ++len;
        if (len != n)
            r.rounded_from = n;
        r.graph = make_cycle(len);
        r.chromatic = 3;
        r.girth = len;
        return r;
    }
    if (c > 3)
        throw InfeasibleParameters("chromatic number above " + std::to_string(c)
            + " with high girth is out of reach at desk scale (exact test limited to 64 nodes)");
    if (n > 64)
        throw InfeasibleParameters("c = 3 cores are limited to 64 nodes by the exact chromatic test");
    for (std::uint64_t attempt = 0; attempt < 400; ++attempt) {
        for (std::uint32_t delta : {6U, 7U, 5U}) {
            if (delta >= n)
                continue;
            auto g = random_girth5_graph(n, delta, hash_words(seed, {attempt, delta}));
            if (!is_connected(g))
                continue;
            const auto chi = chromatic_number_exact(g);
            if (chi > 3) {
                const auto gi = girth(g);
                r.graph = std::move(g);
                r.chromatic = chi;
                r.girth = gi ? *gi : 0;
                return r;
            }
        }
    }
    throw InfeasibleParameters("no 4-chromatic graph with girth >= 5 found on " + std::to_string(n) + " nodes");
}

LazyHost::LazyHost(PortedGraph core, std::uint32_t delta_h, std::uint64_t id_range, std::uint64_t seed) :
    core_(std::move(core)), delta_h_(delta_h), id_range_(id_range), seed_(seed)
{
    for (NodeIndex v = 0; v < core_.node_count(); ++v)
        if (core_.degree(v) > delta_h_)
            throw InfeasibleParameters("host degree below the core degree");
    if (id_range_ == 0)
        throw InfeasibleParameters("empty ID range");
}

// Partial Fisher-Yates over slots: only the structured slots (core edges, or
// the parent) are shuffled into uniform random ports; untouched entries stay
// identity and are not stored.
const LazyHost::SparsePerm & LazyHost::perm(const HostKey & x)
{
    if (auto it = perms_.find(x); it != perms_.end())
        return it->second;
    const std::uint32_t k = x.path.empty() ? core_.degree(x.core) : 1;
    SparsePerm sp;
    auto at = [&](std::uint32_t slot) {
        auto it = sp.slot_to_port.find(slot);
        return it == sp.slot_to_port.end() ? slot : it->second;
    };
    RandomTape t(key_hash(seed_, 0x7065726dULL, x));
    for (std::uint32_t i = 0; i < k && i + 1 < delta_h_; ++i) {
        const auto j = i + static_cast<std::uint32_t>(t.uniform(i, delta_h_ - i));
        const auto pi = at(i), pj = at(j);
        sp.slot_to_port[i] = pj;
        sp.slot_to_port[j] = pi;
    }
    for (auto [slot, port] : sp.slot_to_port)
        sp.port_to_slot[port] = slot;
    return perms_.emplace(x, std::move(sp)).first->second;
}

Port LazyHost::port_of_slot(const HostKey & x, std::uint32_t slot)
{
    const auto & p = perm(x).slot_to_port;
    auto it = p.find(slot);
    return (it == p.end() ? slot : it->second) + 1;
}

std::uint32_t LazyHost::slot_of_port(const HostKey & x, Port port)
{
    const auto & p = perm(x).port_to_slot;
    auto it = p.find(port - 1);
    return it == p.end() ? port - 1 : it->second;
}

NodeId LazyHost::id(const HostKey & x)
{
    if (auto it = ids_.find(x); it != ids_.end())
        return it->second;
    NodeId id = RandomTape(key_hash(seed_, 0x6964ULL, x)).uniform(0, id_range_) + 1;
    ids_.emplace(x, id);
    return id;
}

std::pair<HostKey, Port> LazyHost::neighbor(const HostKey & x, Port p)
{
    if (p == 0 || p > delta_h_)
        throw ContractBreach("host port out of range");
    const auto slot = slot_of_port(x, p);
    if (x.path.empty()) {
        const NodeIndex v = x.core;
        if (slot < core_.degree(v)) {
            const auto & e = core_.at(v, slot + 1);
            HostKey u{e.neighbor, {}};
            return {u, port_of_slot(u, e.back_port - 1)};
        }
    }
    else if (slot == 0) {
        HostKey parent{x.core, {x.path.begin(), x.path.end() - 1}};
        return {parent, x.path.back()};
    }
    HostKey child = x;
    child.path.push_back(p);
    const Port back = port_of_slot(child, 0);
    return {child, back};
}

std::uint64_t id_range(std::size_t n, std::uint32_t m)
{
    const unsigned __int128 cap = static_cast<unsigned __int128>(1) << 63;
    unsigned __int128 r = 1;
    for (std::uint32_t i = 0; i < m && r < cap; ++i)
        r *= std::max<std::size_t>(n, 1);
    return static_cast<std::uint64_t>(std::min(r, cap));
}

std::uint32_t host_degree(std::size_t n, std::uint32_t m, std::size_t girth, std::uint32_t core_delta)
{
    const long double target = static_cast<long double>(m) * std::log(static_cast<long double>(std::max<std::size_t>(n, 2)));
    const long double t = std::ceil(static_cast<long double>(girth) / 4.0L);
    for (std::uint32_t d = std::max<std::uint32_t>(3, core_delta + 1);; ++d)
        if (t * std::log(static_cast<long double>(d - 1)) >= target)
            return d;
}

std::string escape_name(Escape::Kind k)
{
    return k == Escape::Kind::DuplicateId ? "duplicate-id" : "far-vertex";
}

ProbeAlgorithm coloring_baseline(const std::string & name, std::uint32_t c, std::uint64_t budget)
{
    if (c < 2)
        throw ContractBreach("baselines need at least 2 colors");
    if (name == "constant")
        return {"constant", c, [](Oracle &) { return std::vector<Symbol>{0}; }};
    if (name == "parity")
        return {"parity", c, [](Oracle & o) { return std::vector<Symbol>{static_cast<Symbol>(o.root().id % 2)}; }};
    if (name != "greedy-bfs" && name != "deep")
        throw ContractBreach("unknown baseline '" + name + "'");
    const bool parity = name == "greedy-bfs";
    return {name, c, [=](Oracle & o) {
                LocalView view(o);
                const NodeId root = o.root().id;
                std::map<NodeId, std::uint64_t> dist{{root, 0}};
                std::deque<NodeId> q{root};
                bool out_of_budget = false;
                while (!q.empty() && !out_of_budget) {
                    NodeId u = q.front();
                    q.pop_front();
                    for (Port p = 1; p <= view.degree(u); ++p) {
                        if (!view.known(u, p) && o.probes() >= budget) {
                            out_of_budget = true;
                            break;
                        }
                        NodeId w = view.neighbor(u, p);
                        if (dist.emplace(w, dist.at(u) + 1).second)
                            q.push_back(w);
                    }
                }
                if (!parity)
                    return std::vector<Symbol>{0};
                return std::vector<Symbol>{static_cast<Symbol>(dist.begin()->second % 2)};
            }};
}

namespace {

struct EscapeSignal {
    Escape::Kind kind;
    std::string detail;
};

class HostOracle : public Oracle {
public:
    HostOracle(LazyHost & host, const ModelConfig & cfg, NodeIndex root, std::uint64_t n, std::size_t girth,
        std::vector<int> dist) :
        Oracle(cfg, Query{host.id(HostKey{root, {}}), std::nullopt},
            NodeInfo{host.id(HostKey{root, {}}), host.degree(), 0}, n),
        host_(host), girth_(girth), dist_(std::move(dist))
    {
        keys_.emplace(root_info().id, HostKey{root, {}});
    }

    const std::map<NodeId, HostKey> & keys() const noexcept { return keys_; }

protected:
    ProbeAnswer resolve(NodeId id, Port port) override
    {
        auto it = keys_.find(id);
        if (it == keys_.end())
            throw ProbeError(ProbeError::Kind::UnknownId, "no seen node with id " + std::to_string(id));
        if (port == 0 || port > host_.degree())
            throw ProbeError(ProbeError::Kind::PortOutOfRange, "port " + std::to_string(port) + " out of range");
        auto [y, back] = host_.neighbor(it->second, port);
        const NodeId yid = host_.id(y);
        if (auto dup = keys_.find(yid); dup != keys_.end() && dup->second != y)
            throw EscapeSignal{Escape::Kind::DuplicateId, "two probed nodes share id " + std::to_string(yid)};
        if (y.path.empty() && 4 * static_cast<std::size_t>(dist_[y.core]) >= girth_)
            throw EscapeSignal{Escape::Kind::FarVertex, "probed core node at distance "
                    + std::to_string(dist_[y.core]) + " (girth " + std::to_string(girth_) + ")"};
        keys_.emplace(yid, y);
        return ProbeAnswer{NodeInfo{yid, host_.degree(), 0}, back, kNoLabel};
    }

private:
    LazyHost & host_;
    std::size_t girth_;
    std::vector<int> dist_;
    std::map<NodeId, HostKey> keys_;

    const NodeInfo & root_info() const { return root(); }
};

ModelConfig fooling_model(const FoolingConfig & cfg, std::uint64_t n, std::uint64_t seed)
{
    ModelConfig mc = ModelConfig::volume(seed);
    mc.randomness.kind = Randomness::Kind::None;
    mc.id_space.kind = IdSpace::Kind::Polynomial;
    mc.id_space.exponent = cfg.m;
    mc.advertised_n = n;
    mc.probe_budget = cfg.probe_budget;
    return mc;
}

bool same_run(const ProbeTranscript & a, const ProbeTranscript & b)
{
    return a.steps == b.steps && a.output == b.output && a.failure == b.failure;
}

} // namespace

bool replay_certificate(const ProbeAlgorithm & alg, const FoolingCertificate & cert, std::size_t n)
{
    ModelConfig mc = ModelConfig::volume(0);
    mc.randomness.kind = Randomness::Kind::None;
    mc.advertised_n = n;
    auto tv = run_query(alg, cert.tree, Query{cert.v, std::nullopt}, mc);
    auto tw = run_query(alg, cert.tree, Query{cert.w, std::nullopt}, mc);
    return tv.ok() && tw.ok() && tv.steps == cert.tv.steps && tv.output == cert.tv.output
        && tw.steps == cert.tw.steps && tw.output == cert.tw.output && tv.output == tw.output;
}

FoolingOutcome fool_coloring_algorithm(const ProbeAlgorithm & alg, const FoolingConfig & cfg, std::uint64_t seed)
{
    return fool_coloring_algorithm(alg, gen_high_girth_chromatic(cfg.c, cfg.n, seed), cfg, seed);
}

FoolingOutcome fool_coloring_algorithm(const ProbeAlgorithm & alg, const HighGirthGraph & core,
    const FoolingConfig & cfg, std::uint64_t seed)
{
    FoolingOutcome out;
    const auto & G = core.graph;
    const std::uint64_t n = G.node_count();
    out.girth = core.girth;
    out.delta_h = cfg.delta_h ? *cfg.delta_h : host_degree(n, cfg.m, core.girth, G.delta());
    LazyHost host(G, out.delta_h, id_range(n, cfg.m), seed);
    const ModelConfig mc = fooling_model(cfg, n, seed);

    out.colors.assign(n, -1);
    std::vector<ProbeTranscript> transcripts(n);
    std::vector<std::map<NodeId, HostKey>> seen(n);
    for (NodeIndex v = 0; v < n; ++v) {
        HostOracle o(host, mc, v, n, core.girth, bfs_distances(G, v));
        try {
            transcripts[v] = run_on_oracle(alg, o);
        }
        catch (const EscapeSignal & e) {
            out.escape = Escape{e.kind, host.id(HostKey{v, {}}), e.detail};
            return out;
        }
        out.max_probes = std::max(out.max_probes, transcripts[v].probe_count);
        if (transcripts[v].ok() && transcripts[v].output.size() == 1)
            out.colors[v] = transcripts[v].output[0];
        else
            out.failures.push_back(std::to_string(host.id(HostKey{v, {}})) + ": "
                + transcripts[v].failure.value_or("malformed output"));
        seen[v] = o.keys();
    }

    std::optional<Edge> mono;
    for (const auto & e : G.edges())
        if (out.colors[e.u] >= 0 && out.colors[e.u] == out.colors[e.v]) {
            mono = e;
            break;
        }
    if (!mono) {
        out.note = "no monochromatic core edge among successful queries";
        return out;
    }

    std::map<NodeId, HostKey> nodes = seen[mono->u];
    for (const auto & [id, key] : seen[mono->v]) {
        auto [it, fresh] = nodes.emplace(id, key);
        if (!fresh && it->second != key) {
            out.escape = Escape{Escape::Kind::DuplicateId, host.id(HostKey{mono->v, {}}),
                "queries of an edge's endpoints saw two nodes with id " + std::to_string(id)};
            return out;
        }
    }

    // Induced subgraph of the host on the seen nodes; other ports get fresh
    // leaves, then one path grows until the tree has n nodes.
    std::map<HostKey, NodeIndex> index;
    std::vector<NodeId> ids;
    for (const auto & [id, key] : nodes) {
        index.emplace(key, static_cast<NodeIndex>(ids.size()));
        ids.push_back(id);
    }
    std::vector<std::vector<NodeIndex>> nbrs(ids.size());
    std::set<NodeId> used(ids.begin(), ids.end());
    NodeId next_id = 1;
    auto fresh_id = [&] {
        while (used.count(next_id))
            ++next_id;
        used.insert(next_id);
        return next_id++;
    };
    std::vector<NodeId> leaf_ids;
    for (const auto & [key, i] : index)
        for (Port p = 1; p <= host.degree(); ++p) {
            auto [y, back] = host.neighbor(key, p);
            if (auto it = index.find(y); it != index.end()) {
                nbrs[i].push_back(it->second);
            }
            else {
                const auto leaf = static_cast<NodeIndex>(nbrs.size());
                nbrs[i].push_back(leaf);
                nbrs.push_back({i});
                ids.push_back(0);
            }
        }
    if (nbrs.size() > n) {
        out.note = "probed region (" + std::to_string(nbrs.size()) + " nodes with its boundary) exceeds n = "
            + std::to_string(n);
        return out;
    }
    while (nbrs.size() < n) {
        const auto last = static_cast<NodeIndex>(nbrs.size() - 1);
        const auto fresh = static_cast<NodeIndex>(nbrs.size());
        nbrs[last].push_back(fresh);
        nbrs.push_back({last});
        ids.push_back(0);
    }
    for (auto & id : ids)
        if (id == 0)
            id = fresh_id();

    FoolingCertificate cert;
    cert.v = host.id(HostKey{mono->u, {}});
    cert.w = host.id(HostKey{mono->v, {}});
    cert.color = out.colors[mono->u];
    cert.tree = PortedGraph::from_neighbor_lists(host.degree(), ids, nbrs);
    if (auto err = cert.tree.validate()) {
        out.note = "completed tree is malformed: " + *err;
        return out;
    }
    if (!is_forest(cert.tree) || !is_connected(cert.tree) || !cert.tree.ids_unique()) {
        out.note = "completed graph is not a tree with unique IDs";
        return out;
    }
    ModelConfig rc = mc;
    auto tv = run_query(alg, cert.tree, Query{cert.v, std::nullopt}, rc);
    auto tw = run_query(alg, cert.tree, Query{cert.w, std::nullopt}, rc);
    cert.replay_ok = same_run(tv, transcripts[mono->u]) && same_run(tw, transcripts[mono->v]);
    cert.tv = std::move(tv);
    cert.tw = std::move(tw);
    out.certificate = std::move(cert);
    return out;
}

RateEstimate duplicate_id_rate(std::uint64_t q, std::uint64_t m, std::uint64_t trials, std::uint64_t seed)
{
    if (m == 0)
        throw ContractBreach("empty ID space");
    RateEstimate r;
    r.trials = trials;
    std::vector<std::uint64_t> draw(q);
    for (std::uint64_t t = 0; t < trials; ++t) {
        RandomTape tape(hash_words(seed, {0x64757073ULL, t}));
        for (std::uint64_t i = 0; i < q; ++i)
            draw[i] = tape.uniform(i, m);
        std::sort(draw.begin(), draw.end());
        if (std::adjacent_find(draw.begin(), draw.end()) != draw.end())
            ++r.hits;
    }
    r.rate = trials ? static_cast<double>(r.hits) / static_cast<double>(trials) : 0;
    r.bound = static_cast<double>(q) * static_cast<double>(q ? q - 1 : 0) / (2.0 * static_cast<double>(m));
    r.ratio = r.bound > 0 ? r.rate / r.bound : 0;
    return r;
}

GuessStrategy parse_guess_strategy(const std::string & s)
{
    if (s == "first")
        return GuessStrategy::First;
    if (s == "random")
        return GuessStrategy::Random;
    if (s == "spread")
        return GuessStrategy::Spread;
    throw ContractBreach("strategy must be first, random or spread");
}

namespace {

// Floyd's sampling of k distinct values from [0, N).
std::unordered_set<std::uint64_t> sample_distinct(const RandomTape & t, std::uint64_t N, std::uint64_t k)
{
    std::unordered_set<std::uint64_t> s;
    for (std::uint64_t j = N - k; j < N; ++j) {
        const auto x = t.uniform(j, j + 1);
        if (!s.insert(x).second)
            s.insert(j);
    }
    return s;
}

} // namespace

RateEstimate guessing_game(std::uint64_t N, std::uint64_t n_marked, std::uint64_t I_size, GuessStrategy strategy,
    std::uint64_t trials, std::uint64_t seed)
{
    if (!(I_size <= n_marked && n_marked <= N) || N == 0)
        throw ContractBreach("guessing game needs I_size <= n_marked <= N");
    RateEstimate r;
    r.trials = trials;
    std::vector<std::uint64_t> fixed;
    for (std::uint64_t i = 0; i < I_size; ++i)
        fixed.push_back(strategy == GuessStrategy::Spread ? i * N / I_size : i);
    for (std::uint64_t t = 0; t < trials; ++t) {
        const auto marks = sample_distinct(RandomTape(hash_words(seed, {0x6d61726bULL, t})), N, n_marked);
        bool win = false;
        if (strategy == GuessStrategy::Random) {
            for (auto x : sample_distinct(RandomTape(hash_words(seed, {0x67756573ULL, t})), N, I_size))
                win = win || marks.count(x);
        }
        else {
            for (auto x : fixed)
                win = win || marks.count(x);
        }
        r.hits += win;
    }
    r.rate = trials ? static_cast<double>(r.hits) / static_cast<double>(trials) : 0;
    r.bound = std::min(1.0, static_cast<double>(I_size) * static_cast<double>(n_marked) / static_cast<double>(N));
    r.ratio = r.bound > 0 ? r.rate / r.bound : 0;
    return r;
}

} // namespace probelab
