#include <probelab/graph.hpp>
#include <probelab/rng.hpp>

#include <algorithm>
#include <deque>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

namespace probelab {

PortedGraph::PortedGraph(std::size_t n, std::uint32_t delta) : delta_(delta), ids_(n), adj_(n)
{
    std::iota(ids_.begin(), ids_.end(), NodeId{1});
    rebuild_lookup();
}

PortedGraph PortedGraph::from_neighbor_lists(std::uint32_t delta, std::vector<NodeId> ids,
    const std::vector<std::vector<NodeIndex>> & nbrs)
{
    PortedGraph g(nbrs.size(), delta);
    g.set_ids(std::move(ids));
    for (NodeIndex v = 0; v < nbrs.size(); ++v) {
        if (nbrs[v].size() > delta)
            throw ContractBreach("neighbor list exceeds delta");
        g.adj_[v].resize(nbrs[v].size());
    }
    for (NodeIndex v = 0; v < nbrs.size(); ++v)
        for (Port p = 1; p <= nbrs[v].size(); ++p) {
            NodeIndex w = nbrs[v][p - 1];
            auto it = std::find(nbrs[w].begin(), nbrs[w].end(), v);
            if (it == nbrs[w].end())
                throw ContractBreach("neighbor lists are not symmetric");
            g.adj_[v][p - 1] = PortEntry{w, static_cast<Port>(it - nbrs[w].begin() + 1)};
        }
    return g;
}

void PortedGraph::set_ids(std::vector<NodeId> ids)
{
    if (ids.size() != adj_.size())
        throw ContractBreach("id vector size mismatch");
    ids_ = std::move(ids);
    rebuild_lookup();
}

void PortedGraph::rebuild_lookup()
{
    id_lookup_.clear();
    id_lookup_.reserve(ids_.size());
    for (NodeIndex v = 0; v < ids_.size(); ++v)
        id_lookup_.emplace(ids_[v], v);
}

bool PortedGraph::ids_unique() const { return id_lookup_.size() == ids_.size(); }

std::optional<NodeIndex> PortedGraph::index_of(NodeId id) const
{
    auto it = id_lookup_.find(id);
    if (it == id_lookup_.end())
        return std::nullopt;
    return it->second;
}

std::pair<Port, Port> PortedGraph::add_edge(NodeIndex u, NodeIndex v, int color)
{
    if (u == v)
        throw ContractBreach("self loop");
    if (adj_[u].size() >= delta_ || adj_[v].size() >= delta_)
        throw ContractBreach("degree bound exceeded");
    Port pu = static_cast<Port>(adj_[u].size() + 1);
    Port pv = static_cast<Port>(adj_[v].size() + 1);
    adj_[u].push_back(PortEntry{v, pv});
    adj_[v].push_back(PortEntry{u, pu});
    if (!colors_.empty()) {
        colors_[u].push_back(kNoColor);
        colors_[v].push_back(kNoColor);
    }
    if (!labels_.empty()) {
        labels_[u].push_back(kNoLabel);
        labels_[v].push_back(kNoLabel);
    }
    if (color != kNoColor)
        set_edge_color(u, pu, color);
    return {pu, pv};
}

void PortedGraph::set_edge_color(NodeIndex v, Port p, int color)
{
    if (colors_.empty()) {
        colors_.resize(adj_.size());
        for (NodeIndex x = 0; x < adj_.size(); ++x)
            colors_[x].assign(adj_[x].size(), kNoColor);
    }
    const auto & e = at(v, p);
    colors_[v][p - 1] = color;
    colors_[e.neighbor][e.back_port - 1] = color;
}

void PortedGraph::set_input_label(NodeIndex v, Port p, std::int32_t label)
{
    if (labels_.empty()) {
        labels_.resize(adj_.size());
        for (NodeIndex x = 0; x < adj_.size(); ++x)
            labels_[x].assign(adj_[x].size(), kNoLabel);
    }
    labels_[v][p - 1] = label;
}

std::size_t PortedGraph::edge_count() const
{
    std::size_t sum = 0;
    for (const auto & a : adj_)
        sum += a.size();
    return sum / 2;
}

std::vector<Edge> PortedGraph::edges() const
{
    std::vector<Edge> out;
    for (NodeIndex u = 0; u < adj_.size(); ++u)
        for (Port p = 1; p <= adj_[u].size(); ++p) {
            const auto & e = adj_[u][p - 1];
            if (u < e.neighbor)
                out.push_back(Edge{u, p, e.neighbor, e.back_port});
        }
    return out;
}

std::optional<std::string> PortedGraph::validate() const
{
    std::ostringstream msg;
    for (NodeIndex u = 0; u < adj_.size(); ++u) {
        if (adj_[u].size() > delta_) {
            msg << "node " << u << " has degree " << adj_[u].size() << " > delta " << delta_;
            return msg.str();
        }
        std::unordered_set<NodeIndex> seen;
        std::unordered_set<int> used_colors;
        for (Port p = 1; p <= adj_[u].size(); ++p) {
            const auto & e = adj_[u][p - 1];
            if (e.neighbor >= adj_.size() || e.neighbor == u) {
                msg << "node " << u << " port " << p << " has an invalid neighbor";
                return msg.str();
            }
            if (e.back_port < 1 || e.back_port > adj_[e.neighbor].size()
                || adj_[e.neighbor][e.back_port - 1] != PortEntry{u, p}) {
                msg << "port reciprocity broken at node " << u << " port " << p;
                return msg.str();
            }
            if (!seen.insert(e.neighbor).second) {
                msg << "parallel edge at node " << u << " port " << p;
                return msg.str();
            }
            if (!colors_.empty()) {
                int c = colors_[u][p - 1];
                if (c < 1 || c > static_cast<int>(delta_) || colors_[e.neighbor][e.back_port - 1] != c
                    || !used_colors.insert(c).second) {
                    msg << "improper edge color at node " << u << " port " << p;
                    return msg.str();
                }
            }
        }
    }
    return std::nullopt;
}

std::uint64_t PortedGraph::digest() const
{
    std::uint64_t h = hash_words(0x67726170ULL, {adj_.size(), delta_});
    for (NodeIndex v = 0; v < adj_.size(); ++v) {
        h = hash_combine(h, ids_[v]);
        for (Port p = 1; p <= adj_[v].size(); ++p) {
            const auto & e = adj_[v][p - 1];
            h = hash_words(h, {e.neighbor, e.back_port, static_cast<std::uint64_t>(edge_color(v, p)),
                                  static_cast<std::uint64_t>(static_cast<std::int64_t>(input_label(v, p)))});
        }
    }
    return h;
}

PortedGraph graph_from_edges(std::size_t n, const std::vector<std::pair<NodeIndex, NodeIndex>> & edges,
    std::uint32_t delta)
{
    if (delta == 0) {
        std::vector<std::uint32_t> deg(n, 0);
        for (auto [u, v] : edges) {
            ++deg[u];
            ++deg[v];
        }
        for (auto d : deg)
            delta = std::max(delta, d);
    }
    PortedGraph g(n, delta);
    for (auto [u, v] : edges)
        g.add_edge(u, v);
    return g;
}

PortedGraph make_path(std::size_t n)
{
    std::vector<std::pair<NodeIndex, NodeIndex>> e;
    for (NodeIndex i = 0; i + 1 < n; ++i)
        e.emplace_back(i, i + 1);
    return graph_from_edges(n, e, n > 2 ? 2 : static_cast<std::uint32_t>(n - 1));
}

PortedGraph make_cycle(std::size_t n)
{
    std::vector<std::pair<NodeIndex, NodeIndex>> e;
    for (NodeIndex i = 0; i < n; ++i)
        e.emplace_back(i, static_cast<NodeIndex>((i + 1) % n));
    return graph_from_edges(n, e, 2);
}

PortedGraph make_complete(std::size_t n)
{
    std::vector<std::pair<NodeIndex, NodeIndex>> e;
    for (NodeIndex i = 0; i < n; ++i)
        for (NodeIndex j = i + 1; j < n; ++j)
            e.emplace_back(i, j);
    return graph_from_edges(n, e, static_cast<std::uint32_t>(n > 0 ? n - 1 : 0));
}

PortedGraph make_star(std::size_t leaves)
{
    std::vector<std::pair<NodeIndex, NodeIndex>> e;
    for (NodeIndex i = 1; i <= leaves; ++i)
        e.emplace_back(0, i);
    return graph_from_edges(leaves + 1, e, static_cast<std::uint32_t>(leaves));
}

void assign_random_ids(PortedGraph & g, std::uint64_t range, std::uint64_t seed)
{
    const std::size_t n = g.node_count();
    if (range < n)
        throw InfeasibleParameters("id range smaller than node count");
    std::vector<NodeId> ids;
    ids.reserve(n);
    if (range <= 4 * n) {
        std::vector<NodeId> all(range);
        std::iota(all.begin(), all.end(), NodeId{1});
        std::mt19937_64 rng(seed);
        std::shuffle(all.begin(), all.end(), rng);
        ids.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));
    }
    else {
        std::unordered_set<NodeId> used;
        RandomTape tape(hash_combine(seed, 0x1d5ULL));
        for (std::uint64_t i = 0; ids.size() < n; ++i) {
            NodeId id = tape.uniform(i, range) + 1;
            if (used.insert(id).second)
                ids.push_back(id);
        }
    }
    g.set_ids(std::move(ids));
}

namespace {

std::vector<NodeId> permuted_ids(std::size_t n, std::mt19937_64 & rng)
{
    std::vector<NodeId> ids(n);
    std::iota(ids.begin(), ids.end(), NodeId{1});
    std::shuffle(ids.begin(), ids.end(), rng);
    return ids;
}

} // namespace

PortedGraph gen_edge_colored_tree(std::size_t n, std::uint32_t delta, std::uint64_t seed)
{
    if (n < 1 || delta < 2)
        throw InfeasibleParameters("tree generator needs n >= 1 and delta >= 2");
    std::mt19937_64 rng(seed);
    std::vector<std::vector<NodeIndex>> children(n);
    std::vector<std::uint32_t> deg(n, 0);
    std::vector<NodeIndex> open{0}; // nodes with spare degree
    for (NodeIndex v = 1; v < n; ++v) {
        std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
        std::size_t slot = pick(rng);
        NodeIndex parent = open[slot];
        children[parent].push_back(v);
        if (++deg[parent] == delta) {
            open[slot] = open.back();
            open.pop_back();
        }
        deg[v] = 1;
        if (deg[v] < delta)
            open.push_back(v);
    }

    PortedGraph g(n, delta);
    g.set_ids(permuted_ids(n, rng));
    // BFS from the root; each child edge takes the smallest color free at the parent.
    std::vector<int> parent_color(n, kNoColor);
    std::deque<NodeIndex> queue{0};
    bool any_edge = n > 1;
    while (!queue.empty()) {
        NodeIndex u = queue.front();
        queue.pop_front();
        int next = 1;
        for (NodeIndex c : children[u]) {
            if (next == parent_color[u])
                ++next;
            g.add_edge(u, c, any_edge ? next : kNoColor);
            parent_color[c] = next;
            ++next;
            queue.push_back(c);
        }
    }
    return g;
}

namespace {

using AdjSets = std::vector<std::set<NodeIndex>>;

// Shortest cycle through BFS from s shorter than `limit`, as a vertex sequence.
std::optional<std::vector<NodeIndex>> short_cycle_from(const AdjSets & adj, NodeIndex s, std::size_t limit)
{
    const std::size_t n = adj.size();
    std::vector<int> dist(n, -1);
    std::vector<NodeIndex> parent(n, s);
    std::deque<NodeIndex> queue{s};
    dist[s] = 0;
    while (!queue.empty()) {
        NodeIndex x = queue.front();
        queue.pop_front();
        if (static_cast<std::size_t>(2 * dist[x] + 1) >= limit)
            break;
        for (NodeIndex y : adj[x]) {
            if (dist[y] < 0) {
                dist[y] = dist[x] + 1;
                parent[y] = x;
                queue.push_back(y);
            }
            else if (parent[x] != y) {
                std::size_t len = static_cast<std::size_t>(dist[x] + dist[y] + 1);
                if (len >= limit)
                    continue;
                // walk both endpoints up to their common ancestor
                std::vector<NodeIndex> left{x}, right{y};
                NodeIndex a = x, b = y;
                while (dist[a] > dist[b]) {
                    a = parent[a];
                    left.push_back(a);
                }
                while (dist[b] > dist[a]) {
                    b = parent[b];
                    right.push_back(b);
                }
                while (a != b) {
                    a = parent[a];
                    b = parent[b];
                    left.push_back(a);
                    right.push_back(b);
                }
                right.pop_back();
                std::reverse(right.begin(), right.end());
                left.insert(left.end(), right.begin(), right.end());
                return left;
            }
        }
    }
    return std::nullopt;
}

} // namespace

PortedGraph gen_random_regular(std::size_t n, std::uint32_t delta, std::size_t girth_target, std::uint64_t seed,
    RegularGraphReport * report)
{
    if ((n * delta) % 2 != 0)
        throw InfeasibleParameters("n * delta must be even");
    if (girth_target < 3)
        throw InfeasibleParameters("girth target must be at least 3");
    if (delta >= n)
        throw InfeasibleParameters("delta must be smaller than n");

    std::mt19937_64 rng(seed);
    std::vector<std::pair<NodeIndex, NodeIndex>> edge_list;
    for (int attempt = 0;; ++attempt) {
        if (attempt > 1000)
            throw InfeasibleParameters("pairing model failed to produce a simple graph");
        std::vector<NodeIndex> points;
        points.reserve(n * delta);
        for (NodeIndex v = 0; v < n; ++v)
            for (std::uint32_t i = 0; i < delta; ++i)
                points.push_back(v);
        std::set<std::pair<NodeIndex, NodeIndex>> present;
        edge_list.clear();
        bool stuck = false;
        while (!points.empty() && !stuck) {
            bool placed = false;
            for (int tries = 0; tries < 200 && !placed; ++tries) {
                std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
                std::size_t i = pick(rng), j = pick(rng);
                NodeIndex a = points[i], b = points[j];
                if (i == j || a == b || present.count({std::min(a, b), std::max(a, b)}))
                    continue;
                present.insert({std::min(a, b), std::max(a, b)});
                edge_list.emplace_back(a, b);
                if (i < j)
                    std::swap(i, j);
                points[i] = points.back();
                points.pop_back();
                points[j] = points.back();
                points.pop_back();
                placed = true;
            }
            stuck = !placed;
        }
        if (!stuck)
            break;
    }

    AdjSets adj(n);
    for (auto [a, b] : edge_list) {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    std::size_t deleted = 0;
    for (NodeIndex s = 0; s < n; ++s) {
        while (auto cycle = short_cycle_from(adj, s, girth_target)) {
            std::pair<NodeIndex, NodeIndex> smallest{n, n};
            for (std::size_t i = 0; i < cycle->size(); ++i) {
                NodeIndex a = (*cycle)[i], b = (*cycle)[(i + 1) % cycle->size()];
                smallest = std::min(smallest, std::pair{std::min(a, b), std::max(a, b)});
            }
            adj[smallest.first].erase(smallest.second);
            adj[smallest.second].erase(smallest.first);
            if (++deleted > n / 4)
                throw InfeasibleParameters("girth boosting deleted more than n/4 edges");
        }
    }

    PortedGraph g(n, delta);
    g.set_ids(permuted_ids(n, rng));
    for (auto [a, b] : edge_list)
        if (adj[a].count(b))
            g.add_edge(a, b);
    if (report) {
        report->deleted_edges = deleted;
        auto gi = girth(g);
        report->girth = gi ? *gi : 0;
    }
    return g;
}

std::vector<int> bfs_distances(const PortedGraph & g, NodeIndex source, int max_depth)
{
    std::vector<int> dist(g.node_count(), -1);
    std::deque<NodeIndex> queue{source};
    dist[source] = 0;
    while (!queue.empty()) {
        NodeIndex x = queue.front();
        queue.pop_front();
        if (max_depth >= 0 && dist[x] >= max_depth)
            continue;
        for (const auto & e : g.ports(x))
            if (dist[e.neighbor] < 0) {
                dist[e.neighbor] = dist[x] + 1;
                queue.push_back(e.neighbor);
            }
    }
    return dist;
}

std::optional<std::size_t> girth(const PortedGraph & g)
{
    std::size_t best = 0;
    const std::size_t n = g.node_count();
    std::vector<int> dist(n);
    std::vector<NodeIndex> parent(n);
    for (NodeIndex s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[s] = 0;
        std::deque<NodeIndex> queue{s};
        while (!queue.empty()) {
            NodeIndex x = queue.front();
            queue.pop_front();
            if (best && static_cast<std::size_t>(2 * dist[x]) >= best)
                break;
            for (const auto & e : g.ports(x)) {
                NodeIndex y = e.neighbor;
                if (dist[y] < 0) {
                    dist[y] = dist[x] + 1;
                    parent[y] = x;
                    queue.push_back(y);
                }
                else if (parent[x] != y || x == s) {
                    if (x == s && dist[y] == 1 && parent[y] == s)
                        continue;
                    std::size_t len = static_cast<std::size_t>(dist[x] + dist[y] + 1);
                    if (!best || len < best)
                        best = len;
                }
            }
        }
    }
    if (!best)
        return std::nullopt;
    return best;
}

bool is_forest(const PortedGraph & g)
{
    // forest iff every component has |E| = |V| - 1
    std::vector<int> comp(g.node_count(), -1);
    std::size_t components = 0;
    for (NodeIndex s = 0; s < g.node_count(); ++s) {
        if (comp[s] >= 0)
            continue;
        ++components;
        std::deque<NodeIndex> queue{s};
        comp[s] = 0;
        while (!queue.empty()) {
            NodeIndex x = queue.front();
            queue.pop_front();
            for (const auto & e : g.ports(x))
                if (comp[e.neighbor] < 0) {
                    comp[e.neighbor] = 0;
                    queue.push_back(e.neighbor);
                }
        }
    }
    return g.edge_count() + components == g.node_count();
}

bool is_connected(const PortedGraph & g)
{
    if (g.node_count() == 0)
        return true;
    auto d = bfs_distances(g, 0);
    return std::all_of(d.begin(), d.end(), [](int x) { return x >= 0; });
}

PortedGraph power_graph(const PortedGraph & g, int k)
{
    if (k < 1)
        throw ContractBreach("power radius must be >= 1");
    const std::size_t n = g.node_count();
    std::vector<std::vector<NodeIndex>> nbrs(n);
    std::uint32_t max_deg = 0;
    for (NodeIndex v = 0; v < n; ++v) {
        auto d = bfs_distances(g, v, k);
        for (NodeIndex w = 0; w < n; ++w)
            if (w != v && d[w] > 0)
                nbrs[v].push_back(w);
        std::sort(nbrs[v].begin(), nbrs[v].end(),
            [&](NodeIndex a, NodeIndex b) { return std::pair{g.id(a), a} < std::pair{g.id(b), b}; });
        max_deg = std::max(max_deg, static_cast<std::uint32_t>(nbrs[v].size()));
    }
    return PortedGraph::from_neighbor_lists(max_deg, g.ids(), nbrs);
}

HalfEdgeLabeling HalfEdgeLabeling::for_graph(const PortedGraph & g, std::uint32_t alphabet, Symbol fill)
{
    HalfEdgeLabeling l;
    l.alphabet = alphabet;
    l.half_edges.resize(g.node_count());
    for (NodeIndex v = 0; v < g.node_count(); ++v)
        l.half_edges[v].assign(g.degree(v), fill);
    return l;
}

HalfEdgeLabeling edge_coloring_labeling(const PortedGraph & g)
{
    auto l = HalfEdgeLabeling::for_graph(g, g.delta());
    for (NodeIndex v = 0; v < g.node_count(); ++v)
        for (Port p = 1; p <= g.degree(v); ++p)
            l.at(v, p) = g.edge_color(v, p) - 1;
    return l;
}

namespace {

Verdict make_verdict(Verdict::Status s, std::string msg, std::optional<NodeIndex> node = std::nullopt,
    std::optional<Port> port = std::nullopt)
{
    return Verdict{s, std::move(msg), node, port};
}

bool covers_half_edges(const PortedGraph & g, const HalfEdgeLabeling & sol)
{
    if (sol.half_edges.size() != g.node_count())
        return false;
    for (NodeIndex v = 0; v < g.node_count(); ++v)
        if (sol.half_edges[v].size() != g.degree(v))
            return false;
    return true;
}

} // namespace

Verdict verify_solution(const PortedGraph & g, const HalfEdgeLabeling & sol, const Problem & problem)
{
    using S = Verdict::Status;
    std::uint32_t expected_alphabet = std::visit(
        [](const auto & p) -> std::uint32_t {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, SinklessProblem>)
                return 2;
            else
                return p.colors;
        },
        problem);
    if (sol.alphabet != expected_alphabet)
        return make_verdict(S::Rejected, "alphabet size " + std::to_string(sol.alphabet) + " does not match problem ("
                + std::to_string(expected_alphabet) + ")");

    auto in_alphabet = [&](Symbol s) { return s >= 0 && s < static_cast<Symbol>(sol.alphabet); };

    if (const auto * col = std::get_if<ColoringProblem>(&problem)) {
        if (sol.nodes.size() != g.node_count())
            return make_verdict(S::Rejected, "coloring labeling must label every node");
        for (NodeIndex v = 0; v < g.node_count(); ++v)
            if (!in_alphabet(sol.nodes[v]))
                return make_verdict(S::Rejected, "node label outside alphabet", v);
        (void)col;
        for (NodeIndex v = 0; v < g.node_count(); ++v)
            for (Port p = 1; p <= g.degree(v); ++p)
                if (sol.nodes[v] == sol.nodes[g.neighbor(v, p)])
                    return make_verdict(S::Invalid, "monochromatic edge", v, p);
        return {};
    }

    if (!covers_half_edges(g, sol))
        return make_verdict(S::Rejected, "labeling does not cover every half-edge");
    for (NodeIndex v = 0; v < g.node_count(); ++v)
        for (Port p = 1; p <= g.degree(v); ++p)
            if (!in_alphabet(sol.at(v, p)))
                return make_verdict(S::Rejected, "half-edge label outside alphabet", v, p);

    if (const auto * so = std::get_if<SinklessProblem>(&problem)) {
        for (NodeIndex v = 0; v < g.node_count(); ++v)
            for (Port p = 1; p <= g.degree(v); ++p) {
                const auto & e = g.at(v, p);
                if ((sol.at(v, p) == Out) == (sol.at(e.neighbor, e.back_port) == Out))
                    return make_verdict(S::Invalid, "edge orientation inconsistent", v, p);
            }
        for (NodeIndex v = 0; v < g.node_count(); ++v) {
            if (g.degree(v) < so->min_degree)
                continue;
            bool has_out = false;
            for (Port p = 1; p <= g.degree(v); ++p)
                has_out = has_out || sol.at(v, p) == Out;
            if (!has_out)
                return make_verdict(S::Invalid, "sink at node with degree " + std::to_string(g.degree(v)), v);
        }
        return {};
    }

    // edge coloring
    for (NodeIndex v = 0; v < g.node_count(); ++v) {
        std::vector<bool> used(sol.alphabet, false);
        for (Port p = 1; p <= g.degree(v); ++p) {
            const auto & e = g.at(v, p);
            Symbol c = sol.at(v, p);
            if (sol.at(e.neighbor, e.back_port) != c)
                return make_verdict(S::Invalid, "edge endpoints disagree on color", v, p);
            if (used[static_cast<std::size_t>(c)])
                return make_verdict(S::Invalid, "two edges of the same color share a node", v, p);
            used[static_cast<std::size_t>(c)] = true;
        }
    }
    return {};
}

} // namespace probelab
