#include <probelab/sinkless.hpp>

#include <algorithm>
#include <deque>
#include <limits>
#include <set>
#include <unordered_map>

namespace probelab {

Cluster analyze_cluster(const ClusterView & view)
{
    Cluster c;
    c.center = view.center;
    std::size_t internal = 0;
    bool all_deg3 = true;
    std::vector<std::pair<VarId, Value>> leaving;
    for (const auto & [u, ports] : view.adj) {
        c.members.push_back(u);
        all_deg3 = all_deg3 && ports.size() >= 3;
        for (Port p = 1; p <= ports.size(); ++p) {
            auto [w, bp] = ports[p - 1];
            if (view.member(w))
                ++internal;
            else
                leaving.emplace_back(edge_var(u, p, w, bp), u < w ? Value{1} : Value{0});
        }
    }
    internal /= 2;
    c.cyclic = internal >= c.members.size();
    c.has_event = !c.cyclic && all_deg3;
    std::sort(leaving.begin(), leaving.end());
    for (auto [x, v] : leaving) {
        c.leaving.push_back(x);
        c.inward.push_back(v);
    }
    return c;
}

namespace {

using HalfKey = std::pair<NodeId, Port>;

void orient_out(std::map<HalfKey, Orientation> & out, NodeId u, Port p, NodeId w, Port bp)
{
    out[{u, p}] = Out;
    out[{w, bp}] = In;
}

} // namespace

std::map<HalfKey, Orientation> orient_cluster(const ClusterView & view, const Cluster & cluster,
    const BoundaryOrientation & boundary)
{
    std::map<HalfKey, Orientation> out;
    const auto & adj = view.adj;
    if (adj.empty())
        return out;

    if (!cluster.cyclic) {
        std::optional<NodeId> root;
        if (!cluster.has_event) {
            for (const auto & [u, ports] : adj)
                if (ports.size() < 3) {
                    root = u;
                    break;
                }
        }
        else {
            for (const auto & [u, ports] : adj) {
                for (Port p = 1; p <= ports.size() && !root; ++p)
                    if (!view.member(ports[p - 1].first) && boundary(u, p) == Out)
                        root = u;
                if (root)
                    break;
            }
        }
        // No outgoing leaving edge: the LLL failed; the root stays a sink.
        if (!root)
            root = adj.begin()->first;
        std::set<NodeId> seen{*root};
        std::deque<NodeId> q{*root};
        while (!q.empty()) {
            NodeId u = q.front();
            q.pop_front();
            const auto & ports = adj.at(u);
            for (Port p = 1; p <= ports.size(); ++p) {
                auto [w, bp] = ports[p - 1];
                if (view.member(w) && seen.insert(w).second) {
                    orient_out(out, w, bp, u, p);
                    q.push_back(w);
                }
            }
        }
        return out;
    }

    // BFS tree from the smallest member; the first non-tree edge closes a cycle.
    struct Parent {
        NodeId node;
        Port up;   // port at the child
        Port down; // port at the parent
    };
    const NodeId s = adj.begin()->first;
    std::map<NodeId, std::optional<Parent>> parent{{s, std::nullopt}};
    std::vector<NodeId> order{s};
    for (std::size_t i = 0; i < order.size(); ++i) {
        NodeId u = order[i];
        const auto & ports = adj.at(u);
        for (Port p = 1; p <= ports.size(); ++p) {
            auto [w, bp] = ports[p - 1];
            if (view.member(w) && !parent.count(w)) {
                parent.emplace(w, Parent{u, bp, p});
                order.push_back(w);
            }
        }
    }
    auto is_tree_edge = [&](NodeId u, Port p, NodeId w, Port bp) {
        const auto & pu = parent.at(u);
        const auto & pw = parent.at(w);
        return (pu && pu->node == w && pu->up == p) || (pw && pw->node == u && pw->up == bp);
    };
    std::optional<std::pair<HalfKey, HalfKey>> closing;
    for (NodeId u : order) {
        const auto & ports = adj.at(u);
        for (Port p = 1; p <= ports.size() && !closing; ++p) {
            auto [w, bp] = ports[p - 1];
            if (view.member(w) && !is_tree_edge(u, p, w, bp))
                closing = std::pair{HalfKey{u, p}, HalfKey{w, bp}};
        }
        if (closing)
            break;
    }
    if (!closing)
        throw ContractBreach("cyclic cluster without a cycle");

    const auto [cu, cw] = *closing;
    std::vector<NodeId> up_u{cu.first};
    while (parent.at(up_u.back()))
        up_u.push_back(parent.at(up_u.back())->node);
    std::set<NodeId> anc(up_u.begin(), up_u.end());
    std::vector<NodeId> up_w{cw.first};
    while (!anc.count(up_w.back()))
        up_w.push_back(parent.at(up_w.back())->node);
    const NodeId lca = up_w.back();

    // Directed cycle: u up to lca, down to w, then the closing edge back to u.
    std::vector<HalfKey> cyc; // out half-edge of each cycle node
    for (NodeId x = cu.first; x != lca; x = parent.at(x)->node)
        cyc.emplace_back(x, parent.at(x)->up);
    for (std::size_t i = up_w.size() - 1; i > 0; --i)
        cyc.emplace_back(up_w[i], parent.at(up_w[i - 1])->down);
    cyc.push_back(cw);

    std::map<NodeId, std::pair<Port, Port>> cyc_ports; // node -> (out, in) along this direction
    for (const auto & [x, p] : cyc)
        cyc_ports[x].first = p;
    for (const auto & [x, p] : cyc) {
        auto [y, bp] = adj.at(x)[p - 1];
        cyc_ports[y].second = bp;
    }
    const auto & mp = cyc_ports.begin()->second;
    const bool forward = mp.first < mp.second;
    for (const auto & [x, pp] : cyc_ports) {
        const Port o = forward ? pp.first : pp.second;
        auto [y, bp] = adj.at(x)[o - 1];
        orient_out(out, x, o, y, bp);
    }

    std::set<NodeId> seen;
    std::deque<NodeId> q;
    for (const auto & [x, pp] : cyc_ports) {
        seen.insert(x);
        q.push_back(x);
    }
    while (!q.empty()) {
        NodeId u = q.front();
        q.pop_front();
        const auto & ports = adj.at(u);
        for (Port p = 1; p <= ports.size(); ++p) {
            auto [w, bp] = ports[p - 1];
            if (view.member(w) && seen.insert(w).second) {
                orient_out(out, w, bp, u, p);
                q.push_back(w);
            }
        }
    }
    for (const auto & [u, ports] : adj)
        for (Port p = 1; p <= ports.size(); ++p) {
            auto [w, bp] = ports[p - 1];
            if (view.member(w) && !out.count({u, p}) && u < w)
                orient_out(out, u, p, w, bp);
        }
    return out;
}

const Cluster & ClusterDecomposition::cluster(NodeId center) const
{
    auto it = std::lower_bound(clusters.begin(), clusters.end(), center,
        [](const Cluster & c, NodeId id) { return c.center < id; });
    if (it == clusters.end() || it->center != center)
        throw ContractBreach("no cluster with center " + std::to_string(center));
    return *it;
}

unsigned __int128 sinkless_palette(const PortedGraph & g, const SinklessConfig & cfg)
{
    if (cfg.id_palette)
        return cfg.id_palette;
    NodeId mx = 0;
    for (auto id : g.ids())
        mx = std::max(mx, id);
    return static_cast<unsigned __int128>(mx) + 1;
}

ClusterDecomposition cluster_decompose(const PortedGraph & g, int k, unsigned __int128 id_palette)
{
    if (k < 1)
        throw ContractBreach("cluster radius k must be at least 1");
    ClusterDecomposition dec;
    dec.k = k;
    const auto n = g.node_count();
    const auto colors = logstar_coloring(g, k, id_palette).colors;
    const auto mis = mis_from_coloring(g, colors, k);

    constexpr NodeId kNone = std::numeric_limits<NodeId>::max();
    dec.center_of.assign(n, kNone);
    std::vector<NodeIndex> frontier;
    for (NodeIndex v = 0; v < n; ++v)
        if (mis[v]) {
            dec.center_of[v] = g.id(v);
            dec.centers.push_back(g.id(v));
            frontier.push_back(v);
        }
    std::sort(dec.centers.begin(), dec.centers.end());
    // Level-synchronous BFS: an unassigned node takes the smallest center among
    // the neighbors assigned on the previous level.
    for (int d = 1; !frontier.empty(); ++d) {
        std::map<NodeIndex, NodeId> next;
        for (NodeIndex u : frontier)
            for (const auto & e : g.ports(u))
                if (dec.center_of[e.neighbor] == kNone) {
                    auto [it, fresh] = next.emplace(e.neighbor, dec.center_of[u]);
                    if (!fresh)
                        it->second = std::min(it->second, dec.center_of[u]);
                }
        frontier.clear();
        for (auto [v, c] : next) {
            if (d > k)
                throw ContractBreach("node farther than k from every center");
            dec.center_of[v] = c;
            frontier.push_back(v);
        }
    }
    for (NodeIndex v = 0; v < n; ++v)
        if (dec.center_of[v] == kNone)
            throw ContractBreach("node without a center");

    std::map<NodeId, std::vector<NodeId>> members;
    for (NodeIndex v = 0; v < n; ++v)
        members[dec.center_of[v]].push_back(g.id(v));
    for (auto & [c, ms] : members) {
        ClusterView view;
        view.center = c;
        for (NodeId id : ms) {
            auto v = *g.index_of(id);
            auto & ports = view.adj[id];
            for (const auto & e : g.ports(v))
                ports.emplace_back(g.id(e.neighbor), e.back_port);
        }
        dec.clusters.push_back(analyze_cluster(view));
    }
    for (const auto & e : g.edges()) {
        NodeId a = dec.center_of[e.u], b = dec.center_of[e.v];
        if (a != b)
            dec.contracted.push_back({std::min(a, b), std::max(a, b), edge_var(g.id(e.u), e.pu, g.id(e.v), e.pv)});
    }
    return dec;
}

ClusterView cluster_view(const PortedGraph & g, const ClusterDecomposition & dec, NodeId center)
{
    ClusterView view;
    view.center = center;
    for (NodeId id : dec.cluster(center).members) {
        auto v = *g.index_of(id);
        auto & ports = view.adj[id];
        for (const auto & e : g.ports(v))
            ports.emplace_back(g.id(e.neighbor), e.back_port);
    }
    return view;
}

LllInstance contracted_lll(const ClusterDecomposition & dec)
{
    std::vector<Variable> vars;
    for (const auto & e : dec.contracted)
        vars.push_back({e.var, 2});
    std::vector<Event> events;
    for (const auto & c : dec.clusters)
        if (c.has_event)
            events.push_back({c.center, c.leaving, {c.inward}});
    return LllInstance(std::move(vars), std::move(events), LllInstance::kMaxScopeBits);
}

std::uint64_t contracted_degree_bound(std::uint32_t delta, int k, std::uint64_t n)
{
    const std::uint64_t ball = 1 + power_degree_bound(delta, k, n);
    const std::uint64_t leaving = ball > (std::uint64_t{1} << 40) ? ball : ball * delta;
    return n > 0 ? std::min(leaving, n) : leaving;
}

namespace {

ShatterConfig contracted_config(const SinklessConfig & cfg, std::uint32_t delta, std::uint64_t n)
{
    ShatterConfig l = cfg.lll;
    l.check_criterion = false;
    l.degree_bound = contracted_degree_bound(delta, cfg.k, n);
    l.size_hint = n;
    return l;
}

Orientation edge_orientation(NodeId u, NodeId w, Value v)
{
    return ((v == 0) == (u < w)) ? Out : In;
}

} // namespace

SinklessResult solve_sinkless(const PortedGraph & g, const SinklessConfig & cfg, std::uint64_t seed)
{
    SinklessResult r;
    r.decomposition = cluster_decompose(g, cfg.k, sinkless_palette(g, cfg));
    const auto & dec = r.decomposition;
    auto inst = contracted_lll(dec);
    r.criterion = check_criterion(inst, Criterion{Criterion::Kind::Polynomial, cfg.lll.c});
    if (cfg.check_criterion && !r.criterion.holds)
        throw CriterionViolated("contracted instance with k=" + std::to_string(cfg.k) + ": " + r.criterion.detail);
    r.lll = lll_solve(inst, contracted_config(cfg, g.delta(), g.node_count()), seed);
    const auto & a = r.lll.assignment;

    r.labeling = HalfEdgeLabeling::for_graph(g, 2);
    auto boundary = [&](NodeId u, Port p) {
        const auto & e = g.at(*g.index_of(u), p);
        const NodeId w = g.id(e.neighbor);
        return edge_orientation(u, w, a.at(edge_var(u, p, w, e.back_port)));
    };
    for (const auto & c : dec.clusters) {
        auto view = cluster_view(g, dec, c.center);
        auto inner = orient_cluster(view, c, boundary);
        for (const auto & [u, ports] : view.adj) {
            auto v = *g.index_of(u);
            for (Port p = 1; p <= ports.size(); ++p)
                r.labeling.at(v, p) = view.member(ports[p - 1].first) ? inner.at({u, p}) : boundary(u, p);
        }
    }
    return r;
}

namespace {

class SinklessQuery;

class ClusterSource : public EventSource {
public:
    explicit ClusterSource(SinklessQuery & q) : q_(q) {}
    const Event & event(EventId e) override;
    const std::vector<EventId> & dependents(EventId e) override;
    Value domain(VarId) override { return 2; }
    std::vector<EventId> events_of(VarId x, EventId via) override;
    std::vector<EventId> neighbor_candidates(EventId e) override;
    std::vector<EventId> candidates_of(VarId x, EventId via) override;
    bool is_event(EventId e) override;

private:
    SinklessQuery & q_;
    std::unordered_map<EventId, Event> events_;
    std::unordered_map<EventId, std::vector<EventId>> deps_;
};

class SinklessQuery {
public:
    SinklessQuery(Oracle & o, const SinklessConfig & cfg, std::uint32_t delta, std::uint64_t seed) :
        view_(o), pw_(view_, cfg.k),
        col_(pw_, ColoringSchedule::make(cfg.id_palette, power_degree_bound(delta, cfg.k, o.advertised_n()))),
        mis_(pw_, [this](NodeId x) { return col_.color(x); }), src_(*this),
        engine_(src_, contracted_config(cfg, delta, o.advertised_n()),
            *contracted_config(cfg, delta, o.advertised_n()).degree_bound, o.advertised_n(), seed),
        seed_(seed)
    {
    }

    NodeId center(NodeId v)
    {
        if (auto it = centers_.find(v); it != centers_.end())
            return it->second;
        std::optional<std::pair<int, NodeId>> best;
        for (auto [x, d] : std::vector<std::pair<NodeId, int>>(pw_.ball(v)))
            if ((!best || std::pair{d, x} < *best) && mis_.in_mis(x))
                best = std::pair{d, x};
        if (!best)
            throw ContractBreach("no center within distance k");
        centers_.emplace(v, best->second);
        return best->second;
    }

    const ClusterView & view(NodeId c)
    {
        if (auto it = views_.find(c); it != views_.end())
            return it->second;
        ClusterView cv;
        cv.center = c;
        std::deque<NodeId> q{c};
        std::set<NodeId> seen{c};
        while (!q.empty()) {
            NodeId u = q.front();
            q.pop_front();
            auto & ports = cv.adj[u];
            for (Port p = 1; p <= view_.degree(u); ++p) {
                auto a = view_.edge(u, p);
                ports.emplace_back(a.node.id, a.back_port);
                if (!seen.count(a.node.id) && center(a.node.id) == c) {
                    seen.insert(a.node.id);
                    q.push_back(a.node.id);
                }
            }
        }
        return views_.emplace(c, std::move(cv)).first->second;
    }

    const Cluster & cluster(NodeId c)
    {
        if (auto it = clusters_.find(c); it != clusters_.end())
            return it->second;
        auto cl = analyze_cluster(view(c));
        return clusters_.emplace(c, std::move(cl)).first->second;
    }

    Orientation boundary(NodeId u, Port p)
    {
        auto a = view_.edge(u, p);
        const NodeId w = a.node.id;
        const VarId x = edge_var(u, p, w, a.back_port);
        const NodeId cu = center(u), cw = center(w);
        Value v;
        if (cluster(cu).has_event)
            v = engine_.value(x, cu);
        else if (cluster(cw).has_event)
            v = engine_.value(x, cw);
        else
            v = sample_value(seed_, x, 2);
        return edge_orientation(u, w, v);
    }

    Orientation answer(NodeId v, Port p)
    {
        const NodeId w = view_.edge(v, p).node.id;
        const NodeId cv = center(v);
        if (center(w) != cv)
            return boundary(v, p);
        const auto & cl = cluster(cv);
        auto inner = orient_cluster(view(cv), cl, [this](NodeId u, Port q) { return boundary(u, q); });
        return inner.at({v, p});
    }

private:
    LocalView view_;
    ProbedPower pw_;
    LazyColoring col_;
    LazyMis mis_;
    ClusterSource src_;
    LllQueryEngine engine_;
    std::uint64_t seed_;
    std::unordered_map<NodeId, NodeId> centers_;
    std::unordered_map<NodeId, ClusterView> views_;
    std::unordered_map<NodeId, Cluster> clusters_;
};

const Event & ClusterSource::event(EventId e)
{
    if (auto it = events_.find(e); it != events_.end())
        return it->second;
    const auto & c = q_.cluster(e);
    if (!c.has_event)
        throw ContractBreach("cluster " + std::to_string(e) + " carries no event");
    return events_.emplace(e, Event{c.center, c.leaving, {c.inward}}).first->second;
}

const std::vector<EventId> & ClusterSource::dependents(EventId e)
{
    if (auto it = deps_.find(e); it != deps_.end())
        return it->second;
    std::vector<EventId> out;
    for (EventId c : neighbor_candidates(e))
        if (is_event(c))
            out.push_back(c);
    return deps_.emplace(e, std::move(out)).first->second;
}

std::vector<EventId> ClusterSource::neighbor_candidates(EventId e)
{
    std::set<EventId> out;
    for (const auto & [u, ports] : q_.view(e).adj)
        for (auto [w, bp] : ports)
            if (q_.center(w) != e)
                out.insert(q_.center(w));
    return {out.begin(), out.end()};
}

std::vector<EventId> ClusterSource::candidates_of(VarId x, EventId via)
{
    for (const auto & [u, ports] : q_.view(via).adj)
        for (Port p = 1; p <= ports.size(); ++p) {
            auto [w, bp] = ports[p - 1];
            if (edge_var(u, p, w, bp) == x) {
                const EventId c = q_.center(w);
                if (c == via)
                    break;
                return c < via ? std::vector<EventId>{c, via} : std::vector<EventId>{via, c};
            }
        }
    return {via};
}

std::vector<EventId> ClusterSource::events_of(VarId x, EventId via)
{
    std::vector<EventId> out;
    for (EventId c : candidates_of(x, via))
        if (c == via || is_event(c))
            out.push_back(c);
    return out;
}

bool ClusterSource::is_event(EventId e)
{
    return q_.cluster(e).has_event;
}

} // namespace

ProbeAlgorithm sinkless_query_algorithm(const SinklessConfig & cfg, std::uint32_t delta, std::uint64_t seed)
{
    if (cfg.id_palette == 0)
        throw ContractBreach("sinkless queries need an explicit ID palette");
    return {"sinkless", 2, [=](Oracle & o) {
                if (!o.query().port)
                    throw ContractBreach("sinkless queries address a half-edge");
                SinklessQuery q(o, cfg, delta, seed);
                return std::vector<Symbol>{q.answer(o.query().node, *o.query().port)};
            }};
}

} // namespace probelab
