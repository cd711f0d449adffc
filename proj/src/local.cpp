#include <probelab/local.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

namespace probelab {

using u128 = unsigned __int128;

ProbeAlgorithm parnas_ron(const LocalAlgorithm & alg)
{
    return {alg.name, alg.alphabet, [alg](Oracle & o) {
                LocalView view(o);
                Ball b;
                b.center = o.root().id;
                b.radius = alg.radius;
                std::deque<NodeId> q{b.center};
                b.nodes[b.center] = BallNode{o.root(), 0, {}};
                while (!q.empty()) {
                    NodeId x = q.front();
                    q.pop_front();
                    auto & node = b.nodes.at(x);
                    const int dx = node.dist;
                    const auto deg = node.info.degree;
                    std::vector<ProbeAnswer> ports;
                    for (Port p = 1; p <= deg; ++p) {
                        auto a = view.edge(x, p);
                        ports.push_back(a);
                        if (dx < alg.radius && !b.nodes.count(a.node.id)) {
                            b.nodes[a.node.id] = BallNode{a.node, dx + 1, {}};
                            q.push_back(a.node.id);
                        }
                    }
                    b.nodes.at(x).ports = std::move(ports);
                }
                return alg.decide(b, o.config());
            }};
}

Ball gather_ball(const PortedGraph & g, NodeIndex v, int radius, const ModelConfig & cfg)
{
    Ball b;
    b.center = g.id(v);
    b.radius = radius;
    auto dist = bfs_distances(g, v, radius);
    for (NodeIndex x = 0; x < g.node_count(); ++x) {
        if (dist[x] < 0)
            continue;
        BallNode node{node_info(g, x, cfg), dist[x], {}};
        for (Port p = 1; p <= g.degree(x); ++p) {
            const auto & e = g.at(x, p);
            node.ports.push_back({node_info(g, e.neighbor, cfg), e.back_port, g.input_label(e.neighbor, e.back_port)});
        }
        b.nodes[g.id(x)] = std::move(node);
    }
    return b;
}

std::vector<std::vector<Symbol>> simulate_local(const LocalAlgorithm & alg, const PortedGraph & g,
    const ModelConfig & cfg)
{
    std::vector<std::vector<Symbol>> out(g.node_count());
    for (NodeIndex v = 0; v < g.node_count(); ++v)
        out[v] = alg.decide(gather_ball(g, v, alg.radius, cfg), cfg);
    return out;
}

std::uint64_t power_degree_bound(std::uint32_t delta, int k, std::uint64_t n)
{
    const std::uint64_t sat = std::uint64_t{1} << 62;
    std::uint64_t sum = 0, layer = delta;
    for (int i = 1; i <= k && layer; ++i) {
        sum = std::min(sat, sum + layer);
        layer = (delta <= 1) ? 0 : (layer > sat / (delta - 1) ? sat : layer * (delta - 1));
    }
    if (n > 0)
        sum = std::min<std::uint64_t>(sum, n - 1);
    return sum;
}

namespace {

u128 pow_sat(u128 base, unsigned e)
{
    const u128 cap = ~u128{0} >> 1;
    u128 r = 1;
    for (unsigned i = 0; i < e; ++i) {
        if (base && r > cap / base)
            return cap;
        r *= base;
    }
    return r;
}

// Smallest r with r^e >= m.
std::uint64_t ceil_root(u128 m, unsigned e)
{
    if (m <= 1)
        return static_cast<std::uint64_t>(m);
    double est = std::pow(static_cast<double>(m), 1.0 / e);
    auto r = static_cast<std::uint64_t>(std::max(1.0, est - 2.0));
    while (pow_sat(r, e) < m)
        ++r;
    while (r > 1 && pow_sat(r - 1, e) >= m)
        --r;
    return r;
}

bool is_prime(std::uint64_t x)
{
    if (x < 2)
        return false;
    for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL})
        if (x % p == 0)
            return x == p;
    for (std::uint64_t p = 11; p * p <= x; p += 2)
        if (x % p == 0)
            return false;
    return true;
}

std::uint64_t next_prime(std::uint64_t x)
{
    while (!is_prime(x))
        ++x;
    return x;
}

std::uint64_t eval_poly(std::uint64_t x, std::uint32_t d, std::uint64_t q, std::uint64_t a)
{
    // Coefficients are the base-q digits of x, highest first for Horner.
    std::vector<std::uint64_t> coef(d + 1);
    for (std::uint32_t i = 0; i <= d; ++i) {
        coef[i] = x % q;
        x /= q;
    }
    u128 acc = 0;
    for (std::uint32_t i = d + 1; i-- > 0;)
        acc = (acc * a + coef[i]) % q;
    return static_cast<std::uint64_t>(acc);
}

} // namespace

ColoringSchedule ColoringSchedule::make(u128 id_palette, std::uint64_t D)
{
    ColoringSchedule s;
    s.id_palette = id_palette;
    s.D = D;
    const u128 target = static_cast<u128>(D) * D + 1;
    s.target = target > std::numeric_limits<std::uint64_t>::max() ? std::numeric_limits<std::uint64_t>::max()
                                                                   : static_cast<std::uint64_t>(target);
    u128 m = id_palette;
    while (m > target) {
        std::uint64_t best_q = 0;
        std::uint32_t best_d = 0;
        for (std::uint32_t d = 1; d <= 64; ++d) {
            u128 lower = static_cast<u128>(D) * d + 1;
            if (best_q && lower > best_q)
                break;
            if (lower >= (u128{1} << 62))
                break;
            std::uint64_t q = next_prime(std::max<std::uint64_t>(
                {static_cast<std::uint64_t>(lower), ceil_root(m, d + 1), std::uint64_t{2}}));
            if (static_cast<u128>(q) * q < m && (!best_q || q < best_q)) {
                best_q = q;
                best_d = d;
            }
        }
        if (!best_q)
            break;
        s.steps.push_back({best_d, best_q});
        m = static_cast<u128>(best_q) * best_q;
    }
    s.poly_palette = m > std::numeric_limits<std::uint64_t>::max() ? std::numeric_limits<std::uint64_t>::max()
                                                                   : static_cast<std::uint64_t>(m);
    return s;
}

std::uint64_t reduce_color(std::uint64_t x, const std::vector<std::uint64_t> & others, std::uint32_t d, std::uint64_t q)
{
    for (std::uint64_t a = 0; a < q; ++a) {
        const auto px = eval_poly(x, d, q, a);
        bool ok = true;
        for (auto y : others)
            if (eval_poly(y, d, q, a) == px) {
                ok = false;
                break;
            }
        if (ok)
            return a * q + px;
    }
    throw ContractBreach("no separating point: duplicate colors or degree above the bound");
}

const std::vector<std::pair<NodeId, int>> & ProbedPower::ball(NodeId v)
{
    auto it = balls_.find(v);
    if (it != balls_.end())
        return it->second;
    std::vector<std::pair<NodeId, int>> out{{v, 0}};
    std::unordered_map<NodeId, int> dist{{v, 0}};
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto [x, dx] = out[i];
        if (dx >= k_)
            continue;
        for (NodeId y : view_.neighbors(x))
            if (dist.emplace(y, dx + 1).second)
                out.emplace_back(y, dx + 1);
    }
    return balls_.emplace(v, std::move(out)).first->second;
}

const std::vector<NodeId> & ProbedPower::power_neighbors(NodeId v)
{
    auto it = nbrs_.find(v);
    if (it != nbrs_.end())
        return it->second;
    std::vector<NodeId> out;
    for (auto [x, d] : ball(v))
        if (d > 0)
            out.push_back(x);
    std::sort(out.begin(), out.end());
    return nbrs_.emplace(v, std::move(out)).first->second;
}

GraphPower::GraphPower(const PortedGraph & g, int k) : gk_(power_graph(g, k)) {}

const std::vector<NodeId> & GraphPower::power_neighbors(NodeId v)
{
    auto it = nbrs_.find(v);
    if (it != nbrs_.end())
        return it->second;
    auto idx = gk_.index_of(v);
    if (!idx)
        throw ContractBreach("unknown id in power graph");
    std::vector<NodeId> out;
    for (const auto & e : gk_.ports(*idx))
        out.push_back(gk_.id(e.neighbor));
    std::sort(out.begin(), out.end());
    return nbrs_.emplace(v, std::move(out)).first->second;
}

LazyColoring::LazyColoring(PowerAccess & access, ColoringSchedule schedule) :
    access_(access), sched_(std::move(schedule)), memo_(sched_.steps.size() + 1)
{
}

std::uint64_t LazyColoring::color_at(NodeId v, std::size_t level)
{
    if (level == 0)
        return v;
    auto & memo = memo_[level];
    if (auto it = memo.find(v); it != memo.end())
        return it->second;
    const auto & step = sched_.steps[level - 1];
    std::vector<std::uint64_t> others;
    for (NodeId w : access_.power_neighbors(v))
        others.push_back(color_at(w, level - 1));
    auto c = reduce_color(color_at(v, level - 1), others, step.d, step.q);
    memo.emplace(v, c);
    return c;
}

std::uint64_t LazyColoring::color(NodeId v)
{
    if (auto it = final_.find(v); it != final_.end())
        return it->second;
    const auto L = sched_.steps.size();
    const auto c = color_at(v, L);
    std::uint64_t out = c;
    if (c >= sched_.target) {
        std::vector<std::uint64_t> used;
        for (NodeId w : access_.power_neighbors(v)) {
            auto cw = color_at(w, L);
            if (cw < sched_.target)
                used.push_back(cw);
            else if (cw < c)
                used.push_back(color(w));
        }
        std::sort(used.begin(), used.end());
        out = 0;
        for (auto u : used)
            if (u == out)
                ++out;
            else if (u > out)
                break;
    }
    final_.emplace(v, out);
    return out;
}

ColoringResult logstar_coloring(const PortedGraph & g, int k, u128 id_palette)
{
    if (!g.ids_unique())
        throw ContractBreach("logstar coloring needs unique IDs");
    const auto n = g.node_count();
    if (id_palette == 0) {
        NodeId mx = 0;
        for (auto id : g.ids())
            mx = std::max(mx, id);
        id_palette = static_cast<u128>(mx) + 1;
    }
    ColoringResult r;
    r.D = power_degree_bound(g.delta(), k, n);
    auto sched = ColoringSchedule::make(id_palette, r.D);
    auto gk = power_graph(g, k);

    std::vector<std::uint64_t> cur(g.ids().begin(), g.ids().end());
    for (const auto & step : sched.steps) {
        std::vector<std::uint64_t> next(n);
        for (NodeIndex v = 0; v < n; ++v) {
            std::vector<std::uint64_t> others;
            for (const auto & e : gk.ports(v))
                others.push_back(cur[e.neighbor]);
            next[v] = reduce_color(cur[v], others, step.d, step.q);
        }
        cur = std::move(next);
    }
    std::vector<NodeIndex> order;
    for (NodeIndex v = 0; v < n; ++v)
        if (cur[v] >= sched.target)
            order.push_back(v);
    std::sort(order.begin(), order.end(), [&](NodeIndex a, NodeIndex b) { return cur[a] < cur[b]; });
    for (NodeIndex v : order) {
        std::set<std::uint64_t> used;
        for (const auto & e : gk.ports(v))
            used.insert(cur[e.neighbor]);
        std::uint64_t c = 0;
        while (used.count(c))
            ++c;
        cur[v] = c;
    }
    r.colors = std::move(cur);
    r.palette = sched.palette();
    r.iterations = sched.iterations();
    r.rounds = sched.rounds();
    return r;
}

namespace {

std::uint32_t alphabet_of(std::uint64_t palette)
{
    return static_cast<std::uint32_t>(std::min<std::uint64_t>(palette, std::numeric_limits<std::uint32_t>::max()));
}

} // namespace

namespace {

// 0 stands for IDs in [1, n] with n the advertised node count.
u128 query_palette(u128 id_palette, const Oracle & o)
{
    return id_palette ? id_palette : static_cast<u128>(o.advertised_n()) + 1;
}

} // namespace

ProbeAlgorithm logstar_coloring_algorithm(int k, std::uint32_t delta, u128 id_palette)
{
    const auto sched = ColoringSchedule::make(id_palette, power_degree_bound(delta, k, 0));
    return {"logstar-coloring", alphabet_of(id_palette ? sched.palette() : sched.target), [=](Oracle & o) {
                LocalView view(o);
                ProbedPower pw(view, k);
                LazyColoring col(pw, ColoringSchedule::make(query_palette(id_palette, o), power_degree_bound(delta, k, o.advertised_n())));
                return std::vector<Symbol>{static_cast<Symbol>(col.color(o.root().id))};
            }};
}

std::vector<char> mis_from_coloring(const PortedGraph & g, const std::vector<std::uint64_t> & colors, int k)
{
    if (colors.size() != g.node_count())
        throw ContractBreach("coloring size mismatch");
    auto gk = k == 1 ? g : power_graph(g, k);
    for (NodeIndex v = 0; v < gk.node_count(); ++v)
        for (const auto & e : gk.ports(v))
            if (colors[e.neighbor] == colors[v])
                throw ContractBreach("improper coloring");
    std::vector<NodeIndex> order(g.node_count());
    for (NodeIndex v = 0; v < order.size(); ++v)
        order[v] = v;
    std::stable_sort(order.begin(), order.end(), [&](NodeIndex a, NodeIndex b) { return colors[a] < colors[b]; });
    std::vector<char> in(g.node_count(), 0), blocked(g.node_count(), 0);
    for (NodeIndex v : order) {
        if (blocked[v])
            continue;
        in[v] = 1;
        for (const auto & e : gk.ports(v))
            blocked[e.neighbor] = 1;
    }
    return in;
}

bool LazyMis::in_mis(NodeId v)
{
    if (auto it = memo_.find(v); it != memo_.end())
        return it->second;
    const auto cv = color_(v);
    bool in = true;
    // Copy: the recursion may grow the neighborhood cache.
    auto nbrs = access_.power_neighbors(v);
    std::sort(nbrs.begin(), nbrs.end(), [&](NodeId a, NodeId b) { return color_(a) < color_(b); });
    for (NodeId w : nbrs) {
        auto cw = color_(w);
        if (cw == cv)
            throw ContractBreach("improper coloring");
        if (cw < cv && in_mis(w)) {
            in = false;
            break;
        }
    }
    memo_.emplace(v, in);
    return in;
}

ProbeAlgorithm mis_algorithm(int k, std::uint32_t delta, u128 id_palette)
{
    return {"mis", 2, [=](Oracle & o) {
                LocalView view(o);
                ProbedPower pw(view, k);
                LazyColoring col(pw, ColoringSchedule::make(query_palette(id_palette, o), power_degree_bound(delta, k, o.advertised_n())));
                LazyMis mis(pw, [&](NodeId x) { return col.color(x); });
                return std::vector<Symbol>{mis.in_mis(o.root().id) ? 1 : 0};
            }};
}

namespace {

class LiftedOracle : public Oracle {
public:
    LiftedOracle(const ModelConfig & cfg, Query q, NodeInfo root, std::uint64_t n0, NodeId real_root, LocalView & view,
        LazyColoring & col) :
        Oracle(cfg, q, root, n0), view_(view), col_(col)
    {
        real_.emplace(root.id, real_root);
    }

protected:
    ProbeAnswer resolve(NodeId sid, Port port) override
    {
        auto it = real_.find(sid);
        if (it == real_.end())
            throw ProbeError(ProbeError::Kind::UnknownId, "no node with synthetic id " + std::to_string(sid));
        ProbeAnswer a = view_.edge(it->second, port);
        NodeId s = col_.color(a.node.id) + 1;
        auto [pos, fresh] = real_.emplace(s, a.node.id);
        if (!fresh && pos->second != a.node.id)
            throw QueryFailure("synthetic id " + std::to_string(s) + " shared by two seen nodes");
        a.node.id = s;
        return a;
    }

private:
    LocalView & view_;
    LazyColoring & col_;
    std::unordered_map<NodeId, NodeId> real_;
};

} // namespace

ProbeAlgorithm lift_via_coloring(const ProbeAlgorithm & base, std::uint64_t n0, int r, std::uint32_t delta,
    u128 id_palette)
{
    const int K = static_cast<int>(n0) + r;
    return {"lift(" + base.name + ")", base.alphabet, [=](Oracle & o) {
                LocalView view(o);
                ProbedPower pw(view, K);
                LazyColoring col(pw, ColoringSchedule::make(query_palette(id_palette, o), power_degree_bound(delta, K, o.advertised_n())));
                ModelConfig inner_cfg = o.config();
                inner_cfg.advertised_n = n0;
                inner_cfg.far_probes = false;
                inner_cfg.model = o.config().model == Model::Lca ? Model::Volume : o.config().model;
                inner_cfg.probe_budget.reset();
                NodeInfo root = o.root();
                root.id = col.color(o.root().id) + 1;
                LiftedOracle inner(inner_cfg, Query{root.id, o.query().port}, root, n0, o.root().id, view, col);
                auto t = run_on_oracle(base, inner);
                if (t.failure)
                    throw QueryFailure("lifted algorithm failed: " + *t.failure);
                return t.output;
            }};
}

} // namespace probelab
