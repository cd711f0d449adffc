#include <probelab/lll.hpp>

#include <algorithm>
#include <deque>
#include <set>

namespace probelab {

LllQueryEngine::LllQueryEngine(EventSource & src, const ShatterConfig & cfg, std::uint64_t D, std::uint64_t n,
    std::uint64_t seed) :
    src_(src), cfg_(cfg), D_(D), n_(n), seed_(seed), colors_(cfg.color_count(D)), tau_(cfg.tau(D))
{
}

bool LllQueryEngine::failed(EventId e)
{
    if (auto it = failed_.find(e); it != failed_.end())
        return it->second;
    const auto c = event_color(seed_, e, colors_);
    bool bad = false;
    // Colors first: event status is only needed on a collision.
    for (EventId f : src_.neighbor_candidates(e)) {
        if (!src_.is_event(f))
            continue;
        if (event_color(seed_, f, colors_) == c) {
            bad = true;
            break;
        }
        for (EventId g : src_.neighbor_candidates(f))
            if (g != e && event_color(seed_, g, colors_) == c && src_.is_event(g)) {
                bad = true;
                break;
            }
        if (bad)
            break;
    }
    failed_.emplace(e, bad);
    return bad;
}

const std::vector<EventId> & LllQueryEngine::events_with(VarId x, EventId via)
{
    if (auto it = var_events_.find(x); it != var_events_.end())
        return it->second;
    return var_events_.emplace(x, src_.events_of(x, via)).first->second;
}

LllQueryEngine::Key LllQueryEngine::key(VarId x, EventId via)
{
    if (auto it = keys_.find(x); it != keys_.end())
        return it->second;
    EventId owner = via;
    if (auto it = var_events_.find(x); it != var_events_.end()) {
        owner = it->second.front();
    }
    else {
        for (EventId f : src_.candidates_of(x, via))
            if (f == via || src_.is_event(f)) {
                owner = f;
                break;
            }
    }
    Key k{event_color(seed_, owner, colors_), x};
    keys_.emplace(x, k);
    return k;
}

Probability LllQueryEngine::prob_before(const Event & e, const Key & before,
    std::optional<std::pair<VarId, Value>> extra)
{
    std::vector<std::optional<Value>> vals;
    std::vector<Value> doms;
    for (VarId z : e.vbl) {
        doms.push_back(src_.domain(z));
        if (extra && extra->first == z) {
            vals.emplace_back(extra->second);
            continue;
        }
        if (key(z, e.id) < before) {
            const auto & st = state(z, e.id);
            vals.push_back(st.set ? std::optional<Value>(st.value) : std::nullopt);
        }
        else {
            vals.emplace_back(std::nullopt);
        }
    }
    return conditional_probability(e, vals, doms);
}

bool LllQueryEngine::may_exceed(const Event & e, const Key & before, VarId y, Value vy)
{
    const auto n = e.vbl.size();
    std::vector<Value> sample(n), dom(n);
    std::vector<char> earlier(n, 0);
    long double total = 1;
    std::size_t yi = n;
    for (std::size_t i = 0; i < n; ++i) {
        const VarId z = e.vbl[i];
        dom[i] = src_.domain(z);
        total *= dom[i];
        if (z == y) {
            yi = i;
            continue;
        }
        sample[i] = sample_value(seed_, z, dom[i]);
        earlier[i] = key(z, e.id) < before;
    }
    long double bound = 0;
    for (const auto & t : e.bad) {
        if (yi < n && t[yi] != vy)
            continue;
        long double w = yi < n ? dom[yi] : 1;
        for (std::size_t i = 0; i < n; ++i)
            if (earlier[i] && t[i] == sample[i])
                w *= dom[i];
        bound += w;
    }
    return bound / total > static_cast<long double>(tau_) * (1 - 1e-12L);
}

const LllQueryEngine::VarState & LllQueryEngine::state(VarId x, EventId via)
{
    if (auto it = state_.find(x); it != state_.end())
        return it->second;
    const auto evs = events_with(x, via);
    const Key kx = key(x, via);

    // Attempted iff no containing event failed and none was marked before x's turn.
    bool frozen = false;
    for (EventId e : evs)
        if (failed(e)) {
            frozen = true;
            break;
        }
    for (std::size_t i = 0; i < evs.size() && !frozen; ++i) {
        const Event ev = src_.event(evs[i]);
        for (VarId y : ev.vbl) {
            if (y == x)
                continue;
            const Key ky = key(y, ev.id);
            if (!(ky < kx))
                continue;
            const Value vy = sample_value(seed_, y, src_.domain(y));
            if (!may_exceed(ev, ky, y, vy) || !state(y, ev.id).attempted)
                continue;
            if (prob_before(ev, ky, std::pair{y, vy}).to_double() > tau_) {
                frozen = true;
                break;
            }
        }
    }

    VarState st;
    if (!frozen) {
        st.attempted = true;
        const Value v = sample_value(seed_, x, src_.domain(x));
        bool over = false;
        for (EventId e : evs) {
            const Event & ev = src_.event(e);
            if (may_exceed(ev, kx, x, v) && prob_before(ev, kx, std::pair{x, v}).to_double() > tau_) {
                over = true;
                break;
            }
        }
        if (!over) {
            st.set = true;
            st.value = v;
        }
    }
    return state_.emplace(x, st).first->second;
}

bool LllQueryEngine::dangerous(EventId e)
{
    if (auto it = dangerous_.find(e); it != dangerous_.end())
        return it->second;
    // Some bad tuple survives iff every variable whose sample disagrees with it stayed unset.
    const Event ev = src_.event(e);
    bool d = false;
    for (const auto & t : ev.bad) {
        bool alive = true;
        for (std::size_t i = 0; i < ev.vbl.size() && alive; ++i) {
            const VarId z = ev.vbl[i];
            if (sample_value(seed_, z, src_.domain(z)) != t[i])
                alive = !state(z, e).set;
        }
        if (alive) {
            d = true;
            break;
        }
    }
    dangerous_.emplace(e, d);
    return d;
}

Value LllQueryEngine::value(VarId x, EventId via)
{
    const auto & st = state(x, via);
    if (st.set)
        return st.value;
    if (auto it = solved_.find(x); it != solved_.end())
        return it->second;
    const auto evs = events_with(x, via);
    std::optional<EventId> start;
    for (EventId e : evs)
        if (dangerous(e)) {
            start = e;
            break;
        }
    if (!start)
        return sample_value(seed_, x, src_.domain(x));

    const std::size_t cap = cfg_.component_cap(n_);
    std::set<EventId> comp{*start};
    std::deque<EventId> q{*start};
    while (!q.empty()) {
        EventId e = q.front();
        q.pop_front();
        for (EventId f : std::vector<EventId>(src_.dependents(e)))
            if (!comp.count(f) && dangerous(f)) {
                comp.insert(f);
                if (comp.size() > cap)
                    throw ComponentTooLarge("dangerous component exceeds " + std::to_string(cap) + " events");
                q.push_back(f);
            }
    }
    last_component_ = comp.size();

    ComponentProblem prob;
    for (EventId e : comp) {
        const Event ev = src_.event(e);
        for (VarId z : ev.vbl) {
            prob.domains.emplace(z, src_.domain(z));
            const auto & zs = state(z, e);
            if (zs.set)
                prob.fixed.emplace(z, zs.value);
        }
        prob.events.push_back(ev);
    }
    for (auto [z, v] : solve_component(prob, seed_))
        solved_.emplace(z, v);
    return solved_.at(x);
}

std::vector<std::pair<VarId, Value>> LllQueryEngine::query(EventId e)
{
    const Event ev = src_.event(e);
    std::vector<std::pair<VarId, Value>> out;
    for (VarId x : ev.vbl)
        out.emplace_back(x, value(x, e));
    return out;
}

} // namespace probelab
