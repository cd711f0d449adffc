#include <probelab/lll.hpp>

#include <probelab/rng.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace probelab {

using nlohmann::json;
using u128 = unsigned __int128;

LllInstance::LllInstance(std::vector<Variable> vars, std::vector<Event> events, std::uint32_t scope_bits) :
    vars_(std::move(vars)), events_(std::move(events)), scope_bits_(std::min(scope_bits, kMaxScopeBits))
{
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (vars_[i].domain == 0)
            throw ContractBreach("variable " + std::to_string(vars_[i].id) + " has an empty domain");
        if (!var_lookup_.emplace(vars_[i].id, i).second)
            throw ContractBreach("duplicate variable id " + std::to_string(vars_[i].id));
    }
    var_events_.resize(vars_.size());
    const u128 scope_cap = u128{1} << scope_bits_;
    for (std::size_t ei = 0; ei < events_.size(); ++ei) {
        auto & e = events_[ei];
        if (!event_lookup_.emplace(e.id, ei).second)
            throw ContractBreach("duplicate event id " + std::to_string(e.id));
        std::vector<std::size_t> perm(e.vbl.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return e.vbl[a] < e.vbl[b]; });
        std::vector<VarId> vbl;
        for (auto i : perm)
            vbl.push_back(e.vbl[i]);
        if (std::adjacent_find(vbl.begin(), vbl.end()) != vbl.end())
            throw ContractBreach("event " + std::to_string(e.id) + " lists a variable twice");
        u128 space = 1;
        for (VarId x : vbl) {
            auto vi = var_index(x);
            if (!vi)
                throw ContractBreach("event " + std::to_string(e.id) + " uses unknown variable " + std::to_string(x));
            space *= vars_[*vi].domain;
            if (space > scope_cap)
                throw ScopeTooLarge("event " + std::to_string(e.id) + " spans more than 2^"
                    + std::to_string(scope_bits_) + " assignments (" + std::to_string(vbl.size()) + " variables)");
            var_events_[*vi].push_back(ei);
        }
        std::vector<std::vector<Value>> bad;
        for (const auto & t : e.bad) {
            if (t.size() != vbl.size())
                throw ContractBreach("bad tuple of event " + std::to_string(e.id) + " has the wrong length");
            std::vector<Value> s;
            for (auto i : perm) {
                if (t[i] >= domain(e.vbl[i]))
                    throw ContractBreach("bad tuple of event " + std::to_string(e.id) + " leaves the domain");
                s.push_back(t[i]);
            }
            bad.push_back(std::move(s));
        }
        std::sort(bad.begin(), bad.end());
        bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
        e.vbl = std::move(vbl);
        e.bad = std::move(bad);
    }
    deps_.resize(events_.size());
    for (const auto & evs : var_events_)
        for (auto a : evs)
            for (auto b : evs)
                if (a != b)
                    deps_[a].push_back(b);
    for (auto & d : deps_) {
        std::sort(d.begin(), d.end());
        d.erase(std::unique(d.begin(), d.end()), d.end());
    }
}

std::optional<std::size_t> LllInstance::var_index(VarId id) const
{
    auto it = var_lookup_.find(id);
    return it == var_lookup_.end() ? std::nullopt : std::optional<std::size_t>(it->second);
}

std::optional<std::size_t> LllInstance::event_index(EventId id) const
{
    auto it = event_lookup_.find(id);
    return it == event_lookup_.end() ? std::nullopt : std::optional<std::size_t>(it->second);
}

std::size_t LllInstance::max_degree() const
{
    std::size_t d = 0;
    for (const auto & x : deps_)
        d = std::max(d, x.size());
    return d;
}

Probability LllInstance::max_probability() const
{
    Probability best{0, 1};
    PartialAssignment empty;
    for (const auto & e : events_)
        best = std::max(best, event_probability(*this, e.id, empty));
    return best;
}

Probability conditional_probability(const Event & e, std::span<const std::optional<Value>> values,
    std::span<const Value> domains)
{
    Probability p{0, 1};
    for (std::size_t i = 0; i < e.vbl.size(); ++i)
        if (!values[i])
            p.den *= domains[i];
    for (const auto & t : e.bad) {
        bool ok = true;
        for (std::size_t i = 0; i < t.size() && ok; ++i)
            ok = !values[i] || *values[i] == t[i];
        if (ok)
            ++p.num;
    }
    return p;
}

Probability event_probability(const LllInstance & inst, EventId event, const PartialAssignment & partial)
{
    auto ei = inst.event_index(event);
    if (!ei)
        throw ContractBreach("unknown event " + std::to_string(event));
    const auto & e = inst.events()[*ei];
    std::vector<std::optional<Value>> vals;
    std::vector<Value> doms;
    for (VarId x : e.vbl) {
        vals.push_back(partial.value(x));
        doms.push_back(inst.domain(x));
    }
    return conditional_probability(e, vals, doms);
}

Criterion Criterion::parse(const std::string & text)
{
    Criterion c;
    if (text == "4pd") {
        c.kind = Kind::FourPD;
    }
    else if (text == "exp") {
        c.kind = Kind::Exponential;
    }
    else if (text.rfind("poly", 0) == 0) {
        c.kind = Kind::Polynomial;
        if (text.size() > 4) {
            if (text[4] != ':')
                throw ContractBreach("criterion must be 4pd, exp or poly:<c>");
            try {
                c.c = std::stod(text.substr(5));
            }
            catch (const std::exception &) {
                throw ContractBreach("bad polynomial exponent in '" + text + "'");
            }
        }
    }
    else {
        throw ContractBreach("criterion must be 4pd, exp or poly:<c>");
    }
    return c;
}

std::string Criterion::str() const
{
    switch (kind) {
    case Kind::FourPD:
        return "4pd";
    case Kind::Exponential:
        return "exp";
    case Kind::Polynomial: {
        std::ostringstream s;
        s << "poly:" << c;
        return s.str();
    }
    }
    return "?";
}

CriterionVerdict check_criterion(const Probability & p, std::size_t d, const Criterion & crit)
{
    CriterionVerdict v;
    v.p = p;
    v.d = d;
    std::ostringstream s;
    s << "p=" << p.str() << " d=" << d << ' ';
    if (p.num >= p.den) {
        v.holds = false;
        s << crit.str() << ": p is not below 1";
        v.detail = s.str();
        return v;
    }
    switch (crit.kind) {
    case Criterion::Kind::FourPD:
        v.holds = u128{4} * p.num * d <= p.den;
        s << "4pd=" << 4.0 * p.to_double() * static_cast<double>(d);
        break;
    case Criterion::Kind::Exponential:
        v.holds = p.num == 0 || (d < 64 && (static_cast<u128>(p.num) << d) <= p.den);
        s << "p*2^d=" << p.to_double() * std::pow(2.0, static_cast<double>(d));
        break;
    case Criterion::Kind::Polynomial: {
        long double val = d == 0 ? 0.0L
                                 : static_cast<long double>(p.num) / static_cast<long double>(p.den)
                * std::pow(std::exp(1.0L) * static_cast<long double>(d), static_cast<long double>(crit.c));
        v.holds = val <= 1.0L;
        s << "p(ed)^c=" << static_cast<double>(val) << " (c=" << crit.c << ")";
        break;
    }
    }
    s << (v.holds ? " holds" : " fails");
    v.detail = s.str();
    return v;
}

CriterionVerdict check_criterion(const LllInstance & inst, const Criterion & crit)
{
    Probability p{0, 1};
    std::optional<EventId> binding;
    PartialAssignment empty;
    for (const auto & e : inst.events()) {
        auto q = event_probability(inst, e.id, empty);
        if (!binding || q > p) {
            p = q;
            binding = e.id;
        }
    }
    auto v = check_criterion(p, inst.max_degree(), crit);
    v.binding = binding;
    return v;
}

double ShatterConfig::tau(std::uint64_t D) const
{
    const double l = lambda < 0 ? c / 2.0 : lambda;
    return std::pow(static_cast<double>(std::max<std::uint64_t>(D, 1)), -l);
}

std::uint64_t ShatterConfig::color_count(std::uint64_t D) const
{
    const double v = std::ceil(std::pow(static_cast<double>(std::max<std::uint64_t>(D, 2)), c_prime));
    return v >= 0x1p62 ? (std::uint64_t{1} << 62) : std::max<std::uint64_t>(2, static_cast<std::uint64_t>(v));
}

std::size_t ShatterConfig::component_cap(std::uint64_t n) const
{
    const double v = std::floor(beta * std::log2(static_cast<double>(std::max<std::uint64_t>(n, 2))));
    return std::max<std::size_t>(1, static_cast<std::size_t>(v));
}

Value sample_value(std::uint64_t seed, VarId x, Value domain)
{
    return static_cast<Value>(RandomTape(hash_words(seed, {0x73616d706c65ULL, x})).uniform(0, domain));
}

std::uint64_t event_color(std::uint64_t seed, EventId e, std::uint64_t colors)
{
    return RandomTape(hash_words(seed, {0x636f6c6f72ULL, e})).uniform(0, colors);
}

ShatterResult pre_shatter(const LllInstance & inst, const ShatterConfig & cfg, std::uint64_t seed)
{
    ShatterResult r;
    r.D = cfg.degree_bound ? *cfg.degree_bound : inst.max_degree();
    if (cfg.check_criterion) {
        auto v = check_criterion(inst.max_probability(), r.D, Criterion{Criterion::Kind::Polynomial, cfg.c});
        if (!v.holds)
            throw CriterionViolated("polynomial criterion violated: " + v.detail);
    }
    r.tau = cfg.tau(r.D);
    const auto colors = cfg.color_count(r.D);
    const auto & evs = inst.events();
    const auto m = evs.size();
    std::vector<std::uint64_t> color(m);
    for (std::size_t i = 0; i < m; ++i)
        color[i] = event_color(seed, evs[i].id, colors);

    auto & partial = r.partial;
    for (std::size_t i = 0; i < m; ++i) {
        bool failed = false;
        for (auto f : inst.dependents(i)) {
            failed = failed || color[f] == color[i];
            for (auto g : inst.dependents(f))
                failed = failed || (g != i && color[g] == color[i]);
            if (failed)
                break;
        }
        if (failed) {
            r.failed.push_back(evs[i].id);
            for (VarId x : evs[i].vbl)
                partial.frozen.insert(x);
        }
    }

    struct Item {
        std::uint64_t color;
        VarId var;
        std::size_t idx;
    };
    std::vector<Item> order;
    for (std::size_t vi = 0; vi < inst.vars().size(); ++vi) {
        const auto & in = inst.events_of(vi);
        if (in.empty())
            continue;
        std::size_t owner = in.front();
        for (auto e : in)
            if (evs[e].id < evs[owner].id)
                owner = e;
        order.push_back({color[owner], inst.vars()[vi].id, vi});
    }
    std::sort(order.begin(), order.end(),
        [](const Item & a, const Item & b) { return std::tie(a.color, a.var) < std::tie(b.color, b.var); });

    std::vector<char> marked(m, 0);
    auto prob = [&](std::size_t e, std::optional<std::pair<VarId, Value>> extra) {
        std::vector<std::optional<Value>> vals;
        std::vector<Value> doms;
        for (VarId z : evs[e].vbl) {
            vals.push_back(extra && extra->first == z ? std::optional<Value>(extra->second) : partial.value(z));
            doms.push_back(inst.domain(z));
        }
        return conditional_probability(evs[e], vals, doms);
    };
    for (const auto & it : order) {
        const VarId x = it.var;
        if (partial.frozen.count(x) || partial.set.count(x))
            continue;
        const Value v = sample_value(seed, x, inst.vars()[it.idx].domain);
        std::vector<std::size_t> over;
        for (auto e : inst.events_of(it.idx))
            if (prob(e, std::pair{x, v}).to_double() > r.tau)
                over.push_back(e);
        if (over.empty()) {
            partial.set.emplace(x, v);
            continue;
        }
        partial.frozen.insert(x);
        for (auto e : over) {
            if (!marked[e]) {
                marked[e] = 1;
                r.marked.push_back(evs[e].id);
            }
            for (VarId y : evs[e].vbl)
                if (!partial.set.count(y))
                    partial.frozen.insert(y);
        }
    }

    r.tau_bound = Probability{0, 1};
    for (std::size_t e = 0; e < m; ++e) {
        auto p = prob(e, std::nullopt);
        r.tau_bound = std::max(r.tau_bound, p);
        if (!p.zero())
            r.dangerous.push_back(evs[e].id);
    }
    if (r.tau_bound.to_double() > r.tau)
        throw ContractBreach("pre-shattering left an event above tau");
    std::sort(r.failed.begin(), r.failed.end());
    std::sort(r.marked.begin(), r.marked.end());
    std::sort(r.dangerous.begin(), r.dangerous.end());
    return r;
}

std::vector<std::vector<EventId>> dangerous_components(const LllInstance & inst, const std::vector<EventId> & events)
{
    std::vector<char> in(inst.events().size(), 0), seen(inst.events().size(), 0);
    std::vector<std::size_t> idx;
    for (auto id : events) {
        auto i = inst.event_index(id);
        if (!i)
            throw ContractBreach("unknown event " + std::to_string(id));
        in[*i] = 1;
        idx.push_back(*i);
    }
    std::vector<std::vector<EventId>> out;
    for (auto s : idx) {
        if (seen[s])
            continue;
        std::vector<EventId> comp;
        std::deque<std::size_t> q{s};
        seen[s] = 1;
        while (!q.empty()) {
            auto e = q.front();
            q.pop_front();
            comp.push_back(inst.events()[e].id);
            for (auto f : inst.dependents(e))
                if (in[f] && !seen[f]) {
                    seen[f] = 1;
                    q.push_back(f);
                }
        }
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

struct ComponentSearch {
    const ComponentProblem & prob;
    std::vector<VarId> vars;                       // unfixed, ascending
    std::unordered_map<VarId, std::size_t> pos;    // var -> index in vars
    std::vector<std::vector<std::size_t>> touch;   // var index -> events
    std::vector<std::optional<Value>> cur;

    explicit ComponentSearch(const ComponentProblem & p) : prob(p)
    {
        for (const auto & [x, d] : prob.domains)
            if (!prob.fixed.count(x)) {
                pos.emplace(x, vars.size());
                vars.push_back(x);
            }
        touch.resize(vars.size());
        for (std::size_t e = 0; e < prob.events.size(); ++e)
            for (VarId x : prob.events[e].vbl)
                if (auto it = pos.find(x); it != pos.end())
                    touch[it->second].push_back(e);
        cur.assign(vars.size(), std::nullopt);
    }

    std::optional<Value> value(VarId x) const
    {
        if (auto f = prob.fixed.find(x); f != prob.fixed.end())
            return f->second;
        return cur[pos.at(x)];
    }

    Probability prob_of(std::size_t e) const
    {
        const auto & ev = prob.events[e];
        std::vector<std::optional<Value>> vals;
        std::vector<Value> doms;
        for (VarId x : ev.vbl) {
            vals.push_back(value(x));
            doms.push_back(prob.domains.at(x));
        }
        return conditional_probability(ev, vals, doms);
    }

    bool all_clear() const
    {
        for (std::size_t e = 0; e < prob.events.size(); ++e)
            if (!prob_of(e).zero())
                return false;
        return true;
    }

    // Depth-first over vars in order; gives up after `cap` assignments (0: never).
    bool backtrack(std::uint64_t seed, std::uint64_t cap, std::uint64_t & steps)
    {
        std::vector<std::vector<Value>> orders(vars.size());
        for (std::size_t i = 0; i < vars.size(); ++i) {
            auto & o = orders[i];
            o.resize(prob.domains.at(vars[i]));
            std::iota(o.begin(), o.end(), 0);
            RandomTape t(hash_words(seed, {0x6f72646572ULL, vars[i]}));
            for (std::size_t k = o.size(); k > 1; --k)
                std::swap(o[k - 1], o[t.uniform(k, k)]);
        }
        std::fill(cur.begin(), cur.end(), std::nullopt);
        std::vector<std::size_t> next(vars.size(), 0);
        std::size_t i = 0;
        for (std::size_t e = 0; e < prob.events.size(); ++e)
            if (prob_of(e).one())
                return false;
        while (true) {
            if (i == vars.size())
                return all_clear();
            if (next[i] == orders[i].size()) {
                cur[i].reset();
                next[i] = 0;
                if (i == 0)
                    return false;
                --i;
                continue;
            }
            if (cap && ++steps > cap)
                return false;
            cur[i] = orders[i][next[i]++];
            bool ok = true;
            for (auto e : touch[i])
                if (prob_of(e).one()) {
                    ok = false;
                    break;
                }
            if (ok)
                ++i;
        }
    }

    bool resample(std::uint64_t seed, std::uint64_t cap)
    {
        std::vector<std::uint64_t> draws(vars.size(), 0);
        for (std::size_t i = 0; i < vars.size(); ++i)
            cur[i] = static_cast<Value>(
                RandomTape(hash_words(seed, {0x6d74ULL, vars[i]})).uniform(0, prob.domains.at(vars[i])));
        for (std::uint64_t it = 0; it < cap; ++it) {
            std::optional<std::size_t> bad;
            for (std::size_t e = 0; e < prob.events.size() && !bad; ++e)
                if (!prob_of(e).zero())
                    bad = e;
            if (!bad)
                return true;
            bool moved = false;
            for (VarId x : prob.events[*bad].vbl)
                if (auto p = pos.find(x); p != pos.end()) {
                    auto i = p->second;
                    cur[i] = static_cast<Value>(RandomTape(hash_words(seed, {0x6d74ULL, vars[i]}))
                                                    .uniform(++draws[i], prob.domains.at(vars[i])));
                    moved = true;
                }
            if (!moved)
                return false;
        }
        return false;
    }

    std::map<VarId, Value> result() const
    {
        std::map<VarId, Value> out;
        for (std::size_t i = 0; i < vars.size(); ++i)
            out.emplace(vars[i], *cur[i]);
        return out;
    }
};

} // namespace

std::map<VarId, Value> solve_component(const ComponentProblem & prob, std::uint64_t seed, ComponentSolveStats * stats)
{
    ComponentSearch s(prob);
    std::uint64_t steps = 0;
    ComponentSolveStats local;
    auto & st = stats ? *stats : local;
    bool ok = s.backtrack(seed, 200'000, steps);
    st.backtrack_steps = steps;
    if (!ok) {
        st.used_resampling = true;
        ok = s.resample(seed, 100'000);
    }
    if (!ok) {
        st.used_widened = true;
        ok = s.backtrack(seed, 0, steps);
        st.backtrack_steps = steps;
    }
    if (!ok)
        throw ContractBreach("component has no avoiding assignment; the criterion must have been violated");
    return s.result();
}

ComponentProblem component_problem(const LllInstance & inst, const PartialAssignment & partial,
    const std::vector<EventId> & component)
{
    ComponentProblem p;
    auto ids = component;
    std::sort(ids.begin(), ids.end());
    for (auto id : ids) {
        const auto & e = inst.event(id);
        p.events.push_back(e);
        for (VarId x : e.vbl) {
            p.domains.emplace(x, inst.domain(x));
            if (auto v = partial.value(x))
                p.fixed.emplace(x, *v);
        }
    }
    return p;
}

std::map<VarId, Value> solve_component(const LllInstance & inst, const PartialAssignment & partial,
    const std::vector<EventId> & component, std::uint64_t seed)
{
    return solve_component(component_problem(inst, partial, component), seed);
}

namespace {

bool is_bad(const Event & e, const std::vector<Value> & tuple)
{
    return std::binary_search(e.bad.begin(), e.bad.end(), tuple);
}

} // namespace

std::map<VarId, Value> moser_tardos(const LllInstance & inst, std::uint64_t seed, std::uint64_t max_resamples,
    std::uint64_t * resamples)
{
    const auto & vars = inst.vars();
    std::vector<Value> val(vars.size());
    std::vector<std::uint64_t> draws(vars.size(), 0);
    auto tape = [&](std::size_t i) { return RandomTape(hash_words(seed, {0x6d6f736572ULL, vars[i].id})); };
    for (std::size_t i = 0; i < vars.size(); ++i)
        val[i] = static_cast<Value>(tape(i).uniform(0, vars[i].domain));

    const auto & evs = inst.events();
    auto bad = [&](std::size_t e) {
        std::vector<Value> t;
        for (VarId x : evs[e].vbl)
            t.push_back(val[*inst.var_index(x)]);
        return is_bad(evs[e], t);
    };
    std::set<std::pair<EventId, std::size_t>> violated;
    for (std::size_t e = 0; e < evs.size(); ++e)
        if (bad(e))
            violated.emplace(evs[e].id, e);
    std::uint64_t count = 0;
    while (!violated.empty()) {
        if (count >= max_resamples) {
            if (resamples)
                *resamples = count;
            throw ResampleCapExceeded("Moser-Tardos exceeded " + std::to_string(max_resamples) + " resamples");
        }
        ++count;
        auto e = violated.begin()->second;
        for (VarId x : evs[e].vbl) {
            auto i = *inst.var_index(x);
            val[i] = static_cast<Value>(tape(i).uniform(++draws[i], vars[i].domain));
        }
        auto recheck = [&](std::size_t f) {
            if (bad(f))
                violated.emplace(evs[f].id, f);
            else
                violated.erase({evs[f].id, f});
        };
        recheck(e);
        for (auto f : inst.dependents(e))
            recheck(f);
    }
    if (resamples)
        *resamples = count;
    std::map<VarId, Value> out;
    for (std::size_t i = 0; i < vars.size(); ++i)
        out.emplace(vars[i].id, val[i]);
    return out;
}

LllSolution lll_solve(const LllInstance & inst, const ShatterConfig & cfg, std::uint64_t seed)
{
    LllSolution s;
    s.shatter = pre_shatter(inst, cfg, seed);
    const auto & partial = s.shatter.partial;
    s.components = dangerous_components(inst, s.shatter.dangerous);
    const auto cap = cfg.component_cap(cfg.size_hint ? *cfg.size_hint : inst.events().size());
    std::unordered_map<VarId, Value> solved;
    for (const auto & comp : s.components) {
        s.max_component = std::max(s.max_component, comp.size());
        if (comp.size() > cap)
            s.oversized.insert(s.oversized.end(), comp.begin(), comp.end());
        for (auto [x, v] : solve_component(inst, partial, comp, seed))
            solved.emplace(x, v);
    }
    std::sort(s.oversized.begin(), s.oversized.end());
    for (const auto & var : inst.vars()) {
        Value v;
        if (auto p = partial.value(var.id))
            v = *p;
        else if (auto it = solved.find(var.id); it != solved.end())
            v = it->second;
        else
            v = sample_value(seed, var.id, var.domain);
        s.assignment.emplace(var.id, v);
    }
    return s;
}

std::vector<EventId> violated_events(const LllInstance & inst, const std::map<VarId, Value> & assignment)
{
    std::vector<EventId> out;
    for (const auto & e : inst.events()) {
        std::vector<Value> t;
        bool complete = true;
        for (VarId x : e.vbl) {
            auto it = assignment.find(x);
            if (it == assignment.end()) {
                complete = false;
                break;
            }
            t.push_back(it->second);
        }
        if (!complete || is_bad(e, t))
            out.push_back(e.id);
    }
    return out;
}

std::vector<EventId> EventSource::events_of(VarId x, EventId via)
{
    std::vector<EventId> out{via};
    for (EventId f : dependents(via)) {
        const auto & vb = event(f).vbl;
        if (std::binary_search(vb.begin(), vb.end(), x))
            out.push_back(f);
    }
    std::sort(out.begin(), out.end());
    return out;
}

PortedGraph dependency_graph(const LllInstance & inst)
{
    std::vector<NodeId> ids;
    std::vector<std::vector<NodeIndex>> nbrs;
    std::uint32_t delta = 1;
    for (std::size_t e = 0; e < inst.events().size(); ++e) {
        ids.push_back(inst.events()[e].id);
        std::vector<NodeIndex> row;
        for (auto f : inst.dependents(e))
            row.push_back(static_cast<NodeIndex>(f));
        delta = std::max<std::uint32_t>(delta, static_cast<std::uint32_t>(row.size()));
        nbrs.push_back(std::move(row));
    }
    return PortedGraph::from_neighbor_lists(delta, ids, nbrs);
}

InstanceSource::InstanceSource(const LllInstance & inst, const PortedGraph & dep, const ModelConfig & cfg,
    EventId root, std::optional<std::uint64_t> digest) :
    inst_(inst), oracle_(dep, cfg, Query{root, std::nullopt}, digest)
{
}

const Event & InstanceSource::event(EventId e)
{
    oracle_.info(e);
    return inst_.event(e);
}

const std::vector<EventId> & InstanceSource::dependents(EventId e)
{
    if (auto it = deps_.find(e); it != deps_.end())
        return it->second;
    const auto deg = oracle_.info(e).degree;
    std::vector<EventId> out;
    for (Port p = 1; p <= deg; ++p)
        out.push_back(oracle_.probe(e, p).node.id);
    std::sort(out.begin(), out.end());
    return deps_.emplace(e, std::move(out)).first->second;
}

Value InstanceSource::domain(VarId x)
{
    return inst_.domain(x);
}

LllQueryBatch::LllQueryBatch(const LllInstance & inst, const ShatterConfig & cfg, std::uint64_t seed,
    const ModelConfig & model) :
    inst_(inst), cfg_(cfg), seed_(seed), model_(model), dep_(dependency_graph(inst)), digest_(dep_.digest()),
    D_(cfg.degree_bound ? *cfg.degree_bound : inst.max_degree()),
    n_(cfg.size_hint ? *cfg.size_hint : inst.events().size())
{
    if (cfg.check_criterion) {
        auto v = check_criterion(inst.max_probability(), D_, Criterion{Criterion::Kind::Polynomial, cfg.c});
        if (!v.holds)
            throw CriterionViolated("polynomial criterion violated: " + v.detail);
    }
}

LllQueryOutcome LllQueryBatch::run(EventId event) const
{
    InstanceSource src(inst_, dep_, model_, event, digest_);
    LllQueryOutcome out;
    try {
        LllQueryEngine eng(src, cfg_, D_, n_, seed_);
        out.values = eng.query(event);
        for (auto [x, v] : out.values)
            src.transcript().output.push_back(static_cast<Symbol>(v));
    }
    catch (const ProbeError & e) {
        src.transcript().failure = probe_error_name(e.kind()) + ": " + e.what();
    }
    catch (const QueryFailure & e) {
        src.transcript().failure = e.what();
    }
    out.transcript = src.transcript();
    return out;
}

LllQueryOutcome lll_query(const LllInstance & inst, EventId event, const ShatterConfig & cfg, std::uint64_t seed,
    const ModelConfig & model)
{
    return LllQueryBatch(inst, cfg, seed, model).run(event);
}

VarId edge_var(NodeId id_u, Port pu, NodeId id_v, Port pv)
{
    return id_u < id_v ? id_u * 64 + pu : id_v * 64 + pv;
}

LllInstance so_as_lll(const PortedGraph & g, std::uint32_t min_degree)
{
    if (!g.ids_unique())
        throw ContractBreach("sinkless LLL needs unique IDs");
    std::vector<Variable> vars;
    for (const auto & e : g.edges())
        vars.push_back({edge_var(g.id(e.u), e.pu, g.id(e.v), e.pv), 2});
    std::vector<Event> events;
    for (NodeIndex v = 0; v < g.node_count(); ++v) {
        if (g.degree(v) < min_degree)
            continue;
        Event ev;
        ev.id = g.id(v);
        std::vector<Value> tuple;
        for (Port p = 1; p <= g.degree(v); ++p) {
            const auto & e = g.at(v, p);
            NodeId other = g.id(e.neighbor);
            ev.vbl.push_back(edge_var(g.id(v), p, other, e.back_port));
            // inward: out of the other endpoint
            tuple.push_back(g.id(v) < other ? 1 : 0);
        }
        ev.bad.push_back(std::move(tuple));
        events.push_back(std::move(ev));
    }
    return LllInstance(std::move(vars), std::move(events), LllInstance::kMaxScopeBits);
}

HalfEdgeLabeling orientation_from_assignment(const PortedGraph & g, const std::map<VarId, Value> & a)
{
    auto l = HalfEdgeLabeling::for_graph(g, 2);
    for (NodeIndex v = 0; v < g.node_count(); ++v)
        for (Port p = 1; p <= g.degree(v); ++p) {
            const auto & e = g.at(v, p);
            NodeId other = g.id(e.neighbor);
            auto it = a.find(edge_var(g.id(v), p, other, e.back_port));
            if (it == a.end())
                throw ContractBreach("assignment misses an edge variable");
            const bool out_of_smaller = it->second == 0;
            l.at(v, p) = (out_of_smaller == (g.id(v) < other)) ? Out : In;
        }
    return l;
}

std::string write_lll(const LllInstance & inst)
{
    json j;
    j["version"] = 1;
    j["scope_bits"] = inst.scope_bits();
    json vars = json::array();
    for (const auto & v : inst.vars())
        vars.push_back({v.id, v.domain});
    j["variables"] = std::move(vars);
    json evs = json::array();
    for (const auto & e : inst.events())
        evs.push_back({{"id", e.id}, {"vbl", e.vbl}, {"bad", e.bad}});
    j["events"] = std::move(evs);
    return j.dump(1) + "\n";
}

LllInstance read_lll(const std::string & text)
{
    json j;
    try {
        j = json::parse(text);
    }
    catch (const json::parse_error & e) {
        std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(),
            text.begin() + static_cast<std::ptrdiff_t>(std::min(e.byte, text.size())), '\n'));
        throw ParseError(std::string("malformed LLL instance: ") + e.what(), line);
    }
    try {
        std::vector<Variable> vars;
        for (const auto & v : j.at("variables"))
            vars.push_back({v.at(0).get<VarId>(), v.at(1).get<Value>()});
        std::vector<Event> events;
        for (const auto & e : j.at("events"))
            events.push_back({e.at("id").get<EventId>(), e.at("vbl").get<std::vector<VarId>>(),
                e.at("bad").get<std::vector<std::vector<Value>>>()});
        auto bits = j.contains("scope_bits") ? j.at("scope_bits").get<std::uint32_t>() : LllInstance::kDefaultScopeBits;
        return LllInstance(std::move(vars), std::move(events), bits);
    }
    catch (const json::exception & e) {
        throw ParseError(std::string("bad LLL instance: ") + e.what());
    }
    catch (const ContractBreach & e) {
        throw ParseError(std::string("invalid LLL instance: ") + e.what());
    }
}

std::string write_assignment(const std::map<VarId, Value> & a)
{
    json j = json::array();
    for (auto [x, v] : a)
        j.push_back({x, v});
    return j.dump() + "\n";
}

LllInstance gen_random_lll(std::size_t num_vars, std::size_t num_events, std::uint64_t seed)
{
    RandomTape t(hash_words(seed, {0x72616e646c6c6cULL}));
    std::uint64_t draw = 0;
    std::vector<Variable> vars;
    for (std::size_t i = 0; i < num_vars; ++i)
        vars.push_back({i, t.uniform(draw++, 4) == 0 ? Value{3} : Value{2}});
    constexpr std::size_t kMaxDeg = 4;
    std::vector<std::vector<std::size_t>> var_events(num_vars);
    std::vector<std::set<std::size_t>> deps;
    std::vector<Event> events;
    for (std::size_t attempt = 0; attempt < 8 * num_events && events.size() < num_events && num_vars >= 4; ++attempt) {
        const std::size_t w = 4 + t.uniform(draw++, 3);
        const std::size_t window = std::min<std::size_t>(num_vars, 2 * w);
        const std::size_t start = t.uniform(draw++, num_vars - window + 1);
        std::vector<VarId> pool(window);
        std::iota(pool.begin(), pool.end(), start);
        for (std::size_t k = pool.size(); k > 1; --k)
            std::swap(pool[k - 1], pool[t.uniform(draw++, k)]);
        pool.resize(std::min(w, pool.size()));
        std::sort(pool.begin(), pool.end());

        std::set<std::size_t> nb;
        for (VarId x : pool)
            nb.insert(var_events[x].begin(), var_events[x].end());
        bool ok = nb.size() <= kMaxDeg;
        for (auto f : nb)
            ok = ok && deps[f].size() + 1 <= kMaxDeg;
        if (!ok)
            continue;

        std::uint64_t space = 1;
        for (VarId x : pool)
            space *= vars[x].domain;
        const std::uint64_t max_bad = std::max<std::uint64_t>(1, space / (4 * kMaxDeg));
        const std::uint64_t nbad = 1 + t.uniform(draw++, max_bad);
        std::set<std::vector<Value>> bad;
        while (bad.size() < nbad) {
            std::vector<Value> tup;
            for (VarId x : pool)
                tup.push_back(static_cast<Value>(t.uniform(draw++, vars[x].domain)));
            bad.insert(tup);
        }
        const auto idx = events.size();
        events.push_back({idx, pool, {bad.begin(), bad.end()}});
        deps.emplace_back(nb);
        for (auto f : nb)
            deps[f].insert(idx);
        for (VarId x : pool)
            var_events[x].push_back(idx);
    }
    return LllInstance(std::move(vars), std::move(events));
}

} // namespace probelab
