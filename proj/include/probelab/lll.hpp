#pragma once

#include <probelab/graph.hpp>
#include <probelab/probe.hpp>

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace probelab {

using VarId = std::uint64_t;
using EventId = std::uint64_t;
using Value = std::uint32_t;

struct Variable {
    VarId id = 0;
    Value domain = 2; // uniform over [0, domain)
};

/// Bad event: the listed tuples over `vbl` (sorted by id) are the violating
/// assignments.
struct Event {
    EventId id = 0;
    std::vector<VarId> vbl;
    std::vector<std::vector<Value>> bad;
};

class ScopeTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CriterionViolated : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ResampleCapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ComponentTooLarge : public QueryFailure {
public:
    using QueryFailure::QueryFailure;
};

/// Exact probability num/den; den is a product of domain sizes below 2^63.
struct Probability {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    bool zero() const noexcept { return num == 0; }
    bool one() const noexcept { return num == den; }
    double to_double() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }

    friend std::strong_ordering operator<=>(const Probability & a, const Probability & b) noexcept
    {
        auto l = static_cast<unsigned __int128>(a.num) * b.den;
        auto r = static_cast<unsigned __int128>(b.num) * a.den;
        return l <=> r;
    }
    friend bool operator==(const Probability & a, const Probability & b) noexcept
    {
        return (a <=> b) == std::strong_ordering::equal;
    }
};

class LllInstance {
public:
    static constexpr std::uint32_t kDefaultScopeBits = 24;
    static constexpr std::uint32_t kMaxScopeBits = 62;

    LllInstance() = default;
    /// Validates ids, tuples and scope size; sorts each vbl (permuting tuples).
    LllInstance(std::vector<Variable> vars, std::vector<Event> events, std::uint32_t scope_bits = kDefaultScopeBits);

    const std::vector<Variable> & vars() const noexcept { return vars_; }
    const std::vector<Event> & events() const noexcept { return events_; }
    std::uint32_t scope_bits() const noexcept { return scope_bits_; }

    std::optional<std::size_t> var_index(VarId id) const;
    std::optional<std::size_t> event_index(EventId id) const;
    Value domain(VarId id) const { return vars_[*var_index(id)].domain; }
    const Event & event(EventId id) const { return events_[*event_index(id)]; }

    /// Event indices containing variable index v.
    const std::vector<std::size_t> & events_of(std::size_t var_idx) const { return var_events_[var_idx]; }
    /// Dependency-graph neighbors (event indices sharing a variable), sorted.
    const std::vector<std::size_t> & dependents(std::size_t event_idx) const { return deps_[event_idx]; }

    std::size_t max_degree() const;
    Probability max_probability() const;

private:
    std::vector<Variable> vars_;
    std::vector<Event> events_;
    std::uint32_t scope_bits_ = kDefaultScopeBits;
    std::unordered_map<VarId, std::size_t> var_lookup_;
    std::unordered_map<EventId, std::size_t> event_lookup_;
    std::vector<std::vector<std::size_t>> var_events_;
    std::vector<std::vector<std::size_t>> deps_;
};

struct PartialAssignment {
    std::unordered_map<VarId, Value> set;
    std::unordered_set<VarId> frozen;

    std::optional<Value> value(VarId x) const
    {
        auto it = set.find(x);
        return it == set.end() ? std::nullopt : std::optional<Value>(it->second);
    }
};

/// Conditional probability of `e` given the values in `values` (aligned with
/// e.vbl; nullopt = unset). Counts consistent bad tuples over the product of
/// unset domain sizes.
Probability conditional_probability(const Event & e, std::span<const std::optional<Value>> values,
    std::span<const Value> domains);

Probability event_probability(const LllInstance & inst, EventId event, const PartialAssignment & partial);

struct Criterion {
    enum class Kind { FourPD, Polynomial, Exponential };
    Kind kind = Kind::FourPD;
    double c = 1.0;

    /// "4pd", "exp", "poly:<c>".
    static Criterion parse(const std::string & text);
    std::string str() const;
};

struct CriterionVerdict {
    bool holds = true;
    Probability p;
    std::size_t d = 0;
    std::optional<EventId> binding; // event attaining p
    std::string detail;
};

CriterionVerdict check_criterion(const Probability & p, std::size_t d, const Criterion & crit);
CriterionVerdict check_criterion(const LllInstance & inst, const Criterion & crit);

/// Pre-shattering knobs. Dependency degree bound D defaults to the instance's.
struct ShatterConfig {
    double c = 1.0;       // polynomial criterion exponent
    double lambda = -1.0; // tau = D^-lambda; negative: c / 2
    double c_prime = 5.0; // colors drawn from [D^c']
    double beta = 8.0;    // component cap beta * log2(n) events
    std::optional<std::uint64_t> degree_bound;
    std::optional<std::uint64_t> size_hint; // n for the cap; default: event count
    bool check_criterion = true;

    double tau(std::uint64_t D) const;
    std::uint64_t color_count(std::uint64_t D) const;
    std::size_t component_cap(std::uint64_t n) const;
};

/// Shared-randomness draws used by both the global sweep and the queries.
Value sample_value(std::uint64_t seed, VarId x, Value domain);
std::uint64_t event_color(std::uint64_t seed, EventId e, std::uint64_t colors);

struct ShatterResult {
    PartialAssignment partial;
    std::vector<EventId> failed;    // color not unique within two hops
    std::vector<EventId> marked;    // pushed over tau during the sweep
    std::vector<EventId> dangerous; // nonzero conditional probability at the end
    Probability tau_bound;          // largest conditional probability left
    double tau = 0;
    std::uint64_t D = 0;
};

/// Global sweep. Throws CriterionViolated when the polynomial criterion fails
/// (unless disabled in cfg). Asserts every conditional probability <= tau.
ShatterResult pre_shatter(const LllInstance & inst, const ShatterConfig & cfg, std::uint64_t seed);

/// Connected components of the dependency graph restricted to `events`.
std::vector<std::vector<EventId>> dangerous_components(const LllInstance & inst, const std::vector<EventId> & events);

/// Self-contained component problem: events, domains and the already fixed
/// values of their variables.
struct ComponentProblem {
    std::vector<Event> events;
    std::map<VarId, Value> domains;
    std::unordered_map<VarId, Value> fixed;
};

struct ComponentSolveStats {
    std::uint64_t backtrack_steps = 0;
    bool used_resampling = false;
    bool used_widened = false;
};

/// Values for every unfixed variable of the component making all its events
/// impossible. Deterministic in (problem, seed). Throws ContractBreach when
/// no such assignment exists.
std::map<VarId, Value> solve_component(const ComponentProblem & prob, std::uint64_t seed,
    ComponentSolveStats * stats = nullptr);

ComponentProblem component_problem(const LllInstance & inst, const PartialAssignment & partial,
    const std::vector<EventId> & component);

std::map<VarId, Value> solve_component(const LllInstance & inst, const PartialAssignment & partial,
    const std::vector<EventId> & component, std::uint64_t seed);

/// Moser-Tardos resampling (lowest violated event id first). Throws
/// ResampleCapExceeded after max_resamples.
std::map<VarId, Value> moser_tardos(const LllInstance & inst, std::uint64_t seed,
    std::uint64_t max_resamples = 10'000'000, std::uint64_t * resamples = nullptr);

struct LllSolution {
    std::map<VarId, Value> assignment;
    ShatterResult shatter;
    std::vector<std::vector<EventId>> components;
    std::size_t max_component = 0;
    std::vector<EventId> oversized; // events in components above the cap
};

/// Pre-shatter, solve every dangerous component, fill the rest by sampling.
LllSolution lll_solve(const LllInstance & inst, const ShatterConfig & cfg, std::uint64_t seed);

/// Events still bad under a full assignment.
std::vector<EventId> violated_events(const LllInstance & inst, const std::map<VarId, Value> & assignment);

/// Lazily explored instance, as seen by one query.
class EventSource {
public:
    virtual ~EventSource() = default;
    /// Local information of an event already reached.
    virtual const Event & event(EventId e) = 0;
    /// Events sharing a variable with e (probes).
    virtual const std::vector<EventId> & dependents(EventId e) = 0;
    virtual Value domain(VarId x) = 0;
    /// Events containing x, given an event known to contain it.
    virtual std::vector<EventId> events_of(VarId x, EventId via);
    /// Sorted superset of dependents(e) that may include non-events.
    virtual std::vector<EventId> neighbor_candidates(EventId e) { return dependents(e); }
    /// Sorted superset of events_of(x, via) that may include non-events.
    virtual std::vector<EventId> candidates_of(VarId x, EventId via) { return events_of(x, via); }
    virtual bool is_event(EventId) { return true; }
};

/// Query-mode evaluation of the global sweep, one variable at a time in
/// decreasing-key recursion.
class LllQueryEngine {
public:
    LllQueryEngine(EventSource & src, const ShatterConfig & cfg, std::uint64_t D, std::uint64_t n, std::uint64_t seed);

    /// Values of vbl(e). Throws ComponentTooLarge.
    std::vector<std::pair<VarId, Value>> query(EventId e);
    /// Final value of variable x (x in event `via`).
    Value value(VarId x, EventId via);
    bool dangerous(EventId e);
    std::size_t last_component_size() const noexcept { return last_component_; }

private:
    struct VarState {
        bool attempted = false; // reached in the sweep without being frozen first
        bool set = false;
        Value value = 0;
    };
    struct Key {
        std::uint64_t color;
        VarId var;
        auto operator<=>(const Key &) const = default;
    };

    EventSource & src_;
    ShatterConfig cfg_;
    std::uint64_t D_, n_, seed_, colors_;
    double tau_;
    std::unordered_map<EventId, bool> failed_;
    std::unordered_map<VarId, std::vector<EventId>> var_events_;
    std::unordered_map<VarId, Key> keys_;
    std::unordered_map<VarId, VarState> state_;
    std::unordered_map<EventId, bool> dangerous_;
    std::unordered_map<VarId, Value> solved_;
    std::size_t last_component_ = 0;

    bool failed(EventId e);
    const std::vector<EventId> & events_with(VarId x, EventId via);
    Key key(VarId x, EventId via);
    const VarState & state(VarId x, EventId via);
    Probability prob_before(const Event & e, const Key & before, std::optional<std::pair<VarId, Value>> extra);
    /// False when P(e) stays <= tau at y's turn for every subset of earlier
    /// variables being set (set values are always the sampled ones).
    bool may_exceed(const Event & e, const Key & before, VarId y, Value vy);
};

/// The instance's dependency graph behind a metered oracle.
class InstanceSource : public EventSource {
public:
    /// `dep` must be dependency_graph(inst) and outlive the source.
    InstanceSource(const LllInstance & inst, const PortedGraph & dep, const ModelConfig & cfg, EventId root,
        std::optional<std::uint64_t> digest = std::nullopt);
    const Event & event(EventId e) override;
    const std::vector<EventId> & dependents(EventId e) override;
    Value domain(VarId x) override;
    ProbeTranscript & transcript() { return oracle_.transcript(); }

private:
    const LllInstance & inst_;
    GraphOracle oracle_;
    std::unordered_map<EventId, std::vector<EventId>> deps_;
};

/// Dependency graph as a ported graph (node per event, ID = event id).
PortedGraph dependency_graph(const LllInstance & inst);

struct LllQueryOutcome {
    std::vector<std::pair<VarId, Value>> values;
    ProbeTranscript transcript;
};

/// Answers many queries against one instance; the dependency graph is built
/// once. The criterion check (if enabled in cfg) also runs once.
class LllQueryBatch {
public:
    LllQueryBatch(const LllInstance & inst, const ShatterConfig & cfg, std::uint64_t seed, const ModelConfig & model);
    LllQueryOutcome run(EventId event) const;
    const PortedGraph & dependency() const noexcept { return dep_; }

private:
    const LllInstance & inst_;
    ShatterConfig cfg_;
    std::uint64_t seed_;
    ModelConfig model_;
    PortedGraph dep_;
    std::uint64_t digest_;
    std::uint64_t D_;
    std::uint64_t n_;
};

LllQueryOutcome lll_query(const LllInstance & inst, EventId event, const ShatterConfig & cfg, std::uint64_t seed,
    const ModelConfig & model);

/// Sinkless orientation as an LLL: one binary variable per edge (id =
/// smaller endpoint ID * 64 + its port; 0 = out of that endpoint), one event
/// per node of degree >= min_degree (id = node ID).
LllInstance so_as_lll(const PortedGraph & g, std::uint32_t min_degree);
VarId edge_var(NodeId id_u, Port pu, NodeId id_v, Port pv);
HalfEdgeLabeling orientation_from_assignment(const PortedGraph & g, const std::map<VarId, Value> & a);

std::string write_lll(const LllInstance & inst);
LllInstance read_lll(const std::string & text);
std::string write_assignment(const std::map<VarId, Value> & a);

/// Random instance with 4pd <= 1 (dependency degree at most 4, p <= 1/16).
LllInstance gen_random_lll(std::size_t num_vars, std::size_t num_events, std::uint64_t seed);

} // namespace probelab
