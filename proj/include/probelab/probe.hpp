#pragma once

#include <probelab/graph.hpp>
#include <probelab/rng.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace probelab {

struct IdGraph;

enum class Model { Lca, Volume, LocalSim };

struct IdSpace {
    enum class Kind { ExactN, Polynomial, Exponential, HLabeled };
    Kind kind = Kind::ExactN;
    double exponent = 1.0; // Polynomial: ids in [1, n^exponent]
    std::shared_ptr<const IdGraph> id_graph; // HLabeled
};

struct Randomness {
    enum class Kind { None, Shared, Private };
    Kind kind = Kind::Private;
    std::uint64_t seed = 0;
};

struct ModelConfig {
    Model model = Model::Volume;
    IdSpace id_space;
    bool far_probes = false;
    Randomness randomness;
    std::uint64_t advertised_n = 0; // 0: tell the algorithm the true node count
    std::optional<std::uint64_t> probe_budget;

    static ModelConfig lca(std::uint64_t seed);
    static ModelConfig volume(std::uint64_t seed);

    /// Consistency of the model flags; returns the first problem.
    std::optional<std::string> validate() const;
};

Model parse_model(const std::string & name);
std::string model_name(Model m);

/// Checks that the IDs of `g` lie in the configured ID space (and, for
/// h-labeled spaces, that every edge respects its color layer).
std::optional<std::string> check_id_space(const PortedGraph & g, const ModelConfig & cfg);

/// Private stream keyed by (seed, id); shared mode ignores the id.
RandomTape private_randomness(NodeId id, const ModelConfig & cfg);

struct Query {
    NodeId node = 0;
    std::optional<Port> port;
};

struct NodeInfo {
    NodeId id = 0;
    std::uint32_t degree = 0;
    std::uint64_t digest = 0;
};

struct ProbeAnswer {
    NodeInfo node;
    Port back_port = 0;
    std::int32_t label = kNoLabel; // input label on the answering half-edge
};

struct ProbeStep {
    NodeId id = 0;
    Port port = 0;
    ProbeAnswer answer;
    friend bool operator==(const ProbeStep & a, const ProbeStep & b)
    {
        return a.id == b.id && a.port == b.port && a.answer.node.id == b.answer.node.id
            && a.answer.node.degree == b.answer.node.degree && a.answer.node.digest == b.answer.node.digest
            && a.answer.back_port == b.answer.back_port && a.answer.label == b.answer.label;
    }
};

struct ProbeTranscript {
    Query query;
    std::vector<ProbeStep> steps;
    std::uint64_t probe_count = 0;
    std::vector<Symbol> output;
    std::optional<std::string> failure;
    std::uint64_t graph_digest = 0;

    bool ok() const noexcept { return !failure; }
    /// Line-oriented dump: one `probe` record per step, then the `output` line.
    std::string dump() const;
};

class ProbeError : public std::runtime_error {
public:
    enum class Kind { FarProbeViolation, PortOutOfRange, UnknownId, ProbeBudgetExceeded };
    ProbeError(Kind kind, const std::string & what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

std::string probe_error_name(ProbeError::Kind k);

/// Thrown by algorithms to report a declared failure (e.g. a component cap).
class QueryFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-query probe interface. Enforces the model restrictions and meters
/// every probe; subclasses only resolve (id, port) to an answer.
class Oracle {
public:
    Oracle(const ModelConfig & cfg, Query query, NodeInfo root, std::uint64_t true_n);
    virtual ~Oracle() = default;
    Oracle(const Oracle &) = delete;
    Oracle & operator=(const Oracle &) = delete;

    const Query & query() const noexcept { return transcript_.query; }
    const NodeInfo & root() const noexcept { return root_; }
    const ModelConfig & config() const noexcept { return cfg_; }
    std::uint64_t advertised_n() const noexcept { return advertised_n_; }

    ProbeAnswer probe(NodeId id, Port port);

    bool seen(NodeId id) const { return known_.count(id) != 0; }
    /// Local information of a node already returned by a probe (or the root).
    const NodeInfo & info(NodeId id) const;
    RandomTape randomness(NodeId id) const;

    std::uint64_t probes() const noexcept { return transcript_.probe_count; }
    ProbeTranscript & transcript() noexcept { return transcript_; }

    /// Whether half-edges carry input labels (otherwise a probe also reveals
    /// the reverse half-edge completely).
    virtual bool has_labels() const { return false; }

protected:
    /// Answers a probe on (id, port). Throws ProbeError for unknown ids or
    /// ports beyond the degree of an unseen node.
    virtual ProbeAnswer resolve(NodeId id, Port port) = 0;

private:
    ModelConfig cfg_;
    NodeInfo root_;
    std::uint64_t advertised_n_;
    std::unordered_map<NodeId, NodeInfo> known_;
    ProbeTranscript transcript_;
};

class GraphOracle : public Oracle {
public:
    /// `digest` may be passed in to avoid rehashing the graph per query.
    GraphOracle(const PortedGraph & g, const ModelConfig & cfg, Query query,
        std::optional<std::uint64_t> digest = std::nullopt);

    const PortedGraph & graph() const noexcept { return g_; }
    bool has_labels() const override { return g_.has_input_labels(); }

protected:
    ProbeAnswer resolve(NodeId id, Port port) override;

private:
    const PortedGraph & g_;
};

NodeInfo node_info(const PortedGraph & g, NodeIndex v, const ModelConfig & cfg);

/// A probe algorithm: reads the oracle and returns the output symbols of the
/// queried node (or half-edge). Every symbol must lie in [0, alphabet).
struct ProbeAlgorithm {
    std::string name;
    std::uint32_t alphabet = 0;
    std::function<std::vector<Symbol>(Oracle &)> run;
};

/// Runs `alg` against an oracle, catching model violations and declared
/// failures into the transcript.
ProbeTranscript run_on_oracle(const ProbeAlgorithm & alg, Oracle & oracle);

ProbeTranscript run_query(const ProbeAlgorithm & alg, const PortedGraph & g, const Query & query,
    const ModelConfig & cfg, std::optional<std::uint64_t> digest = std::nullopt);

/// Memo over an oracle: remembers every answered half-edge and its reverse,
/// so no half-edge is probed twice.
class LocalView {
public:
    explicit LocalView(Oracle & oracle) : oracle_(oracle) {}

    Oracle & oracle() noexcept { return oracle_; }
    const NodeInfo & info(NodeId id) const { return oracle_.info(id); }
    std::uint32_t degree(NodeId id) const { return oracle_.info(id).degree; }

    ProbeAnswer edge(NodeId id, Port port);
    NodeId neighbor(NodeId id, Port port) { return edge(id, port).node.id; }
    std::vector<NodeId> neighbors(NodeId id);
    bool known(NodeId id, Port port) const { return cache_.count(key(id, port)) != 0; }

private:
    struct KeyHash {
        std::size_t operator()(const std::pair<NodeId, Port> & k) const noexcept
        {
            return static_cast<std::size_t>(hash_combine(k.first, k.second));
        }
    };
    static std::pair<NodeId, Port> key(NodeId id, Port p) { return {id, p}; }

    Oracle & oracle_;
    std::unordered_map<std::pair<NodeId, Port>, ProbeAnswer, KeyHash> cache_;
};

struct Witness {
    PortedGraph graph;
    std::size_t core_size = 0; // |S ∪ N(S)|
    std::size_t probed = 0;    // |S|
    std::vector<NodeIndex> origin; // witness node -> node of G (padding leaves: npos)
    static constexpr NodeIndex npos = static_cast<NodeIndex>(-1);
};

/// Subgraph on S ∪ N(S), S being the query nodes plus every probed node, with
/// original IDs, ports, colors and labels. Ports leaving the set end in fresh
/// pendant leaves so degrees are preserved and replay is exact.
Witness extract_witness(const std::vector<ProbeTranscript> & transcripts, const PortedGraph & g);

} // namespace probelab
