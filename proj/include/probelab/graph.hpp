#pragma once

#include <probelab/errors.hpp>

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace probelab {

using NodeIndex = std::uint32_t; // dense position 0..n-1
using NodeId = std::uint64_t;    // identifier visible to algorithms
using Port = std::uint32_t;      // 1..degree
using Symbol = std::int64_t;

inline constexpr std::int32_t kNoLabel = -1;
inline constexpr int kNoColor = 0; // edge colors are 1..delta

struct PortEntry {
    NodeIndex neighbor;
    Port back_port;
    friend bool operator==(const PortEntry &, const PortEntry &) = default;
};

struct HalfEdge {
    NodeIndex node;
    Port port;
    friend auto operator<=>(const HalfEdge &, const HalfEdge &) = default;
};

/// One undirected edge seen from its two half-edges, with u < v.
struct Edge {
    NodeIndex u;
    Port pu;
    NodeIndex v;
    Port pv;
};

/// Bounded-degree graph with a port numbering, identifiers, and optional
/// edge colors / half-edge input labels.
class PortedGraph {
public:
    PortedGraph() = default;
    PortedGraph(std::size_t n, std::uint32_t delta);

    /// Port p of node v leads to nbrs[v][p-1]; back ports are derived.
    static PortedGraph from_neighbor_lists(std::uint32_t delta, std::vector<NodeId> ids,
        const std::vector<std::vector<NodeIndex>> & nbrs);

    std::size_t node_count() const noexcept { return adj_.size(); }
    std::uint32_t delta() const noexcept { return delta_; }

    NodeId id(NodeIndex v) const { return ids_[v]; }
    const std::vector<NodeId> & ids() const noexcept { return ids_; }
    void set_ids(std::vector<NodeId> ids);
    bool ids_unique() const;
    /// Index of the first node carrying `id`.
    std::optional<NodeIndex> index_of(NodeId id) const;

    std::uint32_t degree(NodeIndex v) const { return static_cast<std::uint32_t>(adj_[v].size()); }
    const PortEntry & at(NodeIndex v, Port p) const { return adj_[v][p - 1]; }
    NodeIndex neighbor(NodeIndex v, Port p) const { return adj_[v][p - 1].neighbor; }
    std::span<const PortEntry> ports(NodeIndex v) const { return adj_[v]; }

    /// Appends an edge on the next free port of each endpoint.
    std::pair<Port, Port> add_edge(NodeIndex u, NodeIndex v, int color = kNoColor);

    bool has_edge_colors() const noexcept { return !colors_.empty(); }
    int edge_color(NodeIndex v, Port p) const { return colors_.empty() ? kNoColor : colors_[v][p - 1]; }
    void set_edge_color(NodeIndex v, Port p, int color);

    bool has_input_labels() const noexcept { return !labels_.empty(); }
    std::int32_t input_label(NodeIndex v, Port p) const { return labels_.empty() ? kNoLabel : labels_[v][p - 1]; }
    void set_input_label(NodeIndex v, Port p, std::int32_t label);

    std::size_t edge_count() const;
    std::vector<Edge> edges() const;

    /// Structural invariants: reciprocal ports, degree bound, proper coloring,
    /// no loops or parallel edges. Returns the first problem found.
    std::optional<std::string> validate() const;

    std::uint64_t digest() const;

    friend bool operator==(const PortedGraph &, const PortedGraph &) = default;

private:
    std::uint32_t delta_ = 0;
    std::vector<NodeId> ids_;
    std::vector<std::vector<PortEntry>> adj_;
    std::vector<std::vector<int>> colors_;
    std::vector<std::vector<std::int32_t>> labels_;
    std::unordered_map<NodeId, NodeIndex> id_lookup_;

    void rebuild_lookup();
};

/// Builds a graph from an edge list; ports follow insertion order. IDs are 1..n.
PortedGraph graph_from_edges(std::size_t n, const std::vector<std::pair<NodeIndex, NodeIndex>> & edges,
    std::uint32_t delta = 0);

PortedGraph make_path(std::size_t n);
PortedGraph make_cycle(std::size_t n);
PortedGraph make_complete(std::size_t n);
PortedGraph make_star(std::size_t leaves);

/// Replaces IDs with distinct values drawn uniformly from [1, range].
void assign_random_ids(PortedGraph & g, std::uint64_t range, std::uint64_t seed);

/// Random tree with max degree <= delta and a greedy proper edge coloring in
/// BFS order. IDs are a seeded permutation of 1..n.
PortedGraph gen_edge_colored_tree(std::size_t n, std::uint32_t delta, std::uint64_t seed);

struct RegularGraphReport {
    std::size_t deleted_edges = 0;
    std::size_t girth = 0; // 0 when acyclic
};

/// Pairing-model random delta-regular graph, then girth boosting: while a
/// cycle shorter than girth_target exists, delete its smallest edge.
PortedGraph gen_random_regular(std::size_t n, std::uint32_t delta, std::size_t girth_target, std::uint64_t seed,
    RegularGraphReport * report = nullptr);

/// BFS distances from `source` up to `max_depth` (-1 = unreached).
std::vector<int> bfs_distances(const PortedGraph & g, NodeIndex source, int max_depth = -1);

/// Length of the shortest cycle, or nullopt for a forest.
std::optional<std::size_t> girth(const PortedGraph & g);

bool is_forest(const PortedGraph & g);
bool is_connected(const PortedGraph & g);

/// Same nodes and IDs; u ~ v iff 1 <= dist(u, v) <= k. Ports ordered by neighbor ID.
PortedGraph power_graph(const PortedGraph & g, int k);

enum Orientation : Symbol { In = 0, Out = 1 };

/// Output assignment addressed by (node, port), plus optional per-node labels
/// for node problems such as vertex coloring.
struct HalfEdgeLabeling {
    std::uint32_t alphabet = 0;
    std::vector<std::vector<Symbol>> half_edges;
    std::vector<Symbol> nodes;

    static HalfEdgeLabeling for_graph(const PortedGraph & g, std::uint32_t alphabet, Symbol fill = 0);
    Symbol at(NodeIndex v, Port p) const { return half_edges[v][p - 1]; }
    Symbol & at(NodeIndex v, Port p) { return half_edges[v][p - 1]; }

    friend bool operator==(const HalfEdgeLabeling &, const HalfEdgeLabeling &) = default;
};

struct SinklessProblem {
    std::uint32_t min_degree = 3;
};
struct ColoringProblem {
    std::uint32_t colors = 2;
};
struct EdgeColoringProblem {
    std::uint32_t colors = 3;
};
using Problem = std::variant<SinklessProblem, ColoringProblem, EdgeColoringProblem>;

struct Verdict {
    enum class Status { Valid, Invalid, Rejected };
    Status status = Status::Valid;
    std::string message;
    std::optional<NodeIndex> node;
    std::optional<Port> port;

    bool valid() const noexcept { return status == Status::Valid; }
};

Verdict verify_solution(const PortedGraph & g, const HalfEdgeLabeling & sol, const Problem & problem);

/// Edge colors of `g` as a half-edge labeling (for the edge-coloring checker).
HalfEdgeLabeling edge_coloring_labeling(const PortedGraph & g);

} // namespace probelab
