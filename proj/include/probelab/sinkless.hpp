#pragma once

#include <probelab/graph.hpp>
#include <probelab/lll.hpp>
#include <probelab/local.hpp>
#include <probelab/probe.hpp>

#include <functional>
#include <map>
#include <optional>
#include <vector>

namespace probelab {

struct SinklessConfig {
    int k = 2;                        // MIS on G^k
    unsigned __int128 id_palette = 0; // 0: one past the largest ID
    ShatterConfig lll;                // degree bound and criterion check are set by the pipeline
    bool check_criterion = true;      // contracted instance, actual p and d
};

/// A cluster's members with all of their ports: (neighbor ID, back port).
struct ClusterView {
    NodeId center = 0;
    std::map<NodeId, std::vector<std::pair<NodeId, Port>>> adj;
    bool member(NodeId v) const { return adj.count(v) != 0; }
};

struct Cluster {
    NodeId center = 0;
    bool cyclic = false;
    bool has_event = false; // tree-shaped with every member of degree >= 3
    std::vector<NodeId> members;
    std::vector<VarId> leaving; // variables of edges leaving the cluster, sorted
    std::vector<Value> inward;  // value of each leaving variable pointing into the cluster
};

Cluster analyze_cluster(const ClusterView & view);

/// Orientation of each leaving half-edge (u, p), seen from u.
using BoundaryOrientation = std::function<Orientation(NodeId, Port)>;

/// Orientation of every intra-cluster half-edge. Cyclic clusters orient a
/// cycle and point everything else toward it; tree clusters point toward the
/// root (smallest member of degree < 3, or smallest member with an outgoing
/// leaving edge). `boundary` is consulted only for event clusters.
std::map<std::pair<NodeId, Port>, Orientation> orient_cluster(const ClusterView & view, const Cluster & cluster,
    const BoundaryOrientation & boundary);

struct ContractedEdge {
    NodeId a = 0; // center IDs
    NodeId b = 0;
    VarId var = 0;
};

struct ClusterDecomposition {
    int k = 0;
    std::vector<NodeId> centers;      // sorted
    std::vector<NodeId> center_of;    // by node index
    std::vector<Cluster> clusters;    // sorted by center
    std::vector<ContractedEdge> contracted; // one per inter-cluster edge

    const Cluster & cluster(NodeId center) const;
};

/// Distance-k coloring, color-class MIS on G^k, nearest-center assignment
/// (ties to the smaller center ID), exact cycle test per cluster.
ClusterDecomposition cluster_decompose(const PortedGraph & g, int k, unsigned __int128 id_palette = 0);

ClusterView cluster_view(const PortedGraph & g, const ClusterDecomposition & dec, NodeId center);

/// Contracted LLL: one binary variable per inter-cluster edge (same IDs as
/// so_as_lll), one event per event cluster: all leaving edges inward.
LllInstance contracted_lll(const ClusterDecomposition & dec);

/// Degree bound of the contracted dependency graph known to every query.
std::uint64_t contracted_degree_bound(std::uint32_t delta, int k, std::uint64_t n);

struct SinklessResult {
    HalfEdgeLabeling labeling;
    ClusterDecomposition decomposition;
    LllSolution lll;
    CriterionVerdict criterion;
};

/// Global mode. Throws CriterionViolated when the contracted instance fails
/// the polynomial criterion and cfg.check_criterion is set.
SinklessResult solve_sinkless(const PortedGraph & g, const SinklessConfig & cfg, std::uint64_t seed);

/// Query mode: the orientation (In/Out) of the queried half-edge.
ProbeAlgorithm sinkless_query_algorithm(const SinklessConfig & cfg, std::uint32_t delta, std::uint64_t seed);

/// Palette actually used for a graph under cfg.
unsigned __int128 sinkless_palette(const PortedGraph & g, const SinklessConfig & cfg);

} // namespace probelab
