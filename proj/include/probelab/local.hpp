#pragma once

#include <probelab/graph.hpp>
#include <probelab/probe.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <unordered_map>
#include <vector>

namespace probelab {

/// What a node sees after `radius` rounds: every node within distance radius
/// together with all of its ports. Neighbors at distance radius + 1 appear
/// only through the answers on those ports.
struct BallNode {
    NodeInfo info;
    int dist = 0;
    std::vector<ProbeAnswer> ports; // port p at ports[p-1]
};

struct Ball {
    NodeId center = 0;
    int radius = 0;
    std::map<NodeId, BallNode> nodes; // dist <= radius only
};

struct LocalAlgorithm {
    std::string name;
    int radius = 0;
    std::uint32_t alphabet = 0;
    std::function<std::vector<Symbol>(const Ball &, const ModelConfig &)> decide;
};

/// Collects the ball by probing every port of every node within distance t.
ProbeAlgorithm parnas_ron(const LocalAlgorithm & alg);

/// Ball of `v` built directly from the graph.
Ball gather_ball(const PortedGraph & g, NodeIndex v, int radius, const ModelConfig & cfg);

/// Runs `alg` at every node with full knowledge of the graph.
std::vector<std::vector<Symbol>> simulate_local(const LocalAlgorithm & alg, const PortedGraph & g,
    const ModelConfig & cfg);

/// Upper bound on the degree of G^k from the degree bound of G and the node count.
std::uint64_t power_degree_bound(std::uint32_t delta, int k, std::uint64_t n);

/// Fixed color-reduction schedule shared by all nodes: polynomial steps
/// (degree d over GF(q)) while the palette shrinks, then one class per round
/// down to D^2 + 1 colors.
struct ColoringSchedule {
    struct Step {
        std::uint32_t d;
        std::uint64_t q;
    };
    unsigned __int128 id_palette = 0; // colors before the first step: ids in [0, id_palette)
    std::uint64_t D = 0;
    std::vector<Step> steps;
    std::uint64_t poly_palette = 0;
    std::uint64_t target = 0;

    static ColoringSchedule make(unsigned __int128 id_palette, std::uint64_t D);
    std::size_t iterations() const noexcept { return steps.size(); }
    std::uint64_t palette() const noexcept { return std::min(poly_palette, target); }
    /// Polynomial steps plus one-class elimination rounds.
    std::uint64_t rounds() const noexcept { return steps.size() + (poly_palette > target ? poly_palette - target : 0); }
};

/// Neighborhoods in G^k, as seen by an algorithm.
class PowerAccess {
public:
    virtual ~PowerAccess() = default;
    /// IDs of the nodes at distance 1..k from v, sorted.
    virtual const std::vector<NodeId> & power_neighbors(NodeId v) = 0;
};

/// G^k neighborhoods by BFS through a probe view, memoized per node.
class ProbedPower : public PowerAccess {
public:
    ProbedPower(LocalView & view, int k) : view_(view), k_(k) {}
    const std::vector<NodeId> & power_neighbors(NodeId v) override;
    /// Distances 0..k from v (v itself included).
    const std::vector<std::pair<NodeId, int>> & ball(NodeId v);
    LocalView & view() noexcept { return view_; }
    int k() const noexcept { return k_; }

private:
    LocalView & view_;
    int k_;
    std::unordered_map<NodeId, std::vector<std::pair<NodeId, int>>> balls_;
    std::unordered_map<NodeId, std::vector<NodeId>> nbrs_;
};

/// G^k neighborhoods read off a precomputed power graph.
class GraphPower : public PowerAccess {
public:
    GraphPower(const PortedGraph & g, int k);
    const std::vector<NodeId> & power_neighbors(NodeId v) override;
    const PortedGraph & power() const noexcept { return gk_; }

private:
    PortedGraph gk_;
    std::unordered_map<NodeId, std::vector<NodeId>> nbrs_;
};

/// Memoized evaluation of the schedule at single nodes.
class LazyColoring {
public:
    LazyColoring(PowerAccess & access, ColoringSchedule schedule);
    /// Color after all polynomial steps and eliminations.
    std::uint64_t color(NodeId v);
    /// Color after `level` polynomial steps (level 0: the id).
    std::uint64_t color_at(NodeId v, std::size_t level);
    const ColoringSchedule & schedule() const noexcept { return sched_; }

private:
    PowerAccess & access_;
    ColoringSchedule sched_;
    std::vector<std::unordered_map<NodeId, std::uint64_t>> memo_;
    std::unordered_map<NodeId, std::uint64_t> final_;
};

/// Smallest a in GF(q) where x's polynomial differs from every other color's;
/// the new color is a*q + P_x(a).
std::uint64_t reduce_color(std::uint64_t x, const std::vector<std::uint64_t> & others, std::uint32_t d, std::uint64_t q);

struct ColoringResult {
    std::vector<std::uint64_t> colors; // by node index
    std::uint64_t palette = 0;
    std::size_t iterations = 0;
    std::uint64_t rounds = 0;
    std::uint64_t D = 0;
};

/// Distance-k coloring computed level by level over the whole graph.
/// `id_palette` bounds the IDs (0: one past the largest ID). Duplicate IDs
/// are rejected.
ColoringResult logstar_coloring(const PortedGraph & g, int k, unsigned __int128 id_palette = 0);

/// Per-node evaluation of the same coloring through probes.
/// `id_palette` 0 means IDs in [1, n] for the advertised n.
ProbeAlgorithm logstar_coloring_algorithm(int k, std::uint32_t delta, unsigned __int128 id_palette);

/// Color-class sweep over G^k. Returns membership by node index. Rejects an
/// improper coloring.
std::vector<char> mis_from_coloring(const PortedGraph & g, const std::vector<std::uint64_t> & colors, int k = 1);

/// Lazy membership: v joins iff no G^k neighbor of smaller color joined.
class LazyMis {
public:
    LazyMis(PowerAccess & access, std::function<std::uint64_t(NodeId)> color) :
        access_(access), color_(std::move(color))
    {
    }
    bool in_mis(NodeId v);

private:
    PowerAccess & access_;
    std::function<std::uint64_t(NodeId)> color_;
    std::unordered_map<NodeId, bool> memo_;
};

ProbeAlgorithm mis_algorithm(int k, std::uint32_t delta, unsigned __int128 id_palette);

/// Runs `base` on synthetic IDs: the colors of a distance-(n0 + r) coloring,
/// plus one. Advertises n0 as the node count. Fails the query when two nodes
/// seen by `base` share a synthetic ID.
ProbeAlgorithm lift_via_coloring(const ProbeAlgorithm & base, std::uint64_t n0, int r, std::uint32_t delta,
    unsigned __int128 id_palette);

} // namespace probelab
