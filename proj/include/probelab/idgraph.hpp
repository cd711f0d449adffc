#pragma once

#include <probelab/graph.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace probelab {

using Vertex = std::uint32_t; // 0..nV-1; as a node ID it reads vertex + 1

/// Delta layer graphs on a common vertex set. Layer c (1..delta) is stored as
/// sorted adjacency lists.
struct IdGraph {
    std::uint32_t nV = 0;
    std::uint32_t delta = 0;
    std::uint32_t R = 1;
    std::vector<std::vector<std::vector<Vertex>>> layers; // [c-1][v]

    static IdGraph empty(std::uint32_t nV, std::uint32_t delta, std::uint32_t R = 1);

    /// Adds {a, b} to layer c; returns false when already present or a == b.
    bool add_edge(std::uint32_t c, Vertex a, Vertex b);
    bool adjacent(std::uint32_t c, Vertex a, Vertex b) const;
    const std::vector<Vertex> & neighbors(std::uint32_t c, Vertex v) const { return layers[c - 1][v]; }
    std::size_t union_degree(Vertex v) const;
    std::size_t edge_count(std::uint32_t c) const;

    static NodeId to_id(Vertex v) { return static_cast<NodeId>(v) + 1; }
    static Vertex to_vertex(NodeId id) { return static_cast<Vertex>(id - 1); }

    friend bool operator==(const IdGraph &, const IdGraph &) = default;
};

std::string write_id_graph(const IdGraph & h);
IdGraph read_id_graph(const std::string & text);

/// Girth of the union multigraph; parallel edges across layers are 2-cycles.
/// nullopt for a forest.
std::optional<std::size_t> union_girth(const IdGraph & h);

/// Size of a maximum independent set of layer c, exact (nV <= 64).
std::vector<Vertex> max_independent_set(const IdGraph & h, std::uint32_t c);

struct PropertyResult {
    bool pass = false;
    bool exact = true;
    std::string detail;
};

struct IdGraphReport {
    PropertyResult p1, p2, p3, p4, p5;
    std::optional<std::size_t> girth;
    std::vector<std::size_t> max_is; // per layer; empty when not exact

    /// Properties 1, 3, 4 and 5 (Property 2 is waived at desk scale).
    bool passes() const { return p1.pass && p3.pass && p4.pass && p5.pass; }
    std::string summary() const;
};

IdGraphReport verify_id_graph(const IdGraph & h);

/// Only Properties 1, 3 and 5, the ones the zero-round pigeonhole argument uses.
bool passes_p135(const IdGraphReport & r);

struct IdBuildOptions {
    std::uint32_t max_retries = 32;
    std::uint32_t patch_budget = 0; // 0: nV
};

/// Smallest vertex count admitted by the Moore bound for minimum degree
/// delta and girth 10R (saturating).
std::uint64_t moore_bound(std::uint32_t min_degree, std::uint64_t girth);

/// Random construction: sample layers at p = delta^2/nV, delete short-cycle
/// and bad-degree vertices, patch isolated layer vertices with girth-safe
/// edges, retry with seed+1. Throws InfeasibleParameters.
IdGraph build_id_graph(std::uint32_t nV, std::uint32_t delta, std::uint32_t R, std::uint64_t seed,
    const IdBuildOptions & opt = {});

/// First violation of the H-labeling constraint by `g` (IDs read as vertex+1,
/// edge colors as layers).
std::optional<std::string> h_labeling_violation(const PortedGraph & g, const IdGraph & h);

/// Injective proper H-labeling of an edge-colored tree by randomized
/// backtracking. Throws InfeasibleParameters on exhaustion.
std::vector<Vertex> proper_h_labeling(const PortedGraph & tree, const IdGraph & h, std::uint64_t seed);

/// Number of (not necessarily injective) proper H-labelings of a tree.
boost::multiprecision::cpp_int count_h_labelings(const PortedGraph & tree, const IdGraph & h);

struct ZeroRoundResult {
    enum class Method { Exhaustive, Structural };
    bool exists = false;
    Method method = Method::Exhaustive;
    std::vector<std::uint32_t> map; // vertex -> out color (when exists)
    std::uint32_t color = 0;        // certificate: class forced to size >= nV/delta
    std::vector<std::size_t> max_is; // certificate: per-layer independence numbers
    std::string detail;
};

/// Exhaustive search over maps V(H) -> [delta] with independent classes
/// (nV <= 16). Throws ContractBreach above that.
ZeroRoundResult zero_round_exhaustive(const IdGraph & h);

/// Pigeonhole shortcut, conclusive only when Property 5 holds exactly.
std::optional<ZeroRoundResult> zero_round_structural(const IdGraph & h);

/// Exhaustive when nV <= 16, else structural (nullopt: undecided).
std::optional<ZeroRoundResult> zero_round_so_exists(const IdGraph & h);

/// Whether a 0-round map (vertex -> color) is a correct relaxed sinkless
/// orientation algorithm relative to H.
bool zero_round_map_correct(const IdGraph & h, const std::vector<std::uint32_t> & map);

class TableTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lookup table of an algorithm on H-labeled delta-regular edge-colored trees.
///  One:  key {x, y_1..y_delta} (y_c the color-c neighbor) -> out-color mask
///  Half: key {c, x, y}                                   -> 1 iff x orients out
///  Zero: key {x}                                         -> out-color mask
struct RoundTable {
    enum class Radius { Zero, Half, One };
    Radius radius = Radius::One;
    std::map<std::vector<Vertex>, std::uint32_t> table;
};

/// All radius-1 views consistent with H (neighbor labels pairwise distinct
/// and distinct from the center).
std::vector<std::vector<Vertex>> radius_one_views(const IdGraph & h);

struct EliminationResult {
    std::optional<RoundTable> table;
    // Set when the input table is incorrect: two views that glue along an
    // edge of `color` with both endpoints orienting it out (Half), or a view
    // making its center a sink (Zero).
    std::vector<Vertex> view_u, view_v;
    std::uint32_t color = 0;
    std::string detail;
};

/// One -> Half via "some extension orients out"; Half -> Zero via "every
/// neighbor is oriented away". Requires delta = 3 and nV <= 12.
EliminationResult eliminate_half_round(const RoundTable & alg, const IdGraph & h);

/// Reads a 0-round table as a map vertex -> smallest out color (0 if none).
std::vector<std::uint32_t> zero_table_map(const RoundTable & t, const IdGraph & h);

} // namespace probelab
