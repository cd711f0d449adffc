#pragma once

#include <probelab/graph.hpp>

#include <string>

namespace probelab {

/// Graph file: a JSON object with keys adjacency, delta, ids, n, version and
/// optionally edge_colors / input_labels (both shaped [node][port-1]).
/// Keys are emitted sorted, so write(read(write(g))) is byte-identical.
std::string write_graph(const PortedGraph & g);
PortedGraph read_graph(const std::string & text);

/// Labeling file: kind ("orientation" | "coloring" | "edge-coloring" | "labels"),
/// alphabet, half_edges [node][port-1], nodes [node].
std::string write_labeling(const HalfEdgeLabeling & l, const std::string & kind);
HalfEdgeLabeling read_labeling(const std::string & text, std::string * kind = nullptr);

std::string read_text_file(const std::string & path);
void write_text_file(const std::string & path, const std::string & text);

} // namespace probelab
