#pragma once

#include <probelab/graph.hpp>
#include <probelab/probe.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace probelab {

/// Everything needed to rerun a benchmark.
struct ExperimentManifest {
    std::string command = "bench";
    std::string solver = "lll"; // lll | sinkless | coloring | constant
    Model model = Model::Lca;
    std::vector<std::uint64_t> ladder;
    std::vector<std::uint64_t> seeds;
    std::uint32_t delta = 6;
    int k = 2;                                 // sinkless MIS power, coloring distance
    std::optional<std::uint64_t> probe_budget;
    std::optional<std::uint64_t> query_sample; // queries per (n, seed); all when unset
    bool check_criterion = true;
    std::string output;                        // CSV path, empty for stdout
};

std::string write_manifest(const ExperimentManifest & m);
ExperimentManifest read_manifest(const std::string & text);

struct BenchRow {
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    std::uint64_t queries = 0;
    std::uint64_t max_probes = 0;
    double mean_probes = 0;
    std::uint64_t failures = 0;
    std::string error; // setup error; the row carries no measurements
};

struct DoublingRatio {
    std::uint64_t from = 0;
    std::uint64_t to = 0;
    double ratio = 0;     // max probes at `to` over max probes at `from`
    double log_ratio = 0; // log2(to) / log2(from)
};

struct BenchReport {
    std::string solver;
    std::vector<BenchRow> rows; // sorted by (n, seed)
    std::vector<DoublingRatio> ratios;
};

/// Builds the instance for every (n, seed), runs the solver's queries and
/// meters them. (n, seed) points run concurrently.
BenchReport bench_probe_scaling(const ExperimentManifest & m);

/// Ratios of the worst max_probes per n between consecutive ladder points.
std::vector<DoublingRatio> doubling_ratios(const std::vector<BenchRow> & rows);

std::string bench_csv(const BenchReport & r);
std::string growth_report(const BenchReport & r);

/// Checks a labeling file against a graph file. Returns the exit status
/// (0 valid, 1 violation or rejected labeling, 2 unreadable input) and
/// prints the verdict.
int verify_file(const std::string & graph_path, const std::string & labeling_path, const Problem & problem,
    std::ostream & out);

/// Problem from its CLI name: sinkless[:d], coloring[:c], edge-coloring[:c].
Problem parse_problem(const std::string & text);

} // namespace probelab
