#pragma once

#include <probelab/graph.hpp>
#include <probelab/probe.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace probelab {

struct HighGirthGraph {
    PortedGraph graph;
    std::uint32_t chromatic = 0; // exact
    std::size_t girth = 0;
    std::size_t rounded_from = 0; // requested size when it had to be adjusted
};

/// c = 2: odd cycle of length n (rounded up to odd). c = 3: random maximal
/// graph with girth >= 5, max degree 5..7 and exact chromatic number > 3 (n <= 64). Larger c
/// throws InfeasibleParameters.
HighGirthGraph gen_high_girth_chromatic(std::uint32_t c, std::size_t n, std::uint64_t seed);

/// Exact chromatic number by backtracking (n <= 64).
std::uint32_t chromatic_number_exact(const PortedGraph & g);

/// Node of the lazy host: a core node, or a tree node reached from one by a
/// sequence of ports.
struct HostKey {
    std::uint32_t core = 0;
    std::vector<Port> path;
    friend auto operator<=>(const HostKey &, const HostKey &) = default;
};

/// Infinite Δ_H-regular host containing the core as an induced subgraph with
/// no cycles outside it. IDs are uniform in [1, id_range] and ports are
/// permuted per node; both are pure functions of (seed, key).
class LazyHost {
public:
    LazyHost(PortedGraph core, std::uint32_t delta_h, std::uint64_t id_range, std::uint64_t seed);

    const PortedGraph & core() const noexcept { return core_; }
    std::uint32_t degree() const noexcept { return delta_h_; }
    std::uint64_t id_range() const noexcept { return id_range_; }

    NodeId id(const HostKey & x);
    /// Neighbor on port p and the port back.
    std::pair<HostKey, Port> neighbor(const HostKey & x, Port p);
    std::size_t materialized() const noexcept { return ids_.size(); }

private:
    PortedGraph core_;
    std::uint32_t delta_h_;
    std::uint64_t id_range_;
    std::uint64_t seed_;
    std::map<HostKey, NodeId> ids_;
    struct SparsePerm {
        std::unordered_map<std::uint32_t, std::uint32_t> slot_to_port; // 0-based, identity when absent
        std::unordered_map<std::uint32_t, std::uint32_t> port_to_slot;
    };
    std::map<HostKey, SparsePerm> perms_;

    const SparsePerm & perm(const HostKey & x);
    Port port_of_slot(const HostKey & x, std::uint32_t slot);
    std::uint32_t slot_of_port(const HostKey & x, Port port);
};

/// Smallest Δ_H with (Δ_H - 1)^ceil(g/4) >= n^m, and at least max core degree + 1.
std::uint32_t host_degree(std::size_t n, std::uint32_t m, std::size_t girth, std::uint32_t core_delta);

/// n^m, saturating at 2^63.
std::uint64_t id_range(std::size_t n, std::uint32_t m);

struct Escape {
    enum class Kind { DuplicateId, FarVertex };
    Kind kind = Kind::DuplicateId;
    NodeId query = 0; // core node ID
    std::string detail;
};

std::string escape_name(Escape::Kind k);

/// Built-in deterministic c-coloring candidates for n-node trees:
/// "constant", "greedy-bfs" (BFS up to `budget` probes, parity of the
/// distance to the smallest ID seen), "parity" (ID mod 2), and "deep" (BFS
/// up to `budget` probes, then a constant).
ProbeAlgorithm coloring_baseline(const std::string & name, std::uint32_t c, std::uint64_t budget);

struct FoolingCertificate {
    NodeId v = 0;
    NodeId w = 0;
    Symbol color = 0;
    PortedGraph tree;
    ProbeTranscript tv, tw;
    bool replay_ok = false;
};

struct FoolingConfig {
    std::uint32_t c = 2;
    std::size_t n = 1001;
    std::uint32_t m = 6;             // IDs uniform in [n^m]
    std::optional<std::uint32_t> delta_h;
    std::optional<std::uint64_t> probe_budget;
};

struct FoolingOutcome {
    std::optional<FoolingCertificate> certificate;
    std::optional<Escape> escape;
    std::vector<Symbol> colors;        // by core node index; -1 where the query failed
    std::vector<std::string> failures; // per failed query
    std::string note;                  // why neither a certificate nor an escape was produced
    std::uint32_t delta_h = 0;
    std::size_t girth = 0;
    std::uint64_t max_probes = 0;
};

/// Runs `alg` on every core node of a lazy host and extracts a certificate
/// for a monochromatic core edge, or reports the escape event.
FoolingOutcome fool_coloring_algorithm(const ProbeAlgorithm & alg, const FoolingConfig & cfg, std::uint64_t seed);

/// Same experiment on a caller-built core.
FoolingOutcome fool_coloring_algorithm(const ProbeAlgorithm & alg, const HighGirthGraph & core,
    const FoolingConfig & cfg, std::uint64_t seed);

/// Replays both certificate queries on the tree and compares transcripts.
bool replay_certificate(const ProbeAlgorithm & alg, const FoolingCertificate & cert, std::size_t n);

struct RateEstimate {
    std::uint64_t hits = 0;
    std::uint64_t trials = 0;
    double rate = 0;
    double bound = 0;
    double ratio = 0; // rate / bound
};

/// Fraction of trials in which q uniform draws from [m] repeat, against the
/// birthday bound q(q-1)/(2m).
RateEstimate duplicate_id_rate(std::uint64_t q, std::uint64_t m, std::uint64_t trials, std::uint64_t seed);

enum class GuessStrategy { First, Random, Spread };
GuessStrategy parse_guess_strategy(const std::string & s);

/// Marks n_marked of N slots uniformly; the strategy names I_size slots
/// without seeing the marks; the win rate is compared to I_size*n_marked/N.
RateEstimate guessing_game(std::uint64_t N, std::uint64_t n_marked, std::uint64_t I_size, GuessStrategy strategy,
    std::uint64_t trials, std::uint64_t seed);

} // namespace probelab
