#include <probelab/probe.hpp>

#include <probelab/idgraph.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace probelab {

namespace {

constexpr std::uint64_t kPrivateStream = 0x7072697661746531ULL;
constexpr std::uint64_t kSharedStream = 0x7368617265643131ULL;

} // namespace

ModelConfig ModelConfig::lca(std::uint64_t seed)
{
    ModelConfig c;
    c.model = Model::Lca;
    c.far_probes = true;
    c.randomness = {Randomness::Kind::Shared, seed};
    return c;
}

ModelConfig ModelConfig::volume(std::uint64_t seed)
{
    ModelConfig c;
    c.model = Model::Volume;
    c.far_probes = false;
    c.id_space.kind = IdSpace::Kind::Polynomial;
    c.id_space.exponent = 3.0;
    c.randomness = {Randomness::Kind::Private, seed};
    return c;
}

std::optional<std::string> ModelConfig::validate() const
{
    if (model != Model::Lca && far_probes)
        return "far probes are only available in the LCA model";
    if (id_space.kind == IdSpace::Kind::Polynomial && !(id_space.exponent >= 1.0))
        return "polynomial id space needs exponent >= 1";
    if (id_space.kind == IdSpace::Kind::HLabeled && !id_space.id_graph)
        return "h-labeled id space needs an id graph";
    return std::nullopt;
}

Model parse_model(const std::string & name)
{
    if (name == "lca" || name == "LCA")
        return Model::Lca;
    if (name == "volume" || name == "VOLUME")
        return Model::Volume;
    if (name == "local" || name == "local-sim" || name == "LOCAL-sim")
        return Model::LocalSim;
    throw ContractBreach("unknown model '" + name + "'");
}

std::string model_name(Model m)
{
    switch (m) {
    case Model::Lca:
        return "lca";
    case Model::Volume:
        return "volume";
    case Model::LocalSim:
        return "local-sim";
    }
    return "?";
}

std::optional<std::string> check_id_space(const PortedGraph & g, const ModelConfig & cfg)
{
    const auto n = static_cast<double>(std::max<std::size_t>(g.node_count(), 1));
    auto over = [&](double bound) -> std::optional<std::string> {
        for (NodeIndex v = 0; v < g.node_count(); ++v)
            if (g.id(v) == 0 || static_cast<double>(g.id(v)) > bound)
                return "id " + std::to_string(g.id(v)) + " outside [1, " + std::to_string(bound) + "]";
        return std::nullopt;
    };
    switch (cfg.id_space.kind) {
    case IdSpace::Kind::ExactN:
        return over(n);
    case IdSpace::Kind::Polynomial:
        return over(std::pow(n, cfg.id_space.exponent));
    case IdSpace::Kind::Exponential:
        return std::nullopt;
    case IdSpace::Kind::HLabeled:
        if (!cfg.id_space.id_graph)
            return "h-labeled id space without id graph";
        return h_labeling_violation(g, *cfg.id_space.id_graph);
    }
    return std::nullopt;
}

RandomTape private_randomness(NodeId id, const ModelConfig & cfg)
{
    switch (cfg.randomness.kind) {
    case Randomness::Kind::Private:
        return RandomTape(hash_words(cfg.randomness.seed, {kPrivateStream, id}));
    case Randomness::Kind::Shared:
        return RandomTape(hash_words(cfg.randomness.seed, {kSharedStream}));
    case Randomness::Kind::None:
        break;
    }
    throw ContractBreach("randomness requested from a deterministic model");
}

std::string probe_error_name(ProbeError::Kind k)
{
    switch (k) {
    case ProbeError::Kind::FarProbeViolation:
        return "FarProbeViolation";
    case ProbeError::Kind::PortOutOfRange:
        return "PortOutOfRange";
    case ProbeError::Kind::UnknownId:
        return "UnknownId";
    case ProbeError::Kind::ProbeBudgetExceeded:
        return "ProbeBudgetExceeded";
    }
    return "ProbeError";
}

std::string ProbeTranscript::dump() const
{
    std::ostringstream out;
    for (const auto & s : steps)
        out << "probe " << s.id << ' ' << s.port << " -> " << s.answer.node.id << ' ' << s.answer.node.degree << ' '
            << s.answer.label << '\n';
    out << "output ";
    if (failure) {
        out << "fail";
    }
    else if (output.empty()) {
        out << '-';
    }
    else {
        for (std::size_t i = 0; i < output.size(); ++i)
            out << (i ? "," : "") << output[i];
    }
    out << " probes " << probe_count << '\n';
    if (failure)
        out << "# " << *failure << '\n';
    return out.str();
}

Oracle::Oracle(const ModelConfig & cfg, Query query, NodeInfo root, std::uint64_t true_n) :
    cfg_(cfg), root_(root), advertised_n_(cfg.advertised_n ? cfg.advertised_n : true_n)
{
    if (auto err = cfg.validate())
        throw ContractBreach(*err);
    transcript_.query = query;
    known_.emplace(root.id, root);
}

ProbeAnswer Oracle::probe(NodeId id, Port port)
{
    if (cfg_.probe_budget && transcript_.probe_count >= *cfg_.probe_budget)
        throw ProbeError(ProbeError::Kind::ProbeBudgetExceeded,
            "probe budget " + std::to_string(*cfg_.probe_budget) + " exhausted");
    auto it = known_.find(id);
    if (it == known_.end() && !cfg_.far_probes)
        throw ProbeError(ProbeError::Kind::FarProbeViolation, "probe of unseen id " + std::to_string(id));
    if (port == 0 || (it != known_.end() && port > it->second.degree))
        throw ProbeError(ProbeError::Kind::PortOutOfRange,
            "port " + std::to_string(port) + " out of range at id " + std::to_string(id));
    ProbeAnswer a = resolve(id, port);
    ++transcript_.probe_count;
    transcript_.steps.push_back({id, port, a});
    known_.emplace(a.node.id, a.node);
    return a;
}

const NodeInfo & Oracle::info(NodeId id) const
{
    auto it = known_.find(id);
    if (it == known_.end())
        throw ProbeError(ProbeError::Kind::FarProbeViolation, "local information of unseen id " + std::to_string(id));
    return it->second;
}

RandomTape Oracle::randomness(NodeId id) const
{
    if (cfg_.randomness.kind == Randomness::Kind::Private && !seen(id))
        throw ProbeError(ProbeError::Kind::FarProbeViolation, "randomness of unseen id " + std::to_string(id));
    return private_randomness(id, cfg_);
}

NodeInfo node_info(const PortedGraph & g, NodeIndex v, const ModelConfig & cfg)
{
    NodeInfo i;
    i.id = g.id(v);
    i.degree = g.degree(v);
    if (cfg.randomness.kind != Randomness::Kind::None)
        i.digest = private_randomness(i.id, cfg).digest();
    return i;
}

namespace {

NodeIndex locate(const PortedGraph & g, NodeId id)
{
    auto v = g.index_of(id);
    if (!v)
        throw ProbeError(ProbeError::Kind::UnknownId, "no node with id " + std::to_string(id));
    return *v;
}

} // namespace

GraphOracle::GraphOracle(const PortedGraph & g, const ModelConfig & cfg, Query query,
    std::optional<std::uint64_t> digest) :
    Oracle(cfg, query, node_info(g, locate(g, query.node), cfg), g.node_count()), g_(g)
{
    transcript().graph_digest = digest ? *digest : g.digest();
    if (query.port && (*query.port == 0 || *query.port > g.degree(locate(g, query.node))))
        throw ProbeError(ProbeError::Kind::PortOutOfRange, "query port out of range");
}

ProbeAnswer GraphOracle::resolve(NodeId id, Port port)
{
    NodeIndex v = locate(g_, id);
    if (port > g_.degree(v))
        throw ProbeError(ProbeError::Kind::PortOutOfRange,
            "port " + std::to_string(port) + " out of range at id " + std::to_string(id));
    const auto & e = g_.at(v, port);
    ProbeAnswer a;
    a.node = node_info(g_, e.neighbor, config());
    a.back_port = e.back_port;
    a.label = g_.input_label(e.neighbor, e.back_port);
    return a;
}

ProbeTranscript run_on_oracle(const ProbeAlgorithm & alg, Oracle & oracle)
{
    try {
        auto out = alg.run(oracle);
        for (Symbol s : out)
            if (s < 0 || static_cast<std::uint64_t>(s) >= alg.alphabet)
                throw QueryFailure("output symbol " + std::to_string(s) + " outside alphabet");
        oracle.transcript().output = std::move(out);
    }
    catch (const ProbeError & e) {
        oracle.transcript().failure = probe_error_name(e.kind()) + ": " + e.what();
    }
    catch (const QueryFailure & e) {
        oracle.transcript().failure = e.what();
    }
    return oracle.transcript();
}

ProbeTranscript run_query(const ProbeAlgorithm & alg, const PortedGraph & g, const Query & query,
    const ModelConfig & cfg, std::optional<std::uint64_t> digest)
{
    std::optional<GraphOracle> oracle;
    try {
        oracle.emplace(g, cfg, query, digest);
    }
    catch (const ProbeError & e) {
        ProbeTranscript t;
        t.query = query;
        t.graph_digest = digest ? *digest : g.digest();
        t.failure = probe_error_name(e.kind()) + ": " + e.what();
        return t;
    }
    return run_on_oracle(alg, *oracle);
}

ProbeAnswer LocalView::edge(NodeId id, Port port)
{
    auto it = cache_.find(key(id, port));
    if (it != cache_.end())
        return it->second;
    ProbeAnswer a = oracle_.probe(id, port);
    cache_.emplace(key(id, port), a);
    if (!oracle_.has_labels()) {
        ProbeAnswer back;
        back.node = oracle_.info(id);
        back.back_port = port;
        cache_.emplace(key(a.node.id, a.back_port), back);
    }
    return a;
}

std::vector<NodeId> LocalView::neighbors(NodeId id)
{
    std::vector<NodeId> out;
    const auto d = degree(id);
    out.reserve(d);
    for (Port p = 1; p <= d; ++p)
        out.push_back(neighbor(id, p));
    return out;
}

Witness extract_witness(const std::vector<ProbeTranscript> & transcripts, const PortedGraph & g)
{
    const auto digest = g.digest();
    std::vector<char> in_s(g.node_count(), 0);
    for (const auto & t : transcripts) {
        if (t.graph_digest != digest)
            throw ContractBreach("transcript was produced on a different graph");
        auto q = g.index_of(t.query.node);
        if (!q)
            throw ContractBreach("transcript query not in graph");
        in_s[*q] = 1;
        for (const auto & s : t.steps) {
            auto v = g.index_of(s.id);
            if (!v || s.port > g.degree(*v) || g.id(g.neighbor(*v, s.port)) != s.answer.node.id)
                throw ContractBreach("transcript step inconsistent with graph");
            in_s[*v] = 1;
        }
    }
    Witness w;
    std::vector<NodeIndex> map(g.node_count(), Witness::npos);
    auto add = [&](NodeIndex v) {
        if (map[v] == Witness::npos) {
            map[v] = static_cast<NodeIndex>(w.origin.size());
            w.origin.push_back(v);
        }
    };
    for (NodeIndex v = 0; v < g.node_count(); ++v)
        if (in_s[v]) {
            ++w.probed;
            add(v);
        }
    for (NodeIndex v = 0; v < g.node_count(); ++v)
        if (in_s[v])
            for (const auto & e : g.ports(v))
                add(e.neighbor);
    w.core_size = w.origin.size();

    NodeId next_id = 1;
    for (NodeId id : g.ids())
        next_id = std::max(next_id, id + 1);

    // Pendant leaves go after the core; each replaces one edge leaving the core.
    std::vector<std::vector<NodeIndex>> nbrs(w.core_size);
    std::vector<NodeId> ids;
    for (NodeIndex i = 0; i < w.core_size; ++i)
        ids.push_back(g.id(w.origin[i]));
    for (NodeIndex i = 0; i < w.core_size; ++i) {
        NodeIndex v = w.origin[i];
        for (const auto & e : g.ports(v)) {
            if (map[e.neighbor] != Witness::npos) {
                nbrs[i].push_back(map[e.neighbor]);
            }
            else {
                auto leaf = static_cast<NodeIndex>(nbrs.size());
                nbrs.push_back({i});
                ids.push_back(next_id++);
                w.origin.push_back(Witness::npos);
                nbrs[i].push_back(leaf);
            }
        }
    }
    w.graph = PortedGraph::from_neighbor_lists(g.delta(), ids, nbrs);
    for (NodeIndex i = 0; i < w.core_size; ++i) {
        NodeIndex v = w.origin[i];
        for (Port p = 1; p <= g.degree(v); ++p) {
            if (g.has_edge_colors())
                w.graph.set_edge_color(i, p, g.edge_color(v, p));
            if (g.has_input_labels()) {
                w.graph.set_input_label(i, p, g.input_label(v, p));
                const auto & e = w.graph.at(i, p);
                if (e.neighbor >= w.core_size) {
                    const auto & orig = g.at(v, p);
                    w.graph.set_input_label(e.neighbor, e.back_port, g.input_label(orig.neighbor, orig.back_port));
                }
            }
        }
    }
    return w;
}

} // namespace probelab
