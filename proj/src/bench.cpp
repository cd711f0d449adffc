#include <probelab/bench.hpp>

#include <probelab/graph_io.hpp>
#include <probelab/lll.hpp>
#include <probelab/local.hpp>
#include <probelab/sinkless.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace probelab {

using nlohmann::json;

std::string write_manifest(const ExperimentManifest & m)
{
    json j{{"command", m.command}, {"solver", m.solver}, {"model", model_name(m.model)}, {"ladder", m.ladder},
        {"seeds", m.seeds}, {"delta", m.delta}, {"k", m.k}, {"check_criterion", m.check_criterion},
        {"output", m.output}};
    j["probe_budget"] = m.probe_budget ? json(*m.probe_budget) : json(nullptr);
    j["query_sample"] = m.query_sample ? json(*m.query_sample) : json(nullptr);
    return j.dump(2) + "\n";
}

ExperimentManifest read_manifest(const std::string & text)
{
    json j;
    try {
        j = json::parse(text);
    }
    catch (const json::parse_error & e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
    ExperimentManifest m;
    try {
        m.command = j.value("command", m.command);
        m.solver = j.at("solver").get<std::string>();
        m.model = parse_model(j.value("model", model_name(m.model)));
        m.ladder = j.at("ladder").get<std::vector<std::uint64_t>>();
        m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        m.delta = j.value("delta", m.delta);
        m.k = j.value("k", m.k);
        m.check_criterion = j.value("check_criterion", m.check_criterion);
        m.output = j.value("output", m.output);
        if (j.contains("probe_budget") && !j["probe_budget"].is_null())
            m.probe_budget = j["probe_budget"].get<std::uint64_t>();
        if (j.contains("query_sample") && !j["query_sample"].is_null())
            m.query_sample = j["query_sample"].get<std::uint64_t>();
    }
    catch (const json::exception & e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
    catch (const ContractBreach & e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
    return m;
}

namespace {

ModelConfig bench_model(const ExperimentManifest & m, std::uint64_t seed)
{
    ModelConfig cfg = m.model == Model::Lca ? ModelConfig::lca(seed) : ModelConfig::volume(seed);
    cfg.model = m.model;
    cfg.probe_budget = m.probe_budget;
    return cfg;
}

// Evenly spaced subset of [0, total).
std::vector<std::size_t> sample_indices(std::size_t total, std::optional<std::uint64_t> sample)
{
    std::vector<std::size_t> idx;
    const std::size_t k = sample ? std::min<std::size_t>(total, *sample) : total;
    for (std::size_t i = 0; i < k; ++i)
        idx.push_back(i * total / k);
    return idx;
}

void tally(BenchRow & row, const ProbeTranscript & t)
{
    ++row.queries;
    if (!t.ok())
        ++row.failures;
    row.max_probes = std::max(row.max_probes, t.probe_count);
    row.mean_probes += static_cast<double>(t.probe_count);
}

BenchRow run_point(const ExperimentManifest & m, std::uint64_t n, std::uint64_t seed)
{
    BenchRow row;
    row.n = n;
    row.seed = seed;
    try {
        const ModelConfig model = bench_model(m, seed);
        if (m.solver == "lll") {
            const auto g = gen_random_regular(n, m.delta, 3, seed);
            const auto inst = so_as_lll(g, 3);
            ShatterConfig cfg;
            cfg.check_criterion = m.check_criterion;
            LllQueryBatch batch(inst, cfg, seed, model);
            for (auto i : sample_indices(inst.events().size(), m.query_sample))
                tally(row, batch.run(inst.events()[i].id).transcript);
        }
        else if (m.solver == "sinkless") {
            const auto g = gen_random_regular(n, m.delta, 3, seed);
            SinklessConfig cfg;
            cfg.k = m.k;
            cfg.check_criterion = m.check_criterion;
            cfg.id_palette = sinkless_palette(g, cfg);
            const auto alg = sinkless_query_algorithm(cfg, m.delta, seed);
            const auto digest = g.digest();
            std::vector<HalfEdge> half_edges;
            for (NodeIndex v = 0; v < g.node_count(); ++v)
                for (Port p = 1; p <= g.degree(v); ++p)
                    half_edges.push_back({v, p});
            for (auto i : sample_indices(half_edges.size(), m.query_sample)) {
                const auto [v, p] = half_edges[i];
                tally(row, run_query(alg, g, Query{g.id(v), p}, model, digest));
            }
        }
        else if (m.solver == "coloring" || m.solver == "constant") {
            const auto g = gen_edge_colored_tree(n, m.delta, seed);
            const auto alg = m.solver == "coloring"
                ? logstar_coloring_algorithm(1, m.delta, 0)
                : ProbeAlgorithm{"constant", 1, [](Oracle &) { return std::vector<Symbol>{0}; }};
            const auto digest = g.digest();
            for (auto i : sample_indices(g.node_count(), m.query_sample))
                tally(row, run_query(alg, g, Query{g.id(static_cast<NodeIndex>(i)), std::nullopt}, model, digest));
        }
        else {
            throw ContractBreach("unknown solver '" + m.solver + "'");
        }
        if (row.queries)
            row.mean_probes /= static_cast<double>(row.queries);
    }
    catch (const std::exception & e) {
        row = BenchRow{};
        row.n = n;
        row.seed = seed;
        row.error = e.what();
    }
    return row;
}

std::string csv_field(const std::string & s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"')
            q += '"';
        q += c;
    }
    return q + "\"";
}

} // namespace

BenchReport bench_probe_scaling(const ExperimentManifest & m)
{
    if (m.solver != "lll" && m.solver != "sinkless" && m.solver != "coloring" && m.solver != "constant")
        throw ContractBreach("unknown solver '" + m.solver + "'");
    BenchReport r;
    r.solver = m.solver;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> points;
    for (auto n : m.ladder)
        for (auto seed : m.seeds)
            points.emplace_back(n, seed);
    r.rows.resize(points.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < points.size();)
            r.rows[i] = run_point(m, points[i].first, points[i].second);
    };
    const auto threads = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, points.size() ? points.size() : 1);
    std::vector<std::future<void>> jobs;
    for (std::size_t t = 0; t < threads; ++t)
        jobs.push_back(std::async(std::launch::async, worker));
    for (auto & j : jobs)
        j.get();
    std::sort(r.rows.begin(), r.rows.end(),
        [](const BenchRow & a, const BenchRow & b) { return std::tie(a.n, a.seed) < std::tie(b.n, b.seed); });
    r.ratios = doubling_ratios(r.rows);
    return r;
}

std::vector<DoublingRatio> doubling_ratios(const std::vector<BenchRow> & rows)
{
    std::map<std::uint64_t, std::uint64_t> worst;
    for (const auto & row : rows)
        if (row.error.empty()) {
            auto & w = worst[row.n];
            w = std::max(w, row.max_probes);
        }
    std::vector<DoublingRatio> out;
    for (auto it = worst.begin(); it != worst.end() && std::next(it) != worst.end(); ++it) {
        auto nx = std::next(it);
        DoublingRatio d;
        d.from = it->first;
        d.to = nx->first;
        d.ratio = it->second ? static_cast<double>(nx->second) / static_cast<double>(it->second)
                             : (nx->second ? INFINITY : 1.0);
        d.log_ratio = d.from > 1 ? std::log2(static_cast<double>(d.to)) / std::log2(static_cast<double>(d.from)) : 0;
        out.push_back(d);
    }
    return out;
}

std::string bench_csv(const BenchReport & r)
{
    std::ostringstream os;
    os << "solver,n,seed,queries,max_probes,mean_probes,failures,error\n";
    for (const auto & row : r.rows)
        os << r.solver << ',' << row.n << ',' << row.seed << ',' << row.queries << ',' << row.max_probes << ','
           << row.mean_probes << ',' << row.failures << ',' << csv_field(row.error) << '\n';
    return os.str();
}

std::string growth_report(const BenchReport & r)
{
    std::ostringstream os;
    os << "from,to,max_probe_ratio,log_ratio\n";
    for (const auto & d : r.ratios)
        os << d.from << ',' << d.to << ',' << d.ratio << ',' << d.log_ratio << '\n';
    return os.str();
}

Problem parse_problem(const std::string & text)
{
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    std::optional<std::uint32_t> arg;
    if (colon != std::string::npos) {
        try {
            arg = static_cast<std::uint32_t>(std::stoul(text.substr(colon + 1)));
        }
        catch (const std::exception &) {
            throw ContractBreach("bad problem parameter in '" + text + "'");
        }
    }
    if (name == "sinkless")
        return SinklessProblem{arg.value_or(3)};
    if (name == "coloring")
        return ColoringProblem{arg.value_or(2)};
    if (name == "edge-coloring")
        return EdgeColoringProblem{arg.value_or(3)};
    throw ContractBreach("unknown problem '" + text + "'");
}

int verify_file(const std::string & graph_path, const std::string & labeling_path, const Problem & problem,
    std::ostream & out)
{
    PortedGraph g;
    HalfEdgeLabeling l;
    try {
        g = read_graph(read_text_file(graph_path));
    }
    catch (const std::exception & e) {
        out << graph_path << ": " << e.what() << '\n';
        return 2;
    }
    try {
        l = read_labeling(read_text_file(labeling_path));
    }
    catch (const std::exception & e) {
        out << labeling_path << ": " << e.what() << '\n';
        return 2;
    }
    const auto v = verify_solution(g, l, problem);
    if (v.valid()) {
        out << "valid\n";
        return 0;
    }
    out << (v.status == Verdict::Status::Rejected ? "rejected: " : "invalid: ") << v.message;
    if (v.node)
        out << " (node id " << g.id(*v.node);
    if (v.node && v.port)
        out << ", port " << *v.port;
    if (v.node)
        out << ')';
    out << '\n';
    return 1;
}

} // namespace probelab
