#include <probelab/graph_io.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

namespace probelab {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

std::size_t line_of(const std::string & text, std::size_t byte)
{
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

json parse(const std::string & text)
{
    try {
        return json::parse(text);
    }
    catch (const json::parse_error & e) {
        throw ParseError(std::string("malformed JSON: ") + e.what(), line_of(text, e.byte));
    }
}

template <typename T>
T field(const json & j, const char * key)
{
    if (!j.contains(key))
        throw ParseError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    }
    catch (const json::exception & e) {
        throw ParseError(std::string("bad field '") + key + "': " + e.what());
    }
}

} // namespace

std::string write_graph(const PortedGraph & g)
{
    json j;
    j["version"] = kFormatVersion;
    j["n"] = g.node_count();
    j["delta"] = g.delta();
    j["ids"] = g.ids();
    json adj = json::array();
    json colors = json::array();
    json labels = json::array();
    for (NodeIndex v = 0; v < g.node_count(); ++v) {
        json row = json::array(), crow = json::array(), lrow = json::array();
        for (Port p = 1; p <= g.degree(v); ++p) {
            const auto & e = g.at(v, p);
            row.push_back({p, e.neighbor, e.back_port});
            crow.push_back(g.edge_color(v, p));
            lrow.push_back(g.input_label(v, p));
        }
        adj.push_back(std::move(row));
        colors.push_back(std::move(crow));
        labels.push_back(std::move(lrow));
    }
    j["adjacency"] = std::move(adj);
    if (g.has_edge_colors())
        j["edge_colors"] = std::move(colors);
    if (g.has_input_labels())
        j["input_labels"] = std::move(labels);
    return j.dump(1) + "\n";
}

PortedGraph read_graph(const std::string & text)
{
    json j = parse(text);
    if (!j.is_object())
        throw ParseError("graph file must be a JSON object");
    if (field<int>(j, "version") != kFormatVersion)
        throw ParseError("unsupported graph format version");
    auto n = field<std::size_t>(j, "n");
    auto delta = field<std::uint32_t>(j, "delta");
    auto ids = field<std::vector<NodeId>>(j, "ids");
    auto adj = field<std::vector<std::vector<std::array<std::uint64_t, 3>>>>(j, "adjacency");
    if (ids.size() != n || adj.size() != n)
        throw ParseError("ids/adjacency length does not match n");

    std::vector<std::vector<NodeIndex>> nbrs(n);
    for (NodeIndex v = 0; v < n; ++v) {
        nbrs[v].resize(adj[v].size());
        for (std::size_t i = 0; i < adj[v].size(); ++i) {
            const auto & [port, nbr, back] = adj[v][i];
            if (port != i + 1 || nbr >= n)
                throw ParseError("bad adjacency entry at node " + std::to_string(v));
            nbrs[v][i] = static_cast<NodeIndex>(nbr);
        }
    }
    PortedGraph g;
    try {
        g = PortedGraph::from_neighbor_lists(delta, ids, nbrs);
    }
    catch (const ContractBreach & e) {
        throw ParseError(std::string("inconsistent adjacency: ") + e.what());
    }
    for (NodeIndex v = 0; v < n; ++v)
        for (std::size_t i = 0; i < adj[v].size(); ++i)
            if (g.at(v, static_cast<Port>(i + 1)).back_port != adj[v][i][2])
                throw ParseError("reciprocal port mismatch at node " + std::to_string(v));

    if (j.contains("edge_colors")) {
        auto colors = field<std::vector<std::vector<int>>>(j, "edge_colors");
        if (colors.size() != n)
            throw ParseError("edge_colors length does not match n");
        for (NodeIndex v = 0; v < n; ++v) {
            if (colors[v].size() != g.degree(v))
                throw ParseError("edge_colors row length mismatch at node " + std::to_string(v));
            for (Port p = 1; p <= g.degree(v); ++p)
                g.set_edge_color(v, p, colors[v][p - 1]);
        }
    }
    if (j.contains("input_labels")) {
        auto labels = field<std::vector<std::vector<std::int32_t>>>(j, "input_labels");
        if (labels.size() != n)
            throw ParseError("input_labels length does not match n");
        for (NodeIndex v = 0; v < n; ++v) {
            if (labels[v].size() != g.degree(v))
                throw ParseError("input_labels row length mismatch at node " + std::to_string(v));
            for (Port p = 1; p <= g.degree(v); ++p)
                g.set_input_label(v, p, labels[v][p - 1]);
        }
    }
    if (auto err = g.validate())
        throw ParseError("invalid graph: " + *err);
    return g;
}

std::string write_labeling(const HalfEdgeLabeling & l, const std::string & kind)
{
    json j;
    j["version"] = kFormatVersion;
    j["kind"] = kind;
    j["alphabet"] = l.alphabet;
    j["half_edges"] = l.half_edges;
    j["nodes"] = l.nodes;
    return j.dump(1) + "\n";
}

HalfEdgeLabeling read_labeling(const std::string & text, std::string * kind)
{
    json j = parse(text);
    if (!j.is_object())
        throw ParseError("labeling file must be a JSON object");
    if (field<int>(j, "version") != kFormatVersion)
        throw ParseError("unsupported labeling format version");
    HalfEdgeLabeling l;
    l.alphabet = field<std::uint32_t>(j, "alphabet");
    l.half_edges = field<std::vector<std::vector<Symbol>>>(j, "half_edges");
    if (j.contains("nodes"))
        l.nodes = field<std::vector<Symbol>>(j, "nodes");
    if (kind)
        *kind = field<std::string>(j, "kind");
    return l;
}

std::string read_text_file(const std::string & path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string & path, const std::string & text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << text;
}

} // namespace probelab
