#include <probelab/adversary.hpp>
#include <probelab/bench.hpp>
#include <probelab/graph_io.hpp>
#include <probelab/idgraph.hpp>
#include <probelab/lll.hpp>
#include <probelab/local.hpp>
#include <probelab/sinkless.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

using namespace probelab;

namespace {

constexpr int kUsage = 2;
constexpr int kInfeasible = 3;

struct Globals {
    std::uint64_t seed = 1;
    std::string model = "lca";
    std::string out;
    std::uint64_t advertised_n = 0;
    std::optional<std::uint64_t> probe_budget;
};

void emit(const Globals & g, const std::string & text)
{
    if (g.out.empty())
        std::cout << text;
    else
        write_text_file(g.out, text);
}

ModelConfig model_config(const Globals & g)
{
    const Model m = parse_model(g.model);
    ModelConfig cfg = m == Model::Lca ? ModelConfig::lca(g.seed) : ModelConfig::volume(g.seed);
    cfg.model = m;
    cfg.advertised_n = g.advertised_n;
    cfg.probe_budget = g.probe_budget;
    if (auto err = cfg.validate())
        throw ContractBreach(*err);
    return cfg;
}

PortedGraph load_graph(const std::string & path) { return read_graph(read_text_file(path)); }

HalfEdgeLabeling node_labeling(const PortedGraph & g, std::uint32_t alphabet, const std::vector<Symbol> & labels)
{
    auto l = HalfEdgeLabeling::for_graph(g, alphabet);
    l.nodes = labels;
    return l;
}

std::string values_json(const std::vector<std::pair<VarId, Value>> & values)
{
    std::map<VarId, Value> m(values.begin(), values.end());
    return write_assignment(m);
}

// Smallest k >= start whose contracted instance passes the criterion.
int sinkless_k(const PortedGraph & g, SinklessConfig cfg, int max_k)
{
    for (int k = cfg.k; k <= max_k; ++k) {
        cfg.k = k;
        const auto dec = cluster_decompose(g, k, sinkless_palette(g, cfg));
        const auto inst = contracted_lll(dec);
        if (inst.events().empty() || check_criterion(inst, Criterion{Criterion::Kind::Polynomial, cfg.lll.c}).holds)
            return k;
        std::cerr << "k = " << k << ": contracted instance fails the criterion, raising k\n";
    }
    throw InfeasibleParameters("no k <= " + std::to_string(max_k) + " passes the criterion");
}

} // namespace

int main(int argc, char ** argv)
{
    CLI::App app{"probelab: probe-model experiments for local graph problems"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals G;
    app.add_option("--seed", G.seed, "Random seed");
    app.add_option("--model", G.model, "lca | volume | local-sim");
    app.add_option("--out", G.out, "Output file (default stdout)");
    app.add_option("--advertised-n", G.advertised_n, "Node count told to the algorithm (0: true count)");
    app.add_option("--probe-budget", G.probe_budget, "Probe budget per query");

    // gen-tree
    std::size_t n = 256;
    std::uint32_t delta = 3;
    std::size_t girth_target = 3;
    auto * gen_tree = app.add_subcommand("gen-tree", "Random edge-colored tree");
    gen_tree->add_option("--n", n)->required();
    gen_tree->add_option("--delta", delta);
    gen_tree->callback([&] { emit(G, write_graph(gen_edge_colored_tree(n, delta, G.seed))); });

    auto * gen_regular = app.add_subcommand("gen-regular", "Random regular graph with girth boosting");
    gen_regular->add_option("--n", n)->required();
    gen_regular->add_option("--delta", delta);
    gen_regular->add_option("--girth", girth_target, "Delete edges until the girth is at least this");
    gen_regular->callback([&] {
        RegularGraphReport rep;
        auto g = gen_random_regular(n, delta, girth_target, G.seed, &rep);
        std::cerr << "deleted edges: " << rep.deleted_edges << ", girth: " << rep.girth << "\n";
        emit(G, write_graph(g));
    });

    // idgraph
    auto * idg = app.add_subcommand("idgraph", "ID graphs");
    idg->require_subcommand(1);
    std::uint32_t nV = 60, R = 1;
    std::string id_file, tree_file;
    int exit_code = 0;
    auto * idg_build = idg->add_subcommand("build", "Random ID graph construction");
    idg_build->add_option("--nv", nV);
    idg_build->add_option("--delta", delta);
    idg_build->add_option("--r", R);
    idg_build->callback([&] { emit(G, write_id_graph(build_id_graph(nV, delta, R, G.seed))); });
    auto * idg_verify = idg->add_subcommand("verify", "Check the ID graph properties");
    idg_verify->add_option("file", id_file)->required();
    idg_verify->callback([&] {
        const auto r = verify_id_graph(read_id_graph(read_text_file(id_file)));
        emit(G, r.summary() + "\n");
        exit_code = r.passes() ? 0 : 1;
    });
    auto * idg_label = idg->add_subcommand("label", "Proper H-labeling of an edge-colored tree");
    idg_label->add_option("--idgraph", id_file)->required();
    idg_label->add_option("--tree", tree_file)->required();
    idg_label->callback([&] {
        const auto h = read_id_graph(read_text_file(id_file));
        auto tree = load_graph(tree_file);
        std::vector<NodeId> ids;
        for (auto v : proper_h_labeling(tree, h, G.seed))
            ids.push_back(IdGraph::to_id(v));
        tree.set_ids(std::move(ids));
        emit(G, write_graph(tree));
    });
    auto * idg_count = idg->add_subcommand("count", "Number of proper H-labelings of a tree");
    idg_count->add_option("--idgraph", id_file)->required();
    idg_count->add_option("--tree", tree_file)->required();
    idg_count->callback([&] {
        const auto c = count_h_labelings(load_graph(tree_file), read_id_graph(read_text_file(id_file)));
        emit(G, c.str() + "\n");
    });
    auto * idg_zero = idg->add_subcommand("zeroround", "Decide whether a 0-round algorithm exists");
    idg_zero->add_option("file", id_file)->required();
    idg_zero->callback([&] {
        const auto r = zero_round_so_exists(read_id_graph(read_text_file(id_file)));
        if (!r) {
            emit(G, "undecided: Property 5 does not hold exactly and nV > 16\n");
            exit_code = 1;
            return;
        }
        std::ostringstream os;
        os << (r->exists ? "exists" : "impossible") << " ("
           << (r->method == ZeroRoundResult::Method::Exhaustive ? "exhaustive" : "structural") << ")";
        if (!r->detail.empty())
            os << ": " << r->detail;
        os << "\n";
        emit(G, os.str());
    });

    // lll
    auto * lll = app.add_subcommand("lll", "Lovasz local lemma instances");
    lll->require_subcommand(1);
    std::string lll_file, criterion = "poly:1", method = "shatter";
    std::uint64_t event = 0;
    auto * lll_check = lll->add_subcommand("check", "Check an LLL criterion");
    auto * lll_solve_cmd = lll->add_subcommand("solve", "Global solve");
    auto * lll_query_cmd = lll->add_subcommand("query", "Values of one event's variables via probes");
    for (auto * s : {lll_check, lll_solve_cmd, lll_query_cmd}) {
        s->add_option("file", lll_file)->required();
        s->add_option("--criterion", criterion, "poly:<c> | exp | 4pd");
    }
    lll_solve_cmd->add_option("--method", method, "shatter | moser-tardos");
    lll_query_cmd->add_option("--event", event)->required();
    auto shatter_cfg = [&] {
        const auto crit = Criterion::parse(criterion);
        if (crit.kind != Criterion::Kind::Polynomial)
            throw ContractBreach("the pre-shattering solver uses the polynomial criterion");
        ShatterConfig cfg;
        cfg.c = crit.c;
        return cfg;
    };
    lll_check->callback([&] {
        const auto v = check_criterion(read_lll(read_text_file(lll_file)), Criterion::parse(criterion));
        std::ostringstream os;
        os << (v.holds ? "holds" : "fails") << ": p = " << v.p.num << "/" << v.p.den << ", d = " << v.d;
        if (!v.detail.empty())
            os << " (" << v.detail << ")";
        os << "\n";
        emit(G, os.str());
        exit_code = v.holds ? 0 : 1;
    });
    lll_solve_cmd->callback([&] {
        const auto inst = read_lll(read_text_file(lll_file));
        std::map<VarId, Value> a;
        if (method == "moser-tardos") {
            a = moser_tardos(inst, G.seed);
        }
        else if (method == "shatter") {
            const auto sol = lll_solve(inst, shatter_cfg(), G.seed);
            std::cerr << "dangerous events: " << sol.shatter.dangerous.size()
                      << ", largest component: " << sol.max_component << "\n";
            a = sol.assignment;
        }
        else {
            throw ContractBreach("method must be shatter or moser-tardos");
        }
        const auto bad = violated_events(inst, a);
        if (!bad.empty()) {
            std::cerr << bad.size() << " events still occur\n";
            exit_code = 1;
        }
        emit(G, write_assignment(a));
    });
    lll_query_cmd->callback([&] {
        const auto inst = read_lll(read_text_file(lll_file));
        const auto q = lll_query(inst, event, shatter_cfg(), G.seed, model_config(G));
        std::cerr << q.transcript.dump();
        if (!q.transcript.ok())
            exit_code = 1;
        emit(G, values_json(q.values));
    });

    // sinkless
    auto * sink = app.add_subcommand("sinkless", "Sinkless orientation");
    SinklessConfig scfg;
    std::string mode = "global", graph_file;
    int max_k = 6;
    sink->add_option("--n", n);
    sink->add_option("--delta", delta);
    sink->add_option("--k", scfg.k, "MIS power for the cluster decomposition");
    sink->add_option("--max-k", max_k, "Largest k tried when the criterion fails");
    sink->add_option("--mode", mode, "global | query");
    sink->add_option("--graph", graph_file, "Graph file (default: random regular graph)");
    sink->callback([&] {
        const auto g = graph_file.empty() ? gen_random_regular(n, delta, 3, G.seed) : load_graph(graph_file);
        scfg.k = sinkless_k(g, scfg, max_k);
        HalfEdgeLabeling l;
        if (mode == "global") {
            l = solve_sinkless(g, scfg, G.seed).labeling;
        }
        else if (mode == "query") {
            auto cfg = scfg;
            cfg.id_palette = sinkless_palette(g, cfg);
            const auto alg = sinkless_query_algorithm(cfg, g.delta(), G.seed);
            const auto model = model_config(G);
            const auto digest = g.digest();
            l = HalfEdgeLabeling::for_graph(g, 2);
            std::uint64_t max_probes = 0, failures = 0;
            for (NodeIndex v = 0; v < g.node_count(); ++v)
                for (Port p = 1; p <= g.degree(v); ++p) {
                    const auto t = run_query(alg, g, Query{g.id(v), p}, model, digest);
                    max_probes = std::max(max_probes, t.probe_count);
                    if (!t.ok()) {
                        ++failures;
                        continue;
                    }
                    l.at(v, p) = t.output[0];
                }
            std::cerr << "max probes: " << max_probes << ", failed queries: " << failures << "\n";
        }
        else {
            throw ContractBreach("mode must be global or query");
        }
        const auto verdict = verify_solution(g, l, SinklessProblem{3});
        std::cerr << "k = " << scfg.k << ", " << (verdict.valid() ? "valid" : "invalid: " + verdict.message) << "\n";
        exit_code = verdict.valid() ? 0 : 1;
        emit(G, write_labeling(l, "orientation"));
    });

    // color / mis
    int k = 1;
    auto * color = app.add_subcommand("color", "Distance-k coloring with O(log* n) color reduction");
    color->add_option("--k", k);
    color->add_option("--graph", graph_file)->required();
    color->callback([&] {
        const auto g = load_graph(graph_file);
        const auto r = logstar_coloring(g, k);
        std::cerr << "palette: " << r.palette << ", rounds: " << r.rounds << "\n";
        emit(G, write_labeling(node_labeling(g, static_cast<std::uint32_t>(r.palette),
                                   std::vector<Symbol>(r.colors.begin(), r.colors.end())),
                    "coloring"));
    });
    auto * mis = app.add_subcommand("mis", "Maximal independent set of G^k");
    mis->add_option("--k", k);
    mis->add_option("--graph", graph_file)->required();
    mis->callback([&] {
        const auto g = load_graph(graph_file);
        const auto in = mis_from_coloring(g, logstar_coloring(g, k).colors, k);
        emit(G, write_labeling(node_labeling(g, 2, std::vector<Symbol>(in.begin(), in.end())), "labels"));
    });

    // fool
    auto * fool = app.add_subcommand("fool", "Fooling harness against a deterministic coloring baseline");
    FoolingConfig fcfg;
    std::string alg_name = "greedy-bfs", cert_dir;
    std::optional<std::uint64_t> budget;
    fool->add_option("--c", fcfg.c);
    fool->add_option("--n", fcfg.n);
    fool->add_option("--m", fcfg.m, "IDs uniform in [n^m]");
    fool->add_option("--delta-h", fcfg.delta_h, "Host degree (default: smallest admissible)");
    fool->add_option("--alg", alg_name, "constant | greedy-bfs | parity | deep");
    fool->add_option("--budget", budget, "BFS probe budget (default: girth / 8)");
    fool->add_option("--cert-dir", cert_dir, "Write the certificate tree and transcripts here");
    fool->callback([&] {
        fcfg.probe_budget = G.probe_budget;
        const auto core = gen_high_girth_chromatic(fcfg.c, fcfg.n, G.seed);
        const auto alg = coloring_baseline(alg_name, fcfg.c, budget.value_or(core.girth / 8));
        const auto out = fool_coloring_algorithm(alg, core, fcfg, G.seed);
        std::ostringstream os;
        os << "core nodes " << core.graph.node_count() << ", chromatic " << core.chromatic << ", girth " << out.girth
           << ", host degree " << out.delta_h << ", max probes " << out.max_probes << "\n";
        if (out.escape) {
            os << "escape " << escape_name(out.escape->kind) << " at query " << out.escape->query << ": "
               << out.escape->detail << "\n";
        }
        else if (out.certificate) {
            const auto & c = *out.certificate;
            os << "certificate: nodes " << c.v << " and " << c.w << " both output " << c.color << " on a "
               << c.tree.node_count() << "-node tree, replay " << (c.replay_ok ? "ok" : "MISMATCH") << "\n";
            if (!cert_dir.empty()) {
                std::filesystem::create_directories(cert_dir);
                write_text_file(cert_dir + "/tree.json", write_graph(c.tree));
                write_text_file(cert_dir + "/v.transcript", c.tv.dump());
                write_text_file(cert_dir + "/w.transcript", c.tw.dump());
            }
            exit_code = c.replay_ok ? 0 : 1;
        }
        else {
            os << "no certificate: " << out.note << "\n";
            exit_code = 1;
        }
        emit(G, os.str());
    });

    // game
    auto * game = app.add_subcommand("game", "Probability experiments behind the fooling argument");
    std::string game_kind = "dup", strategy = "random";
    std::uint64_t q = 50, m_space = 10000, trials = 100000, N = 10000, marked = 10, I_size = 10;
    game->add_option("kind", game_kind, "dup | guess")->required();
    game->add_option("--q", q, "IDs drawn per trial (dup)");
    game->add_option("--m", m_space, "ID space size (dup)");
    game->add_option("--N", N, "Slots (guess)");
    game->add_option("--marked", marked, "Marked slots (guess)");
    game->add_option("--I", I_size, "Guesses (guess)");
    game->add_option("--strategy", strategy, "first | random | spread");
    game->add_option("--trials", trials);
    game->callback([&] {
        std::ostringstream os;
        if (game_kind == "dup") {
            const auto r = duplicate_id_rate(q, m_space, trials, G.seed);
            os << "q,m,trials,rate,bound,ratio\n"
               << q << ',' << m_space << ',' << trials << ',' << r.rate << ',' << r.bound << ',' << r.ratio << '\n';
        }
        else if (game_kind == "guess") {
            const auto r = guessing_game(N, marked, I_size, parse_guess_strategy(strategy), trials, G.seed);
            os << "N,marked,I,strategy,trials,rate,bound,ratio\n"
               << N << ',' << marked << ',' << I_size << ',' << strategy << ',' << trials << ',' << r.rate << ','
               << r.bound << ',' << r.ratio << '\n';
        }
        else {
            throw ContractBreach("game kind must be dup or guess");
        }
        emit(G, os.str());
    });

    // bench
    auto * bench = app.add_subcommand("bench", "Probe-scaling benchmark");
    ExperimentManifest man;
    std::string manifest_file;
    bench->add_option("--manifest", manifest_file, "Manifest file (overrides the flags below)");
    bench->add_option("--solver", man.solver, "lll | sinkless | coloring | constant");
    bench->add_option("--ladder", man.ladder, "Sizes")->delimiter(',');
    bench->add_option("--seeds", man.seeds, "Seeds")->delimiter(',');
    bench->add_option("--delta", man.delta);
    bench->add_option("--k", man.k);
    bench->add_option("--sample", man.query_sample, "Queries per (n, seed)");
    bench->callback([&] {
        if (!manifest_file.empty()) {
            man = read_manifest(read_text_file(manifest_file));
        }
        else {
            man.model = parse_model(G.model);
            man.probe_budget = G.probe_budget;
            man.output = G.out;
            if (man.seeds.empty())
                man.seeds = {G.seed};
        }
        if (man.ladder.empty())
            throw ContractBreach("empty ladder");
        const auto r = bench_probe_scaling(man);
        const auto csv = bench_csv(r);
        if (man.output.empty()) {
            std::cout << csv;
        }
        else {
            write_text_file(man.output, csv);
            write_text_file(man.output + ".manifest.json", write_manifest(man));
        }
        std::cerr << growth_report(r);
    });

    // verify
    auto * verify = app.add_subcommand("verify", "Check a labeling file against a graph file");
    std::string labeling_file, problem = "sinkless";
    verify->add_option("--graph", graph_file)->required();
    verify->add_option("--labeling", labeling_file)->required();
    verify->add_option("--problem", problem, "sinkless[:d] | coloring[:c] | edge-coloring[:c]");
    verify->callback([&] { exit_code = verify_file(graph_file, labeling_file, parse_problem(problem), std::cout); });

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError & e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kUsage;
    }
    catch (const InfeasibleParameters & e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kInfeasible;
    }
    catch (const CriterionViolated & e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kInfeasible;
    }
    catch (const ParseError & e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kUsage;
    }
    catch (const ContractBreach & e) {
        std::cerr << "usage: " << e.what() << "\n";
        return kUsage;
    }
    catch (const std::exception & e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
