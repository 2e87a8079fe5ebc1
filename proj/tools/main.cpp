// beeroute CLI: generate topologies, run single searches, and drive the
// paired graded vs non-graded comparison experiments.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "beeroute/errors.hpp"
#include "beeroute/harness.hpp"
#include "beeroute/rng.hpp"

using namespace beeroute;

namespace {

ExperimentConfig load_or_default(const std::string& path) {
    if (path.empty()) return ExperimentConfig{};
    return load_config(path);
}

nlohmann::ordered_json metrics_json(const RunMetrics& m) {
    nlohmann::ordered_json j;
    j["mode"] = m.graded ? "graded" : "nongraded";
    j["seed"] = m.seed;
    j["n"] = m.n;
    j["source"] = m.source;
    j["dest"] = m.dest;
    j["found"] = m.found();
    if (m.found()) {
        j["route"] = m.search.best_path->nodes;
        j["route_length_hops"] = m.route_hops();
        j["bottleneck_bw"] = m.search.best_path->bottleneck_bw;
    }
    j["cycles_used"] = m.search.cycles_used;
    j["nodes_explored"] = m.search.nodes_explored;
    j["scout_escapes"] = m.search.scout_escapes;
    j["nodes_selected"] = m.nodes_selected;
    j["throughput"] = m.throughput;
    j["mean_route_intensity"] = m.mean_route_intensity;
    j["e_over_t"] = m.search.e_over_t;
    j["wall_ms"] = m.search.wall_ms;
    return j;
}

void dump_grades(const ExperimentConfig& cfg, std::uint32_t n, std::uint64_t seed,
                 const std::string& path) {
    RunSetup setup = prepare_run(cfg, n, seed);
    const double interval = cfg.traffic.update_interval;
    for (int k = 1; k * interval <= cfg.warmup_time; ++k)
        advance_traffic(setup.states, cfg.traffic, k * interval);
    std::vector<QosSnapshot> snaps(setup.topology.node_count());
    for (NodeId v = 0; v < setup.topology.node_count(); ++v)
        snaps[v] = collect_qos(setup.topology, setup.states, cfg.traffic, v,
                               cfg.abc.threshold_bandwidth);
    const GradeNorms norms =
        cfg.grading.norms ? *cfg.grading.norms : GradeNorms::from_observed(snaps);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "node_id,grade,bandwidth_availability,congested,delay_proxy,"
           "node_density,resource_allocation\n";
    for (NodeId v = 0; v < setup.topology.node_count(); ++v) {
        const Grade g = level1_grade(snaps[v], norms, cfg.grading.weights);
        out << v << ',' << g.value << ',' << fmt_double(snaps[v].bandwidth_availability)
            << ',' << (snaps[v].congested ? 1 : 0) << ','
            << fmt_double(snaps[v].delay_proxy) << ','
            << fmt_double(snaps[v].node_density) << ','
            << fmt_double(snaps[v].resource_allocation) << '\n';
    }
}

void dump_traffic_trace(const ExperimentConfig& cfg, std::uint32_t n,
                        std::uint64_t seed, const std::string& path) {
    RunSetup setup = prepare_run(cfg, n, seed);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "time,link_a,link_b,T_l,B_a,intensity\n";
    const double interval = cfg.traffic.update_interval;
    auto emit_rows = [&](double t) {
        for (std::size_t i = 0; i < setup.states.size(); ++i) {
            const Link& l = setup.topology.links()[i];
            const double ba = available_bandwidth(
                l.capacity, cfg.traffic.per_flow_bandwidth * setup.states[i].load);
            out << fmt_double(t) << ',' << l.a << ',' << l.b << ','
                << fmt_double(setup.states[i].load) << ',' << fmt_double(ba) << ',';
            if (ba > 0.0)
                out << fmt_double(traffic_intensity(cfg.traffic.per_flow_bandwidth,
                                                    setup.states[i].load, ba));
            out << '\n';
        }
    };
    emit_rows(0.0);
    for (int k = 1; k * interval <= cfg.warmup_time; ++k) {
        advance_traffic(setup.states, cfg.traffic, k * interval);
        emit_rows(k * interval);
    }
}

void print_compare_summary(const ComparisonReport& report, const std::string& format) {
    if (format == "json") {
        nlohmann::ordered_json j;
        j["pairs"] = report.pairs.size();
        j["pairs_both_found"] = report.pairs_both_found;
        j["median_cycles_ratio"] = report.median_cycles_ratio;
        j["per_pair_median_cycles_ratio"] = report.per_pair_median_cycles_ratio;
        j["cycles_ratio_per_n"] = nlohmann::ordered_json::array();
        for (const auto& [n, r] : report.cycles_ratio_per_n)
            j["cycles_ratio_per_n"].push_back({{"n", n}, {"ratio", r}});
        j["aggregates"] = nlohmann::ordered_json::array();
        for (const AggregateRow& a : report.aggregates) {
            j["aggregates"].push_back({{"node_count", a.node_count},
                                       {"mode", a.graded ? "graded" : "nongraded"},
                                       {"runs", a.runs},
                                       {"found", a.found},
                                       {"mean_route_length", a.mean_route_length},
                                       {"mean_nodes_selected", a.mean_nodes_selected},
                                       {"mean_cycles", a.mean_cycles},
                                       {"mean_throughput", a.mean_throughput},
                                       {"mean_intensity", a.mean_intensity}});
        }
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::cout << "node_count,mode,runs,found,mean_route_length,"
                 "mean_nodes_selected,mean_cycles,mean_throughput,mean_intensity\n";
    for (const AggregateRow& a : report.aggregates) {
        std::cout << a.node_count << ',' << (a.graded ? "graded" : "nongraded")
                  << ',' << a.runs << ',' << a.found << ','
                  << fmt_double(a.mean_route_length) << ','
                  << fmt_double(a.mean_nodes_selected) << ','
                  << fmt_double(a.mean_cycles) << ','
                  << fmt_double(a.mean_throughput) << ','
                  << fmt_double(a.mean_intensity) << '\n';
    }
    std::cout << "# median_cycles_ratio=" << fmt_double(report.median_cycles_ratio)
              << " per_pair_median=" << fmt_double(report.per_pair_median_cycles_ratio)
              << " pairs_both_found=" << report.pairs_both_found << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graded-network bee-colony routing simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    app.add_option("--config", config_path, "experiment config JSON");

    // generate
    auto* gen = app.add_subcommand("generate", "emit a topology file");
    std::uint32_t gen_nodes = 64;
    std::uint64_t gen_seed = 1;
    std::string gen_out = "topology.json";
    gen->add_option("--nodes", gen_nodes, "node count");
    gen->add_option("--seed", gen_seed, "topology seed");
    gen->add_option("--out", gen_out, "output file");

    // route
    auto* route = app.add_subcommand("route", "run one search, print its row");
    std::uint32_t route_nodes = 64;
    std::uint64_t route_seed = 1;
    bool route_graded = true;
    std::string route_format = "csv";
    std::string grades_out, trace_out;
    route->add_option("--nodes", route_nodes, "node count");
    route->add_option("--seed", route_seed, "run seed");
    route->add_flag("--graded,!--no-graded", route_graded, "grading on/off");
    route->add_option("--format", route_format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    route->add_option("--grades", grades_out, "also dump per-node grades CSV");
    route->add_option("--traffic-trace", trace_out,
                      "also dump per-link load trajectory CSV");

    // compare
    auto* compare = app.add_subcommand("compare", "paired graded vs non-graded sweep");
    std::string cmp_out = "out";
    std::string cmp_format = "csv";
    compare->add_option("--out", cmp_out, "output directory");
    compare->add_option("--format", cmp_format, "summary format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    // sweep
    auto* sweep = app.add_subcommand("sweep", "vary one parameter across compares");
    std::string sweep_param = "threshold_bandwidth";
    std::vector<double> sweep_values;
    std::string sweep_out = "out";
    sweep->add_option("--param", sweep_param, "parameter to vary")
        ->check(CLI::IsMember({"threshold_bandwidth", "max_cycles",
                               "connection_radius", "warmup_time"}));
    sweep->add_option("--values", sweep_values, "values to sweep, comma separated")
        ->required()
        ->delimiter(',');
    sweep->add_option("--out", sweep_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // bad command line is a config problem
    }

    try {
        const ExperimentConfig cfg = load_or_default(config_path);

        // --nodes beats the config's node_count; the config beats the default
        if (cfg.topology.node_count > 0) {
            if (gen->count("--nodes") == 0) gen_nodes = cfg.topology.node_count;
            if (route->count("--nodes") == 0) route_nodes = cfg.topology.node_count;
        }

        if (gen->parsed()) {
            TopologyConfig tc = cfg.topology;
            tc.node_count = gen_nodes;
            tc.seed = gen_seed;
            save_topology(generate_topology(tc), gen_out);
            std::cout << "wrote " << gen_out << '\n';
        } else if (route->parsed()) {
            const RunMetrics m = run_single(cfg, route_nodes, route_seed, route_graded);
            if (route_format == "json") {
                std::cout << metrics_json(m).dump(2) << '\n';
            } else {
                std::cout << search_csv_header() << '\n'
                          << search_csv_row(m) << '\n';
            }
            if (!grades_out.empty())
                dump_grades(cfg, route_nodes, route_seed, grades_out);
            if (!trace_out.empty())
                dump_traffic_trace(cfg, route_nodes, route_seed, trace_out);
        } else if (compare->parsed()) {
            const ComparisonReport report = run_comparison(cfg);
            emit_outputs(report, cmp_out);
            print_compare_summary(report, cmp_format);
        } else if (sweep->parsed()) {
            namespace fs = std::filesystem;
            std::error_code ec;
            fs::create_directories(sweep_out, ec);
            if (ec) throw IoError("cannot create output directory: " + sweep_out);
            std::ofstream out(fs::path(sweep_out) / "sweep.csv");
            if (!out) throw IoError("cannot write sweep.csv");
            out << "param,value,mode,found,mean_route_length,mean_cycles,"
                   "mean_throughput,mean_intensity,median_cycles_ratio\n";
            for (double value : sweep_values) {
                ExperimentConfig swept = cfg;
                if (sweep_param == "threshold_bandwidth")
                    swept.abc.threshold_bandwidth = value;
                else if (sweep_param == "max_cycles")
                    swept.abc.max_cycles = static_cast<int>(value);
                else if (sweep_param == "connection_radius")
                    swept.topology.connection_radius = value;
                else
                    swept.warmup_time = value;
                const ComparisonReport report = run_comparison(swept);
                for (bool graded : {true, false}) {
                    int found = 0, runs = 0;
                    double len = 0, cyc = 0, thr = 0, inten = 0;
                    int rows = 0;
                    for (const AggregateRow& a : report.aggregates) {
                        if (a.graded != graded) continue;
                        found += a.found;
                        runs += a.runs;
                        len += a.mean_route_length;
                        cyc += a.mean_cycles;
                        thr += a.mean_throughput;
                        inten += a.mean_intensity;
                        ++rows;
                    }
                    out << sweep_param << ',' << fmt_double(value) << ','
                        << (graded ? "graded" : "nongraded") << ',' << found << ','
                        << fmt_double(len / rows) << ',' << fmt_double(cyc / rows)
                        << ',' << fmt_double(thr / rows) << ','
                        << fmt_double(inten / rows) << ','
                        << fmt_double(report.median_cycles_ratio) << '\n';
                }
                std::cout << sweep_param << '=' << fmt_double(value)
                          << " median_cycles_ratio="
                          << fmt_double(report.median_cycles_ratio) << '\n';
            }
        }
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
