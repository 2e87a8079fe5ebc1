#include "beeroute/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "beeroute/errors.hpp"
#include "beeroute/rng.hpp"

namespace beeroute {

ExperimentConfig::ExperimentConfig() {
    seeds.resize(200);
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = i + 1;
}

void ExperimentConfig::validate() const {
    // node_count is swept, so only validate the template's other fields
    TopologyConfig tc = topology;
    tc.node_count = 1;
    tc.validate();
    traffic.validate();
    abc.validate();
    if (grading.production_cutoff < -3 || grading.production_cutoff > 3)
        throw ConfigError("grading: production_cutoff must be in [-3, 3]");
    if (density_reference_n == 0)
        throw ConfigError("experiment: density_reference_n must be >= 1");
    if (node_counts.empty()) throw ConfigError("experiment: node_counts empty");
    if (seeds.empty()) throw ConfigError("experiment: seeds empty");
    if (!(warmup_time >= 0.0)) throw ConfigError("experiment: warmup_time < 0");
    for (std::uint32_t n : node_counts)
        if (n == 0) throw ConfigError("experiment: node_count 0");
    if (pair_policy == PairPolicy::Fixed) {
        for (std::uint32_t n : node_counts)
            if (fixed_source >= n || fixed_dest >= n)
                throw ConfigError("experiment: fixed endpoint out of range");
    }
}

namespace {

std::pair<NodeId, NodeId> pick_pair(const ExperimentConfig& config,
                                    std::uint32_t n, std::uint64_t seed) {
    if (config.pair_policy == PairPolicy::Fixed)
        return {config.fixed_source, config.fixed_dest};
    Rng rng(derive_seed(seed, kStreamPair));
    const NodeId source = static_cast<NodeId>(rng.bounded(n));
    if (n == 1) return {source, source};
    NodeId dest = source;
    while (dest == source) dest = static_cast<NodeId>(rng.bounded(n));
    return {source, dest};
}

int count_occupied_quadrants(const Topology& topology, NodeId source) {
    const Vec2 origin = topology.nodes()[source].position;
    std::set<Quadrant> seen;
    for (const Node& node : topology.nodes()) {
        if (node.id == source) continue;
        try {
            seen.insert(quadrant_of(origin, node.position));
        } catch (const CoincidentPoints&) {
            seen.insert(Quadrant::Q1);
        }
    }
    return static_cast<int>(seen.size());
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    if (v.size() % 2 == 1) return v[m];
    return 0.5 * (v[m - 1] + v[m]);
}

} // namespace

RunSetup prepare_run(const ExperimentConfig& config, std::uint32_t n,
                     std::uint64_t seed) {
    TopologyConfig tc = config.topology;
    tc.node_count = n;
    tc.seed = seed;
    if (config.arena_scaling == ArenaScaling::ConstantDensity) {
        tc.arena_side = config.topology.arena_side *
                        std::sqrt(static_cast<double>(n) /
                                  static_cast<double>(config.density_reference_n));
    }
    RunSetup setup;
    setup.topology = generate_topology(tc);
    setup.gammas = assign_flow_rates(setup.topology, config.traffic, seed);
    setup.states = init_link_states(setup.topology, config.traffic, setup.gammas, seed);
    std::tie(setup.source, setup.dest) = pick_pair(config, n, seed);
    return setup;
}

RunMetrics run_single(const ExperimentConfig& config, std::uint32_t n,
                      std::uint64_t seed, bool graded) {
    config.validate();
    RunSetup setup = prepare_run(config, n, seed);
    const Topology& topo = setup.topology;

    const double interval = config.traffic.update_interval;
    for (int k = 1; k * interval <= config.warmup_time; ++k)
        advance_traffic(setup.states, config.traffic, k * interval);

    const auto link_bw = snapshot_available_bw(topo, setup.states, config.traffic);

    RunMetrics m;
    m.graded = graded;
    m.n = n;
    m.seed = seed;
    m.source = setup.source;
    m.dest = setup.dest;
    m.occupied_quadrants = count_occupied_quadrants(topo, setup.source);

    AbcParams abc = config.abc;
    abc.graded_mode = graded;
    abc.rng_seed = derive_seed(seed ^ config.abc.rng_seed, kStreamSearch);

    GradingView view = GradingView::ungraded(setup.source, setup.dest);
    m.nodes_selected = n;
    if (graded && setup.source != setup.dest) {
        std::vector<QosSnapshot> snapshots(topo.node_count());
        for (NodeId v = 0; v < topo.node_count(); ++v)
            snapshots[v] = collect_qos(topo, setup.states, config.traffic, v,
                                       abc.threshold_bandwidth);
        const GradeNorms norms = config.grading.norms
                                     ? *config.grading.norms
                                     : GradeNorms::from_observed(snapshots);
        std::vector<bool> production(topo.node_count());
        for (NodeId v = 0; v < topo.node_count(); ++v) {
            production[v] =
                is_production_node(level1_grade(snapshots[v], norms,
                                                config.grading.weights),
                                   config.grading.production_cutoff);
        }
        view = GradingView::make_graded(topo, setup.source, setup.dest,
                                        std::move(production));
        std::uint32_t selected = 2; // the query endpoints
        for (NodeId v = 0; v < topo.node_count(); ++v) {
            if (v == setup.source || v == setup.dest) continue;
            if (view.production[v] && view.in_dest_quadrant(v)) ++selected;
        }
        m.nodes_selected = selected;
    } else if (setup.source == setup.dest) {
        m.nodes_selected = 1;
    }

    m.search = abc_search(topo, link_bw, view, setup.source, setup.dest, abc);

    if (m.found()) {
        const auto& route = m.search.best_path->nodes;
        m.throughput = config.traffic.packet_size_bytes /
                       static_cast<double>(std::max<std::size_t>(1, route.size() - 1));
        if (route.size() >= 2) {
            double sum = 0.0;
            for (std::size_t i = 0; i + 1 < route.size(); ++i) {
                const std::size_t li = *topo.link_index(route[i], route[i + 1]);
                sum += traffic_intensity(config.traffic.per_flow_bandwidth,
                                         setup.states[li].load, link_bw[li]);
            }
            m.mean_route_intensity = sum / static_cast<double>(route.size() - 1);
        }
    }
    return m;
}

namespace {

AggregateRow aggregate_mode(std::uint32_t n, bool graded,
                            const std::vector<const RunPair*>& pairs) {
    AggregateRow row;
    row.node_count = n;
    row.graded = graded;
    std::vector<double> lengths, cycles, selected, throughputs, intensities, walls;
    for (const RunPair* p : pairs) {
        const RunMetrics& m = graded ? p->graded : p->nongraded;
        ++row.runs;
        if (m.found()) ++row.found;
        selected.push_back(m.nodes_selected);
        cycles.push_back(m.search.cycles_used);
        walls.push_back(m.search.wall_ms);
        if (p->both_found()) {
            lengths.push_back(static_cast<double>(m.route_hops()));
            throughputs.push_back(m.throughput);
            intensities.push_back(m.mean_route_intensity);
        }
    }
    row.mean_route_length = mean_of(lengths);
    row.median_route_length = median_of(lengths);
    row.mean_nodes_selected = mean_of(selected);
    row.mean_cycles = mean_of(cycles);
    row.median_cycles = median_of(cycles);
    row.mean_throughput = mean_of(throughputs);
    row.mean_intensity = mean_of(intensities);
    row.mean_wall_ms = mean_of(walls);
    return row;
}

} // namespace

ComparisonReport run_comparison(const ExperimentConfig& config) {
    config.validate();
    ComparisonReport report;
    for (std::uint32_t n : config.node_counts) {
        for (std::uint64_t seed : config.seeds) {
            RunPair pair;
            pair.graded = run_single(config, n, seed, true);
            pair.nongraded = run_single(config, n, seed, false);
            report.pairs.push_back(std::move(pair));
        }
    }
    std::sort(report.pairs.begin(), report.pairs.end(),
              [](const RunPair& a, const RunPair& b) {
                  if (a.graded.n != b.graded.n) return a.graded.n < b.graded.n;
                  return a.graded.seed < b.graded.seed;
              });

    std::vector<double> pair_ratios;
    std::vector<double> row_ratios;
    for (std::uint32_t n : config.node_counts) {
        std::vector<const RunPair*> group;
        for (const RunPair& p : report.pairs)
            if (p.graded.n == n) group.push_back(&p);
        report.aggregates.push_back(aggregate_mode(n, true, group));
        report.aggregates.push_back(aggregate_mode(n, false, group));
        std::vector<double> graded_cycles, nongraded_cycles;
        for (const RunPair* p : group) {
            if (!p->both_found()) continue;
            graded_cycles.push_back(p->graded.search.cycles_used);
            nongraded_cycles.push_back(p->nongraded.search.cycles_used);
            if (p->nongraded.search.cycles_used > 0)
                pair_ratios.push_back(
                    static_cast<double>(p->graded.search.cycles_used) /
                    static_cast<double>(p->nongraded.search.cycles_used));
        }
        const double mean_ng = mean_of(nongraded_cycles);
        const double ratio =
            mean_ng > 0.0 ? mean_of(graded_cycles) / mean_ng : 0.0;
        report.cycles_ratio_per_n.emplace_back(n, ratio);
        if (ratio > 0.0) row_ratios.push_back(ratio);
    }
    report.median_cycles_ratio = median_of(row_ratios);
    report.per_pair_median_cycles_ratio = median_of(pair_ratios);
    for (const RunPair& p : report.pairs)
        if (p.both_found()) ++report.pairs_both_found;
    return report;
}

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

const char* mode_name(bool graded) { return graded ? "graded" : "nongraded"; }

std::string route_string(const RunMetrics& m) {
    if (!m.found()) return "";
    std::string out;
    const auto& nodes = m.search.best_path->nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i) out += '-';
        out += std::to_string(nodes[i]);
    }
    return out;
}

std::string common_row(const RunMetrics& m) {
    std::ostringstream os;
    os << mode_name(m.graded) << ',' << m.seed << ',' << m.n << ',' << m.source
       << ',' << m.dest << ',' << route_string(m) << ',' << m.route_hops() << ','
       << fmt_double(m.found() ? m.search.best_path->bottleneck_bw : 0.0) << ','
       << m.search.cycles_used << ',' << m.search.nodes_explored << ','
       << m.search.scout_escapes;
    return os.str();
}

} // namespace

std::string search_csv_header() {
    return "mode,seed,n,source,dest,route,route_length_hops,bottleneck_bw,"
           "cycles_used,nodes_explored,scout_escapes,wall_ms";
}

std::string search_csv_row(const RunMetrics& m) {
    return common_row(m) + ',' + fmt_double(m.search.wall_ms);
}

std::string raw_csv_header() {
    return "mode,seed,n,source,dest,route,route_length_hops,bottleneck_bw,"
           "cycles_used,nodes_explored,scout_escapes,nodes_selected,"
           "occupied_quadrants,found,throughput,mean_route_intensity";
}

std::string raw_csv_row(const RunMetrics& m) {
    std::ostringstream os;
    os << common_row(m) << ',' << m.nodes_selected << ',' << m.occupied_quadrants
       << ',' << (m.found() ? 1 : 0) << ',' << fmt_double(m.throughput) << ','
       << fmt_double(m.mean_route_intensity);
    return os.str();
}

void emit_outputs(const ComparisonReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir);

    auto open = [&](const char* name) {
        std::ofstream out(fs::path(out_dir) / name);
        if (!out) throw IoError(std::string("cannot write ") + name);
        return out;
    };

    {
        auto out = open("raw_runs.csv");
        out << raw_csv_header() << '\n';
        for (const RunPair& p : report.pairs) {
            out << raw_csv_row(p.graded) << '\n';
            out << raw_csv_row(p.nongraded) << '\n';
        }
    }
    {
        auto out = open("table1.csv");
        out << "node_count,mode,mean_nodes_selected,mean_route_length,found,runs\n";
        for (const AggregateRow& r : report.aggregates) {
            out << r.node_count << ',' << mode_name(r.graded) << ','
                << fmt_double(r.mean_nodes_selected) << ','
                << fmt_double(r.mean_route_length) << ',' << r.found << ','
                << r.runs << '\n';
        }
    }
    {
        auto out = open("table2.csv");
        out << "node_count,mode,mean_cycles,median_cycles,mean_wall_ms\n";
        for (const AggregateRow& r : report.aggregates) {
            out << r.node_count << ',' << mode_name(r.graded) << ','
                << fmt_double(r.mean_cycles) << ',' << fmt_double(r.median_cycles)
                << ',' << fmt_double(r.mean_wall_ms) << '\n';
        }
    }
    {
        auto out = open("fig4.dat");
        out << "# mode node_count mean_throughput mean_intensity\n";
        for (const AggregateRow& r : report.aggregates) {
            out << mode_name(r.graded) << ' ' << r.node_count << ' '
                << fmt_double(r.mean_throughput) << ' '
                << fmt_double(r.mean_intensity) << '\n';
        }
    }
}

namespace {

using nlohmann::json;

template <typename T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: bad JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        if (j.contains("topology")) {
            const json& t = j["topology"];
            read_if(t, "arena_side", cfg.topology.arena_side);
            read_if(t, "connection_radius", cfg.topology.connection_radius);
            read_if(t, "capacity_min", cfg.topology.capacity_min);
            read_if(t, "capacity_max", cfg.topology.capacity_max);
            read_if(t, "node_count", cfg.topology.node_count);
            read_if(t, "seed", cfg.topology.seed);
        }
        if (j.contains("traffic")) {
            const json& t = j["traffic"];
            read_if(t, "alpha", cfg.traffic.alpha);
            read_if(t, "mu", cfg.traffic.mu);
            read_if(t, "lambda_se", cfg.traffic.lambda_se);
            read_if(t, "exit_probability", cfg.traffic.exit_probability);
            read_if(t, "packet_size_bytes", cfg.traffic.packet_size_bytes);
            read_if(t, "per_flow_bandwidth", cfg.traffic.per_flow_bandwidth);
            read_if(t, "update_interval", cfg.traffic.update_interval);
        }
        if (j.contains("abc")) {
            const json& a = j["abc"];
            read_if(a, "max_cycles", cfg.abc.max_cycles);
            read_if(a, "threshold_bandwidth", cfg.abc.threshold_bandwidth);
            read_if(a, "rng_seed", cfg.abc.rng_seed);
            read_if(a, "improvement_patience", cfg.abc.improvement_patience);
            read_if(a, "forage_probability", cfg.abc.forage_probability);
            if (a.contains("scout_policy")) {
                const std::string s = a.at("scout_policy").get<std::string>();
                if (s == "adjacent_quadrants")
                    cfg.abc.scout_policy = ScoutPolicy::AdjacentQuadrants;
                else if (s == "all_quadrants")
                    cfg.abc.scout_policy = ScoutPolicy::AllQuadrants;
                else
                    throw ConfigError("config: unknown scout_policy: " + s);
            }
        }
        if (j.contains("grading")) {
            const json& g = j["grading"];
            read_if(g, "production_cutoff", cfg.grading.production_cutoff);
            if (g.contains("weights")) {
                const json& w = g["weights"];
                read_if(w, "bandwidth", cfg.grading.weights.bandwidth);
                read_if(w, "delay", cfg.grading.weights.delay);
                read_if(w, "density", cfg.grading.weights.density);
                read_if(w, "resource", cfg.grading.weights.resource);
                read_if(w, "congestion", cfg.grading.weights.congestion);
            }
        }
        if (j.contains("experiment")) {
            const json& e = j["experiment"];
            read_if(e, "node_counts", cfg.node_counts);
            read_if(e, "warmup_time", cfg.warmup_time);
            read_if(e, "density_reference_n", cfg.density_reference_n);
            if (e.contains("arena_scaling")) {
                const std::string s = e.at("arena_scaling").get<std::string>();
                if (s == "constant_density")
                    cfg.arena_scaling = ArenaScaling::ConstantDensity;
                else if (s == "fixed")
                    cfg.arena_scaling = ArenaScaling::Fixed;
                else
                    throw ConfigError("config: unknown arena_scaling: " + s);
            }
            if (e.contains("seeds")) {
                cfg.seeds = e.at("seeds").get<std::vector<std::uint64_t>>();
            } else if (e.contains("seed_base") || e.contains("seed_count")) {
                std::uint64_t base = 1;
                std::uint64_t count = 200;
                read_if(e, "seed_base", base);
                read_if(e, "seed_count", count);
                cfg.seeds.clear();
                for (std::uint64_t i = 0; i < count; ++i)
                    cfg.seeds.push_back(base + i);
            }
            if (e.contains("source_dest")) {
                const json& sd = e.at("source_dest");
                if (sd.is_string() && sd.get<std::string>() == "random") {
                    cfg.pair_policy = PairPolicy::RandomPair;
                } else if (sd.is_array() && sd.size() == 2) {
                    cfg.pair_policy = PairPolicy::Fixed;
                    cfg.fixed_source = sd[0].get<NodeId>();
                    cfg.fixed_dest = sd[1].get<NodeId>();
                } else {
                    throw ConfigError("config: source_dest must be \"random\" or [a, b]");
                }
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return config_from_json(buf.str());
}

} // namespace beeroute
