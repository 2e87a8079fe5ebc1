// harness.hpp — paired graded vs non-graded experiment runs and reporting.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "beeroute/abc.hpp"
#include "beeroute/grading.hpp"
#include "beeroute/topology.hpp"
#include "beeroute/traffic.hpp"

namespace beeroute {

enum class PairPolicy { RandomPair, Fixed };

// How the per-run arena is sized across the node-count sweep. Constant
// density grows the area with n (the template arena_side applies at
// density_reference_n), so node degree stays flat and route lengths grow
// with n; Fixed reuses the template arena everywhere, so larger n means a
// denser mesh.
enum class ArenaScaling { ConstantDensity, Fixed };

struct GradingParams {
    int production_cutoff = 1;
    GradeWeights weights;
    std::optional<GradeNorms> norms; // default: observed per topology
};

struct ExperimentConfig {
    TopologyConfig topology; // node_count/seed overridden per run
    TrafficParams traffic;
    AbcParams abc; // graded_mode is swept by the harness
    GradingParams grading;
    std::vector<std::uint32_t> node_counts{15, 16, 32, 64, 128};
    std::vector<std::uint64_t> seeds; // default 1..200
    double warmup_time = 60.0;
    PairPolicy pair_policy = PairPolicy::RandomPair;
    NodeId fixed_source = 0;
    NodeId fixed_dest = 0;
    ArenaScaling arena_scaling = ArenaScaling::ConstantDensity;
    std::uint32_t density_reference_n = 64;

    ExperimentConfig();
    void validate() const; // throws ConfigError
};

struct RunMetrics {
    bool graded = false;
    std::uint32_t n = 0;
    std::uint64_t seed = 0;
    NodeId source = 0;
    NodeId dest = 0;
    SearchResult search;
    // Delivered payload rate along the found route under one-second-per-hop
    // packet pacing: packet_size / hops, zero when no route was found.
    double throughput = 0.0;
    double mean_route_intensity = 0.0; // mean link intensity over the route
    std::uint32_t nodes_selected = 0;  // candidate set size after filtering
    int occupied_quadrants = 0;        // source-relative, over non-source nodes

    bool found() const { return search.best_path.has_value(); }
    std::size_t route_hops() const {
        return found() ? search.best_path->nodes.size() - 1 : 0;
    }
};

struct RunPair {
    RunMetrics graded;
    RunMetrics nongraded;
    bool both_found() const { return graded.found() && nongraded.found(); }
};

// Per (node_count, mode) summary. Route length, throughput and intensity
// average only runs whose pair found a route in both modes, so the two
// modes are compared on identical queries.
struct AggregateRow {
    std::uint32_t node_count = 0;
    bool graded = false;
    int runs = 0;
    int found = 0;
    double mean_route_length = 0.0;
    double median_route_length = 0.0;
    double mean_nodes_selected = 0.0;
    double mean_cycles = 0.0;
    double median_cycles = 0.0;
    double mean_throughput = 0.0;
    double mean_intensity = 0.0;
    double mean_wall_ms = 0.0;
};

struct ComparisonReport {
    std::vector<RunPair> pairs;           // sorted by (n, seed)
    std::vector<AggregateRow> aggregates; // per n, graded row first
    // Per node count: mean graded cycles / mean non-graded cycles over the
    // pairs where both modes found a route (the per-size convergence-time
    // comparison).
    std::vector<std::pair<std::uint32_t, double>> cycles_ratio_per_n;
    double median_cycles_ratio = 0.0;          // median of the per-n ratios
    double per_pair_median_cycles_ratio = 0.0; // median of per-pair ratios
    int pairs_both_found = 0;
};

// Everything a single run shares between the two modes: topology, flow
// rates, initial link states and the query endpoints.
struct RunSetup {
    Topology topology;
    std::vector<double> gammas;
    std::vector<LinkState> states; // at time 0, before warmup
    NodeId source = 0;
    NodeId dest = 0;
};

RunSetup prepare_run(const ExperimentConfig& config, std::uint32_t n,
                     std::uint64_t seed);

RunMetrics run_single(const ExperimentConfig& config, std::uint32_t n,
                      std::uint64_t seed, bool graded);

ComparisonReport run_comparison(const ExperimentConfig& config);

// raw_runs.csv, table1.csv, table2.csv, fig4.dat. Byte-stable for a given
// report. Throws IoError when the directory cannot be written.
void emit_outputs(const ComparisonReport& report, const std::string& out_dir);

// One-line CSV forms. The search row carries wall-clock milliseconds and is
// what `route` prints; raw rows hold only deterministic columns so repeated
// runs of `compare` emit identical files.
std::string search_csv_header();
std::string search_csv_row(const RunMetrics& m);
std::string raw_csv_header();
std::string raw_csv_row(const RunMetrics& m);

ExperimentConfig load_config(const std::string& path); // throws ConfigError/IoError
ExperimentConfig config_from_json(const std::string& text);

// Shortest representation that parses back to the same double.
std::string fmt_double(double v);

} // namespace beeroute
