// abc.hpp — bee-colony path search over a frozen link-bandwidth snapshot.
//
// Employed bees grow partial paths one hop per cycle by fitness-weighted
// roulette; onlookers adopt the best reported partials and extend them
// greedily toward maximum bandwidth; dead-ended bees restart from the
// source as scouts with a relaxed quadrant restriction. The best complete
// path by bottleneck bandwidth is memorized across cycles.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "beeroute/topology.hpp"

namespace beeroute {

class Rng;

enum class ScoutPolicy { AdjacentQuadrants, AllQuadrants };
enum class ExtendMode { Roulette, Greedy };

struct AbcParams {
    int max_cycles = 50;              // M_c
    double threshold_bandwidth = 10.0; // links below this never join a path
    bool graded_mode = false;
    std::uint64_t rng_seed = 1;
    ScoutPolicy scout_policy = ScoutPolicy::AdjacentQuadrants;
    int improvement_patience = 6; // unimproved full cycles before stopping
    // Chance a bee forages in a given cycle; foraging happens at paced
    // intervals set by how stable the surrounding network is, not at
    // every instant.
    double forage_probability = 1.0;

    void validate() const; // throws ConfigError
};

// A food source: simple path anchored at the query source.
struct PathCandidate {
    std::vector<NodeId> nodes;
    double bottleneck_bw = 0.0; // min available bw over the path's links
    bool complete = false;      // last node is the destination
    double fitness = 0.0;
};

struct SearchResult {
    std::optional<PathCandidate> best_path;
    // Convergence cycle: the cycle in which the memorized best path last
    // improved (the number of cycles the colony ran when no path exists).
    int cycles_used = 0;
    int nodes_explored = 0; // distinct nodes visited by any bee
    double e_over_t = 0.0;  // best bottleneck bw per convergence cycle
    int scout_escapes = 0;  // dead-end restarts with relaxed quadrants
    double wall_ms = 0.0;
};

// Which nodes may join a path. The destination is always admissible; in
// graded mode other nodes must pass the level-1 filter and sit in the
// destination quadrant (scouts also accept adjacent quadrants, or all of
// them under ScoutPolicy::AllQuadrants).
struct GradingView {
    bool graded = false;
    NodeId source = 0;
    NodeId dest = 0;
    Quadrant dest_quadrant = Quadrant::Q1;
    std::vector<Quadrant> node_quadrant; // relative to source; source entry unused
    std::vector<bool> production;        // empty means every node passes

    bool in_dest_quadrant(NodeId n) const;
    bool admits(NodeId n, ScoutPolicy policy, bool scout_relaxed) const;

    static GradingView ungraded(NodeId source, NodeId dest);
    static GradingView make_graded(const Topology& topology, NodeId source,
                                   NodeId dest, std::vector<bool> production);
};

// Bandwidth if the link clears the threshold and the node is in the
// searched quadrant (always "in" when not graded); zero otherwise.
double node_fitness(double link_bw, bool in_quadrant, const AbcParams& params);

// p_i = F_i / sum_k F_k. Throws NoViableCandidate on an all-zero vector.
std::vector<double> selection_probability(const std::vector<double>& fitnesses);

// One-hop extension. Successors are unvisited admissible neighbors of the
// path's last node with positive fitness; Greedy appends the argmax (ties
// to the lowest id), Roulette samples proportionally. nullopt on dead end.
std::optional<PathCandidate> extend_path(const PathCandidate& path,
                                         const Topology& topology,
                                         const std::vector<double>& link_bw,
                                         const GradingView& view,
                                         const AbcParams& params, ExtendMode mode,
                                         Rng& rng, bool scout_relaxed = false);

SearchResult abc_search(const Topology& topology,
                        const std::vector<double>& link_bw,
                        const GradingView& view, NodeId source, NodeId dest,
                        const AbcParams& params);

} // namespace beeroute
