// grading.hpp — per-node QoS snapshots and the two-level node grading.
#pragma once

#include <optional>
#include <vector>

#include "beeroute/topology.hpp"
#include "beeroute/traffic.hpp"

namespace beeroute {

// The five agent-collected parameters, all derived from the node's
// incident links at snapshot time.
struct QosSnapshot {
    double bandwidth_availability = 0.0; // mean available bw over incident links
    bool congested = false;              // any incident link below threshold
    double delay_proxy = 0.0;            // mean traffic intensity
    double node_density = 0.0;           // packets arriving over one interval
    double resource_allocation = 0.0;    // node-local, in [0, 1]
};

// Integer productivity grade in [-3, +3].
struct Grade {
    int value = 0;
};

struct MetricRange {
    double lo = 0.0;
    double hi = 1.0;
};

// Normalization bounds for the numeric snapshot metrics.
struct GradeNorms {
    MetricRange bandwidth{0.0, 1.0};
    MetricRange delay{0.0, 1.0};
    MetricRange density{0.0, 1.0};
    MetricRange resource{0.0, 1.0};

    // Observed min/max per metric over a population of snapshots.
    static GradeNorms from_observed(const std::vector<QosSnapshot>& snapshots);
};

struct GradeWeights {
    double bandwidth = 1.0;
    double delay = 1.0;
    double density = 1.0;
    double resource = 1.0;
    double congestion = 1.0; // weight of the zero term added when congested
};

QosSnapshot collect_qos(const Topology& topology,
                        const std::vector<LinkState>& states,
                        const TrafficParams& params, NodeId node,
                        double threshold);

// Normalized equal-weight mean of the metrics (delay and density inverted
// so higher is better; a congested node gains an extra zero term), mapped
// affinely onto [-3, +3] and rounded half away from zero. Congested nodes
// are capped at -1.
Grade level1_grade(const QosSnapshot& snapshot, const GradeNorms& norms,
                   const GradeWeights& weights = {});

bool is_production_node(Grade grade, int cutoff = 1);

// Candidate link weights P(l_j) normalized to sum 1 over the candidate set.
// Throws NoViableCandidate when every candidate link has zero bandwidth.
std::vector<double> level2_weights(const Topology& topology,
                                   const std::vector<double>& link_bw,
                                   NodeId current,
                                   const std::vector<NodeId>& candidates);

// The neighbor whose link from `current` has the most available bandwidth
// among candidates meeting the threshold; ties go to the lowest id.
// nullopt when no candidate link is feasible (scout trigger upstream).
std::optional<NodeId> level2_select(const Topology& topology,
                                    const std::vector<double>& link_bw,
                                    NodeId current,
                                    const std::vector<NodeId>& candidates,
                                    double threshold);

} // namespace beeroute
