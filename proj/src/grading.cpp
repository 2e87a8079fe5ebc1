#include "beeroute/grading.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "beeroute/errors.hpp"

namespace beeroute {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// Position of v in [lo, hi], clamped; a degenerate range is uninformative
// and scores neutral.
double normalized(double v, const MetricRange& r) {
    if (!(r.hi > r.lo)) return 0.5;
    return clamp01((v - r.lo) / (r.hi - r.lo));
}

} // namespace

GradeNorms GradeNorms::from_observed(const std::vector<QosSnapshot>& snapshots) {
    GradeNorms norms;
    if (snapshots.empty()) return norms;
    auto lo = [](auto get, const std::vector<QosSnapshot>& v) {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& s : v) m = std::min(m, get(s));
        return m;
    };
    auto hi = [](auto get, const std::vector<QosSnapshot>& v) {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& s : v) m = std::max(m, get(s));
        return m;
    };
    auto bw = [](const QosSnapshot& s) { return s.bandwidth_availability; };
    auto dl = [](const QosSnapshot& s) { return s.delay_proxy; };
    auto dn = [](const QosSnapshot& s) { return s.node_density; };
    auto rs = [](const QosSnapshot& s) { return s.resource_allocation; };
    norms.bandwidth = {lo(bw, snapshots), hi(bw, snapshots)};
    norms.delay = {lo(dl, snapshots), hi(dl, snapshots)};
    norms.density = {lo(dn, snapshots), hi(dn, snapshots)};
    norms.resource = {lo(rs, snapshots), hi(rs, snapshots)};
    return norms;
}

QosSnapshot collect_qos(const Topology& topology,
                        const std::vector<LinkState>& states,
                        const TrafficParams& params, NodeId node,
                        double threshold) {
    if (!topology.valid_node(node))
        throw std::out_of_range("collect_qos: unknown node");
    QosSnapshot snap;
    snap.resource_allocation = topology.nodes()[node].resource_allocation;
    const auto& incident = topology.incident_links(node);
    if (incident.empty()) {
        snap.congested = true; // no way in or out
        return snap;
    }

    double bw_sum = 0.0, intensity_sum = 0.0, load_sum = 0.0;
    std::size_t intensity_count = 0;
    for (std::size_t li : incident) {
        const LinkState& s = states.at(li);
        const double ba = available_bandwidth(
            topology.links()[li].capacity, params.per_flow_bandwidth * s.load);
        bw_sum += ba;
        load_sum += s.load;
        if (ba < threshold) snap.congested = true;
        if (ba > 0.0) {
            intensity_sum += traffic_intensity(params.per_flow_bandwidth, s.load, ba);
            ++intensity_count;
        } else {
            snap.congested = true; // saturated link, intensity undefined
        }
    }
    const double deg = static_cast<double>(incident.size());
    snap.bandwidth_availability = bw_sum / deg;
    snap.delay_proxy =
        intensity_count > 0 ? intensity_sum / static_cast<double>(intensity_count)
                            : 0.0;
    // One packet per second per active flow on the incident links.
    snap.node_density = load_sum * params.update_interval;
    return snap;
}

Grade level1_grade(const QosSnapshot& snapshot, const GradeNorms& norms,
                   const GradeWeights& weights) {
    const double score_bw = normalized(snapshot.bandwidth_availability, norms.bandwidth);
    const double score_delay = 1.0 - normalized(snapshot.delay_proxy, norms.delay);
    const double score_density = 1.0 - normalized(snapshot.node_density, norms.density);
    const double score_resource = normalized(snapshot.resource_allocation, norms.resource);

    double num = weights.bandwidth * score_bw + weights.delay * score_delay +
                 weights.density * score_density + weights.resource * score_resource;
    double den = weights.bandwidth + weights.delay + weights.density + weights.resource;
    if (snapshot.congested) den += weights.congestion; // congestion scores zero
    if (!(den > 0.0)) throw std::invalid_argument("level1_grade: zero weight sum");

    const double affine = -3.0 + 6.0 * (num / den);
    int g = static_cast<int>(std::round(affine)); // round halves away from zero
    g = std::clamp(g, -3, 3);
    if (snapshot.congested) g = std::min(g, -1);
    return Grade{g};
}

bool is_production_node(Grade grade, int cutoff) { return grade.value >= cutoff; }

namespace {

double candidate_link_bw(const Topology& topology,
                         const std::vector<double>& link_bw, NodeId current,
                         NodeId candidate) {
    const auto li = topology.link_index(current, candidate);
    if (!li) throw std::invalid_argument("level2: candidate not adjacent");
    return link_bw.at(*li);
}

} // namespace

std::vector<double> level2_weights(const Topology& topology,
                                   const std::vector<double>& link_bw,
                                   NodeId current,
                                   const std::vector<NodeId>& candidates) {
    std::vector<double> w(candidates.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        w[i] = candidate_link_bw(topology, link_bw, current, candidates[i]);
        sum += w[i];
    }
    if (!(sum > 0.0))
        throw NoViableCandidate("level2: all candidate links at zero bandwidth");
    for (double& x : w) x /= sum;
    return w;
}

std::optional<NodeId> level2_select(const Topology& topology,
                                    const std::vector<double>& link_bw,
                                    NodeId current,
                                    const std::vector<NodeId>& candidates,
                                    double threshold) {
    if (candidates.empty())
        throw std::invalid_argument("level2_select: empty candidate set");
    std::optional<NodeId> best;
    double best_bw = 0.0;
    for (NodeId c : candidates) {
        const double ba = candidate_link_bw(topology, link_bw, current, c);
        if (ba < threshold) continue;
        if (!best || ba > best_bw || (ba == best_bw && c < *best)) {
            best = c;
            best_bw = ba;
        }
    }
    return best;
}

} // namespace beeroute
