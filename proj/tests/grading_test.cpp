#include "beeroute/grading.hpp"

#include <gtest/gtest.h>

#include "beeroute/errors.hpp"
#include "beeroute/rng.hpp"

using namespace beeroute;

namespace {

// 0 - 1 - 2 line, capacities 100 and 80
Topology line_topology() {
    std::vector<Node> nodes(3);
    nodes[0] = {0, {0.0, 0.0}, 1048576.0, 0.2};
    nodes[1] = {1, {1.0, 0.0}, 1048576.0, 0.6};
    nodes[2] = {2, {2.0, 0.0}, 1048576.0, 0.9};
    std::vector<Link> links{{0, 1, 100.0}, {1, 2, 80.0}};
    return Topology(std::move(nodes), std::move(links), 0, 10.0);
}

GradeNorms unit_norms() {
    GradeNorms n;
    n.bandwidth = {0.0, 1.0};
    n.delay = {0.0, 1.0};
    n.density = {0.0, 1.0};
    n.resource = {0.0, 1.0};
    return n;
}

QosSnapshot snapshot(double bw, bool congested, double delay, double density,
                     double resource) {
    return QosSnapshot{bw, congested, delay, density, resource};
}

QosSnapshot random_snapshot(Rng& rng) {
    return snapshot(rng.uniform(), rng.bounded(4) == 0, rng.uniform(),
                    rng.uniform(), rng.uniform());
}

} // namespace

TEST(CollectQos, IdleNetworkScoresClean) {
    const auto topo = line_topology();
    TrafficParams p;
    std::vector<LinkState> states{{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
    const auto snap = collect_qos(topo, states, p, 1, 10.0);
    EXPECT_DOUBLE_EQ(snap.bandwidth_availability, 90.0); // mean capacity
    EXPECT_FALSE(snap.congested);
    EXPECT_DOUBLE_EQ(snap.delay_proxy, 0.0);
    EXPECT_DOUBLE_EQ(snap.node_density, 0.0);
    EXPECT_DOUBLE_EQ(snap.resource_allocation, 0.6);
}

TEST(CollectQos, HandComputedFixtureValues) {
    const auto topo = line_topology();
    TrafficParams p; // per_flow_bandwidth 1, update_interval 30
    std::vector<LinkState> states{{10.0, 0.0, 0.0}, {20.0, 0.0, 0.0}};
    const auto snap = collect_qos(topo, states, p, 1, 50.0);
    // availables: 100-10 = 90, 80-20 = 60
    EXPECT_DOUBLE_EQ(snap.bandwidth_availability, 0.5 * (90.0 + 60.0));
    EXPECT_DOUBLE_EQ(snap.delay_proxy, 0.5 * (10.0 / 90.0 + 20.0 / 60.0));
    EXPECT_DOUBLE_EQ(snap.node_density, (10.0 + 20.0) * 30.0);
    EXPECT_FALSE(snap.congested);
    // end node sees only its one link
    const auto end = collect_qos(topo, states, p, 0, 50.0);
    EXPECT_DOUBLE_EQ(end.bandwidth_availability, 90.0);
    EXPECT_DOUBLE_EQ(end.delay_proxy, 10.0 / 90.0);
}

TEST(CollectQos, SaturationFlagsCongestion) {
    const auto topo = line_topology();
    TrafficParams p;
    std::vector<LinkState> states{{100.0, 0.0, 0.0}, {80.0, 0.0, 0.0}};
    const auto snap = collect_qos(topo, states, p, 1, 10.0);
    EXPECT_TRUE(snap.congested);
    EXPECT_DOUBLE_EQ(snap.bandwidth_availability, 0.0);
}

TEST(CollectQos, BelowThresholdFlagsCongestion) {
    const auto topo = line_topology();
    TrafficParams p;
    std::vector<LinkState> states{{95.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
    const auto snap = collect_qos(topo, states, p, 1, 20.0); // B_a 5 < 20
    EXPECT_TRUE(snap.congested);
}

TEST(CollectQos, NoIncidentLinks) {
    std::vector<Node> nodes(1);
    nodes[0] = {0, {0.0, 0.0}, 1048576.0, 0.4};
    Topology topo(std::move(nodes), {}, 0, 1.0);
    TrafficParams p;
    std::vector<LinkState> states;
    const auto snap = collect_qos(topo, states, p, 0, 10.0);
    EXPECT_DOUBLE_EQ(snap.bandwidth_availability, 0.0);
    EXPECT_TRUE(snap.congested);
    EXPECT_THROW(collect_qos(topo, states, p, 5, 10.0), std::out_of_range);
}

TEST(Level1Grade, BoundaryAndMidpoint) {
    const auto norms = unit_norms();
    // best bounds, not congested
    EXPECT_EQ(level1_grade(snapshot(1.0, false, 0.0, 0.0, 1.0), norms).value, 3);
    // worst bounds
    EXPECT_EQ(level1_grade(snapshot(0.0, true, 1.0, 1.0, 0.0), norms).value, -3);
    EXPECT_EQ(level1_grade(snapshot(0.0, false, 1.0, 1.0, 0.0), norms).value, -3);
    // exact midpoint, not congested
    EXPECT_EQ(level1_grade(snapshot(0.5, false, 0.5, 0.5, 0.5), norms).value, 0);
}

TEST(Level1Grade, OutOfRangeInputsClampIntoNorms) {
    const auto norms = unit_norms();
    EXPECT_EQ(level1_grade(snapshot(50.0, false, -3.0, -1.0, 9.0), norms).value, 3);
    EXPECT_EQ(level1_grade(snapshot(-2.0, false, 7.0, 5.0, -1.0), norms).value, -3);
}

TEST(Level1Grade, AlwaysInRange) {
    Rng rng(31);
    const auto norms = unit_norms();
    for (int i = 0; i < 500; ++i) {
        const auto g = level1_grade(random_snapshot(rng), norms);
        EXPECT_GE(g.value, -3);
        EXPECT_LE(g.value, 3);
    }
}

TEST(Level1Grade, CongestionCapsAtMinusOne) {
    const auto norms = unit_norms();
    Rng rng(32);
    for (int i = 0; i < 200; ++i) {
        auto s = random_snapshot(rng);
        s.congested = true;
        EXPECT_LE(level1_grade(s, norms).value, -1);
    }
    // even a perfect congested node
    EXPECT_LE(level1_grade(snapshot(1.0, true, 0.0, 0.0, 1.0), norms).value, -1);
}

TEST(Level1Grade, ImprovingAnyMetricNeverLowersTheGrade) {
    Rng rng(33);
    const auto norms = unit_norms();
    for (int i = 0; i < 300; ++i) {
        const auto base = random_snapshot(rng);
        const int before = level1_grade(base, norms).value;
        auto s = base;
        s.bandwidth_availability += rng.uniform();
        EXPECT_GE(level1_grade(s, norms).value, before);
        s = base;
        s.delay_proxy = std::max(0.0, s.delay_proxy - rng.uniform());
        EXPECT_GE(level1_grade(s, norms).value, before);
        s = base;
        s.node_density = std::max(0.0, s.node_density - rng.uniform());
        EXPECT_GE(level1_grade(s, norms).value, before);
        s = base;
        s.resource_allocation += rng.uniform();
        EXPECT_GE(level1_grade(s, norms).value, before);
        s = base;
        s.congested = false;
        EXPECT_GE(level1_grade(s, norms).value, before);
    }
}

TEST(Level1Grade, WeightsShiftTheBalance) {
    const auto norms = unit_norms();
    GradeWeights w;
    w.resource = 100.0; // resource dominates
    EXPECT_EQ(level1_grade(snapshot(0.0, false, 1.0, 1.0, 1.0), norms, w).value, 3);
    EXPECT_EQ(level1_grade(snapshot(1.0, false, 0.0, 0.0, 0.0), norms, w).value, -3);
}

TEST(GradeNormsFromObserved, SpansTheSamplePopulation) {
    std::vector<QosSnapshot> snaps{snapshot(10.0, false, 0.1, 100.0, 0.3),
                                   snapshot(90.0, false, 0.9, 400.0, 0.8),
                                   snapshot(50.0, true, 0.4, 200.0, 0.5)};
    const auto norms = GradeNorms::from_observed(snaps);
    EXPECT_DOUBLE_EQ(norms.bandwidth.lo, 10.0);
    EXPECT_DOUBLE_EQ(norms.bandwidth.hi, 90.0);
    EXPECT_DOUBLE_EQ(norms.delay.lo, 0.1);
    EXPECT_DOUBLE_EQ(norms.delay.hi, 0.9);
    EXPECT_DOUBLE_EQ(norms.density.lo, 100.0);
    EXPECT_DOUBLE_EQ(norms.density.hi, 400.0);
    EXPECT_DOUBLE_EQ(norms.resource.lo, 0.3);
    EXPECT_DOUBLE_EQ(norms.resource.hi, 0.8);
    // extremes of the population grade to the endpoints
    EXPECT_EQ(level1_grade(snapshot(90.0, false, 0.1, 100.0, 0.8), norms).value, 3);
    EXPECT_EQ(level1_grade(snapshot(10.0, false, 0.9, 400.0, 0.3), norms).value, -3);
}

TEST(IsProductionNode, DefaultCutoff) {
    EXPECT_TRUE(is_production_node(Grade{3}));
    EXPECT_TRUE(is_production_node(Grade{1}));
    EXPECT_FALSE(is_production_node(Grade{0}));
    EXPECT_FALSE(is_production_node(Grade{-3}));
    EXPECT_TRUE(is_production_node(Grade{0}, 0)); // cutoff is overridable
}

namespace {

// star: 0 at the center, spokes with chosen capacities, idle links
struct Star {
    Topology topo;
    std::vector<double> link_bw;
};

Star star(const std::vector<double>& capacities) {
    std::vector<Node> nodes(capacities.size() + 1);
    nodes[0] = {0, {0.0, 0.0}, 1048576.0, 0.5};
    std::vector<Link> links;
    for (std::size_t i = 0; i < capacities.size(); ++i) {
        const NodeId id = static_cast<NodeId>(i + 1);
        nodes[id] = {id, {1.0 + i, 1.0}, 1048576.0, 0.5};
        links.push_back({0, id, capacities[i]});
    }
    Star s{Topology(std::move(nodes), std::move(links), 0, 100.0), {}};
    s.link_bw = capacities;
    return s;
}

} // namespace

TEST(Level2Select, PicksMaxBandwidthAboveThreshold) {
    const auto s = star({5.0, 9.0, 2.0});
    const auto got = level2_select(s.topo, s.link_bw, 0, {1, 2, 3}, 1.0);
    ASSERT_TRUE(got.has_value());
    EXPECT_EQ(*got, 2u); // the node behind 9.0
}

TEST(Level2Select, TieBreaksToLowestId) {
    const auto s = star({7.0, 7.0});
    const auto got = level2_select(s.topo, s.link_bw, 0, {1, 2}, 1.0);
    ASSERT_TRUE(got.has_value());
    EXPECT_EQ(*got, 1u);
}

TEST(Level2Select, AllBelowThresholdIsInfeasible) {
    const auto s = star({0.5, 0.2});
    EXPECT_FALSE(level2_select(s.topo, s.link_bw, 0, {1, 2}, 1.0).has_value());
    EXPECT_THROW(level2_select(s.topo, s.link_bw, 0, {}, 1.0),
                 std::invalid_argument);
}

TEST(Level2Weights, NormalizedAndScaleInvariant) {
    const auto s = star({5.0, 9.0, 2.0});
    const auto w = level2_weights(s.topo, s.link_bw, 0, {1, 2, 3});
    ASSERT_EQ(w.size(), 3u);
    double sum = 0.0;
    for (double x : w) sum += x;
    EXPECT_NEAR(sum, 1.0, 1e-9);
    EXPECT_DOUBLE_EQ(w[1], 9.0 / 16.0);

    // uniform scaling never changes the argmax
    auto scaled = s;
    for (double& bw : scaled.link_bw) bw *= 37.5;
    EXPECT_EQ(level2_select(s.topo, s.link_bw, 0, {1, 2, 3}, 0.0),
              level2_select(scaled.topo, scaled.link_bw, 0, {1, 2, 3}, 0.0));
    const auto w2 = level2_weights(scaled.topo, scaled.link_bw, 0, {1, 2, 3});
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(w[i], w2[i], 1e-12);
}

TEST(Level2Weights, AllZeroBandwidthThrows) {
    const auto s = star({0.0, 0.0});
    EXPECT_THROW(level2_weights(s.topo, s.link_bw, 0, {1, 2}), NoViableCandidate);
}

TEST(Level2Weights, SelectionIsTheWeightArgmax) {
    Rng rng(88);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> caps(2 + rng.bounded(6));
        std::vector<NodeId> candidates;
        for (std::size_t i = 0; i < caps.size(); ++i) {
            caps[i] = rng.uniform(1.0, 100.0);
            candidates.push_back(static_cast<NodeId>(i + 1));
        }
        const auto s = star(caps);
        const auto w = level2_weights(s.topo, s.link_bw, 0, candidates);
        const std::size_t argmax =
            std::max_element(w.begin(), w.end()) - w.begin();
        const auto picked = level2_select(s.topo, s.link_bw, 0, candidates, 0.0);
        ASSERT_TRUE(picked.has_value());
        EXPECT_EQ(*picked, candidates[argmax]);
    }
}
