#include "beeroute/abc.hpp"

#include <gtest/gtest.h>

#include <set>

#include "beeroute/errors.hpp"
#include "beeroute/rng.hpp"
#include "oracle.hpp"

using namespace beeroute;

namespace {

struct Fixture {
    Topology topo;
    std::vector<double> link_bw; // idle links: bandwidth == capacity
};

Fixture make_fixture(std::vector<Node> nodes, std::vector<Link> links) {
    std::vector<double> bw;
    for (const auto& l : links) bw.push_back(l.capacity);
    return {Topology(std::move(nodes), std::move(links), 0, 100.0), std::move(bw)};
}

Node at(NodeId id, double x, double y) { return {id, {x, y}, 1048576.0, 0.5}; }

// 0 at the center, spokes 1..k with the given capacities
Fixture star(const std::vector<double>& capacities) {
    std::vector<Node> nodes{at(0, 0.0, 0.0)};
    std::vector<Link> links;
    for (std::size_t i = 0; i < capacities.size(); ++i) {
        const NodeId id = static_cast<NodeId>(i + 1);
        nodes.push_back(at(id, 1.0 + static_cast<double>(i), 1.0));
        links.push_back({0, id, capacities[i]});
    }
    return make_fixture(std::move(nodes), std::move(links));
}

// s(0) - a(1) - b(2) - d(3), everything in Q1 of the source
Fixture line4() {
    std::vector<Node> nodes{at(0, 0.0, 0.0), at(1, 1.0, 0.1), at(2, 2.0, 0.2),
                            at(3, 3.0, 0.3)};
    std::vector<Link> links{{0, 1, 50.0}, {1, 2, 40.0}, {2, 3, 60.0}};
    return make_fixture(std::move(nodes), std::move(links));
}

AbcParams params_for(bool graded, std::uint64_t seed = 1) {
    AbcParams p;
    p.max_cycles = 50;
    p.threshold_bandwidth = 10.0;
    p.graded_mode = graded;
    p.rng_seed = seed;
    return p;
}

PathCandidate start_path(NodeId source) {
    PathCandidate p;
    p.nodes = {source};
    return p;
}

void expect_valid_path(const Fixture& f, const PathCandidate& path, NodeId source,
                       NodeId dest, double threshold) {
    ASSERT_FALSE(path.nodes.empty());
    EXPECT_EQ(path.nodes.front(), source);
    EXPECT_EQ(path.nodes.back(), dest);
    EXPECT_TRUE(path.complete);
    std::set<NodeId> unique(path.nodes.begin(), path.nodes.end());
    EXPECT_EQ(unique.size(), path.nodes.size()); // simple
    double bottleneck = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i) {
        const auto li = f.topo.link_index(path.nodes[i], path.nodes[i + 1]);
        ASSERT_TRUE(li.has_value()); // consecutive nodes adjacent
        EXPECT_GE(f.link_bw[*li], threshold);
        bottleneck = std::min(bottleneck, f.link_bw[*li]);
    }
    if (path.nodes.size() >= 2) EXPECT_DOUBLE_EQ(path.bottleneck_bw, bottleneck);
}

} // namespace

TEST(NodeFitness, ThresholdAndQuadrantFilters) {
    const auto graded = params_for(true);
    const auto plain = params_for(false);
    EXPECT_DOUBLE_EQ(node_fitness(50.0, true, graded), 50.0);
    EXPECT_DOUBLE_EQ(node_fitness(5.0, true, graded), 0.0);  // below threshold
    EXPECT_DOUBLE_EQ(node_fitness(5.0, true, plain), 0.0);
    EXPECT_DOUBLE_EQ(node_fitness(50.0, false, graded), 0.0); // out of quadrant
    EXPECT_DOUBLE_EQ(node_fitness(50.0, false, plain), 50.0);
}

TEST(SelectionProbability, NormalizesFitness) {
    const auto p = selection_probability({3.0, 5.0, 2.0});
    ASSERT_EQ(p.size(), 3u);
    EXPECT_DOUBLE_EQ(p[0], 0.3);
    EXPECT_DOUBLE_EQ(p[1], 0.5);
    EXPECT_DOUBLE_EQ(p[2], 0.2);
    EXPECT_EQ(selection_probability({7.0}), std::vector<double>{1.0});
    const auto uniform = selection_probability({4.0, 4.0, 4.0, 4.0});
    for (double x : uniform) EXPECT_DOUBLE_EQ(x, 0.25);
}

TEST(SelectionProbability, SumsToOne) {
    Rng rng(55);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> f(1 + rng.bounded(20));
        for (double& x : f) x = rng.uniform(0.0, 100.0);
        f[rng.bounded(f.size())] = 1e-3; // keep at least one positive
        const auto p = selection_probability(f);
        double sum = 0.0;
        for (double x : p) sum += x;
        EXPECT_NEAR(sum, 1.0, 1e-9);
    }
}

TEST(SelectionProbability, Errors) {
    EXPECT_THROW(selection_probability({0.0, 0.0}), NoViableCandidate);
    EXPECT_THROW(selection_probability({1.0, -0.1}), std::invalid_argument);
}

TEST(ExtendPath, ForcedMoveInBothModes) {
    const auto f = line4();
    const auto view = GradingView::ungraded(0, 3);
    const auto params = params_for(false);
    Rng rng(1);
    for (auto mode : {ExtendMode::Roulette, ExtendMode::Greedy}) {
        const auto next =
            extend_path(start_path(0), f.topo, f.link_bw, view, params, mode, rng);
        ASSERT_TRUE(next.has_value());
        EXPECT_EQ(next->nodes, (std::vector<NodeId>{0, 1}));
        EXPECT_DOUBLE_EQ(next->bottleneck_bw, 50.0);
        EXPECT_FALSE(next->complete);
    }
}

TEST(ExtendPath, GreedyPicksArgmax) {
    const auto f = star({5.0, 9.0, 2.0});
    const auto view = GradingView::ungraded(0, 2);
    auto params = params_for(false);
    params.threshold_bandwidth = 1.0;
    Rng rng(1);
    const auto next = extend_path(start_path(0), f.topo, f.link_bw, view, params,
                                  ExtendMode::Greedy, rng);
    ASSERT_TRUE(next.has_value());
    EXPECT_EQ(next->nodes.back(), 2u);
    EXPECT_TRUE(next->complete); // reached the view's dest
}

TEST(ExtendPath, DeadEndReturnsNothing) {
    const auto f = line4();
    const auto view = GradingView::ungraded(0, 3);
    const auto params = params_for(false);
    Rng rng(1);
    PathCandidate stuck;
    stuck.nodes = {1, 0}; // standing at 0 with 1 used up
    stuck.bottleneck_bw = 50.0;
    EXPECT_FALSE(
        extend_path(stuck, f.topo, f.link_bw, view, params, ExtendMode::Greedy, rng)
            .has_value());
}

TEST(ExtendPath, RouletteFrequenciesTrackFitness) {
    const auto f = star({3.0, 5.0, 2.0});
    const auto view = GradingView::ungraded(0, 99); // unreachable dest id is fine
    auto params = params_for(false);
    params.threshold_bandwidth = 0.0;
    Rng rng(2024);
    const int draws = 10000;
    std::array<int, 4> counts{};
    for (int i = 0; i < draws; ++i) {
        const auto next = extend_path(start_path(0), f.topo, f.link_bw, view,
                                      params, ExtendMode::Roulette, rng);
        ASSERT_TRUE(next.has_value());
        counts[next->nodes.back()]++;
    }
    EXPECT_NEAR(counts[1] / double(draws), 0.3, 0.02);
    EXPECT_NEAR(counts[2] / double(draws), 0.5, 0.02);
    EXPECT_NEAR(counts[3] / double(draws), 0.2, 0.02);
}

TEST(AbcSearch, SourceEqualsDest) {
    const auto f = line4();
    const auto view = GradingView::ungraded(2, 2);
    const auto result = abc_search(f.topo, f.link_bw, view, 2, 2, params_for(false));
    ASSERT_TRUE(result.best_path.has_value());
    EXPECT_EQ(result.best_path->nodes, (std::vector<NodeId>{2}));
    EXPECT_TRUE(result.best_path->complete);
    EXPECT_EQ(result.cycles_used, 0);
    EXPECT_EQ(result.nodes_explored, 1);
}

TEST(AbcSearch, GradedLineMatchesEnumerationOracle) {
    const auto f = line4();
    const auto view =
        GradingView::make_graded(f.topo, 0, 3, std::vector<bool>(4, true));
    EXPECT_EQ(view.dest_quadrant, Quadrant::Q1);
    const auto result = abc_search(f.topo, f.link_bw, view, 0, 3, params_for(true));
    ASSERT_TRUE(result.best_path.has_value());

    const auto oracle_best =
        oracle::enumerate_max_bottleneck(f.topo, f.link_bw, 0, 3, 10.0);
    ASSERT_TRUE(oracle_best.has_value());
    EXPECT_EQ(oracle_best->feasible_paths, 1);
    EXPECT_EQ(result.best_path->nodes, oracle_best->path);
    EXPECT_DOUBLE_EQ(result.best_path->bottleneck_bw, oracle_best->bottleneck);
    EXPECT_LE(result.cycles_used, 50);
    EXPECT_DOUBLE_EQ(result.e_over_t,
                     result.best_path->bottleneck_bw / result.cycles_used);
    expect_valid_path(f, *result.best_path, 0, 3, 10.0);
}

TEST(AbcSearch, DisconnectedDestinationComesBackEmpty) {
    std::vector<Node> nodes{at(0, 0.0, 0.0), at(1, 1.0, 0.0), at(2, 50.0, 50.0),
                            at(3, 51.0, 50.0)};
    std::vector<Link> links{{0, 1, 100.0}, {2, 3, 100.0}};
    const auto f = make_fixture(std::move(nodes), std::move(links));
    const auto view = GradingView::ungraded(0, 3);
    const auto result = abc_search(f.topo, f.link_bw, view, 0, 3, params_for(false));
    EXPECT_FALSE(result.best_path.has_value());
    EXPECT_LE(result.cycles_used, 50);
    EXPECT_DOUBLE_EQ(result.e_over_t, 0.0);
}

TEST(AbcSearch, IsolatedSourceComesBackEmpty) {
    std::vector<Node> nodes{at(0, 0.0, 0.0), at(1, 90.0, 90.0), at(2, 91.0, 90.0)};
    std::vector<Link> links{{1, 2, 100.0}};
    const auto f = make_fixture(std::move(nodes), std::move(links));
    const auto result = abc_search(f.topo, f.link_bw, GradingView::ungraded(0, 2),
                                   0, 2, params_for(false));
    EXPECT_FALSE(result.best_path.has_value());
}

TEST(AbcSearch, ScoutsEscapeThroughAdjacentQuadrant) {
    // the only way from s to d (Q1) runs through m in Q2
    std::vector<Node> nodes{at(0, 0.0, 0.0), at(1, -1.0, 1.0), at(2, 5.0, 0.1)};
    std::vector<Link> links{{0, 1, 80.0}, {1, 2, 80.0}};
    const auto f = make_fixture(std::move(nodes), std::move(links));
    const auto view =
        GradingView::make_graded(f.topo, 0, 2, std::vector<bool>(3, true));
    auto params = params_for(true);
    const auto result = abc_search(f.topo, f.link_bw, view, 0, 2, params);
    ASSERT_TRUE(result.best_path.has_value());
    EXPECT_EQ(result.best_path->nodes, (std::vector<NodeId>{0, 1, 2}));
    EXPECT_GE(result.scout_escapes, 1);
}

TEST(AbcSearch, OppositeQuadrantNeedsAllQuadrantsPolicy) {
    // detour node sits in Q3, diagonally opposite the destination quadrant
    std::vector<Node> nodes{at(0, 0.0, 0.0), at(1, -1.0, -1.0), at(2, 5.0, 0.1)};
    std::vector<Link> links{{0, 1, 80.0}, {1, 2, 80.0}};
    const auto f = make_fixture(std::move(nodes), std::move(links));
    const auto view =
        GradingView::make_graded(f.topo, 0, 2, std::vector<bool>(3, true));

    auto adjacent_only = params_for(true);
    adjacent_only.max_cycles = 20;
    const auto blocked = abc_search(f.topo, f.link_bw, view, 0, 2, adjacent_only);
    EXPECT_FALSE(blocked.best_path.has_value());

    auto all_quadrants = params_for(true);
    all_quadrants.scout_policy = ScoutPolicy::AllQuadrants;
    const auto found = abc_search(f.topo, f.link_bw, view, 0, 2, all_quadrants);
    ASSERT_TRUE(found.best_path.has_value());
    EXPECT_EQ(found.best_path->nodes, (std::vector<NodeId>{0, 1, 2}));
    EXPECT_GE(found.scout_escapes, 1);
}

TEST(AbcSearch, ProductionFilterBlocksNonProductionDetours) {
    // two routes to d: through 1 (non-production) or through 2 (production)
    std::vector<Node> nodes{at(0, 0.0, 0.0), at(1, 1.0, 1.0), at(2, 1.0, 2.0),
                            at(3, 2.0, 1.5)};
    std::vector<Link> links{{0, 1, 90.0}, {0, 2, 30.0}, {1, 3, 90.0}, {2, 3, 30.0}};
    const auto f = make_fixture(std::move(nodes), std::move(links));
    std::vector<bool> production{true, false, true, true};
    const auto view = GradingView::make_graded(f.topo, 0, 3, production);
    const auto result = abc_search(f.topo, f.link_bw, view, 0, 3, params_for(true));
    ASSERT_TRUE(result.best_path.has_value());
    EXPECT_EQ(result.best_path->nodes, (std::vector<NodeId>{0, 2, 3}));
}

TEST(AbcSearch, DeterministicPerSeed) {
    TopologyConfig cfg;
    cfg.node_count = 20;
    cfg.seed = 5;
    cfg.connection_radius = 400.0;
    const auto topo = generate_topology(cfg);
    std::vector<double> bw;
    for (const auto& l : topo.links()) bw.push_back(l.capacity);
    const auto view = GradingView::ungraded(0, 7);
    const auto a = abc_search(topo, bw, view, 0, 7, params_for(false, 99));
    const auto b = abc_search(topo, bw, view, 0, 7, params_for(false, 99));
    EXPECT_EQ(a.best_path.has_value(), b.best_path.has_value());
    if (a.best_path) {
        EXPECT_EQ(a.best_path->nodes, b.best_path->nodes);
        EXPECT_DOUBLE_EQ(a.best_path->bottleneck_bw, b.best_path->bottleneck_bw);
    }
    EXPECT_EQ(a.cycles_used, b.cycles_used);
    EXPECT_EQ(a.nodes_explored, b.nodes_explored);
    EXPECT_EQ(a.scout_escapes, b.scout_escapes);
}

// Graded searches on oracle-solvable instances: quadrant-confined feasible
// paths exist, so the colony should complete nearly always.
TEST(AbcSearch, SolvesOracleConfirmedGradedInstances) {
    int solvable = 0;
    int solved = 0;
    for (std::uint64_t seed = 1; solvable < 50 && seed <= 200; ++seed) {
        TopologyConfig cfg;
        cfg.node_count = 15;
        cfg.seed = seed;
        cfg.connection_radius = 350.0;
        const auto topo = generate_topology(cfg);
        std::vector<double> bw;
        for (const auto& l : topo.links()) bw.push_back(l.capacity);

        Rng pick(derive_seed(seed, 1234));
        const NodeId source = static_cast<NodeId>(pick.bounded(15));
        NodeId dest = source;
        while (dest == source) dest = static_cast<NodeId>(pick.bounded(15));

        const auto view =
            GradingView::make_graded(topo, source, dest, std::vector<bool>(15, true));
        const auto solvable_path = oracle::enumerate_max_bottleneck(
            topo, bw, source, dest, 10.0,
            [&](NodeId n) { return view.in_dest_quadrant(n); });
        if (!solvable_path) continue;
        ++solvable;

        auto params = params_for(true, seed);
        const auto result = abc_search(topo, bw, view, source, dest, params);
        if (result.best_path) {
            ++solved;
            Fixture f{topo, bw};
            expect_valid_path(f, *result.best_path, source, dest,
                              params.threshold_bandwidth);
            // quadrant confinement unless a scout escape was reported
            if (result.scout_escapes == 0) {
                for (std::size_t i = 1; i < result.best_path->nodes.size(); ++i)
                    EXPECT_TRUE(view.in_dest_quadrant(result.best_path->nodes[i]));
            }
        }
    }
    ASSERT_GE(solvable, 30);
    EXPECT_GE(static_cast<double>(solved) / solvable, 0.95)
        << "solved " << solved << " of " << solvable;
}

TEST(AbcSearch, RejectsMismatchedView) {
    const auto f = line4();
    const auto view = GradingView::ungraded(0, 3);
    EXPECT_THROW(abc_search(f.topo, f.link_bw, view, 0, 2, params_for(false)),
                 std::invalid_argument);
    EXPECT_THROW(abc_search(f.topo, {1.0}, GradingView::ungraded(0, 3), 0, 3,
                            params_for(false)),
                 std::invalid_argument);
}

TEST(AbcParamsValidate, RejectsBadKnobs) {
    AbcParams p;
    p.max_cycles = 0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = AbcParams{};
    p.threshold_bandwidth = -1.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = AbcParams{};
    p.improvement_patience = 0;
    EXPECT_THROW(p.validate(), ConfigError);
}
