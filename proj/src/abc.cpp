#include "beeroute/abc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "beeroute/errors.hpp"
#include "beeroute/rng.hpp"

namespace beeroute {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void AbcParams::validate() const {
    if (max_cycles < 1) throw ConfigError("abc: max_cycles must be >= 1");
    if (!(threshold_bandwidth >= 0.0))
        throw ConfigError("abc: threshold_bandwidth must be >= 0");
    if (improvement_patience < 1)
        throw ConfigError("abc: improvement_patience must be >= 1");
    if (!(forage_probability > 0.0) || forage_probability > 1.0)
        throw ConfigError("abc: forage_probability must be in (0, 1]");
}

bool GradingView::in_dest_quadrant(NodeId n) const {
    if (n == source) return false;
    return node_quadrant.at(n) == dest_quadrant;
}

bool GradingView::admits(NodeId n, ScoutPolicy policy, bool scout_relaxed) const {
    if (n == dest) return true; // the query target is always reachable-by-rule
    if (!production.empty() && !production.at(n)) return false;
    if (!graded) return true;
    if (n == source) return true;
    const Quadrant q = node_quadrant.at(n);
    if (q == dest_quadrant) return true;
    if (!scout_relaxed) return false;
    if (policy == ScoutPolicy::AllQuadrants) return true;
    return quadrants_adjacent(q, dest_quadrant);
}

GradingView GradingView::ungraded(NodeId source, NodeId dest) {
    GradingView v;
    v.graded = false;
    v.source = source;
    v.dest = dest;
    return v;
}

GradingView GradingView::make_graded(const Topology& topology, NodeId source,
                                     NodeId dest, std::vector<bool> production) {
    if (!topology.valid_node(source) || !topology.valid_node(dest))
        throw std::out_of_range("grading view: unknown node");
    if (source == dest)
        throw std::invalid_argument("grading view: degenerate query has no quadrant");
    GradingView v;
    v.graded = true;
    v.source = source;
    v.dest = dest;
    v.production = std::move(production);
    const Vec2 origin = topology.nodes()[source].position;
    v.dest_quadrant = quadrant_of(origin, topology.nodes()[dest].position);
    v.node_quadrant.resize(topology.node_count(), Quadrant::Q1);
    for (const Node& n : topology.nodes()) {
        if (n.id == source) continue;
        try {
            v.node_quadrant[n.id] = quadrant_of(origin, n.position);
        } catch (const CoincidentPoints&) {
            v.node_quadrant[n.id] = Quadrant::Q1; // stacked on the source
        }
    }
    return v;
}

double node_fitness(double link_bw, bool in_quadrant, const AbcParams& params) {
    if (link_bw < params.threshold_bandwidth) return 0.0;
    if (params.graded_mode && !in_quadrant) return 0.0;
    return link_bw;
}

std::vector<double> selection_probability(const std::vector<double>& fitnesses) {
    double sum = 0.0;
    for (double f : fitnesses) {
        if (!(f >= 0.0))
            throw std::invalid_argument("selection_probability: negative fitness");
        sum += f;
    }
    if (!(sum > 0.0))
        throw NoViableCandidate("selection_probability: all fitnesses zero");
    std::vector<double> p(fitnesses.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = fitnesses[i] / sum;
    return p;
}

namespace {

struct Successor {
    NodeId node;
    std::size_t link;
    double fitness;
};

// Unvisited admissible neighbors of the path's last node with positive
// fitness, in ascending node id order.
std::vector<Successor> viable_successors(const std::vector<NodeId>& path,
                                         const Topology& topology,
                                         const std::vector<double>& link_bw,
                                         const GradingView& view,
                                         const AbcParams& params,
                                         bool scout_relaxed) {
    std::vector<Successor> out;
    const NodeId last = path.back();
    for (NodeId u : topology.adjacency(last)) {
        if (std::find(path.begin(), path.end(), u) != path.end()) continue;
        if (!view.admits(u, params.scout_policy, scout_relaxed)) continue;
        const std::size_t li = *topology.link_index(last, u);
        // Admission already settled the quadrant question for this bee.
        const double f = node_fitness(link_bw[li], true, params);
        if (f > 0.0) out.push_back({u, li, f});
    }
    return out;
}

} // namespace

std::optional<PathCandidate> extend_path(const PathCandidate& path,
                                         const Topology& topology,
                                         const std::vector<double>& link_bw,
                                         const GradingView& view,
                                         const AbcParams& params, ExtendMode mode,
                                         Rng& rng, bool scout_relaxed) {
    if (path.complete)
        throw std::invalid_argument("extend_path: path already complete");
    if (path.nodes.empty())
        throw std::invalid_argument("extend_path: empty path");

    const auto successors =
        viable_successors(path.nodes, topology, link_bw, view, params, scout_relaxed);
    if (successors.empty()) return std::nullopt; // dead end

    std::size_t pick = 0;
    if (mode == ExtendMode::Greedy) {
        for (std::size_t i = 1; i < successors.size(); ++i) {
            if (successors[i].fitness > successors[pick].fitness) pick = i;
            // ascending id order makes the tie-break implicit
        }
    } else {
        std::vector<double> fitnesses(successors.size());
        for (std::size_t i = 0; i < successors.size(); ++i)
            fitnesses[i] = successors[i].fitness;
        const auto probs = selection_probability(fitnesses);
        const double r = rng.uniform();
        double cum = 0.0;
        pick = successors.size() - 1;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            cum += probs[i];
            if (r < cum) {
                pick = i;
                break;
            }
        }
    }

    const Successor& s = successors[pick];
    PathCandidate next = path;
    next.nodes.push_back(s.node);
    const double base = path.nodes.size() >= 2 ? path.bottleneck_bw : kInf;
    next.bottleneck_bw = std::min(base, link_bw[s.link]);
    next.complete = (s.node == view.dest);
    next.fitness = next.bottleneck_bw;
    return next;
}

namespace {

struct Bee {
    std::vector<NodeId> path;
    double bottleneck = kInf;
    bool scout_relaxed = false;
    bool idle = false; // onlookers between adoptions
};

PathCandidate bee_candidate(const Bee& bee) {
    PathCandidate c;
    c.nodes = bee.path;
    c.bottleneck_bw = bee.bottleneck;
    c.complete = false;
    c.fitness = bee.path.size() >= 2 ? bee.bottleneck : 0.0;
    return c;
}

} // namespace

SearchResult abc_search(const Topology& topology,
                        const std::vector<double>& link_bw,
                        const GradingView& view, NodeId source, NodeId dest,
                        const AbcParams& params) {
    params.validate();
    if (!topology.valid_node(source) || !topology.valid_node(dest))
        throw std::out_of_range("abc_search: unknown source or dest");
    if (view.source != source || view.dest != dest)
        throw std::invalid_argument("abc_search: grading view built for another query");
    if (link_bw.size() != topology.links().size())
        throw std::invalid_argument("abc_search: bandwidth snapshot size mismatch");

    const auto t_start = std::chrono::steady_clock::now();
    SearchResult result;

    std::vector<bool> visited(topology.node_count(), false);
    int visited_count = 0;
    auto mark = [&](NodeId n) {
        if (!visited[n]) {
            visited[n] = true;
            ++visited_count;
        }
    };
    mark(source);

    auto finish = [&](std::optional<PathCandidate> best, int cycles) {
        result.cycles_used = cycles;
        result.nodes_explored = visited_count;
        result.e_over_t =
            best ? best->bottleneck_bw / std::max(1, cycles) : 0.0;
        result.best_path = std::move(best);
        result.wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t_start)
                             .count();
        return result;
    };

    if (source == dest) {
        PathCandidate trivial;
        trivial.nodes = {source};
        trivial.bottleneck_bw = 0.0;
        trivial.complete = true;
        return finish(trivial, 0);
    }

    const std::size_t employed_count = topology.adjacency(source).size();
    if (employed_count == 0) return finish(std::nullopt, 0);

    std::size_t onlooker_count = employed_count;
    if (view.graded) {
        onlooker_count = 0;
        for (NodeId u : topology.adjacency(source))
            if (view.in_dest_quadrant(u)) ++onlooker_count;
        if (onlooker_count == 0) {
            // no source neighbor in the destination quadrant: fall back to
            // the scout admission rule for the onlooker census
            for (NodeId u : topology.adjacency(source))
                if (view.admits(u, params.scout_policy, true)) ++onlooker_count;
        }
    }

    Rng rng(params.rng_seed);

    std::optional<PathCandidate> best;
    int current_cycle = 1; // setup work counts as the first cycle
    int best_cycle = 1;
    auto memorize = [&](const PathCandidate& cand) {
        if (!best || cand.bottleneck_bw > best->bottleneck_bw) {
            best = cand;
            best_cycle = current_cycle;
            return true;
        }
        return false;
    };

    // One employed bee per source neighbor, each assigned that neighbor as
    // its initial food source when the link is viable.
    std::vector<Bee> employed(employed_count);
    {
        const auto& nb = topology.adjacency(source);
        for (std::size_t k = 0; k < employed_count; ++k) {
            Bee& bee = employed[k];
            bee.path = {source};
            const NodeId first = nb[k];
            if (!view.admits(first, params.scout_policy, false)) continue;
            const double bw = link_bw[*topology.link_index(source, first)];
            if (node_fitness(bw, true, params) <= 0.0) continue;
            mark(first);
            if (first == dest) {
                PathCandidate direct;
                direct.nodes = {source, dest};
                direct.bottleneck_bw = bw;
                direct.complete = true;
                direct.fitness = bw;
                memorize(direct); // bee stays home, source already exploited
            } else {
                bee.path = {source, first};
                bee.bottleneck = bw;
            }
        }
    }
    std::vector<Bee> onlookers(onlooker_count);
    for (Bee& b : onlookers) {
        b.path = {source};
        b.idle = true;
    }

    auto reset_to_scout = [&](Bee& bee) {
        bee.path = {source};
        bee.bottleneck = kInf;
        bee.scout_relaxed = true;
        ++result.scout_escapes;
    };

    struct StepOutcome {
        bool improved = false;
        bool stuck = false; // parked at the source with nothing admissible
    };
    auto step_bee = [&](Bee& bee, ExtendMode mode) -> StepOutcome {
        auto next = extend_path(bee_candidate(bee), topology, link_bw, view,
                                params, mode, rng, bee.scout_relaxed);
        if (!next) {
            const bool was_at_source = bee.path.size() == 1;
            // dead end: become a scout and take the restarted walk's first
            // step within the same cycle
            reset_to_scout(bee);
            if (!was_at_source)
                next = extend_path(bee_candidate(bee), topology, link_bw, view,
                                   params, mode, rng, bee.scout_relaxed);
            if (!next) return {false, true};
        }
        mark(next->nodes.back());
        if (next->complete) {
            const bool improved = memorize(*next);
            bee.path = {source};
            bee.bottleneck = kInf;
            bee.scout_relaxed = false;
            bee.idle = true;
            return {improved, false};
        }
        bee.path = std::move(next->nodes);
        bee.bottleneck = next->bottleneck_bw;
        return {false, false};
    };

    int cycles = 0;
    int unimproved = 0;
    for (int cycle = 1; cycle <= params.max_cycles; ++cycle) {
        cycles = cycle;
        current_cycle = cycle;
        const bool had_best = best.has_value();
        bool improved = false;

        auto forages = [&]() {
            return params.forage_probability >= 1.0 ||
                   rng.uniform() < params.forage_probability;
        };

        for (Bee& bee : employed) {
            if (!forages()) continue;
            improved |= step_bee(bee, ExtendMode::Roulette).improved;
        }

        // Dance floor: employed bees with a partial on the go report it;
        // idle onlookers pick a reported source with probability
        // proportional to its nectar.
        std::vector<std::size_t> reports;
        std::vector<double> report_fitness;
        for (std::size_t i = 0; i < employed.size(); ++i) {
            if (employed[i].path.size() < 2) continue;
            reports.push_back(i);
            report_fitness.push_back(employed[i].bottleneck);
        }
        std::vector<double> adoption;
        if (!reports.empty()) adoption = selection_probability(report_fitness);

        for (Bee& bee : onlookers) {
            if (!forages()) continue;
            if (bee.idle) {
                bee.idle = false;
                if (!reports.empty()) {
                    const double draw = rng.uniform();
                    std::size_t pick = reports.size() - 1;
                    double cum = 0.0;
                    for (std::size_t i = 0; i < adoption.size(); ++i) {
                        cum += adoption[i];
                        if (draw < cum) {
                            pick = i;
                            break;
                        }
                    }
                    const Bee& src_bee = employed[reports[pick]];
                    bee.path = src_bee.path;
                    bee.bottleneck = src_bee.bottleneck;
                } else {
                    bee.path = {source};
                    bee.bottleneck = kInf;
                }
            }
            improved |= step_bee(bee, ExtendMode::Greedy).improved;
        }

        if (improved) {
            unimproved = 0;
        } else if (had_best) {
            if (++unimproved >= params.improvement_patience) break;
        }
    }

    // Computation time is the convergence cycle, the cycle the final best
    // path first appeared in; a fruitless search reports the cycles it ran.
    return finish(std::move(best), best ? best_cycle : cycles);
}

} // namespace beeroute
