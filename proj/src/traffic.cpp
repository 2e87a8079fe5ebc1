#include "beeroute/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "beeroute/errors.hpp"
#include "beeroute/rng.hpp"

namespace beeroute {

void TrafficParams::validate() const {
    if (!(alpha >= 0.0)) throw ConfigError("traffic: alpha must be >= 0");
    if (!(mu > 0.0)) throw ConfigError("traffic: mu must be > 0");
    if (!(lambda_se >= 0.0)) throw ConfigError("traffic: lambda_se must be >= 0");
    if (!(exit_probability > 0.0) || exit_probability > 1.0)
        throw ConfigError("traffic: exit_probability must be in (0, 1]");
    if (!(packet_size_bytes > 0.0))
        throw ConfigError("traffic: packet_size_bytes must be > 0");
    if (!(per_flow_bandwidth > 0.0))
        throw ConfigError("traffic: per_flow_bandwidth must be > 0");
    if (!(update_interval > 0.0))
        throw ConfigError("traffic: update_interval must be > 0");
}

void RoutingMatrix::validate(const Topology& topology) const {
    const std::size_t n = topology.node_count();
    if (forward_prob.size() != n || exit_prob.size() != n)
        throw std::invalid_argument("routing matrix: row count mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = forward_prob[i];
        if (row.size() != topology.adjacency(static_cast<NodeId>(i)).size())
            throw std::invalid_argument("routing matrix: row width mismatch");
        double sum = 0.0;
        for (double p : row) {
            if (!(p >= 0.0)) throw std::invalid_argument("routing matrix: p < 0");
            sum += p;
        }
        if (exit_prob[i] < 0.0 || exit_prob[i] > 1.0 + 1e-12 ||
            std::abs(sum + exit_prob[i] - 1.0) > 1e-9)
            throw std::invalid_argument("routing matrix: row does not sum to 1");
    }
}

double link_load_closed_form(double load0, double gamma, double mu, double t) {
    if (!(mu > 0.0)) throw std::domain_error("link load: mu must be > 0");
    if (t < 0.0) throw std::domain_error("link load: t must be >= 0");
    const double decay = std::exp(-mu * t);
    return load0 * decay + (gamma / mu) * (1.0 - decay);
}

double link_load_derivative(double load, double gamma, double mu) {
    return gamma - load * mu;
}

double available_bandwidth(double capacity, double load_bw) {
    return std::max(capacity - load_bw, 0.0);
}

double traffic_intensity(double per_flow_bw, double load, double available_bw) {
    if (available_bw <= 0.0)
        throw SaturatedLink("traffic intensity undefined on a saturated link");
    return per_flow_bw * load / available_bw;
}

RoutingMatrix build_routing_matrix(const Topology& topology,
                                   double exit_probability, std::uint64_t seed) {
    if (!(exit_probability > 0.0) || exit_probability > 1.0)
        throw std::invalid_argument("routing matrix: exit probability in (0, 1]");
    Rng rng(derive_seed(seed, kStreamRouting));
    const std::size_t n = topology.node_count();
    RoutingMatrix m;
    m.forward_prob.resize(n);
    m.exit_prob.assign(n, exit_probability);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& nb = topology.adjacency(static_cast<NodeId>(i));
        if (nb.empty()) {
            m.exit_prob[i] = 1.0; // nowhere to forward
            continue;
        }
        std::vector<double> w(nb.size());
        double sum = 0.0;
        for (double& x : w) {
            x = rng.uniform();
            sum += x;
        }
        m.forward_prob[i].resize(nb.size());
        for (std::size_t k = 0; k < nb.size(); ++k)
            m.forward_prob[i][k] = (1.0 - exit_probability) * w[k] / sum;
    }
    return m;
}

namespace {

// BFS hop distances to dest; unreachable stays SIZE_MAX.
std::vector<std::size_t> hop_distances(const Topology& topology, NodeId dest) {
    std::vector<std::size_t> dist(topology.node_count(),
                                  std::numeric_limits<std::size_t>::max());
    std::queue<NodeId> q;
    dist[dest] = 0;
    q.push(dest);
    while (!q.empty()) {
        const NodeId v = q.front();
        q.pop();
        for (NodeId u : topology.adjacency(v)) {
            if (dist[u] != std::numeric_limits<std::size_t>::max()) continue;
            dist[u] = dist[v] + 1;
            q.push(u);
        }
    }
    return dist;
}

// Pairwise flows toward dest: every other node injects `inject` flows/s,
// each node splits its outflow over distance-decreasing neighbors in
// proportion to the forwarding weights. Flows merge, so one sweep in
// decreasing-distance order settles the whole destination tree.
void accumulate_pair_flows(const Topology& topology, const RoutingMatrix& routing,
                           NodeId dest, double inject,
                           std::vector<double>& gamma) {
    const auto dist = hop_distances(topology, dest);
    std::vector<NodeId> order;
    order.reserve(topology.node_count());
    for (NodeId v = 0; v < topology.node_count(); ++v) {
        if (v != dest && dist[v] != std::numeric_limits<std::size_t>::max())
            order.push_back(v);
    }
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
        if (dist[a] != dist[b]) return dist[a] > dist[b];
        return a < b;
    });

    std::vector<double> through(topology.node_count(), 0.0);
    for (NodeId v : order) {
        const double out = inject + through[v];
        const auto& nb = topology.adjacency(v);
        double weight_sum = 0.0;
        for (std::size_t k = 0; k < nb.size(); ++k) {
            if (dist[nb[k]] + 1 == dist[v]) weight_sum += routing.forward_prob[v][k];
        }
        for (std::size_t k = 0; k < nb.size(); ++k) {
            const NodeId u = nb[k];
            if (dist[u] + 1 != dist[v]) continue;
            // Uniform split if the matrix happens to give all next hops zero.
            const double share =
                weight_sum > 0.0 ? routing.forward_prob[v][k] / weight_sum : 0.0;
            double part = out * share;
            if (weight_sum <= 0.0) {
                std::size_t hops = 0;
                for (std::size_t k2 = 0; k2 < nb.size(); ++k2)
                    if (dist[nb[k2]] + 1 == dist[v]) ++hops;
                part = out / static_cast<double>(hops);
            }
            gamma[*topology.link_index(v, u)] += part;
            through[u] += part;
        }
    }
}

// Memoryless cell arrivals: alpha lands uniformly, then circulates by the
// forwarding rows until exit. Fixed point of lambda = a + P^T lambda.
std::vector<double> circulation_rates(const Topology& topology,
                                      const RoutingMatrix& routing, double alpha) {
    const std::size_t n = topology.node_count();
    std::vector<double> lambda(n, 0.0), next(n, 0.0);
    const double entry = alpha / static_cast<double>(n);
    for (int iter = 0; iter < 10000; ++iter) {
        std::fill(next.begin(), next.end(), entry);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& nb = topology.adjacency(static_cast<NodeId>(i));
            for (std::size_t k = 0; k < nb.size(); ++k)
                next[nb[k]] += lambda[i] * routing.forward_prob[i][k];
        }
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            delta = std::max(delta, std::abs(next[i] - lambda[i]));
        lambda.swap(next);
        if (delta <= 1e-12) break;
    }
    return lambda;
}

} // namespace

std::vector<double> assign_flow_rates(const Topology& topology,
                                      const TrafficParams& params,
                                      const RoutingMatrix& routing) {
    params.validate();
    routing.validate(topology);
    std::vector<double> gamma(topology.links().size(), 0.0);

    if (params.lambda_se > 0.0 && topology.node_count() > 1) {
        // lambda_se per unordered pair, half routed in each direction.
        const double inject = 0.5 * params.lambda_se;
        for (NodeId dest = 0; dest < topology.node_count(); ++dest)
            accumulate_pair_flows(topology, routing, dest, inject, gamma);
    }

    if (params.alpha > 0.0) {
        const auto lambda = circulation_rates(topology, routing, params.alpha);
        for (std::size_t i = 0; i < topology.node_count(); ++i) {
            const auto& nb = topology.adjacency(static_cast<NodeId>(i));
            for (std::size_t k = 0; k < nb.size(); ++k) {
                gamma[*topology.link_index(static_cast<NodeId>(i), nb[k])] +=
                    lambda[i] * routing.forward_prob[i][k];
            }
        }
    }
    return gamma;
}

std::vector<double> assign_flow_rates(const Topology& topology,
                                      const TrafficParams& params,
                                      std::uint64_t seed) {
    return assign_flow_rates(
        topology, params,
        build_routing_matrix(topology, params.exit_probability, seed));
}

std::vector<LinkState> init_link_states(const Topology& topology,
                                        const TrafficParams& params,
                                        const std::vector<double>& gammas,
                                        std::uint64_t seed) {
    if (gammas.size() != topology.links().size())
        throw std::invalid_argument("init_link_states: gamma size mismatch");
    Rng rng(derive_seed(seed, kStreamInitialLoad));
    std::vector<LinkState> states(topology.links().size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        states[i].load = rng.uniform(
            0.0, topology.links()[i].capacity / params.per_flow_bandwidth);
        states[i].gamma = gammas[i];
        states[i].last_update = 0.0;
    }
    return states;
}

void advance_traffic(std::vector<LinkState>& states, const TrafficParams& params,
                     double now) {
    for (LinkState& s : states) {
        const double elapsed = now - s.last_update;
        if (elapsed < 0.0)
            throw std::domain_error("advance_traffic: time went backwards");
        if (elapsed >= params.update_interval) {
            s.load = link_load_closed_form(s.load, s.gamma, params.mu, elapsed);
            s.last_update = now;
        }
    }
}

std::vector<double> snapshot_available_bw(const Topology& topology,
                                          const std::vector<LinkState>& states,
                                          const TrafficParams& params) {
    if (states.size() != topology.links().size())
        throw std::invalid_argument("snapshot: state count mismatch");
    std::vector<double> bw(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        bw[i] = available_bandwidth(topology.links()[i].capacity,
                                    params.per_flow_bandwidth * states[i].load);
    }
    return bw;
}

} // namespace beeroute
