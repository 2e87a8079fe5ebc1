// traffic.hpp — per-link load evolution and derived bandwidth figures.
//
// Link load T_l counts flows. Each flow consumes per_flow_bandwidth units,
// so consumed bandwidth is per_flow_bandwidth * T_l and the remainder
// max(capacity - consumed, 0) is what the router sees. Loads relax toward
// gamma/mu along T(t) = T0*exp(-mu t) + (gamma/mu)(1 - exp(-mu t)).
#pragma once

#include <cstdint>
#include <vector>

#include "beeroute/topology.hpp"

namespace beeroute {

struct TrafficParams {
    double alpha = 10.0;       // external arrival rate into the cell (flows/s)
    double mu = 1.0;           // per-flow service rate (1/s)
    double lambda_se = 0.5;    // flow rate per unordered node pair (flows/s)
    double exit_probability = 0.2; // chance a circulating flow leaves at a node
    double packet_size_bytes = 262144.0; // 250 KB
    double per_flow_bandwidth = 1.0;     // bandwidth units one flow consumes
    double update_interval = 30.0;       // seconds between link refreshes

    void validate() const; // throws ConfigError
};

// Forwarding probabilities aligned with Topology adjacency lists:
// forward_prob[i][k] is the chance a flow at node i continues to
// adjacency(i)[k]. Rows sum to 1 - exit_prob[i].
struct RoutingMatrix {
    std::vector<std::vector<double>> forward_prob;
    std::vector<double> exit_prob;

    void validate(const Topology& topology) const; // throws invalid_argument
};

struct LinkState {
    double load = 0.0;        // T_l, flows currently routed across the link
    double gamma = 0.0;       // flow arrival rate to the link (flows/s)
    double last_update = 0.0; // simulation time of the last refresh (s)
};

// T0*exp(-mu t) + (gamma/mu)(1 - exp(-mu t)); domain error on mu <= 0 or t < 0.
double link_load_closed_form(double load0, double gamma, double mu, double t);

// dT/dt = gamma - T*mu
double link_load_derivative(double load, double gamma, double mu);

// max(capacity - load_bw, 0)
double available_bandwidth(double capacity, double load_bw);

// (per_flow_bw * load) / available_bw; throws SaturatedLink when
// available_bw is 0 (callers treat the link as congested).
double traffic_intensity(double per_flow_bw, double load, double available_bw);

// Random forwarding rows: per node, uniform weights over its neighbors
// normalized to 1 - exit_probability. Deterministic per seed.
RoutingMatrix build_routing_matrix(const Topology& topology,
                                   double exit_probability, std::uint64_t seed);

// Per-link flow arrival rates from two traffic classes:
//  - pairwise flows: lambda_se per unordered pair, half routed each way over
//    the shortest-path DAG toward the destination, split at every node by
//    the forwarding weights; unreachable pairs contribute nothing;
//  - cell arrivals: alpha split uniformly over entry nodes, then forwarded
//    memorylessly by the matrix until the flow exits (rate balance
//    lambda_i = a_i + sum_j lambda_j p_ji).
std::vector<double> assign_flow_rates(const Topology& topology,
                                      const TrafficParams& params,
                                      const RoutingMatrix& routing);
std::vector<double> assign_flow_rates(const Topology& topology,
                                      const TrafficParams& params,
                                      std::uint64_t seed);

// Initial loads uniform in [0, capacity / per_flow_bandwidth] per link.
std::vector<LinkState> init_link_states(const Topology& topology,
                                        const TrafficParams& params,
                                        const std::vector<double>& gammas,
                                        std::uint64_t seed);

// Refresh every link whose last update is at least update_interval old.
void advance_traffic(std::vector<LinkState>& states, const TrafficParams& params,
                     double now);

// Available bandwidth per link index at the current states (frozen snapshot
// handed to searches).
std::vector<double> snapshot_available_bw(const Topology& topology,
                                          const std::vector<LinkState>& states,
                                          const TrafficParams& params);

} // namespace beeroute
