// topology.hpp — seeded random geometric topologies and quadrant queries.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace beeroute {

using NodeId = std::uint32_t;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct Node {
    NodeId id = 0;
    Vec2 position;
    double buffer_capacity = 1048576.0; // bytes
    double resource_allocation = 0.0;   // in [0, 1]
};

// Undirected, simple; endpoints stored with a < b.
struct Link {
    NodeId a = 0;
    NodeId b = 0;
    double capacity = 0.0; // bandwidth units
};

// Source-centered quadrants of the plane. Axis points resolve by the
// closed x >= 0 / y >= 0 convention, so every non-source point maps to
// exactly one quadrant.
enum class Quadrant : int { Q1 = 0, Q2 = 1, Q3 = 2, Q4 = 3 };

struct TopologyConfig {
    std::uint32_t node_count = 0;
    double arena_side = 1000.0;
    double connection_radius = 280.0; // nodes within this distance get a link
    double capacity_min = 80.0;
    double capacity_max = 120.0;
    std::uint64_t seed = 1;

    void validate() const; // throws ConfigError
};

class Topology {
public:
    Topology() = default;
    // Builds adjacency and incidence; rejects self-loops and duplicate links.
    Topology(std::vector<Node> nodes, std::vector<Link> links,
             std::uint64_t seed, double arena_side);

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Link>& links() const { return links_; }
    std::uint64_t seed() const { return seed_; }
    double arena_side() const { return arena_side_; }
    std::size_t node_count() const { return nodes_.size(); }

    const std::vector<NodeId>& adjacency(NodeId n) const;
    // Indices into links() of the links touching n.
    const std::vector<std::size_t>& incident_links(NodeId n) const;
    std::optional<std::size_t> link_index(NodeId a, NodeId b) const;
    bool valid_node(NodeId n) const { return n < nodes_.size(); }

private:
    std::vector<Node> nodes_;
    std::vector<Link> links_;
    std::vector<std::vector<NodeId>> adjacency_;
    std::vector<std::vector<std::size_t>> incident_;
    std::unordered_map<std::uint64_t, std::size_t> link_lookup_;
    std::uint64_t seed_ = 0;
    double arena_side_ = 0.0;
};

// Uniform node positions in the arena square, a link per pair within
// connection_radius, capacities uniform in [capacity_min, capacity_max].
// Bit-identical for identical config.
Topology generate_topology(const TopologyConfig& config);

// Quadrant of target relative to source. Throws CoincidentPoints when the
// positions coincide, std::invalid_argument on non-finite input.
Quadrant quadrant_of(Vec2 source, Vec2 target);

// Non-source nodes whose positions classify to q relative to source.
// Sorted by id.
std::vector<NodeId> nodes_in_quadrant(const Topology& topology, NodeId source,
                                      Quadrant q);

const std::vector<NodeId>& neighbors(const Topology& topology, NodeId n);

// True for quadrants sharing an axis (Q1-Q2, Q2-Q3, Q3-Q4, Q4-Q1).
bool quadrants_adjacent(Quadrant a, Quadrant b);

const char* quadrant_name(Quadrant q);

// JSON round trip. save/load throw IoError on filesystem failure.
std::string topology_to_json(const Topology& topology);
Topology topology_from_json(const std::string& text);
void save_topology(const Topology& topology, const std::string& path);
Topology load_topology(const std::string& path);

} // namespace beeroute
