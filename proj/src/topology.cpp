#include "beeroute/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "beeroute/errors.hpp"
#include "beeroute/rng.hpp"

namespace beeroute {

namespace {

std::uint64_t pair_key(NodeId a, NodeId b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

} // namespace

void TopologyConfig::validate() const {
    if (node_count == 0) throw ConfigError("topology: node_count must be >= 1");
    if (!(arena_side > 0.0)) throw ConfigError("topology: arena_side must be > 0");
    if (!(connection_radius > 0.0))
        throw ConfigError("topology: connection_radius must be > 0");
    if (!(capacity_min > 0.0) || capacity_max < capacity_min)
        throw ConfigError("topology: capacity range must satisfy 0 < min <= max");
}

Topology::Topology(std::vector<Node> nodes, std::vector<Link> links,
                   std::uint64_t seed, double arena_side)
    : nodes_(std::move(nodes)), links_(std::move(links)), seed_(seed),
      arena_side_(arena_side) {
    adjacency_.assign(nodes_.size(), {});
    incident_.assign(nodes_.size(), {});
    link_lookup_.reserve(links_.size());
    for (std::size_t i = 0; i < links_.size(); ++i) {
        Link& l = links_[i];
        if (l.a > l.b) std::swap(l.a, l.b);
        if (l.a == l.b) throw std::invalid_argument("topology: self-loop");
        if (l.b >= nodes_.size())
            throw std::invalid_argument("topology: link endpoint out of range");
        if (!link_lookup_.emplace(pair_key(l.a, l.b), i).second)
            throw std::invalid_argument("topology: duplicate link");
        adjacency_[l.a].push_back(l.b);
        adjacency_[l.b].push_back(l.a);
        incident_[l.a].push_back(i);
        incident_[l.b].push_back(i);
    }
    for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
}

const std::vector<NodeId>& Topology::adjacency(NodeId n) const {
    if (!valid_node(n)) throw std::out_of_range("topology: unknown node id");
    return adjacency_[n];
}

const std::vector<std::size_t>& Topology::incident_links(NodeId n) const {
    if (!valid_node(n)) throw std::out_of_range("topology: unknown node id");
    return incident_[n];
}

std::optional<std::size_t> Topology::link_index(NodeId a, NodeId b) const {
    auto it = link_lookup_.find(pair_key(a, b));
    if (it == link_lookup_.end()) return std::nullopt;
    return it->second;
}

Topology generate_topology(const TopologyConfig& config) {
    config.validate();
    Rng rng(derive_seed(config.seed, kStreamTopology));

    std::vector<Node> nodes(config.node_count);
    for (std::uint32_t i = 0; i < config.node_count; ++i) {
        Node& n = nodes[i];
        n.id = i;
        n.position.x = rng.uniform(0.0, config.arena_side);
        n.position.y = rng.uniform(0.0, config.arena_side);
        n.resource_allocation = rng.uniform();
    }

    // Pairs scanned in (i, j) order so capacity draws are reproducible.
    std::vector<Link> links;
    const double r2 = config.connection_radius * config.connection_radius;
    for (std::uint32_t i = 0; i < config.node_count; ++i) {
        for (std::uint32_t j = i + 1; j < config.node_count; ++j) {
            const double dx = nodes[i].position.x - nodes[j].position.x;
            const double dy = nodes[i].position.y - nodes[j].position.y;
            if (dx * dx + dy * dy <= r2) {
                links.push_back(
                    {i, j, rng.uniform(config.capacity_min, config.capacity_max)});
            }
        }
    }
    return Topology(std::move(nodes), std::move(links), config.seed,
                    config.arena_side);
}

Quadrant quadrant_of(Vec2 source, Vec2 target) {
    if (!std::isfinite(source.x) || !std::isfinite(source.y) ||
        !std::isfinite(target.x) || !std::isfinite(target.y))
        throw std::invalid_argument("quadrant_of: non-finite position");
    const double dx = target.x - source.x;
    const double dy = target.y - source.y;
    if (dx == 0.0 && dy == 0.0)
        throw CoincidentPoints("quadrant_of: target coincides with source");
    if (dx >= 0.0) return dy >= 0.0 ? Quadrant::Q1 : Quadrant::Q4;
    return dy >= 0.0 ? Quadrant::Q2 : Quadrant::Q3;
}

std::vector<NodeId> nodes_in_quadrant(const Topology& topology, NodeId source,
                                      Quadrant q) {
    if (!topology.valid_node(source))
        throw std::out_of_range("nodes_in_quadrant: unknown source");
    const Vec2 origin = topology.nodes()[source].position;
    std::vector<NodeId> out;
    for (const Node& n : topology.nodes()) {
        if (n.id == source) continue;
        // Nodes stacked exactly on the source position count as Q1.
        Quadrant nq;
        try {
            nq = quadrant_of(origin, n.position);
        } catch (const CoincidentPoints&) {
            nq = Quadrant::Q1;
        }
        if (nq == q) out.push_back(n.id);
    }
    return out;
}

const std::vector<NodeId>& neighbors(const Topology& topology, NodeId n) {
    return topology.adjacency(n);
}

bool quadrants_adjacent(Quadrant a, Quadrant b) {
    if (a == b) return false;
    const int d = std::abs(static_cast<int>(a) - static_cast<int>(b));
    return d == 1 || d == 3;
}

const char* quadrant_name(Quadrant q) {
    switch (q) {
    case Quadrant::Q1: return "Q1";
    case Quadrant::Q2: return "Q2";
    case Quadrant::Q3: return "Q3";
    case Quadrant::Q4: return "Q4";
    }
    return "?";
}

std::string topology_to_json(const Topology& topology) {
    nlohmann::ordered_json j;
    j["seed"] = topology.seed();
    j["arena_side"] = topology.arena_side();
    j["nodes"] = nlohmann::ordered_json::array();
    for (const Node& n : topology.nodes()) {
        j["nodes"].push_back({{"id", n.id},
                              {"x", n.position.x},
                              {"y", n.position.y},
                              {"buffer", n.buffer_capacity},
                              {"resource", n.resource_allocation}});
    }
    j["links"] = nlohmann::ordered_json::array();
    for (const Link& l : topology.links()) {
        j["links"].push_back({{"a", l.a}, {"b", l.b}, {"capacity", l.capacity}});
    }
    return j.dump(2);
}

Topology topology_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("topology: bad JSON: ") + e.what());
    }
    try {
        std::vector<Node> nodes;
        for (const auto& jn : j.at("nodes")) {
            Node n;
            n.id = jn.at("id").get<NodeId>();
            n.position.x = jn.at("x").get<double>();
            n.position.y = jn.at("y").get<double>();
            n.buffer_capacity = jn.at("buffer").get<double>();
            n.resource_allocation = jn.at("resource").get<double>();
            nodes.push_back(n);
        }
        std::vector<Link> links;
        for (const auto& jl : j.at("links")) {
            links.push_back({jl.at("a").get<NodeId>(), jl.at("b").get<NodeId>(),
                             jl.at("capacity").get<double>()});
        }
        return Topology(std::move(nodes), std::move(links),
                        j.at("seed").get<std::uint64_t>(),
                        j.at("arena_side").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("topology: missing field: ") + e.what());
    }
}

void save_topology(const Topology& topology, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << topology_to_json(topology) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

Topology load_topology(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return topology_from_json(buf.str());
}

} // namespace beeroute
