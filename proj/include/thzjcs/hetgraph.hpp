// SPDX-License-Identifier: Apache-2.0
//
// Heterogeneous graph view of a topology: typed nodes (SPV, comm target,
// sensing target), typed weighted edges (service-comm, service-sense,
// SPV-SPV interference), per-node blocker-count features, and two-hop typed
// neighbor sampling.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "thzjcs/channel.hpp"
#include "thzjcs/common.hpp"
#include "thzjcs/scenario.hpp"

namespace thzjcs::hetgraph {

enum class EdgeType : std::uint8_t { ServiceComm = 0, ServiceSense = 1, Interference = 2 };
inline constexpr std::size_t kEdgeTypeCount = 3;

inline const char* edge_type_name(EdgeType t) {
    switch (t) {
        case EdgeType::ServiceComm: return "service_comm";
        case EdgeType::ServiceSense: return "service_sense";
        case EdgeType::Interference: return "interference";
    }
    return "?";
}

struct Edge {
    int u = 0;
    int v = 0;
    EdgeType type = EdgeType::ServiceComm;
    double weight = 0.0;  // (absorption_loss * spreading_loss)^-1
};

struct Neighbor {
    int node = 0;
    EdgeType type = EdgeType::ServiceComm;
    double weight = 0.0;
};

struct BuildOptions {
    double blocker_radius = 1.0;
    // 0 disables range pruning; otherwise edges longer than this are dropped.
    double edge_range_m = 0.0;
};

struct HeteroGraph {
    std::size_t node_count = 0;
    std::vector<scenario::Role> node_types;
    std::vector<std::vector<double>> features;  // per node, length L
    std::vector<Edge> edges;
    std::vector<std::vector<Neighbor>> adjacency;
    std::size_t comm_count = 0;
    std::size_t sense_count = 0;

    std::size_t target_count() const { return comm_count + sense_count; }
};

// Complete per-type edge sets: every SPV is linked to every target and to
// every other SPV. Feature entry j of node v counts the SPVs blocking the
// line of sight from v to target j (comm targets first); a target's own
// entry is 0.
inline HeteroGraph build_graph(const scenario::Topology& topo,
                               const channel::ChannelParams& chan,
                               const BuildOptions& opt = {}) {
    HeteroGraph g;
    g.node_count = topo.vehicles.size();
    g.comm_count = topo.comm_count();
    g.sense_count = topo.sense_count();
    g.node_types.reserve(g.node_count);
    for (const auto& v : topo.vehicles) g.node_types.push_back(v.role);

    std::vector<int> targets = topo.comm_targets();
    for (int n : topo.sense_targets()) targets.push_back(n);

    g.features.assign(g.node_count, std::vector<double>(targets.size(), 0.0));
    for (std::size_t v = 0; v < g.node_count; ++v)
        for (std::size_t j = 0; j < targets.size(); ++j)
            if (static_cast<int>(v) != targets[j])
                g.features[v][j] = scenario::los_blocker_count(
                    topo, static_cast<int>(v), targets[j], opt.blocker_radius);

    g.adjacency.assign(g.node_count, {});
    const auto spvs = topo.spvs();
    auto add_edge = [&](int u, int v, EdgeType type) {
        const double d = distance(topo.vehicles[u].position, topo.vehicles[v].position);
        if (opt.edge_range_m > 0.0 && d > opt.edge_range_m) return;
        const double w = 1.0 / (channel::absorption_loss(chan, d) * channel::spreading_loss(chan, d));
        g.edges.push_back({u, v, type, w});
        g.adjacency[u].push_back({v, type, w});
        g.adjacency[v].push_back({u, type, w});
    };
    for (int k : spvs) {
        for (int m : topo.comm_targets()) add_edge(k, m, EdgeType::ServiceComm);
        for (int n : topo.sense_targets()) add_edge(k, n, EdgeType::ServiceSense);
    }
    for (std::size_t i = 0; i < spvs.size(); ++i)
        for (std::size_t j = i + 1; j < spvs.size(); ++j)
            add_edge(spvs[i], spvs[j], EdgeType::Interference);
    return g;
}

struct SampledNeighborhood {
    int source = 0;
    std::vector<Neighbor> first_hop;                   // size <= s1
    std::vector<std::vector<Neighbor>> second_hop;     // parallel to first_hop, total size <= s2
};

// Uniform sampling without replacement: min(s1, degree) first-hop neighbors;
// the total second-hop budget s2 is spread round-robin across the first-hop
// nodes, each drawing from its own neighbors excluding the source.
inline SampledNeighborhood sample_neighborhood(const HeteroGraph& g, int source,
                                               std::size_t s1, std::size_t s2, Rng& rng) {
    if (source < 0 || static_cast<std::size_t>(source) >= g.node_count)
        throw std::invalid_argument("sample_neighborhood: source out of range");
    SampledNeighborhood out;
    out.source = source;
    const auto& nbrs = g.adjacency[source];
    for (const std::size_t idx : sample_without_replacement(rng, nbrs.size(), s1))
        out.first_hop.push_back(nbrs[idx]);
    out.second_hop.assign(out.first_hop.size(), {});

    // Candidate pools per first-hop node, excluding the source.
    std::vector<std::vector<Neighbor>> pools(out.first_hop.size());
    for (std::size_t i = 0; i < out.first_hop.size(); ++i)
        for (const auto& nb : g.adjacency[out.first_hop[i].node])
            if (nb.node != source) pools[i].push_back(nb);

    std::vector<std::size_t> quota(out.first_hop.size(), 0);
    std::size_t budget = s2;
    bool progress = true;
    while (budget > 0 && progress) {
        progress = false;
        for (std::size_t i = 0; i < quota.size() && budget > 0; ++i) {
            if (quota[i] < pools[i].size()) {
                ++quota[i];
                --budget;
                progress = true;
            }
        }
    }
    for (std::size_t i = 0; i < quota.size(); ++i)
        for (const std::size_t idx : sample_without_replacement(rng, pools[i].size(), quota[i]))
            out.second_hop[i].push_back(pools[i][idx]);
    return out;
}

// --- JSON serialization -----------------------------------------------------

inline nlohmann::ordered_json to_json(const HeteroGraph& g) {
    nlohmann::ordered_json j;
    j["schema"] = "thzjcs.graph/1";
    auto& nodes = j["nodes"] = nlohmann::ordered_json::array();
    for (std::size_t v = 0; v < g.node_count; ++v)
        nodes.push_back({{"id", v},
                         {"type", scenario::role_name(g.node_types[v])},
                         {"features", g.features[v]}});
    auto& edges = j["edges"] = nlohmann::ordered_json::array();
    for (const auto& e : g.edges)
        edges.push_back({{"u", e.u}, {"v", e.v},
                         {"type", edge_type_name(e.type)}, {"weight", e.weight}});
    return j;
}

}  // namespace thzjcs::hetgraph
