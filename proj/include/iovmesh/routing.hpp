// Per-snapshot shortest-path routing. Tables are built by one Dijkstra pass
// per destination over the reversed graph; the forwarding entry at each node
// is the smallest-id neighbour that lies on a shortest path. Because ties are
// broken the same way everywhere, per-node tables are mutually consistent and
// loop-free (each hop strictly decreases the remaining distance).
#pragma once

#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "channel.hpp"
#include "core.hpp"

namespace iovmesh {

enum class WeightMode { euclidean_distance, hop_count, inverse_rate };

inline std::string to_string(WeightMode m) {
    switch (m) {
        case WeightMode::euclidean_distance: return "distance";
        case WeightMode::hop_count: return "hops";
        case WeightMode::inverse_rate: return "inverse_rate";
    }
    return "?";
}

struct RoutingOptions {
    WeightMode weight_mode = WeightMode::euclidean_distance;
    int port_cap = 0;  // 0 = unlimited outgoing ports per node
};

// Weight of existing link i -> j. Always > 0 so shortest paths are simple.
inline double edge_weight(const TopologySnapshot& snap, NodeId i, NodeId j, WeightMode mode) {
    switch (mode) {
        case WeightMode::euclidean_distance: return std::max(snap.dist_at(i, j), 1e-6);
        case WeightMode::hop_count: return 1.0;
        case WeightMode::inverse_rate: return 1.0 / static_cast<double>(snap.rate_at(i, j));
    }
    return 1.0;
}

// Usable neighbours of `i` in ascending id order; a positive port_cap keeps
// only the first port_cap of them. Port ids are 1-based positions in this list.
inline std::vector<NodeId> node_neighbors(const TopologySnapshot& snap, NodeId i, int port_cap) {
    std::vector<NodeId> out;
    for (NodeId j = 0; j < snap.n; ++j) {
        if (!snap.has_link(i, j)) continue;
        out.push_back(j);
        if (port_cap > 0 && static_cast<int>(out.size()) == port_cap) break;
    }
    return out;
}

inline int port_of(const TopologySnapshot& snap, NodeId i, NodeId j, int port_cap) {
    auto nb = node_neighbors(snap, i, port_cap);
    for (std::size_t k = 0; k < nb.size(); ++k)
        if (nb[k] == j) return static_cast<int>(k) + 1;
    return 0;  // j is not a usable neighbour of i
}

// dist_to[i] = weight of the shortest path i -> dest (inf if unreachable).
// Runs Dijkstra from dest following edges backwards with forward weights.
inline std::vector<double> dist_to(const TopologySnapshot& snap, NodeId dest,
                                   const RoutingOptions& opt) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(static_cast<std::size_t>(snap.n), inf);
    std::vector<char> done(static_cast<std::size_t>(snap.n), 0);
    // Precompute capped adjacency once; reverse edges are scanned per pop.
    std::vector<std::vector<NodeId>> nb(static_cast<std::size_t>(snap.n));
    for (NodeId i = 0; i < snap.n; ++i) nb[static_cast<std::size_t>(i)] = node_neighbors(snap, i, opt.port_cap);

    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[static_cast<std::size_t>(dest)] = 0.0;
    pq.push({0.0, dest});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (done[static_cast<std::size_t>(u)]) continue;
        done[static_cast<std::size_t>(u)] = 1;
        for (NodeId i = 0; i < snap.n; ++i) {
            if (done[static_cast<std::size_t>(i)]) continue;
            // relax i -> u if u is a usable neighbour of i
            bool usable = false;
            for (NodeId j : nb[static_cast<std::size_t>(i)])
                if (j == u) { usable = true; break; }
            if (!usable) continue;
            const double cand = edge_weight(snap, i, u, opt.weight_mode) + d;
            if (cand < dist[static_cast<std::size_t>(i)]) {
                dist[static_cast<std::size_t>(i)] = cand;
                pq.push({cand, i});
            }
        }
    }
    return dist;
}

struct RouteHop {
    NodeId from = 0, to = 0;
    int port = 0;            // 1-based output port at `from`
    Packets planned_rate = 0;  // link rate in the snapshot the route was built on
};

struct Route {
    std::vector<NodeId> nodes;  // src .. dst
    std::vector<RouteHop> hops;
    SlotIndex built_at = 0;
    double total_weight = 0.0;
};

// Smallest-id neighbour of `i` on a shortest path toward dest, given dist_to.
// The equality is exact: Dijkstra assigned dist[i] as w(i,j*) + dist[j*] for
// some neighbour, and we re-evaluate the identical expression here.
inline std::optional<NodeId> tight_neighbor(const TopologySnapshot& snap, NodeId i,
                                            const std::vector<double>& dist,
                                            const RoutingOptions& opt) {
    if (std::isinf(dist[static_cast<std::size_t>(i)])) return std::nullopt;
    for (NodeId j : node_neighbors(snap, i, opt.port_cap)) {
        if (std::isinf(dist[static_cast<std::size_t>(j)])) continue;
        if (edge_weight(snap, i, j, opt.weight_mode) + dist[static_cast<std::size_t>(j)] ==
            dist[static_cast<std::size_t>(i)])
            return j;
    }
    return std::nullopt;
}

inline std::optional<Route> shortest_path(const TopologySnapshot& snap, NodeId src, NodeId dst,
                                          const RoutingOptions& opt = {}) {
    if (src < 0 || src >= snap.n || dst < 0 || dst >= snap.n)
        throw std::out_of_range("shortest_path: node id outside snapshot");
    auto dist = dist_to(snap, dst, opt);
    if (std::isinf(dist[static_cast<std::size_t>(src)])) return std::nullopt;
    Route route;
    route.built_at = snap.slot;
    route.total_weight = dist[static_cast<std::size_t>(src)];
    route.nodes.push_back(src);
    NodeId cur = src;
    while (cur != dst) {
        auto next = tight_neighbor(snap, cur, dist, opt);
        if (!next) return std::nullopt;  // cannot happen on finite dist; guard anyway
        RouteHop hop;
        hop.from = cur;
        hop.to = *next;
        hop.port = port_of(snap, cur, *next, opt.port_cap);
        hop.planned_rate = snap.rate_at(cur, *next);
        route.hops.push_back(hop);
        route.nodes.push_back(*next);
        cur = *next;
    }
    return route;
}

struct PortTableEntry {
    NodeId next_hop = 0;
    int port = 0;
};

struct PortRoutingTable {
    NodeId owner = 0;
    SlotIndex built_at = 0;
    std::map<NodeId, PortTableEntry> entries;  // destination -> (next hop, port)
};

inline std::optional<PortTableEntry> next_hop(const PortRoutingTable& table, NodeId dest) {
    auto it = table.entries.find(dest);
    if (it == table.entries.end()) return std::nullopt;
    return it->second;
}

// Tables for every node. One reverse-Dijkstra per destination serves all
// sources, so tie-breaking is globally consistent by construction.
inline std::vector<PortRoutingTable> build_tables(const TopologySnapshot& snap,
                                                  const RoutingOptions& opt = {}) {
    std::vector<PortRoutingTable> tables(static_cast<std::size_t>(snap.n));
    for (NodeId i = 0; i < snap.n; ++i) {
        tables[static_cast<std::size_t>(i)].owner = i;
        tables[static_cast<std::size_t>(i)].built_at = snap.slot;
    }
    for (NodeId d = 0; d < snap.n; ++d) {
        auto dist = dist_to(snap, d, opt);
        for (NodeId i = 0; i < snap.n; ++i) {
            if (i == d || std::isinf(dist[static_cast<std::size_t>(i)])) continue;
            auto j = tight_neighbor(snap, i, dist, opt);
            if (!j) continue;
            tables[static_cast<std::size_t>(i)].entries[d] = {*j, port_of(snap, i, *j, opt.port_cap)};
        }
    }
    return tables;
}

}  // namespace iovmesh
