// Inspect the physical layer: place the default scenario's nodes, build the
// slot-0 topology snapshot and print nodes, links and one routing table.
#include <iomanip>
#include <iostream>

#include <iovmesh/channel.hpp>
#include <iovmesh/config_io.hpp>
#include <iovmesh/routing.hpp>

int main() {
    iovmesh::SimConfig cfg;
    const auto defaults = iovmesh::node_defaults(cfg);
    iovmesh::RngStream rng(iovmesh::derive_seed(1, iovmesh::kSaltPlacement, 0, 0));
    const auto nodes = iovmesh::initial_placement(cfg.scenario, defaults, rng);
    const auto positions = iovmesh::positions_at(cfg.scenario, nodes, 0);
    const auto snap = iovmesh::build_topology(nodes, positions, cfg.channel,
                                              cfg.scenario.slot_length,
                                              cfg.scenario.packet_size_bits, 0);

    std::cout << "nodes:\n";
    for (const auto& n : nodes)
        std::cout << "  " << std::setw(2) << n.id << " " << std::setw(7) << to_string(n.kind)
                  << "  pos=(" << std::fixed << std::setprecision(1) << positions[n.id].x << ", "
                  << positions[n.id].y << ", " << positions[n.id].z << ")"
                  << "  C=" << n.cache_capacity << " pkt  F=" << n.forward_capacity << " pkt/slot\n";

    const auto edges = iovmesh::snapshot_edges(snap);
    std::cout << "\nlinks (" << edges.size() << " directed):\n";
    for (const auto& e : edges)
        std::cout << "  " << std::setw(2) << e.from << " -> " << std::setw(2) << e.to
                  << "  d=" << std::setw(6) << e.dist_m << " m  rate=" << e.rate << " pkt/slot\n";

    const auto tables = iovmesh::build_tables(snap);
    std::cout << "\nrouting table of node 0 (dest: next hop / port):\n";
    for (const auto& [dest, entry] : tables[0].entries)
        std::cout << "  " << std::setw(2) << dest << ": " << std::setw(2) << entry.next_hop
                  << " / " << entry.port << "\n";
    return 0;
}
