// Link model: 3-D distance, range-gated V2V links, Shannon capacities and the
// per-slot weighted adjacency snapshot in whole packets per slot.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "core.hpp"
#include "scenario.hpp"
#include "units.hpp"

namespace iovmesh {

struct ChannelParams {
    double v2v_bandwidth_hz = 20e6;
    double v2i_bandwidth_hz = 40e6;
    double noise_w = 1e-13;          // -100 dBm
    double a0 = 0.0165958690743914;  // -17.8 dB interference floor coefficient
    double gain_v2v = 1.0;           // channel gain h (linear)
    double gain_v2i = 1.0;
    double coding_gain = 1.0;        // g in front of the log term
};

inline double distance(const Vec3& a, const Vec3& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Two vehicles are linked iff their distance is within range (inclusive).
inline bool link_exists_v2v(double dist_m, double range_m) { return dist_m <= range_m; }

// V2V Shannon rate in bit/s. The denominator carries a distance-dependent
// interference floor A0 * d^-2 on top of thermal noise; as written the rate
// grows with distance (the floor fades), which is intentional here. Distances
// below 1 m are clamped to keep the floor finite.
inline double capacity_v2v(const ChannelParams& p, double tx_power_w, double dist_m) {
    const double d = std::max(dist_m, 1.0);
    const double interference = p.a0 / (d * d);
    const double sinr = tx_power_w * p.gain_v2v / (p.noise_w + interference);
    return p.coding_gain * p.v2v_bandwidth_hz * std::log2(1.0 + sinr);
}

// V2I rate in bit/s: plain SNR, independent of distance within coverage.
inline double capacity_v2i(const ChannelParams& p, double tx_power_w) {
    const double snr = tx_power_w * p.gain_v2i / p.noise_w;
    return p.coding_gain * p.v2i_bandwidth_hz * std::log2(1.0 + snr);
}

// Directed adjacency for one slot. rate[i*n+j] is the whole-packet capacity
// of link i -> j for this slot; exists mirrors rate > 0 so a link whose
// capacity floors to zero packets is treated as absent.
struct TopologySnapshot {
    SlotIndex slot = 0;
    int n = 0;
    std::vector<Packets> rate;   // n*n, packets per slot
    std::vector<std::uint8_t> exists;
    std::vector<double> dist;    // n*n, metres

    Packets rate_at(NodeId i, NodeId j) const { return rate[static_cast<std::size_t>(i) * n + j]; }
    bool has_link(NodeId i, NodeId j) const { return exists[static_cast<std::size_t>(i) * n + j] != 0; }
    double dist_at(NodeId i, NodeId j) const { return dist[static_cast<std::size_t>(i) * n + j]; }
};

// Build the snapshot from node states and their positions at `slot`.
// V2V uses the vehicle range, V2I/I2V the RSU coverage radius; RSU-RSU links
// are not modelled. Rates use the *transmitter's* power and are floored to
// whole packets per slot.
inline TopologySnapshot build_topology(const std::vector<NodeState>& nodes,
                                       const std::vector<Vec3>& positions,
                                       const ChannelParams& params, double slot_length_s,
                                       double packet_size_bits, SlotIndex slot) {
    const int n = static_cast<int>(nodes.size());
    TopologySnapshot snap;
    snap.slot = slot;
    snap.n = n;
    snap.rate.assign(static_cast<std::size_t>(n) * n, 0);
    snap.exists.assign(static_cast<std::size_t>(n) * n, 0);
    snap.dist.assign(static_cast<std::size_t>(n) * n, 0.0);

    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const std::size_t idx = static_cast<std::size_t>(i) * n + j;
            const double d = distance(positions[static_cast<std::size_t>(i)],
                                      positions[static_cast<std::size_t>(j)]);
            snap.dist[idx] = d;
            const bool iv = nodes[static_cast<std::size_t>(i)].kind == NodeKind::vehicle;
            const bool jv = nodes[static_cast<std::size_t>(j)].kind == NodeKind::vehicle;
            double bps = 0.0;
            if (iv && jv) {
                if (!link_exists_v2v(d, nodes[static_cast<std::size_t>(i)].max_range)) continue;
                bps = capacity_v2v(params, nodes[static_cast<std::size_t>(i)].tx_power, d);
            } else if (iv != jv) {
                // vehicle <-> RSU link gated by the RSU coverage radius
                const auto& rsu = iv ? nodes[static_cast<std::size_t>(j)] : nodes[static_cast<std::size_t>(i)];
                if (d > rsu.max_range) continue;
                bps = capacity_v2i(params, nodes[static_cast<std::size_t>(i)].tx_power);
            } else {
                continue;  // RSU-RSU: not modelled
            }
            const Packets pkts = bits_rate_to_packets_per_slot(bps, slot_length_s, packet_size_bits);
            if (pkts > 0) {
                snap.rate[idx] = pkts;
                snap.exists[idx] = 1;
            }
        }
    }
    return snap;
}

struct EdgeRecord {
    NodeId from = 0, to = 0;
    double dist_m = 0.0;
    Packets rate = 0;
};

inline std::vector<EdgeRecord> snapshot_edges(const TopologySnapshot& snap) {
    std::vector<EdgeRecord> edges;
    for (NodeId i = 0; i < snap.n; ++i)
        for (NodeId j = 0; j < snap.n; ++j)
            if (snap.has_link(i, j))
                edges.push_back({i, j, snap.dist_at(i, j), snap.rate_at(i, j)});
    return edges;
}

}  // namespace iovmesh
