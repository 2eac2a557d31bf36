// Urban-grid scenario: road geometry, RSU placement, traffic-light schedule
// and uniform-linear vehicle mobility. Everything here is a pure function of
// the config and the placement rng stream, so trajectories are reproducible.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace iovmesh {

struct LightSpan {
    SlotIndex start_slot = 0;
    LightPhaseKind phase = LightPhaseKind::horizontal_green;
};

struct LightPhase {
    LightPhaseKind phase = LightPhaseKind::horizontal_green;
    SlotIndex begin = 0;  // first slot of the span
    SlotIndex end = 0;    // one past the last slot
};

struct ScenarioConfig {
    double area_width = 866.0;   // m
    double area_height = 500.0;  // m
    double lane_width = 3.5;     // m
    int lanes_per_direction = 2;
    int n_vehicles = 20;
    int n_rsus = 4;
    double slot_length = 0.1;  // s
    SlotIndex n_slots = 300;
    double speed_min = 20.0 / 3.6;  // m/s
    double speed_max = 40.0 / 3.6;  // m/s
    std::vector<LightSpan> light_schedule = {
        {0, LightPhaseKind::horizontal_green},
        {100, LightPhaseKind::all_yellow},
        {150, LightPhaseKind::vertical_green},
    };
    double packet_size_bits = 1e6;
    std::uint64_t seed = 1;

    double vehicle_antenna_z = 1.5;  // m
    double rsu_antenna_z = 5.0;      // m
    std::vector<std::pair<double, double>> rsu_positions;  // empty = grid-cell centers
};

// Per-kind physical defaults applied to freshly placed nodes.
struct NodeDefaults {
    double vehicle_range_m = 200.0;
    double rsu_coverage_m = 500.0;
    double vehicle_tx_w = 0.1;
    double rsu_tx_w = 0.1;  // 20 dBm
    Packets vehicle_cache_pkts = 100;
    Packets rsu_cache_pkts = 500;
    Packets vehicle_forward_pkts = 1000;
    Packets rsu_forward_pkts = 1000;
};

struct NodeState {
    NodeId id = 0;
    NodeKind kind = NodeKind::vehicle;
    Vec3 position;               // placement position (slot 0)
    double vx = 0.0, vy = 0.0;   // m/s; zero for RSUs
    Axis axis = Axis::none;
    double max_range = 0.0;      // m; V2V range for vehicles, coverage for RSUs
    double tx_power = 0.0;       // W
    Packets cache_capacity = 0;  // C, packets
    Packets forward_capacity = 0;  // F, packets/slot
};

inline void validate_light_schedule(const ScenarioConfig& cfg) {
    const auto& sched = cfg.light_schedule;
    if (sched.empty()) throw ConfigError("light_schedule: must contain at least one phase");
    if (sched.front().start_slot != 0)
        throw ConfigError("light_schedule: first phase must start at slot 0");
    for (std::size_t i = 1; i < sched.size(); ++i) {
        if (sched[i].start_slot <= sched[i - 1].start_slot)
            throw ConfigError("light_schedule: phase starts must be strictly increasing");
    }
    if (cfg.n_slots > 0 && sched.back().start_slot >= cfg.n_slots)
        throw ConfigError("light_schedule: phase start " +
                          std::to_string(sched.back().start_slot) + " is outside [0, " +
                          std::to_string(cfg.n_slots) + ")");
}

inline void validate_scenario(const ScenarioConfig& cfg) {
    if (cfg.slot_length <= 0) throw ConfigError("slot_length: must be > 0");
    if (cfg.n_slots <= 0) throw ConfigError("slots: must be > 0");
    if (cfg.packet_size_bits <= 0) throw ConfigError("packet_size: must be > 0");
    if (cfg.area_width <= 0 || cfg.area_height <= 0)
        throw ConfigError("area dimensions must be > 0");
    if (cfg.lane_width <= 0) throw ConfigError("lane_width: must be > 0");
    if (cfg.lanes_per_direction <= 0) throw ConfigError("lanes_per_direction: must be > 0");
    if (cfg.n_vehicles < 0) throw ConfigError("vehicles: must be >= 0");
    if (cfg.n_rsus < 0) throw ConfigError("rsus: must be >= 0");
    if (cfg.speed_min <= 0 || cfg.speed_max <= 0)
        throw ConfigError("speed range: both bounds must be > 0");
    if (cfg.speed_min > cfg.speed_max)
        throw ConfigError("speed range: min exceeds max");
    validate_light_schedule(cfg);
    if (!cfg.rsu_positions.empty() &&
        static_cast<int>(cfg.rsu_positions.size()) != cfg.n_rsus)
        throw ConfigError("rsu_positions: table has " +
                          std::to_string(cfg.rsu_positions.size()) + " rows but rsus = " +
                          std::to_string(cfg.n_rsus));
    if (cfg.rsu_positions.empty() && cfg.n_rsus != 0 && cfg.n_rsus != 4)
        throw ConfigError("rsu_positions: required when rsus != 4 (no default layout)");
}

inline LightPhase light_phase_at(const ScenarioConfig& cfg, SlotIndex slot) {
    if (slot < 0 || slot >= cfg.n_slots)
        throw std::out_of_range("light_phase_at: slot " + std::to_string(slot) +
                                " outside [0, " + std::to_string(cfg.n_slots) + ")");
    const auto& sched = cfg.light_schedule;
    std::size_t i = 0;
    while (i + 1 < sched.size() && sched[i + 1].start_slot <= slot) ++i;
    SlotIndex end = (i + 1 < sched.size()) ? sched[i + 1].start_slot : cfg.n_slots;
    return {sched[i].phase, sched[i].start_slot, end};
}

// Slots in [0, slot) whose phase opens `axis`.
inline SlotIndex green_slots_before(const ScenarioConfig& cfg, Axis axis, SlotIndex slot) {
    SlotIndex count = 0;
    const auto& sched = cfg.light_schedule;
    for (std::size_t i = 0; i < sched.size(); ++i) {
        SlotIndex begin = sched[i].start_slot;
        SlotIndex end = (i + 1 < sched.size()) ? sched[i + 1].start_slot : cfg.n_slots;
        if (open_axis(sched[i].phase) != axis) continue;
        count += std::max<SlotIndex>(0, std::min(end, slot) - begin);
    }
    return count;
}

// Default RSU layout: the four cell centers of the 2x2 grid.
inline std::vector<std::pair<double, double>> default_rsu_positions(const ScenarioConfig& cfg) {
    double w = cfg.area_width, h = cfg.area_height;
    return {{w / 4, h / 4}, {3 * w / 4, h / 4}, {w / 4, 3 * h / 4}, {3 * w / 4, 3 * h / 4}};
}

// Vehicles are placed uniformly along a lane of their travel direction; the
// start coordinate is clamped so start + v * (n_slots * slot_length) stays
// inside the area. RSUs sit at configured (or default) coordinates.
inline std::vector<NodeState> initial_placement(const ScenarioConfig& cfg,
                                                const NodeDefaults& defaults,
                                                RngStream& rng) {
    std::vector<NodeState> nodes;
    nodes.reserve(static_cast<std::size_t>(cfg.n_vehicles + cfg.n_rsus));
    const double total_time = static_cast<double>(cfg.n_slots) * cfg.slot_length;
    const double cx = cfg.area_width / 2.0;
    const double cy = cfg.area_height / 2.0;

    for (int i = 0; i < cfg.n_vehicles; ++i) {
        NodeState n;
        n.id = i;
        n.kind = NodeKind::vehicle;
        n.axis = rng.next_bool() ? Axis::vertical : Axis::horizontal;
        const double dir = rng.next_bool() ? -1.0 : 1.0;
        const int lane = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cfg.lanes_per_direction)));
        const double speed = rng.next_real(cfg.speed_min, cfg.speed_max);
        const double lateral = cfg.lane_width * (lane + 0.5);
        const double axis_len = (n.axis == Axis::horizontal) ? cfg.area_width : cfg.area_height;
        const double travel = speed * total_time;

        double lo = 0.0, hi = axis_len;
        if (dir > 0)
            hi = std::max(0.0, axis_len - travel);
        else
            lo = std::min(axis_len, travel);
        const double along = (hi > lo) ? rng.next_real(lo, hi) : lo;

        if (n.axis == Axis::horizontal) {
            n.position = {along, dir > 0 ? cy - lateral : cy + lateral, cfg.vehicle_antenna_z};
            n.vx = dir * speed;
        } else {
            n.position = {dir > 0 ? cx + lateral : cx - lateral, along, cfg.vehicle_antenna_z};
            n.vy = dir * speed;
        }
        n.max_range = defaults.vehicle_range_m;
        n.tx_power = defaults.vehicle_tx_w;
        n.cache_capacity = defaults.vehicle_cache_pkts;
        n.forward_capacity = defaults.vehicle_forward_pkts;
        nodes.push_back(n);
    }

    auto rsu_xy = cfg.rsu_positions.empty() ? default_rsu_positions(cfg) : cfg.rsu_positions;
    for (int i = 0; i < cfg.n_rsus; ++i) {
        NodeState n;
        n.id = cfg.n_vehicles + i;
        n.kind = NodeKind::rsu;
        n.axis = Axis::none;
        n.position = {rsu_xy[static_cast<std::size_t>(i)].first,
                      rsu_xy[static_cast<std::size_t>(i)].second, cfg.rsu_antenna_z};
        n.max_range = defaults.rsu_coverage_m;
        n.tx_power = defaults.rsu_tx_w;
        n.cache_capacity = defaults.rsu_cache_pkts;
        n.forward_capacity = defaults.rsu_forward_pkts;
        nodes.push_back(n);
    }
    return nodes;
}

// Position of every node at `slot`. Vehicles advance by velocity for each
// green slot of their axis in [0, slot); red and yellow hold position.
// Coordinates are clamped to the area so no trajectory ever leaves it.
inline std::vector<Vec3> positions_at(const ScenarioConfig& cfg,
                                      const std::vector<NodeState>& nodes, SlotIndex slot) {
    if (slot < 0 || slot >= cfg.n_slots)
        throw std::out_of_range("positions_at: slot " + std::to_string(slot) +
                                " outside [0, " + std::to_string(cfg.n_slots) + ")");
    std::vector<Vec3> out;
    out.reserve(nodes.size());
    const SlotIndex greens_h = green_slots_before(cfg, Axis::horizontal, slot);
    const SlotIndex greens_v = green_slots_before(cfg, Axis::vertical, slot);
    for (const auto& n : nodes) {
        Vec3 p = n.position;
        if (n.kind == NodeKind::vehicle && n.axis != Axis::none) {
            const double t = cfg.slot_length *
                             static_cast<double>(n.axis == Axis::horizontal ? greens_h : greens_v);
            p.x = std::clamp(p.x + n.vx * t, 0.0, cfg.area_width);
            p.y = std::clamp(p.y + n.vy * t, 0.0, cfg.area_height);
        }
        out.push_back(p);
    }
    return out;
}

// Cell index (row-major) of a position on a rows x cols grid over the area.
inline int grid_cell_of(const ScenarioConfig& cfg, int rows, int cols, const Vec3& p) {
    int col = std::min(cols - 1, std::max(0, static_cast<int>(p.x / (cfg.area_width / cols))));
    int row = std::min(rows - 1, std::max(0, static_cast<int>(p.y / (cfg.area_height / rows))));
    return row * cols + col;
}

}  // namespace iovmesh
