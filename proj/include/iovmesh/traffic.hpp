// Flow-level task generation. Each slot a handful of initiator nodes start a
// task toward a uniformly chosen destination; initiators are stratified over
// a coarse grid so traffic sources track the spatial vehicle distribution.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "rng.hpp"
#include "scenario.hpp"

namespace iovmesh {

struct TrafficConfig {
    double qos_bps = 20e6;        // per-task sending rate the source tries to hold
    int initiators_per_slot = 0;  // 0 = auto: max(1, round(nodes / 24))
    int task_slots = 50;          // demand = qos packets/slot * task_slots
    double p_high = 1.0 / 3.0;
    double p_medium = 1.0 / 3.0;
    double p_low = 1.0 / 3.0;
    int grid_rows = 2, grid_cols = 2;
    bool rsu_initiators = true;
    SlotIndex initiation_start = 0;
    SlotIndex initiation_end = -1;  // exclusive; -1 = run length
};

inline void validate_traffic(const TrafficConfig& cfg) {
    if (cfg.qos_bps <= 0) throw ConfigError("qos: must be > 0");
    if (cfg.initiators_per_slot < 0) throw ConfigError("initiators_per_slot: must be >= 0");
    if (cfg.task_slots <= 0) throw ConfigError("task_slots: must be > 0");
    if (cfg.p_high < 0 || cfg.p_medium < 0 || cfg.p_low < 0)
        throw ConfigError("priority mix: probabilities must be >= 0");
    if (std::abs(cfg.p_high + cfg.p_medium + cfg.p_low - 1.0) > 1e-6)
        throw ConfigError("priority mix: probabilities must sum to 1");
    if (cfg.grid_rows <= 0 || cfg.grid_cols <= 0)
        throw ConfigError("grid dimensions must be > 0");
}

struct Task {
    TaskId id = 0;
    NodeId src = 0, dst = 0;
    Priority priority = Priority::low;
    SlotIndex created_at = 0;
    Packets qos_rate = 0;      // packets the source offers per slot
    Packets total_demand = 0;  // rho: lifetime packet budget
};

// Packets the source offers this slot: its per-slot rate until the lifetime
// budget runs out, then the remainder.
inline Packets offered_load(const Task& task, Packets sent_so_far) {
    return std::min(task.qos_rate, std::max<Packets>(0, task.total_demand - sent_so_far));
}

// Default initiator count: one new task per slot per ~24 nodes (so one in the
// stock 24-node scenario, two once vehicles grow to 32). Calibrated so the
// stock scenario at 20 Mb/s QoS ends near 3% packet loss.
inline int auto_initiators(int n_nodes) {
    return std::max(1, static_cast<int>(std::llround(n_nodes / 24.0)));
}

// Largest-remainder split of `want` initiators across cells, proportional to
// cell population and capped by it. Remainder ties go to the lower cell index.
inline std::vector<int> stratified_quotas(const std::vector<int>& population, int want) {
    const int cells = static_cast<int>(population.size());
    const long long total = std::accumulate(population.begin(), population.end(), 0LL);
    std::vector<int> quota(static_cast<std::size_t>(cells), 0);
    if (total == 0 || want <= 0) return quota;
    want = static_cast<int>(std::min<long long>(want, total));

    std::vector<double> remainder(static_cast<std::size_t>(cells), 0.0);
    int assigned = 0;
    for (int c = 0; c < cells; ++c) {
        const double share = static_cast<double>(want) * population[static_cast<std::size_t>(c)] /
                             static_cast<double>(total);
        quota[static_cast<std::size_t>(c)] = static_cast<int>(share);
        remainder[static_cast<std::size_t>(c)] = share - quota[static_cast<std::size_t>(c)];
        assigned += quota[static_cast<std::size_t>(c)];
    }
    std::vector<int> by_remainder(static_cast<std::size_t>(cells));
    std::iota(by_remainder.begin(), by_remainder.end(), 0);
    std::stable_sort(by_remainder.begin(), by_remainder.end(), [&](int a, int b) {
        return remainder[static_cast<std::size_t>(a)] > remainder[static_cast<std::size_t>(b)];
    });
    for (int round = 0; assigned < want; ++round) {
        bool progressed = false;
        for (int c : by_remainder) {
            if (assigned >= want) break;
            if (quota[static_cast<std::size_t>(c)] < population[static_cast<std::size_t>(c)]) {
                ++quota[static_cast<std::size_t>(c)];
                ++assigned;
                progressed = true;
            }
        }
        if (!progressed) break;  // every cell saturated
    }
    return quota;
}

// Tasks initiated at `slot`. Ids are handed out from *next_id in ascending
// source-id order, so the same rng stream always yields the same task list.
inline std::vector<Task> generate_tasks(const TrafficConfig& cfg, const ScenarioConfig& scenario,
                                        const std::vector<NodeState>& nodes,
                                        const std::vector<Vec3>& positions, Packets qos_rate,
                                        SlotIndex slot, TaskId* next_id, RngStream& rng) {
    std::vector<Task> out;
    const SlotIndex end = cfg.initiation_end < 0 ? scenario.n_slots : cfg.initiation_end;
    if (slot < cfg.initiation_start || slot >= end) return out;
    if (nodes.size() < 2) return out;

    std::vector<NodeId> eligible;
    for (const auto& n : nodes)
        if (n.kind == NodeKind::vehicle || cfg.rsu_initiators) eligible.push_back(n.id);
    if (eligible.empty()) return out;

    const int want = cfg.initiators_per_slot > 0 ? cfg.initiators_per_slot
                                                 : auto_initiators(static_cast<int>(nodes.size()));

    // Bucket eligible nodes by grid cell, then fill each cell's quota by a
    // partial shuffle (uniform sampling without replacement).
    const int cells = cfg.grid_rows * cfg.grid_cols;
    std::vector<std::vector<NodeId>> bucket(static_cast<std::size_t>(cells));
    for (NodeId id : eligible) {
        const int c = grid_cell_of(scenario, cfg.grid_rows, cfg.grid_cols,
                                   positions[static_cast<std::size_t>(id)]);
        bucket[static_cast<std::size_t>(c)].push_back(id);
    }
    std::vector<int> population(static_cast<std::size_t>(cells));
    for (int c = 0; c < cells; ++c)
        population[static_cast<std::size_t>(c)] = static_cast<int>(bucket[static_cast<std::size_t>(c)].size());
    const auto quota = stratified_quotas(population, want);

    std::vector<NodeId> initiators;
    for (int c = 0; c < cells; ++c) {
        auto& ids = bucket[static_cast<std::size_t>(c)];
        const int take = quota[static_cast<std::size_t>(c)];
        for (int k = 0; k < take; ++k) {
            const std::size_t pick = static_cast<std::size_t>(k) +
                                     static_cast<std::size_t>(rng.next_below(ids.size() - static_cast<std::size_t>(k)));
            std::swap(ids[static_cast<std::size_t>(k)], ids[pick]);
            initiators.push_back(ids[static_cast<std::size_t>(k)]);
        }
    }
    std::sort(initiators.begin(), initiators.end());

    for (NodeId src : initiators) {
        Task t;
        t.id = (*next_id)++;
        t.src = src;
        // destination: uniform over every other node
        NodeId dst = static_cast<NodeId>(rng.next_below(nodes.size() - 1));
        if (dst >= src) ++dst;
        t.dst = dst;
        const double u = rng.next_real();
        t.priority = u < cfg.p_high ? Priority::high
                     : u < cfg.p_high + cfg.p_medium ? Priority::medium
                                                     : Priority::low;
        t.created_at = slot;
        t.qos_rate = qos_rate;
        t.total_demand = qos_rate * cfg.task_slots;
        out.push_back(t);
    }
    return out;
}

}  // namespace iovmesh
