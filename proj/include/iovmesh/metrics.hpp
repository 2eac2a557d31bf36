// Flow-level indicators evaluated once per slot: task loss rate, task arrival
// ratio, mean node load, mean link load and total carried flow. Each function
// takes a flat sample view so it can be unit-tested away from the engine.
// Indicators whose denominator set is empty are "absent" for that slot and
// surface as std::nullopt (empty CSV cells downstream).
#pragma once

#include <optional>
#include <vector>

#include "core.hpp"

namespace iovmesh {

// Cumulative per-task tallies up to and including the current slot.
struct TaskFlowStats {
    TaskId id = 0;
    bool routed = false;     // false: no route existed when the task started
    Packets offered = 0;     // packets the source pushed into the network
    Packets delivered = 0;   // packets that reached the destination
    Packets node_loss = 0;   // dropped in caches along the way
    Packets link_loss = 0;   // lost on links along the way
    Packets total_demand = 0;  // lifetime budget rho
};

// Mean per-task loss fraction over tasks that have sent anything.
inline std::optional<double> loss_rate(const std::vector<TaskFlowStats>& tasks) {
    double sum = 0.0;
    int counted = 0;
    for (const auto& t : tasks) {
        if (t.offered <= 0) continue;
        sum += static_cast<double>(t.node_loss + t.link_loss) / static_cast<double>(t.offered);
        ++counted;
    }
    if (counted == 0) return std::nullopt;
    return sum / counted;
}

// Mean per-task completion ratio delivered/demand over *all* generated tasks,
// unroutable ones included (they contribute 0).
inline std::optional<double> arrive_rate(const std::vector<TaskFlowStats>& tasks) {
    if (tasks.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& t : tasks)
        sum += t.total_demand > 0
                   ? static_cast<double>(t.delivered) / static_cast<double>(t.total_demand)
                   : 0.0;
    return sum / static_cast<double>(tasks.size());
}

// One node's slot activity: packets it forwarded plus packets still cached,
// against its cache capacity.
struct NodeFlowSample {
    Packets forwarded = 0;     // mu summed over the node's tasks
    Packets cached_after = 0;  // L' summed over the node's tasks
    Packets cache_capacity = 0;
};

inline std::optional<double> node_load(const std::vector<NodeFlowSample>& nodes) {
    if (nodes.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& n : nodes)
        sum += static_cast<double>(n.forwarded + n.cached_after) /
               static_cast<double>(n.cache_capacity);
    return sum / static_cast<double>(nodes.size());
}

// One existing directed link: packets it carried this slot vs its rate.
struct LinkFlowSample {
    Packets carried = 0;
    Packets rate = 0;  // current whole-packet rate, > 0 for existing links
};

inline std::optional<double> link_load(const std::vector<LinkFlowSample>& links) {
    if (links.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& l : links) sum += static_cast<double>(l.carried) / static_cast<double>(l.rate);
    return sum / static_cast<double>(links.size());
}

// Total packets in motion this slot: everything forwarded plus everything
// still cached, summed over nodes.
inline Packets sumflow(const std::vector<NodeFlowSample>& nodes) {
    Packets total = 0;
    for (const auto& n : nodes) total += n.forwarded + n.cached_after;
    return total;
}

// One output row per slot: the five indicators plus bookkeeping columns that
// make runs easy to diagnose (per-slot totals and population counts).
struct MetricsRow {
    SlotIndex slot = 0;
    std::optional<double> loss_rate;    // cumulative, task-mean
    std::optional<double> arrive_rate;  // cumulative, task-mean
    std::optional<double> node_load;
    std::optional<double> link_load;
    Packets sumflow = 0;

    std::optional<double> loss_rate_slot;    // this slot's losses / this slot's offered
    std::optional<double> arrive_rate_slot;  // this slot's deliveries / this slot's offered
    Packets offered = 0, delivered = 0, node_loss = 0, link_loss = 0;
    Packets in_network = 0;  // cached + handed off, awaiting next-slot arrival
    int active_tasks = 0, generated_tasks = 0, unroutable_tasks = 0, link_count = 0;
};

struct MetricsSeries {
    std::vector<MetricsRow> rows;
};

}  // namespace iovmesh
