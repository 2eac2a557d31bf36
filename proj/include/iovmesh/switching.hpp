// Per-node forwarding sweep. Each slot a node serves its task queue in
// priority order (random within a priority class), granting every task a
// greedy share of cache space C, forwarding capacity F and output-port rate,
// then pushing the forwarded packets onto the link where the *current* link
// rate decides what actually arrives. All quantities are whole packets, so
// every balance below is exact integer arithmetic.
#pragma once

#include <cstdlib>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace iovmesh {

// One task's presence in a node's queue at the start of a slot.
struct TaskQueueEntry {
    TaskId task_id = 0;
    Priority priority = Priority::low;
    Packets cached = 0;    // L: packets left in this node's cache from earlier slots
    Packets incoming = 0;  // lambda: packets that arrived for this task this slot
    NodeId next_hop = -1;
    int port = 0;             // 1-based output port toward next_hop
    Packets planned_rate = 0;  // port rate in the snapshot this task's route was built on
};

struct ForwardDecision {
    Packets loss = 0;        // dropped at the node (cache share overflow)
    Packets forwarded = 0;   // mu: handed to the output port
    Packets cached_after = 0;  // L': stays in the cache for the next slot
};

// Core two-case rule for a single task given its allocated shares.
// Fits in the cache share: nothing dropped, forward as much as F/R allow.
// Overflows it: the excess is dropped immediately, the share itself moves on.
inline ForwardDecision forward_single(Packets lambda, Packets cached, Packets cache_alloc,
                                      Packets forward_alloc, Packets rate_alloc) {
    const Packets backlog = lambda + cached;
    ForwardDecision d;
    if (backlog <= cache_alloc) {
        d.forwarded = std::min({backlog, forward_alloc, rate_alloc});
        d.cached_after = backlog - d.forwarded;
    } else {
        d.loss = backlog - cache_alloc;
        d.forwarded = std::min({cache_alloc, forward_alloc, rate_alloc});
        d.cached_after = cache_alloc - d.forwarded;
    }
    return d;
}

struct LinkTransmitResult {
    Packets delivered = 0;
    Packets link_loss = 0;  // forwarded but beyond what the link carried this slot
};

inline LinkTransmitResult transmit_link(Packets forwarded, Packets actual_rate) {
    LinkTransmitResult r;
    r.delivered = std::min(forwarded, std::max<Packets>(0, actual_rate));
    r.link_loss = forwarded - r.delivered;
    return r;
}

// First-come-first-served split of `total` across demands, in order.
inline std::vector<Packets> allocate_greedy(const std::vector<Packets>& demands, Packets total) {
    std::vector<Packets> alloc(demands.size(), 0);
    Packets remaining = total;
    for (std::size_t i = 0; i < demands.size(); ++i) {
        alloc[i] = std::min(demands[i], remaining);
        remaining -= alloc[i];
    }
    return alloc;
}

// Sweep order: high before medium before low, uniformly random inside each
// class. Returns indices into the entry vector.
inline std::vector<std::size_t> order_tasks(const std::vector<TaskQueueEntry>& entries,
                                            RngStream& rng) {
    std::vector<std::size_t> buckets[3];
    for (std::size_t i = 0; i < entries.size(); ++i)
        buckets[static_cast<int>(entries[i].priority)].push_back(i);
    std::vector<std::size_t> order;
    order.reserve(entries.size());
    for (auto& b : buckets) {
        rng.shuffle(b);
        for (auto i : b) order.push_back(i);
    }
    return order;
}

struct TaskForwardOutcome {
    TaskId task_id = 0;
    Priority priority = Priority::low;
    NodeId next_hop = -1;
    int port = 0;
    Packets lambda = 0, cached_before = 0;
    Packets cache_alloc = 0, forward_alloc = 0, rate_alloc = 0;
    Packets node_loss = 0, forwarded = 0, cached_after = 0;
    Packets delivered = 0, link_loss = 0;
};

struct NodeSweepResult {
    std::vector<std::size_t> order;        // sweep order, indices into the input
    std::vector<TaskForwardOutcome> tasks;  // in sweep order
    Packets total_forwarded = 0, total_node_loss = 0, total_link_loss = 0;
    Packets total_delivered = 0, total_cached = 0;
};

// Full sweep with an explicit order (the random-order entry point below is a
// thin wrapper). Shares are claimed task by task: cache and forwarding from
// single node-wide pools, port rate from per-port pools where each task may
// claim at most up to its own route-time view of the port rate. Transmission
// then drains the same order against the port's current rate.
inline NodeSweepResult step_node_ordered(const std::vector<TaskQueueEntry>& entries,
                                         Packets cache_capacity, Packets forward_capacity,
                                         const std::map<int, Packets>& actual_port_rate,
                                         const std::vector<std::size_t>& order) {
    if (order.size() != entries.size())
        throw std::invalid_argument("step_node: order size mismatch");
    Packets cached_total = 0;
    for (const auto& e : entries) {
        if (e.incoming < 0 || e.cached < 0 || e.planned_rate < 0)
            throw std::invalid_argument("step_node: negative packet count for task " +
                                        std::to_string(e.task_id));
        cached_total += e.cached;
    }
    if (cached_total > cache_capacity)
        throw std::logic_error("step_node: cached packets (" + std::to_string(cached_total) +
                               ") exceed cache capacity (" + std::to_string(cache_capacity) + ")");

    NodeSweepResult result;
    result.order = order;
    result.tasks.reserve(entries.size());

    Packets cache_left = cache_capacity;
    Packets forward_left = forward_capacity;
    std::map<int, Packets> planned_used;  // per-port packets already granted
    std::map<int, Packets> actual_used;   // per-port packets already transmitted

    for (std::size_t idx : order) {
        const auto& e = entries[static_cast<std::size_t>(idx)];
        const Packets demand = e.incoming + e.cached;

        TaskForwardOutcome out;
        out.task_id = e.task_id;
        out.priority = e.priority;
        out.next_hop = e.next_hop;
        out.port = e.port;
        out.lambda = e.incoming;
        out.cached_before = e.cached;

        out.cache_alloc = std::min(demand, cache_left);
        cache_left -= out.cache_alloc;
        out.forward_alloc = std::min(demand, forward_left);
        forward_left -= out.forward_alloc;

        Packets& used = planned_used[e.port];
        out.rate_alloc = std::min(demand, std::max<Packets>(0, e.planned_rate - used));
        used += out.rate_alloc;

        const auto d = forward_single(e.incoming, e.cached, out.cache_alloc, out.forward_alloc,
                                      out.rate_alloc);
        out.node_loss = d.loss;
        out.forwarded = d.forwarded;
        out.cached_after = d.cached_after;

        auto rit = actual_port_rate.find(e.port);
        const Packets port_rate = (rit == actual_port_rate.end()) ? 0 : rit->second;
        Packets& sent = actual_used[e.port];
        const auto t = transmit_link(out.forwarded, port_rate - sent);
        sent += t.delivered;
        out.delivered = t.delivered;
        out.link_loss = t.link_loss;

        // lambda + L = forwarded + lost + kept, and forwarded splits into
        // delivered + link loss; both are integer identities by construction.
        if (out.lambda + out.cached_before != out.forwarded + out.node_loss + out.cached_after ||
            out.forwarded != out.delivered + out.link_loss)
            throw std::logic_error("step_node: per-task balance violated for task " +
                                   std::to_string(e.task_id));

        result.total_forwarded += out.forwarded;
        result.total_node_loss += out.node_loss;
        result.total_link_loss += out.link_loss;
        result.total_delivered += out.delivered;
        result.total_cached += out.cached_after;
        result.tasks.push_back(out);
    }
    if (result.total_cached > cache_capacity)
        throw std::logic_error("step_node: post-sweep cache exceeds capacity");
    return result;
}

inline NodeSweepResult step_node(const std::vector<TaskQueueEntry>& entries,
                                 Packets cache_capacity, Packets forward_capacity,
                                 const std::map<int, Packets>& actual_port_rate, RngStream& rng) {
    return step_node_ordered(entries, cache_capacity, forward_capacity, actual_port_rate,
                             order_tasks(entries, rng));
}

}  // namespace iovmesh
