// Simulation engine. One run executes the per-slot loop
//   mobility -> topology -> task generation -> forwarding sweep -> transmit
//   -> metrics
// under a strict one-slot delivery contract: packets a node forwards in slot
// k become the next hop's incoming load in slot k+1 (final-destination
// arrivals count immediately). Because no node's output feeds another node's
// input within the same slot, the node processing order cannot change any
// result — which is also checked here every slot via integer conservation.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "channel.hpp"
#include "config_io.hpp"
#include "core.hpp"
#include "metrics.hpp"
#include "routing.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "switching.hpp"
#include "traffic.hpp"

namespace iovmesh {

struct RunOptions {
    bool keep_flow_log = false;
    // Non-empty: process nodes in this order instead of ascending id. Must be
    // a permutation of all node ids; results are identical either way (the
    // determinism suite relies on this seam).
    std::vector<NodeId> node_order;
};

struct FlowLogRow {
    SlotIndex slot = 0;
    NodeId node = 0;
    TaskId task = 0;
    Packets lambda = 0, forwarded = 0, node_loss = 0, link_loss = 0, cached_after = 0;
};

struct TaskLedgerRow {
    TaskId id = 0;
    NodeId src = 0, dst = 0;
    Priority priority = Priority::low;
    SlotIndex created_at = 0;
    bool routed = false;
    std::vector<NodeId> path;  // frozen route at initiation; empty if unroutable
    Packets qos_rate = 0, total_demand = 0;
    Packets offered = 0, delivered = 0, node_loss = 0, link_loss = 0;
    SlotIndex completed_at = -1;  // -1: never finished within the run
};

struct RunResult {
    MetricsSeries series;
    std::vector<TaskLedgerRow> tasks;
    std::vector<FlowLogRow> flow_log;
};

namespace detail {

// Immutable routing view shared by all tasks frozen at the same slot: the
// slot's snapshot (for planned rates) plus its consistent table set.
struct FrozenView {
    SlotIndex slot = 0;
    TopologySnapshot snap;
    std::vector<PortRoutingTable> tables;
};

struct LiveTask {
    Task desc;
    bool routed = false;
    std::vector<NodeId> initial_path;
    std::shared_ptr<const FrozenView> view;
    Packets offered = 0, delivered = 0, node_loss = 0, link_loss = 0;
    SlotIndex completed_at = -1;
};

// Reconstruct the path src -> dst by walking the view's tables.
inline std::vector<NodeId> table_walk(const FrozenView& view, NodeId src, NodeId dst) {
    std::vector<NodeId> path{src};
    NodeId cur = src;
    while (cur != dst) {
        auto e = next_hop(view.tables[static_cast<std::size_t>(cur)], dst);
        if (!e) return {};  // no route
        cur = e->next_hop;
        path.push_back(cur);
        if (path.size() > static_cast<std::size_t>(view.snap.n))
            throw std::logic_error("routing tables contain a loop");  // cannot happen
    }
    return path;
}

}  // namespace detail

inline RunResult run(const SimConfig& config, std::uint64_t seed, const RunOptions& options = {}) {
    using detail::FrozenView;
    using detail::LiveTask;

    if (config.scenario.n_slots > 0) validate_config(config);
    const auto defaults = node_defaults(config);
    const Packets qos_rate = qos_packets_per_slot(config);
    const RoutingOptions ropts{config.routing.route_weight, config.routing.port_cap};

    RngStream placement_rng(derive_seed(seed, kSaltPlacement, 0, 0));
    const auto nodes = initial_placement(config.scenario, defaults, placement_rng);
    const int n = static_cast<int>(nodes.size());

    std::vector<NodeId> order(static_cast<std::size_t>(n));
    if (options.node_order.empty()) {
        for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    } else {
        if (static_cast<int>(options.node_order.size()) != n)
            throw std::invalid_argument("node_order: wrong size");
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        for (NodeId id : options.node_order) {
            if (id < 0 || id >= n || seen[static_cast<std::size_t>(id)])
                throw std::invalid_argument("node_order: not a permutation of node ids");
            seen[static_cast<std::size_t>(id)] = 1;
        }
        order = options.node_order;
    }

    std::vector<LiveTask> tasks;
    std::vector<std::map<TaskId, Packets>> cache(static_cast<std::size_t>(n));
    std::vector<std::map<TaskId, Packets>> arriving(static_cast<std::size_t>(n));

    Packets cum_offered = 0, cum_delivered = 0, cum_node_loss = 0, cum_link_loss = 0;

    RunResult result;
    result.series.rows.reserve(static_cast<std::size_t>(std::max<SlotIndex>(config.scenario.n_slots, 0)));

    for (SlotIndex slot = 0; slot < config.scenario.n_slots; ++slot) {
        // (1)+(2) mobility and this slot's topology
        const auto positions = positions_at(config.scenario, nodes, slot);
        const auto snap = build_topology(nodes, positions, config.channel,
                                         config.scenario.slot_length,
                                         config.scenario.packet_size_bits, slot);

        // (3) new tasks freeze their routes against this slot's view; an
        // enabled table_refresh re-freezes every live task on its period.
        RngStream traffic_rng(derive_seed(seed, kSaltTraffic, 0, static_cast<std::uint64_t>(slot)));
        TaskId next_id = static_cast<TaskId>(tasks.size());
        const auto new_tasks = generate_tasks(config.traffic, config.scenario, nodes, positions,
                                              qos_rate, slot, &next_id, traffic_rng);
        const bool refresh = config.routing.table_refresh > 0 && slot > 0 &&
                             slot % config.routing.table_refresh == 0;
        std::shared_ptr<const FrozenView> view;
        if (!new_tasks.empty() || refresh) {
            auto v = std::make_shared<FrozenView>();
            v->slot = slot;
            v->snap = snap;
            v->tables = build_tables(snap, ropts);
            view = std::move(v);
        }
        for (const auto& t : new_tasks) {
            LiveTask lt;
            lt.desc = t;
            lt.initial_path = detail::table_walk(*view, t.src, t.dst);
            lt.routed = !lt.initial_path.empty();
            if (lt.routed) lt.view = view;
            tasks.push_back(std::move(lt));
        }
        if (refresh) {
            for (auto& lt : tasks)
                if (lt.routed && lt.completed_at < 0) lt.view = view;
        }

        // (4) sources push this slot's offered load into their own queue
        Packets slot_offered = 0;
        for (auto& lt : tasks) {
            if (!lt.routed) continue;
            const Packets off = offered_load(lt.desc, lt.offered);
            if (off > 0) {
                arriving[static_cast<std::size_t>(lt.desc.src)][lt.desc.id] += off;
                lt.offered += off;
                slot_offered += off;
            }
        }
        cum_offered += slot_offered;

        // (5)+(6) forwarding sweep and transmission
        Packets slot_delivered = 0, slot_node_loss = 0, slot_link_loss = 0;
        std::vector<NodeFlowSample> node_samples(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            node_samples[static_cast<std::size_t>(i)].cache_capacity =
                nodes[static_cast<std::size_t>(i)].cache_capacity;
        std::vector<Packets> link_carried(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
        std::vector<std::map<TaskId, Packets>> next_arriving(static_cast<std::size_t>(n));

        for (NodeId node : order) {
            auto& lam = arriving[static_cast<std::size_t>(node)];
            auto& stored = cache[static_cast<std::size_t>(node)];
            if (lam.empty() && stored.empty()) continue;

            std::vector<TaskQueueEntry> entries;
            {
                // union of task ids with cached or incoming packets, ascending
                auto li = lam.begin();
                auto ci = stored.begin();
                while (li != lam.end() || ci != stored.end()) {
                    TaskId tid;
                    Packets in = 0, held = 0;
                    if (ci == stored.end() || (li != lam.end() && li->first < ci->first)) {
                        tid = li->first;
                        in = li->second;
                        ++li;
                    } else if (li == lam.end() || ci->first < li->first) {
                        tid = ci->first;
                        held = ci->second;
                        ++ci;
                    } else {
                        tid = li->first;
                        in = li->second;
                        held = ci->second;
                        ++li;
                        ++ci;
                    }
                    const LiveTask& lt = tasks[static_cast<std::size_t>(tid)];
                    TaskQueueEntry e;
                    e.task_id = tid;
                    e.priority = lt.desc.priority;
                    e.cached = held;
                    e.incoming = in;
                    // next hop under the task's frozen view; packets whose
                    // view offers no route from here wait in the cache
                    if (lt.view) {
                        if (auto hop = next_hop(lt.view->tables[static_cast<std::size_t>(node)],
                                                lt.desc.dst)) {
                            e.next_hop = hop->next_hop;
                            e.port = port_of(snap, node, hop->next_hop, config.routing.port_cap);
                            // planned rate: the view's belief about this link,
                            // zeroed when the link is gone right now
                            if (e.port > 0)
                                e.planned_rate = lt.view->snap.rate_at(node, hop->next_hop);
                        }
                    }
                    entries.push_back(e);
                }
            }
            lam.clear();

            std::map<int, Packets> port_rates;
            for (const auto& e : entries)
                if (e.port > 0) port_rates[e.port] = snap.rate_at(node, e.next_hop);

            RngStream order_rng(derive_seed(seed, kSaltOrdering, static_cast<std::uint64_t>(node),
                                            static_cast<std::uint64_t>(slot)));
            const auto sweep = step_node(entries, nodes[static_cast<std::size_t>(node)].cache_capacity,
                                         nodes[static_cast<std::size_t>(node)].forward_capacity,
                                         port_rates, order_rng);

            stored.clear();
            for (const auto& o : sweep.tasks) {
                LiveTask& lt = tasks[static_cast<std::size_t>(o.task_id)];
                lt.node_loss += o.node_loss;
                lt.link_loss += o.link_loss;
                slot_node_loss += o.node_loss;
                slot_link_loss += o.link_loss;
                if (o.cached_after > 0) stored[o.task_id] = o.cached_after;
                if (o.delivered > 0) {
                    link_carried[static_cast<std::size_t>(node) * static_cast<std::size_t>(n) +
                                 static_cast<std::size_t>(o.next_hop)] += o.delivered;
                    if (o.next_hop == lt.desc.dst) {
                        lt.delivered += o.delivered;
                        slot_delivered += o.delivered;
                        if (lt.delivered >= lt.desc.total_demand && lt.completed_at < 0)
                            lt.completed_at = slot;
                    } else {
                        next_arriving[static_cast<std::size_t>(o.next_hop)][o.task_id] += o.delivered;
                    }
                }
                if (options.keep_flow_log)
                    result.flow_log.push_back({slot, node, o.task_id, o.lambda, o.forwarded,
                                               o.node_loss, o.link_loss, o.cached_after});
            }
            node_samples[static_cast<std::size_t>(node)].forwarded = sweep.total_forwarded;
            node_samples[static_cast<std::size_t>(node)].cached_after = sweep.total_cached;
        }
        arriving = std::move(next_arriving);
        cum_delivered += slot_delivered;
        cum_node_loss += slot_node_loss;
        cum_link_loss += slot_link_loss;

        // (7) metrics over this slot's final state
        Packets in_network = 0;
        for (int i = 0; i < n; ++i) {
            for (const auto& [tid, pk] : cache[static_cast<std::size_t>(i)]) in_network += pk;
            for (const auto& [tid, pk] : arriving[static_cast<std::size_t>(i)]) in_network += pk;
        }
        if (cum_offered != cum_delivered + cum_node_loss + cum_link_loss + in_network)
            throw std::logic_error("conservation violated at slot " + std::to_string(slot) +
                                   ": offered " + std::to_string(cum_offered) + " != delivered " +
                                   std::to_string(cum_delivered) + " + losses " +
                                   std::to_string(cum_node_loss + cum_link_loss) +
                                   " + in-network " + std::to_string(in_network));

        std::vector<TaskFlowStats> task_stats;
        task_stats.reserve(tasks.size());
        std::vector<Packets> inflight(tasks.size(), 0);
        for (int i = 0; i < n; ++i) {
            for (const auto& [tid, pk] : cache[static_cast<std::size_t>(i)])
                inflight[static_cast<std::size_t>(tid)] += pk;
            for (const auto& [tid, pk] : arriving[static_cast<std::size_t>(i)])
                inflight[static_cast<std::size_t>(tid)] += pk;
        }
        int active = 0, unroutable = 0;
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            const auto& lt = tasks[t];
            task_stats.push_back({lt.desc.id, lt.routed, lt.offered, lt.delivered, lt.node_loss,
                                  lt.link_loss, lt.desc.total_demand});
            if (!lt.routed) ++unroutable;
            else if (lt.completed_at < 0 && (lt.offered < lt.desc.total_demand || inflight[t] > 0))
                ++active;
        }

        std::vector<LinkFlowSample> link_samples;
        int link_count = 0;
        for (NodeId i = 0; i < n; ++i) {
            for (NodeId j = 0; j < n; ++j) {
                if (!snap.has_link(i, j)) continue;
                ++link_count;
                link_samples.push_back(
                    {link_carried[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                                  static_cast<std::size_t>(j)],
                     snap.rate_at(i, j)});
            }
        }

        MetricsRow row;
        row.slot = slot;
        row.loss_rate = loss_rate(task_stats);
        row.arrive_rate = arrive_rate(task_stats);
        row.node_load = node_load(node_samples);
        row.link_load = link_load(link_samples);
        row.sumflow = sumflow(node_samples);
        if (slot_offered > 0) {
            row.loss_rate_slot = static_cast<double>(slot_node_loss + slot_link_loss) /
                                 static_cast<double>(slot_offered);
            row.arrive_rate_slot =
                static_cast<double>(slot_delivered) / static_cast<double>(slot_offered);
        }
        row.offered = slot_offered;
        row.delivered = slot_delivered;
        row.node_loss = slot_node_loss;
        row.link_loss = slot_link_loss;
        row.in_network = in_network;
        row.active_tasks = active;
        row.generated_tasks = static_cast<int>(tasks.size());
        row.unroutable_tasks = unroutable;
        row.link_count = link_count;
        result.series.rows.push_back(row);
    }

    result.tasks.reserve(tasks.size());
    for (const auto& lt : tasks) {
        TaskLedgerRow r;
        r.id = lt.desc.id;
        r.src = lt.desc.src;
        r.dst = lt.desc.dst;
        r.priority = lt.desc.priority;
        r.created_at = lt.desc.created_at;
        r.routed = lt.routed;
        r.path = lt.initial_path;
        r.qos_rate = lt.desc.qos_rate;
        r.total_demand = lt.desc.total_demand;
        r.offered = lt.offered;
        r.delivered = lt.delivered;
        r.node_loss = lt.node_loss;
        r.link_loss = lt.link_loss;
        r.completed_at = lt.completed_at;
        result.tasks.push_back(std::move(r));
    }
    return result;
}

// ---- parameter sweeps --------------------------------------------------------

// One grid point: any subset of the three swept parameters may be overridden.
struct GridPoint {
    std::optional<double> qos_bps;
    std::optional<double> cache_scale;
    std::optional<int> n_vehicles;
    std::string label;  // used in file names and chart legends
};

inline SimConfig apply_point(SimConfig config, const GridPoint& p) {
    if (p.qos_bps) config.traffic.qos_bps = *p.qos_bps;
    if (p.cache_scale) config.cache.cache_scale = *p.cache_scale;
    if (p.n_vehicles) config.scenario.n_vehicles = *p.n_vehicles;
    return config;
}

// Seed-averaged series: double-valued throughout because means of integer
// columns are fractional. Optional metrics average over the seeds where they
// are present.
struct MeanMetricsRow {
    SlotIndex slot = 0;
    std::optional<double> loss_rate, arrive_rate, node_load, link_load;
    double sumflow = 0;
    std::optional<double> loss_rate_slot, arrive_rate_slot;
    double offered = 0, delivered = 0, node_loss = 0, link_loss = 0, in_network = 0;
    double active_tasks = 0, generated_tasks = 0, unroutable_tasks = 0, link_count = 0;
};

struct MeanMetricsSeries {
    std::vector<MeanMetricsRow> rows;
};

inline MeanMetricsSeries average_series(const std::vector<MetricsSeries>& runs) {
    MeanMetricsSeries mean;
    if (runs.empty()) return mean;
    const std::size_t n_slots = runs.front().rows.size();
    for (const auto& r : runs)
        if (r.rows.size() != n_slots)
            throw std::invalid_argument("average_series: slot count mismatch");
    mean.rows.resize(n_slots);
    for (std::size_t s = 0; s < n_slots; ++s) {
        auto& m = mean.rows[s];
        m.slot = runs.front().rows[s].slot;
        const auto avg_opt = [&](std::optional<double> MetricsRow::* field) {
            double sum = 0;
            int cnt = 0;
            for (const auto& r : runs)
                if (const auto& v = r.rows[s].*field) {
                    sum += *v;
                    ++cnt;
                }
            return cnt ? std::optional<double>(sum / cnt) : std::nullopt;
        };
        m.loss_rate = avg_opt(&MetricsRow::loss_rate);
        m.arrive_rate = avg_opt(&MetricsRow::arrive_rate);
        m.node_load = avg_opt(&MetricsRow::node_load);
        m.link_load = avg_opt(&MetricsRow::link_load);
        m.loss_rate_slot = avg_opt(&MetricsRow::loss_rate_slot);
        m.arrive_rate_slot = avg_opt(&MetricsRow::arrive_rate_slot);
        const double inv = 1.0 / static_cast<double>(runs.size());
        for (const auto& r : runs) {
            const auto& row = r.rows[s];
            m.sumflow += static_cast<double>(row.sumflow) * inv;
            m.offered += static_cast<double>(row.offered) * inv;
            m.delivered += static_cast<double>(row.delivered) * inv;
            m.node_loss += static_cast<double>(row.node_loss) * inv;
            m.link_loss += static_cast<double>(row.link_loss) * inv;
            m.in_network += static_cast<double>(row.in_network) * inv;
            m.active_tasks += row.active_tasks * inv;
            m.generated_tasks += row.generated_tasks * inv;
            m.unroutable_tasks += row.unroutable_tasks * inv;
            m.link_count += row.link_count * inv;
        }
    }
    return mean;
}

struct SweepPointResult {
    GridPoint point;
    SimConfig config;
    std::vector<std::uint64_t> seeds;
    std::vector<MetricsSeries> per_seed;
    MeanMetricsSeries mean;
};

// Runs every (grid point, seed) pair, up to `jobs` concurrently. Workers only
// fill preassigned slots, so the result is identical for any job count.
inline std::vector<SweepPointResult> sweep(const SimConfig& base,
                                           const std::vector<GridPoint>& points,
                                           const std::vector<std::uint64_t>& seeds, int jobs = 1) {
    if (points.empty()) throw std::invalid_argument("sweep: empty grid");
    if (seeds.empty()) throw std::invalid_argument("sweep: at least one seed required");

    std::vector<SweepPointResult> results(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        results[p].point = points[p];
        results[p].config = apply_point(base, points[p]);
        validate_config(results[p].config);
        results[p].seeds = seeds;
        results[p].per_seed.resize(seeds.size());
    }

    const std::size_t total = points.size() * seeds.size();
    std::atomic<std::size_t> cursor{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(total)));
    auto work = [&] {
        for (;;) {
            const std::size_t k = cursor.fetch_add(1);
            if (k >= total || failed.load()) return;
            const std::size_t p = k / seeds.size();
            const std::size_t s = k % seeds.size();
            try {
                results[p].per_seed[s] = run(results[p].config, seeds[s]).series;
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    for (auto& r : results) r.mean = average_series(r.per_seed);
    return results;
}

// Largest integer QoS in [lo_mbps, hi_mbps] whose seed-averaged end-of-run
// loss rate stays below target_loss; nullopt when even lo_mbps misses it.
// Assumes loss grows with QoS (verified by the acceptance suite).
inline std::optional<int> calibrate_qos(const SimConfig& base, double target_loss,
                                        const std::vector<std::uint64_t>& seeds, int jobs = 1,
                                        int lo_mbps = 1, int hi_mbps = 500) {
    if (!(target_loss > 0.0 && target_loss < 1.0))
        throw std::invalid_argument("calibrate_qos: target_loss must be in (0,1)");
    if (seeds.empty()) throw std::invalid_argument("calibrate_qos: at least one seed required");

    auto loss_at = [&](int q_mbps) {
        GridPoint p;
        p.qos_bps = static_cast<double>(q_mbps) * 1e6;
        const auto res = sweep(base, {p}, seeds, jobs);
        const auto& rows = res.front().mean.rows;
        if (rows.empty() || !rows.back().loss_rate) return 0.0;  // nothing sent: no loss
        return *rows.back().loss_rate;
    };

    // Rates below one packet per slot send nothing and are not meaningful
    // answers; the search floor starts at the first rate that forms a packet.
    const int min_mbps = static_cast<int>(
        std::ceil(base.scenario.packet_size_bits / base.scenario.slot_length / 1e6));
    int lo = std::max(lo_mbps, min_mbps), hi = hi_mbps;
    if (hi < lo) return std::nullopt;
    if (loss_at(lo) >= target_loss) return std::nullopt;
    while (lo < hi) {
        const int mid = lo + (hi - lo + 1) / 2;
        if (loss_at(mid) < target_loss)
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

}  // namespace iovmesh
