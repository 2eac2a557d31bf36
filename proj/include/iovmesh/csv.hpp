// CSV emitters. Column order is part of the output contract (documented in
// the README) and numbers are printed with "%.9g" and a '.' decimal point
// regardless of locale, so identical runs serialize to identical bytes.
#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "core.hpp"
#include "engine.hpp"
#include "metrics.hpp"

namespace iovmesh {
namespace detail {

inline std::string g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::string cell(const std::optional<double>& v) { return v ? g9(*v) : std::string(); }

}  // namespace detail

inline constexpr const char* kMetricsHeader =
    "slot,loss_rate,arrive_rate,node_load,link_load,sumflow,"
    "loss_rate_slot,arrive_rate_slot,offered,delivered,node_loss,link_loss,"
    "in_network,active_tasks,generated_tasks,unroutable_tasks,link_count";

inline void write_metrics_csv(const MetricsSeries& series, std::ostream& out) {
    using detail::cell;
    out << kMetricsHeader << "\n";
    for (const auto& r : series.rows) {
        out << r.slot << ',' << cell(r.loss_rate) << ',' << cell(r.arrive_rate) << ','
            << cell(r.node_load) << ',' << cell(r.link_load) << ',' << r.sumflow << ','
            << cell(r.loss_rate_slot) << ',' << cell(r.arrive_rate_slot) << ',' << r.offered << ','
            << r.delivered << ',' << r.node_loss << ',' << r.link_loss << ',' << r.in_network
            << ',' << r.active_tasks << ',' << r.generated_tasks << ',' << r.unroutable_tasks
            << ',' << r.link_count << "\n";
    }
}

// Seed-averaged variant; same header, fractional counts allowed.
inline void write_mean_metrics_csv(const MeanMetricsSeries& series, std::ostream& out) {
    using detail::cell;
    using detail::g9;
    out << kMetricsHeader << "\n";
    for (const auto& r : series.rows) {
        out << r.slot << ',' << cell(r.loss_rate) << ',' << cell(r.arrive_rate) << ','
            << cell(r.node_load) << ',' << cell(r.link_load) << ',' << g9(r.sumflow) << ','
            << cell(r.loss_rate_slot) << ',' << cell(r.arrive_rate_slot) << ',' << g9(r.offered)
            << ',' << g9(r.delivered) << ',' << g9(r.node_loss) << ',' << g9(r.link_loss) << ','
            << g9(r.in_network) << ',' << g9(r.active_tasks) << ',' << g9(r.generated_tasks)
            << ',' << g9(r.unroutable_tasks) << ',' << g9(r.link_count) << "\n";
    }
}

inline constexpr const char* kTasksHeader =
    "task,src,dst,priority,created_at,routed,path,qos_rate,total_demand,"
    "offered,delivered,node_loss,link_loss,completed_at,completion_slots";

inline void write_tasks_csv(const std::vector<TaskLedgerRow>& tasks, std::ostream& out) {
    out << kTasksHeader << "\n";
    for (const auto& t : tasks) {
        std::string path;
        for (std::size_t i = 0; i < t.path.size(); ++i) {
            if (i) path += '>';
            path += std::to_string(t.path[i]);
        }
        out << t.id << ',' << t.src << ',' << t.dst << ',' << to_string(t.priority) << ','
            << t.created_at << ',' << (t.routed ? 1 : 0) << ',' << path << ',' << t.qos_rate
            << ',' << t.total_demand << ',' << t.offered << ',' << t.delivered << ','
            << t.node_loss << ',' << t.link_loss << ',';
        if (t.completed_at >= 0)
            out << t.completed_at << ',' << (t.completed_at - t.created_at + 1);
        else
            out << ',';
        out << "\n";
    }
}

inline constexpr const char* kFlowLogHeader =
    "slot,node,task,lambda,forwarded,node_loss,link_loss,cached_after";

inline void write_flow_log_csv(const std::vector<FlowLogRow>& rows, std::ostream& out) {
    out << kFlowLogHeader << "\n";
    for (const auto& r : rows)
        out << r.slot << ',' << r.node << ',' << r.task << ',' << r.lambda << ',' << r.forwarded
            << ',' << r.node_loss << ',' << r.link_loss << ',' << r.cached_after << "\n";
}

}  // namespace iovmesh
