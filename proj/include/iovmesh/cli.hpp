// Command-line front end: run / sweep / calibrate / validate subcommands over
// the engine. Kept in a header (cli_main) so tests can drive it in-process.
//
// Exit codes: 0 success, 2 usage error, 3 configuration error, 4 runtime
// failure. All diagnostics go to stderr; results and summaries to stdout.
#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "charts.hpp"
#include "config_io.hpp"
#include "core.hpp"
#include "csv.hpp"
#include "engine.hpp"

namespace iovmesh {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitRuntime = 4;

namespace detail {

// "A..B" (inclusive) or "a,b,c".
inline std::vector<std::uint64_t> parse_seed_list(const std::string& spec) {
    const auto bad = [&]() -> std::vector<std::uint64_t> {
        throw ConfigError("bad --seeds value '" + spec + "' (expected A..B or a,b,c)");
    };
    std::vector<std::uint64_t> seeds;
    const auto parse_one = [&](const std::string& tok) {
        std::size_t used = 0;
        std::uint64_t v = 0;
        try {
            v = std::stoull(tok, &used);
        } catch (...) {
            bad();
        }
        if (used != tok.size()) bad();
        return v;
    };
    const auto dots = spec.find("..");
    if (dots != std::string::npos) {
        const std::uint64_t a = parse_one(spec.substr(0, dots));
        const std::uint64_t b = parse_one(spec.substr(dots + 2));
        if (b < a || b - a > 100000) bad();
        for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
        return seeds;
    }
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) seeds.push_back(parse_one(tok));
    if (seeds.empty()) bad();
    return seeds;
}

inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline SimConfig load_scenario(const std::string& spec) {
    if (spec == "default") {
        SimConfig cfg;
        validate_config(cfg);
        return cfg;
    }
    return load_config(spec);
}

inline std::string default_out_dir() {
    if (const char* env = std::getenv("IOVMESH_OUT"); env && *env) return env;
    return "out";
}

template <typename Producer>
void write_file_atomic(const std::filesystem::path& path, Producer&& produce) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        produce(out);
        out.flush();
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

inline std::string join_argv(int argc, const char* const* argv) {
    std::string cmd;
    for (int i = 0; i < argc; ++i) {
        if (i) cmd += ' ';
        cmd += argv[i];
    }
    return cmd;
}

// Cartesian product of the override lists; every list may be empty (= keep
// the base value on that axis).
inline std::vector<GridPoint> build_grid(const std::vector<double>& qos_mbps,
                                         const std::vector<double>& cache_scales,
                                         const std::vector<int>& vehicles) {
    const auto qs = qos_mbps.empty() ? std::vector<std::optional<double>>{std::nullopt}
                                     : [&] {
                                           std::vector<std::optional<double>> v;
                                           for (double q : qos_mbps) v.push_back(q * 1e6);
                                           return v;
                                       }();
    const auto cs = cache_scales.empty() ? std::vector<std::optional<double>>{std::nullopt}
                                         : [&] {
                                               std::vector<std::optional<double>> v;
                                               for (double c : cache_scales) v.push_back(c);
                                               return v;
                                           }();
    const auto vs = vehicles.empty() ? std::vector<std::optional<int>>{std::nullopt}
                                     : [&] {
                                           std::vector<std::optional<int>> v;
                                           for (int n : vehicles) v.push_back(n);
                                           return v;
                                       }();
    std::vector<GridPoint> points;
    for (const auto& q : qs)
        for (const auto& c : cs)
            for (const auto& v : vs) {
                GridPoint p;
                p.qos_bps = q;
                p.cache_scale = c;
                p.n_vehicles = v;
                std::string label;
                if (q) label += "qos" + fmt_g(*q / 1e6);
                if (c) label += (label.empty() ? "" : "_") + ("cache" + fmt_g(*c));
                if (v) label += (label.empty() ? "" : "_") + ("veh" + std::to_string(*v));
                p.label = label.empty() ? "base" : label;
                points.push_back(std::move(p));
            }
    return points;
}

inline std::string final_summary(const std::vector<MetricsRow>& rows) {
    if (rows.empty()) return "no slots simulated";
    const auto& r = rows.back();
    std::ostringstream s;
    s << "slots=" << rows.size() << " tasks=" << r.generated_tasks
      << " unroutable=" << r.unroutable_tasks;
    if (r.loss_rate) s << " loss_rate=" << fmt_g(*r.loss_rate);
    if (r.arrive_rate) s << " arrive_rate=" << fmt_g(*r.arrive_rate);
    if (r.node_load) s << " node_load=" << fmt_g(*r.node_load);
    if (r.link_load) s << " link_load=" << fmt_g(*r.link_load);
    s << " sumflow=" << r.sumflow;
    return s.str();
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv) {
    namespace fs = std::filesystem;
    using namespace detail;

    CLI::App app{"iovmesh: flow-level simulator for vehicle/RSU mesh networks"};
    app.require_subcommand(1);
    app.footer("Default output directory comes from $IOVMESH_OUT (fallback: ./out).\n"
               "--scenario accepts a scenario file path or the keyword 'default'.");

    std::string scenario = "default";
    std::string out_dir = default_out_dir();
    std::string seeds_spec;
    std::uint64_t seed = 0;
    bool charts = false, flow_log = false;
    int jobs = 1;
    double qos_one = 0.0, cache_one = 0.0;
    int vehicles_one = 0;
    std::vector<double> qos_list, cache_list;
    std::vector<int> vehicles_list;
    double target_loss = 0.05;
    int cal_lo = 1, cal_hi = 500;

    auto* cmd_run = app.add_subcommand("run", "single simulation: metrics + task ledger + manifest");
    cmd_run->add_option("--scenario", scenario, "scenario file or 'default'");
    cmd_run->add_option("--seed", seed, "run seed (default: seed from the scenario)");
    cmd_run->add_option("--qos", qos_one, "override task QoS, Mb/s");
    cmd_run->add_option("--cache-scale", cache_one, "override cache scale factor");
    cmd_run->add_option("--vehicles", vehicles_one, "override vehicle count");
    cmd_run->add_option("--out", out_dir, "output directory");
    cmd_run->add_flag("--charts", charts, "also emit SVG charts");
    cmd_run->add_flag("--flow-log", flow_log, "also emit the per-node flow log CSV");

    auto* cmd_sweep = app.add_subcommand("sweep", "grid of runs x seeds, seed-averaged CSV per point");
    cmd_sweep->add_option("--scenario", scenario, "scenario file or 'default'");
    cmd_sweep->add_option("--seeds", seeds_spec, "seed list: A..B or a,b,c")->required();
    cmd_sweep->add_option("--qos", qos_list, "QoS values, Mb/s")->delimiter(',');
    cmd_sweep->add_option("--cache-scale", cache_list, "cache scale factors")->delimiter(',');
    cmd_sweep->add_option("--vehicles", vehicles_list, "vehicle counts")->delimiter(',');
    cmd_sweep->add_option("--out", out_dir, "output directory");
    cmd_sweep->add_flag("--charts", charts, "also emit SVG charts (one curve per grid point)");
    cmd_sweep->add_option("--jobs", jobs, "max concurrent runs")->check(CLI::PositiveNumber);

    auto* cmd_cal = app.add_subcommand("calibrate", "largest QoS whose end loss stays below a target");
    cmd_cal->add_option("--scenario", scenario, "scenario file or 'default'");
    cmd_cal->add_option("--seeds", seeds_spec, "seed list: A..B or a,b,c")->required();
    cmd_cal->add_option("--target-loss", target_loss, "loss-rate target, fraction (default 0.05)");
    cmd_cal->add_option("--lo", cal_lo, "search lower bound, Mb/s");
    cmd_cal->add_option("--hi", cal_hi, "search upper bound, Mb/s");
    cmd_cal->add_option("--jobs", jobs, "max concurrent runs")->check(CLI::PositiveNumber);

    auto* cmd_val = app.add_subcommand("validate", "check a scenario file and exit");
    cmd_val->add_option("--scenario", scenario, "scenario file or 'default'");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help or error
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand(cmd_val)) {
            load_scenario(scenario);
            std::cout << "ok: " << scenario << "\n";
            return kExitOk;
        }

        if (app.got_subcommand(cmd_run)) {
            SimConfig cfg = load_scenario(scenario);
            if (cmd_run->count("--qos")) cfg.traffic.qos_bps = qos_one * 1e6;
            if (cmd_run->count("--cache-scale")) cfg.cache.cache_scale = cache_one;
            if (cmd_run->count("--vehicles")) cfg.scenario.n_vehicles = vehicles_one;
            if (cmd_run->count("--seed")) cfg.scenario.seed = seed;
            validate_config(cfg);

            RunOptions opts;
            opts.keep_flow_log = flow_log;
            const auto result = run(cfg, cfg.scenario.seed, opts);

            fs::create_directories(out_dir);
            write_file_atomic(fs::path(out_dir) / "metrics.csv",
                              [&](std::ostream& o) { write_metrics_csv(result.series, o); });
            write_file_atomic(fs::path(out_dir) / "tasks.csv",
                              [&](std::ostream& o) { write_tasks_csv(result.tasks, o); });
            write_file_atomic(fs::path(out_dir) / "manifest.cfg", [&](std::ostream& o) {
                o << make_manifest(cfg, {cfg.scenario.seed}, join_argv(argc, argv));
            });
            if (flow_log)
                write_file_atomic(fs::path(out_dir) / "flow_log.csv",
                                  [&](std::ostream& o) { write_flow_log_csv(result.flow_log, o); });
            if (charts) {
                SweepPointResult pt;
                pt.point.label = "seed " + std::to_string(cfg.scenario.seed);
                pt.config = cfg;
                pt.seeds = {cfg.scenario.seed};
                pt.per_seed = {result.series};
                pt.mean = average_series(pt.per_seed);
                emit_charts({pt}, out_dir);
            }
            std::cout << final_summary(result.series.rows) << "\n"
                      << "wrote " << out_dir << "/metrics.csv\n";
            return kExitOk;
        }

        if (app.got_subcommand(cmd_sweep)) {
            const SimConfig base = load_scenario(scenario);
            const auto seeds = parse_seed_list(seeds_spec);
            const auto points = build_grid(qos_list, cache_list, vehicles_list);
            const auto results = sweep(base, points, seeds, jobs);

            fs::create_directories(out_dir);
            for (const auto& r : results) {
                // stage the whole grid point, then swap it in atomically
                const fs::path dir = fs::path(out_dir) / r.point.label;
                fs::path tmp = dir;
                tmp += ".tmp";
                fs::remove_all(tmp);
                fs::create_directories(tmp);
                write_file_atomic(tmp / "metrics_mean.csv",
                                  [&](std::ostream& o) { write_mean_metrics_csv(r.mean, o); });
                for (std::size_t s = 0; s < r.seeds.size(); ++s)
                    write_file_atomic(
                        tmp / ("metrics_seed" + std::to_string(r.seeds[s]) + ".csv"),
                        [&](std::ostream& o) { write_metrics_csv(r.per_seed[s], o); });
                write_file_atomic(tmp / "manifest.cfg", [&](std::ostream& o) {
                    o << make_manifest(r.config, r.seeds, join_argv(argc, argv));
                });
                fs::remove_all(dir);
                fs::rename(tmp, dir);
                std::cout << r.point.label << ": ";
                if (!r.mean.rows.empty()) {
                    const auto& last = r.mean.rows.back();
                    if (last.loss_rate) std::cout << "loss_rate=" << fmt_g(*last.loss_rate) << " ";
                    if (last.arrive_rate)
                        std::cout << "arrive_rate=" << fmt_g(*last.arrive_rate) << " ";
                }
                std::cout << "-> " << dir.string() << "\n";
            }
            if (charts) emit_charts(results, out_dir);
            return kExitOk;
        }

        if (app.got_subcommand(cmd_cal)) {
            const SimConfig cfg = load_scenario(scenario);
            const auto seeds = parse_seed_list(seeds_spec);
            const auto q = calibrate_qos(cfg, target_loss, seeds, jobs, cal_lo, cal_hi);
            if (q)
                std::cout << "calibrated_qos_mbps=" << *q << "\n";
            else
                std::cout << "infeasible: loss at " << cal_lo << " Mb/s already exceeds target "
                          << fmt_g(target_loss) << "\n";
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;  // unreachable: a subcommand is required
}

}  // namespace iovmesh
