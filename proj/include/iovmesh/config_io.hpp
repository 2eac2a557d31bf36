// Scenario file I/O. The format is INI-style: `[section]` headers, `key =
// value` lines, `#`/`;` comments, plus two table sections ([lights],
// [rsu_positions]) whose rows are whitespace-separated. Values carry unit
// suffixes (`100 ms`, `20 km/h`, `-100 dBm`); bare numbers mean the SI base
// unit except for powers, which must be explicit because W and dBm are too
// easy to confuse. save_config() writes every resolved value back with 17
// significant digits, so a saved manifest reloads to bit-identical doubles.
#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "channel.hpp"
#include "core.hpp"
#include "routing.hpp"
#include "scenario.hpp"
#include "traffic.hpp"
#include "units.hpp"

namespace iovmesh {

struct RadioConfig {
    double vehicle_tx_w = 0.1;               // 100 mW
    double rsu_tx_w = dbm_to_watts(20.0);    // 20 dBm
    double vehicle_range_m = 200.0;
    double rsu_coverage_m = 500.0;
};

struct CacheConfig {
    double vehicle_cache_bits = 100e6;
    double rsu_cache_bits = 500e6;
    double cache_scale = 1.0;  // multiplies both capacities (sweep knob)
};

struct ForwardingConfig {
    double vehicle_forward_bps = 10e9;
    double rsu_forward_bps = 10e9;
};

struct RoutingConfig {
    WeightMode route_weight = WeightMode::euclidean_distance;
    int port_cap = 0;
    int table_refresh = 0;  // slots between route rebuilds for live tasks; 0 = frozen
};

struct SimConfig {
    ScenarioConfig scenario;
    ChannelParams channel;
    RadioConfig radio;
    CacheConfig cache;
    ForwardingConfig forwarding;
    RoutingConfig routing;
    TrafficConfig traffic;
};

// ---- derived quantities ----------------------------------------------------

inline Packets cache_packets(double bits, double scale, double packet_bits) {
    return bits_to_packets(bits * scale, packet_bits);
}

inline NodeDefaults node_defaults(const SimConfig& c) {
    NodeDefaults d;
    d.vehicle_range_m = c.radio.vehicle_range_m;
    d.rsu_coverage_m = c.radio.rsu_coverage_m;
    d.vehicle_tx_w = c.radio.vehicle_tx_w;
    d.rsu_tx_w = c.radio.rsu_tx_w;
    const double pkt = c.scenario.packet_size_bits;
    d.vehicle_cache_pkts = cache_packets(c.cache.vehicle_cache_bits, c.cache.cache_scale, pkt);
    d.rsu_cache_pkts = cache_packets(c.cache.rsu_cache_bits, c.cache.cache_scale, pkt);
    d.vehicle_forward_pkts = bits_rate_to_packets_per_slot(c.forwarding.vehicle_forward_bps,
                                                           c.scenario.slot_length, pkt);
    d.rsu_forward_pkts = bits_rate_to_packets_per_slot(c.forwarding.rsu_forward_bps,
                                                       c.scenario.slot_length, pkt);
    return d;
}

// Packets per slot a task source offers at the configured QoS rate.
inline Packets qos_packets_per_slot(const SimConfig& c) {
    return bits_rate_to_packets_per_slot(c.traffic.qos_bps, c.scenario.slot_length,
                                         c.scenario.packet_size_bits);
}

inline void validate_config(const SimConfig& c) {
    validate_scenario(c.scenario);
    validate_traffic(c.traffic);
    if (c.channel.v2v_bandwidth_hz <= 0 || c.channel.v2i_bandwidth_hz <= 0)
        throw ConfigError("bandwidth: must be > 0");
    if (c.channel.noise_w <= 0) throw ConfigError("noise_power: must be > 0");
    if (c.channel.a0 < 0) throw ConfigError("interference_coeff: must be >= 0");
    if (c.channel.gain_v2v <= 0 || c.channel.gain_v2i <= 0 || c.channel.coding_gain <= 0)
        throw ConfigError("channel gains must be > 0");
    if (c.radio.vehicle_tx_w <= 0 || c.radio.rsu_tx_w <= 0)
        throw ConfigError("tx power: must be > 0");
    if (c.radio.vehicle_range_m <= 0 || c.radio.rsu_coverage_m <= 0)
        throw ConfigError("range/coverage: must be > 0");
    if (c.cache.vehicle_cache_bits <= 0 || c.cache.rsu_cache_bits <= 0)
        throw ConfigError("cache sizes must be > 0");
    if (c.cache.cache_scale <= 0) throw ConfigError("cache_scale: must be > 0");
    if (c.forwarding.vehicle_forward_bps <= 0 || c.forwarding.rsu_forward_bps <= 0)
        throw ConfigError("forward rates must be > 0");
    if (c.routing.port_cap < 0) throw ConfigError("port_cap: must be >= 0");
    if (c.routing.table_refresh < 0) throw ConfigError("table_refresh: must be >= 0");
    const auto d = node_defaults(c);
    if (d.vehicle_cache_pkts < 1 || d.rsu_cache_pkts < 1)
        throw ConfigError("cache sizes must hold at least one packet");
    if (d.vehicle_forward_pkts < 1 || d.rsu_forward_pkts < 1)
        throw ConfigError("forward rates must move at least one packet per slot");
    if (qos_packets_per_slot(c) < 1)
        throw ConfigError("qos: below one packet per slot for this packet size");
}

// ---- value parsing ----------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

struct ParseCtx {
    std::string name;  // file name for diagnostics
    int line = 0;
    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError(name + ":" + std::to_string(line) + ": " + msg);
    }
};

inline double parse_number(const ParseCtx& ctx, const std::string& tok) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') ctx.fail("expected a number, got '" + tok + "'");
    return v;
}

// Split "20 km/h" into the number and its unit word (may be empty).
inline std::pair<double, std::string> parse_quantity(const ParseCtx& ctx, const std::string& raw) {
    const std::string s = trim(raw);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) ctx.fail("expected a number, got '" + s + "'");
    return {v, trim(std::string(end))};
}

inline double unit_scaled(const ParseCtx& ctx, const std::string& raw, const char* kind,
                          std::initializer_list<std::pair<const char*, double>> units,
                          bool unit_required = false) {
    auto [v, unit] = parse_quantity(ctx, raw);
    if (unit.empty() && !unit_required) return v;  // bare number = SI base unit
    for (const auto& [name, factor] : units)
        if (unit == name) return v * factor;
    std::string accepted;
    for (const auto& [name, factor] : units) {
        if (!accepted.empty()) accepted += ", ";
        accepted += name;
    }
    ctx.fail(std::string("bad ") + kind + " unit '" + unit + "' (accepted: " + accepted + ")");
}

inline double parse_length(const ParseCtx& ctx, const std::string& raw) {
    return unit_scaled(ctx, raw, "length", {{"m", 1.0}, {"km", 1000.0}});
}
inline double parse_time(const ParseCtx& ctx, const std::string& raw) {
    return unit_scaled(ctx, raw, "time", {{"s", 1.0}, {"ms", 1e-3}});
}
inline double parse_freq(const ParseCtx& ctx, const std::string& raw) {
    return unit_scaled(ctx, raw, "frequency",
                       {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}});
}
inline double parse_bits(const ParseCtx& ctx, const std::string& raw) {
    return unit_scaled(ctx, raw, "data size", {{"b", 1.0}, {"kb", 1e3}, {"Mb", 1e6}, {"Gb", 1e9}});
}
inline double parse_bitrate(const ParseCtx& ctx, const std::string& raw) {
    return unit_scaled(ctx, raw, "bit rate",
                       {{"b/s", 1.0}, {"kb/s", 1e3}, {"Mb/s", 1e6}, {"Gb/s", 1e9}});
}
inline double parse_speed(const ParseCtx& ctx, const std::string& raw) {
    return unit_scaled(ctx, raw, "speed", {{"m/s", 1.0}, {"km/h", 1.0 / 3.6}});
}
inline double parse_power(const ParseCtx& ctx, const std::string& raw) {
    auto [v, unit] = parse_quantity(ctx, raw);
    if (unit == "W") return v;
    if (unit == "mW") return mw_to_watts(v);
    if (unit == "dBm") return dbm_to_watts(v);
    ctx.fail("power needs an explicit unit: W, mW or dBm");
}
inline double parse_gain(const ParseCtx& ctx, const std::string& raw) {
    auto [v, unit] = parse_quantity(ctx, raw);
    if (unit.empty()) return v;  // linear
    if (unit == "dB") return db_to_linear(v);
    ctx.fail("bad gain unit '" + unit + "' (accepted: dB or bare linear value)");
}
inline long long parse_int(const ParseCtx& ctx, const std::string& raw) {
    const std::string s = trim(raw);
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') ctx.fail("expected an integer, got '" + s + "'");
    return v;
}
inline bool parse_bool(const ParseCtx& ctx, const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    ctx.fail("expected a boolean (true/false), got '" + s + "'");
}
inline LightPhaseKind parse_phase(const ParseCtx& ctx, const std::string& raw) {
    if (raw == "horizontal_green") return LightPhaseKind::horizontal_green;
    if (raw == "vertical_green") return LightPhaseKind::vertical_green;
    if (raw == "all_yellow") return LightPhaseKind::all_yellow;
    ctx.fail("unknown light phase '" + raw +
             "' (horizontal_green, vertical_green or all_yellow)");
}
inline WeightMode parse_weight_mode(const ParseCtx& ctx, const std::string& raw) {
    if (raw == "distance") return WeightMode::euclidean_distance;
    if (raw == "hops") return WeightMode::hop_count;
    if (raw == "inverse_rate") return WeightMode::inverse_rate;
    ctx.fail("unknown route_weight '" + raw + "' (distance, hops or inverse_rate)");
}

}  // namespace detail

// ---- loader ------------------------------------------------------------------

inline SimConfig parse_config(const std::string& text, const std::string& name) {
    using namespace detail;
    SimConfig cfg;
    bool lights_seen = false;

    ParseCtx ctx{name, 0};
    std::string section;
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        ++ctx.line;
        // comments start at '#' or ';' anywhere on the line
        const auto hash = raw.find_first_of("#;");
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') ctx.fail("unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section == "lights" && !lights_seen) {
                cfg.scenario.light_schedule.clear();  // replace the default schedule
                lights_seen = true;
            }
            continue;
        }

        if (section == "lights") {
            std::istringstream row(line);
            std::string slot_tok, phase_tok, extra;
            if (!(row >> slot_tok >> phase_tok) || (row >> extra))
                ctx.fail("expected '<slot> <phase>'");
            cfg.scenario.light_schedule.push_back(
                {static_cast<SlotIndex>(parse_int(ctx, slot_tok)), parse_phase(ctx, phase_tok)});
            continue;
        }
        if (section == "rsu_positions") {
            std::istringstream row(line);
            std::string x_tok, y_tok, extra;
            if (!(row >> x_tok >> y_tok) || (row >> extra)) ctx.fail("expected '<x> <y>' in metres");
            cfg.scenario.rsu_positions.emplace_back(parse_number(ctx, x_tok),
                                                    parse_number(ctx, y_tok));
            continue;
        }
        if (section == "manifest") continue;  // run provenance; not configuration

        const auto eq = line.find('=');
        if (eq == std::string::npos) ctx.fail("expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) ctx.fail("expected 'key = value'");

        auto& sc = cfg.scenario;
        if (section == "scenario") {
            if (key == "area_width") sc.area_width = parse_length(ctx, val);
            else if (key == "area_height") sc.area_height = parse_length(ctx, val);
            else if (key == "lane_width") sc.lane_width = parse_length(ctx, val);
            else if (key == "lanes_per_direction") sc.lanes_per_direction = static_cast<int>(parse_int(ctx, val));
            else if (key == "vehicles") sc.n_vehicles = static_cast<int>(parse_int(ctx, val));
            else if (key == "rsus") sc.n_rsus = static_cast<int>(parse_int(ctx, val));
            else if (key == "slot_length") sc.slot_length = parse_time(ctx, val);
            else if (key == "slots") sc.n_slots = static_cast<SlotIndex>(parse_int(ctx, val));
            else if (key == "speed_min") sc.speed_min = parse_speed(ctx, val);
            else if (key == "speed_max") sc.speed_max = parse_speed(ctx, val);
            else if (key == "packet_size") sc.packet_size_bits = parse_bits(ctx, val);
            else if (key == "seed") sc.seed = static_cast<std::uint64_t>(parse_int(ctx, val));
            else if (key == "vehicle_antenna_height") sc.vehicle_antenna_z = parse_length(ctx, val);
            else if (key == "rsu_antenna_height") sc.rsu_antenna_z = parse_length(ctx, val);
            else ctx.fail("unknown key '" + key + "' in [scenario]");
        } else if (section == "channel") {
            auto& ch = cfg.channel;
            auto& rd = cfg.radio;
            if (key == "v2v_bandwidth") ch.v2v_bandwidth_hz = parse_freq(ctx, val);
            else if (key == "v2i_bandwidth") ch.v2i_bandwidth_hz = parse_freq(ctx, val);
            else if (key == "noise_power") ch.noise_w = parse_power(ctx, val);
            else if (key == "interference_coeff") ch.a0 = parse_gain(ctx, val);
            else if (key == "v2v_gain") ch.gain_v2v = parse_gain(ctx, val);
            else if (key == "v2i_gain") ch.gain_v2i = parse_gain(ctx, val);
            else if (key == "coding_gain") ch.coding_gain = parse_gain(ctx, val);
            else if (key == "vehicle_tx_power") rd.vehicle_tx_w = parse_power(ctx, val);
            else if (key == "rsu_tx_power") rd.rsu_tx_w = parse_power(ctx, val);
            else if (key == "vehicle_range") rd.vehicle_range_m = parse_length(ctx, val);
            else if (key == "rsu_coverage") rd.rsu_coverage_m = parse_length(ctx, val);
            else ctx.fail("unknown key '" + key + "' in [channel]");
        } else if (section == "cache") {
            if (key == "vehicle_cache") cfg.cache.vehicle_cache_bits = parse_bits(ctx, val);
            else if (key == "rsu_cache") cfg.cache.rsu_cache_bits = parse_bits(ctx, val);
            else if (key == "cache_scale") cfg.cache.cache_scale = parse_number(ctx, val);
            else ctx.fail("unknown key '" + key + "' in [cache]");
        } else if (section == "forwarding") {
            if (key == "vehicle_forward") cfg.forwarding.vehicle_forward_bps = parse_bitrate(ctx, val);
            else if (key == "rsu_forward") cfg.forwarding.rsu_forward_bps = parse_bitrate(ctx, val);
            else ctx.fail("unknown key '" + key + "' in [forwarding]");
        } else if (section == "routing") {
            if (key == "route_weight") cfg.routing.route_weight = parse_weight_mode(ctx, val);
            else if (key == "port_cap") cfg.routing.port_cap = static_cast<int>(parse_int(ctx, val));
            else if (key == "table_refresh") cfg.routing.table_refresh = static_cast<int>(parse_int(ctx, val));
            else ctx.fail("unknown key '" + key + "' in [routing]");
        } else if (section == "traffic") {
            auto& tr = cfg.traffic;
            if (key == "qos") tr.qos_bps = parse_bitrate(ctx, val);
            else if (key == "initiators_per_slot")
                tr.initiators_per_slot = (val == "auto") ? 0 : static_cast<int>(parse_int(ctx, val));
            else if (key == "task_slots") tr.task_slots = static_cast<int>(parse_int(ctx, val));
            else if (key == "p_high") tr.p_high = parse_number(ctx, val);
            else if (key == "p_medium") tr.p_medium = parse_number(ctx, val);
            else if (key == "p_low") tr.p_low = parse_number(ctx, val);
            else if (key == "grid_rows") tr.grid_rows = static_cast<int>(parse_int(ctx, val));
            else if (key == "grid_cols") tr.grid_cols = static_cast<int>(parse_int(ctx, val));
            else if (key == "rsu_initiators") tr.rsu_initiators = parse_bool(ctx, val);
            else if (key == "initiation_start") tr.initiation_start = static_cast<SlotIndex>(parse_int(ctx, val));
            else if (key == "initiation_end") tr.initiation_end = static_cast<SlotIndex>(parse_int(ctx, val));
            else ctx.fail("unknown key '" + key + "' in [traffic]");
        } else if (section.empty()) {
            ctx.fail("key outside any [section]");
        } else {
            ctx.fail("unknown section [" + section + "]");
        }
    }
    validate_config(cfg);
    return cfg;
}

inline SimConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

// ---- serializer ---------------------------------------------------------------

namespace detail {
inline std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace detail

// Every value that affects results, in resolved SI units. Reloading the
// output yields the same SimConfig bit for bit.
inline void save_config(const SimConfig& c, std::ostream& out) {
    using detail::g17;
    const auto& s = c.scenario;
    out << "[scenario]\n"
        << "area_width = " << g17(s.area_width) << " m\n"
        << "area_height = " << g17(s.area_height) << " m\n"
        << "lane_width = " << g17(s.lane_width) << " m\n"
        << "lanes_per_direction = " << s.lanes_per_direction << "\n"
        << "vehicles = " << s.n_vehicles << "\n"
        << "rsus = " << s.n_rsus << "\n"
        << "slot_length = " << g17(s.slot_length) << " s\n"
        << "slots = " << s.n_slots << "\n"
        << "speed_min = " << g17(s.speed_min) << " m/s\n"
        << "speed_max = " << g17(s.speed_max) << " m/s\n"
        << "packet_size = " << g17(s.packet_size_bits) << " b\n"
        << "seed = " << s.seed << "\n"
        << "vehicle_antenna_height = " << g17(s.vehicle_antenna_z) << " m\n"
        << "rsu_antenna_height = " << g17(s.rsu_antenna_z) << " m\n";

    out << "\n[lights]\n";
    for (const auto& span : s.light_schedule)
        out << span.start_slot << " " << to_string(span.phase) << "\n";

    if (!s.rsu_positions.empty()) {
        out << "\n[rsu_positions]\n";
        for (const auto& [x, y] : s.rsu_positions) out << g17(x) << " " << g17(y) << "\n";
    }

    out << "\n[channel]\n"
        << "v2v_bandwidth = " << g17(c.channel.v2v_bandwidth_hz) << " Hz\n"
        << "v2i_bandwidth = " << g17(c.channel.v2i_bandwidth_hz) << " Hz\n"
        << "noise_power = " << g17(c.channel.noise_w) << " W\n"
        << "interference_coeff = " << g17(c.channel.a0) << "\n"
        << "v2v_gain = " << g17(c.channel.gain_v2v) << "\n"
        << "v2i_gain = " << g17(c.channel.gain_v2i) << "\n"
        << "coding_gain = " << g17(c.channel.coding_gain) << "\n"
        << "vehicle_tx_power = " << g17(c.radio.vehicle_tx_w) << " W\n"
        << "rsu_tx_power = " << g17(c.radio.rsu_tx_w) << " W\n"
        << "vehicle_range = " << g17(c.radio.vehicle_range_m) << " m\n"
        << "rsu_coverage = " << g17(c.radio.rsu_coverage_m) << " m\n";

    out << "\n[cache]\n"
        << "vehicle_cache = " << g17(c.cache.vehicle_cache_bits) << " b\n"
        << "rsu_cache = " << g17(c.cache.rsu_cache_bits) << " b\n"
        << "cache_scale = " << g17(c.cache.cache_scale) << "\n";

    out << "\n[forwarding]\n"
        << "vehicle_forward = " << g17(c.forwarding.vehicle_forward_bps) << " b/s\n"
        << "rsu_forward = " << g17(c.forwarding.rsu_forward_bps) << " b/s\n";

    out << "\n[routing]\n"
        << "route_weight = " << to_string(c.routing.route_weight) << "\n"
        << "port_cap = " << c.routing.port_cap << "\n"
        << "table_refresh = " << c.routing.table_refresh << "\n";

    const auto& t = c.traffic;
    out << "\n[traffic]\n"
        << "qos = " << g17(t.qos_bps) << " b/s\n"
        << "initiators_per_slot = "
        << (t.initiators_per_slot > 0 ? std::to_string(t.initiators_per_slot) : std::string("auto"))
        << "\n"
        << "task_slots = " << t.task_slots << "\n"
        << "p_high = " << g17(t.p_high) << "\n"
        << "p_medium = " << g17(t.p_medium) << "\n"
        << "p_low = " << g17(t.p_low) << "\n"
        << "grid_rows = " << t.grid_rows << "\n"
        << "grid_cols = " << t.grid_cols << "\n"
        << "rsu_initiators = " << (t.rsu_initiators ? "true" : "false") << "\n"
        << "initiation_start = " << t.initiation_start << "\n"
        << "initiation_end = " << t.initiation_end << "\n";
}

// Full resolved config plus run provenance; parse_config skips [manifest].
inline std::string make_manifest(const SimConfig& c, const std::vector<std::uint64_t>& seeds,
                                 const std::string& command) {
    std::ostringstream out;
    out << "# run manifest: a valid scenario file that reproduces this run\n";
    save_config(c, out);
    out << "\n[manifest]\n"
        << "tool_version = " << kVersion << "\n"
        << "command = " << command << "\n"
        << "seeds =";
    for (auto s : seeds) out << " " << s;
    out << "\n";
    return out.str();
}

}  // namespace iovmesh
