// Physical unit conversions used by the config loader and channel model.
#pragma once

#include <cmath>
#include <cstdint>

namespace iovmesh {

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double mw_to_watts(double mw) { return mw / 1000.0; }
inline double mhz_to_hz(double mhz) { return mhz * 1e6; }
inline double kmh_to_ms(double kmh) { return kmh / 3.6; }
inline double ms_to_kmh(double ms) { return ms * 3.6; }
inline double megabits_to_bits(double mb) { return mb * 1e6; }

// Whole packets that fit through `bits_per_second` during one slot.
inline std::int64_t bits_rate_to_packets_per_slot(double bits_per_second,
                                                  double slot_length_s,
                                                  double packet_size_bits) {
    double pkts = bits_per_second * slot_length_s / packet_size_bits;
    if (pkts <= 0.0) return 0;
    return static_cast<std::int64_t>(pkts);  // floor, no fractional carry
}

// Whole packets held by a buffer of `bits` capacity.
inline std::int64_t bits_to_packets(double bits, double packet_size_bits) {
    double pkts = bits / packet_size_bits;
    if (pkts <= 0.0) return 0;
    return static_cast<std::int64_t>(pkts);
}

}  // namespace iovmesh
