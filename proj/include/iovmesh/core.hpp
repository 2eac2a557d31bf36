// Shared identifiers, enums and error types used across the library.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace iovmesh {

inline constexpr const char* kVersion = "1.0.0";

using NodeId = std::int32_t;
using TaskId = std::int64_t;
using SlotIndex = std::int32_t;
using Packets = std::int64_t;  // all flow accounting is in whole packets

enum class NodeKind { vehicle, rsu };
enum class Axis { horizontal, vertical, none };
enum class Priority { high = 0, medium = 1, low = 2 };
enum class LightPhaseKind { horizontal_green, vertical_green, all_yellow };

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

// Configuration file / validation problem. All loaders throw this with a
// message naming the offending line or invariant.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline const char* to_string(Priority p) {
    switch (p) {
        case Priority::high: return "high";
        case Priority::medium: return "medium";
        default: return "low";
    }
}

inline const char* to_string(LightPhaseKind p) {
    switch (p) {
        case LightPhaseKind::horizontal_green: return "horizontal_green";
        case LightPhaseKind::vertical_green: return "vertical_green";
        default: return "all_yellow";
    }
}

inline const char* to_string(NodeKind k) {
    return k == NodeKind::vehicle ? "vehicle" : "rsu";
}

// Axis a phase opens for movement.
inline Axis open_axis(LightPhaseKind p) {
    switch (p) {
        case LightPhaseKind::horizontal_green: return Axis::horizontal;
        case LightPhaseKind::vertical_green: return Axis::vertical;
        default: return Axis::none;
    }
}

}  // namespace iovmesh
