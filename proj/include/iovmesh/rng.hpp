// Seeded random streams with reproducible draws.
//
// std::uniform_int_distribution and friends are not bit-identical across
// standard library implementations, so every draw here is built directly on
// the (standard-defined) mt19937_64 output. Streams are derived from a run
// seed plus integer salts, so independent modules, nodes and slots each get
// their own stream and results never depend on call interleaving.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace iovmesh {

// splitmix64; used only to spread (seed, salt...) into engine seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = mix64(seed);
    s = mix64(s ^ mix64(a + 0x100));
    s = mix64(s ^ mix64(b + 0x10000));
    s = mix64(s ^ mix64(c + 0x1000000));
    return s;
}

// Stream salts, one per consumer so streams never collide.
enum : std::uint64_t {
    kSaltPlacement = 1,
    kSaltTraffic = 2,
    kSaltOrdering = 3,
};

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}
    RngStream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0)
        : engine_(derive_seed(seed, a, b, c)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Unbiased integer in [0, n) via rejection sampling.
    std::uint64_t next_below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_real() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double next_real(double lo, double hi) { return lo + (hi - lo) * next_real(); }

    bool next_bool() { return (engine_() & 1u) != 0; }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace iovmesh
