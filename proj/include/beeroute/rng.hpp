#pragma once

#include <cstdint>
#include <random>

namespace beeroute {

// splitmix64, used to derive independent stream seeds from one run seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream));
}

// Seed stream tags. Paired runs must draw topology, traffic and the
// source/dest pair from the same streams regardless of mode.
inline constexpr std::uint64_t kStreamTopology = 1;
inline constexpr std::uint64_t kStreamRouting = 2;
inline constexpr std::uint64_t kStreamInitialLoad = 3;
inline constexpr std::uint64_t kStreamPair = 4;
inline constexpr std::uint64_t kStreamSearch = 5;

// mt19937_64 with hand-rolled distributions so that sequences depend only
// on the engine, not on the standard library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n); n > 0
    std::uint64_t bounded(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(eng_()) * n) >> 64);
    }

private:
    std::mt19937_64 eng_;
};

} // namespace beeroute
