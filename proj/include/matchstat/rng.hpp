#pragma once

#include <cstdint>
#include <initializer_list>

namespace matchstat {

// 64-bit finalizer (Stafford variant 13, the SplitMix64 output function).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
    return mix64(seed + 0x9E3779B97F4A7C15ull + value);
}

// Derives a substream seed from a master seed and a path of indices, e.g.
// {experiment_kind, cell_index, replication_index, lane}. Distinct paths give
// pseudo-independent streams, so replication results never depend on which
// worker thread ran them.
inline std::uint64_t substream_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = mix64(master);
    for (std::uint64_t word : path) s = hash_combine(s, word);
    return s;
}

// Standard normal quantile function (inverse CDF), accurate to ~1e-15 over
// p in (0, 1). Wichura's rational approximations with three branches.
double normal_quantile(double p);

// Counter-based SplitMix64 stream: the state is a Weyl sequence, each output
// is mix64 of the counter. Cheap to construct, so experiments build one per
// replication from substream_seed().
class Stream {
  public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix64(state_);
    }

    // Uniform on (0, 1), strictly: midpoints of a 2^52 grid, so the normal
    // quantile below is always finite.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
    }

    // Standard normal via the inverse CDF. Exactly one uniform per draw.
    double next_normal() { return normal_quantile(next_uniform()); }

  private:
    std::uint64_t state_;
};

}  // namespace matchstat
