#pragma once

// Counter-based splittable random streams. Each (seed, replication, tag)
// triple names an independent stream, so Monte Carlo output is a pure
// function of the seed and job geometry, independent of thread scheduling.
// No std:: distributions are used anywhere: normals come from the inverse
// cdf, which is bit-stable across platforms with the same libm.

#include <cstdint>
#include "pabel/stats.hpp"

namespace pabel {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
}  // namespace detail

class RngStream {
  public:
    explicit RngStream(std::uint64_t state) : state_(state) {}

    // Derives an independent stream from (seed, replication, tag). Distinct
    // triples map to distinct counters of the splitmix bijection.
    static RngStream derive(std::uint64_t seed, std::uint64_t replication, std::uint64_t tag = 0) {
        std::uint64_t s = detail::mix64(seed ^ 0x8C98D1D650A9AE39ull);
        s = detail::mix64(s + 0x9E3779B97F4A7C15ull * (replication + 1));
        s = detail::mix64(s + 0xD1B54A32D192ED03ull * (tag + 1));
        return RngStream(s);
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return detail::mix64(state_);
    }

    // Uniform on the open interval (0,1), 53-bit resolution.
    double next_uniform() { return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double next_gaussian() { return normal_quantile(next_uniform()); }

  private:
    std::uint64_t state_;
};

}  // namespace pabel
