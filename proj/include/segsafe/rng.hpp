#pragma once

#include <cstdint>

namespace segsafe {

// SplitMix64 finalizer: a fixed 64-bit mixing bijection.
std::uint64_t mix64(std::uint64_t z);

// Deterministic counter-based generator with named substreams. Output n of
// stream s under seed k is
//
//   mix64(key + n * 0x9E3779B97F4A7C15)  with  key = mix64(mix64(k) ^ mix64(s))
//
// so any (seed, stream, n) triple can be evaluated independently; per-index
// substreams make parallel generation order-independent. The distribution
// algorithms (documented in the README) are: 53-bit uniforms, Box-Muller
// normals (two uniforms each), Marsaglia-Tsang gamma, and Poisson via the
// uniform-product method below mean 10 and Hormann's PTRS transformed
// rejection above.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();

    // Uniform on [0, 1), 53-bit resolution.
    double next_unit();

    // Standard normal.
    double next_normal();

    // Gamma(shape, scale), shape > 0.
    double next_gamma(double shape, double scale);

    // Poisson(mean), mean >= 0.
    long long next_poisson(double mean);

  private:
    // Uniform on (0, 1); safe under log.
    double next_unit_open();

    long long poisson_small(double mean);
    long long poisson_ptrs(double mean);

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace segsafe
