#include "segsafe/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace segsafe {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr double kTwoPi = 6.283185307179586476925286766559;
}  // namespace

std::uint64_t mix64(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed) ^ mix64(stream))) {}

std::uint64_t CounterRng::next_u64() {
    return mix64(key_ + (counter_++) * kGolden);
}

double CounterRng::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::next_unit_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::next_normal() {
    const double u1 = next_unit_open();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double CounterRng::next_gamma(double shape, double scale) {
    if (!(shape > 0) || !(scale > 0)) throw std::invalid_argument("gamma needs shape, scale > 0");
    if (shape < 1.0) {
        // Boost: G(a) = G(a + 1) * U^(1/a).
        const double g = next_gamma(shape + 1.0, 1.0);
        return g * std::pow(next_unit_open(), 1.0 / shape) * scale;
    }
    // Marsaglia-Tsang squeeze-rejection.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
        double x, v;
        do {
            x = next_normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = next_unit_open();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
}

long long CounterRng::next_poisson(double mean) {
    if (mean < 0 || !std::isfinite(mean)) throw std::invalid_argument("poisson needs mean >= 0");
    if (mean == 0.0) return 0;
    return mean < 10.0 ? poisson_small(mean) : poisson_ptrs(mean);
}

long long CounterRng::poisson_small(double mean) {
    const double limit = std::exp(-mean);
    long long k = 0;
    double prod = next_unit_open();
    while (prod > limit) {
        ++k;
        prod *= next_unit_open();
    }
    return k;
}

// Hormann's PTRS transformed rejection, valid for mean >= 10.
long long CounterRng::poisson_ptrs(double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    while (true) {
        const double u = next_unit() - 0.5;
        const double v = next_unit_open();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<long long>(k);
        if (k < 0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            k * loglam - mean - std::lgamma(k + 1.0)) {
            return static_cast<long long>(k);
        }
    }
}

}  // namespace segsafe
