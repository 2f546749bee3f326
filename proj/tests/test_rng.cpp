#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <set>
#include <vector>

#include "segsafe/rng.hpp"

using namespace segsafe;

TEST_CASE("mix64 matches the published SplitMix64 sequence") {
    // finalizer outputs for states 0, 1, 2 (seed-0 SplitMix64 stream)
    CHECK(mix64(0) == 0xE220A8397B1DCDAFULL);
    CHECK(mix64(0x9E3779B97F4A7C15ULL) == 0x6E789E6AA1B965F4ULL);
    CHECK(mix64(2 * 0x9E3779B97F4A7C15ULL) == 0x06C45D188009454FULL);
}

TEST_CASE("streams are deterministic and distinct") {
    CounterRng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    std::vector<std::uint64_t> seq_a, seq_b;
    bool c_differs = false, d_differs = false;
    for (int i = 0; i < 64; ++i) {
        const auto va = a.next_u64();
        seq_a.push_back(va);
        seq_b.push_back(b.next_u64());
        c_differs |= c.next_u64() != va;
        d_differs |= d.next_u64() != va;
    }
    CHECK(seq_a == seq_b);
    CHECK(c_differs);
    CHECK(d_differs);
}

TEST_CASE("uniforms cover [0,1)") {
    CounterRng rng(1, 0);
    double sum = 0;
    for (int i = 0; i < 20000; ++i) {
        const double u = rng.next_unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("normals have the right first two moments") {
    CounterRng rng(2, 0);
    const int n = 100000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.next_normal();
        sum += z;
        sum2 += z * z;
    }
    const double mean = sum / n;
    CHECK(mean == doctest::Approx(0.0).epsilon(1).scale(0.02));
    CHECK(sum2 / n - mean * mean == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("gamma sampling matches its moments") {
    for (const auto& [shape, scale] : std::vector<std::pair<double, double>>{
             {2.0, 0.5}, {0.4, 1.5}, {7.0, 2.0}}) {
        CounterRng rng(3, static_cast<std::uint64_t>(shape * 10));
        const int n = 100000;
        double sum = 0, sum2 = 0;
        for (int i = 0; i < n; ++i) {
            const double g = rng.next_gamma(shape, scale);
            CHECK(g > 0);
            sum += g;
            sum2 += g * g;
        }
        const double mean = sum / n;
        const double var = sum2 / n - mean * mean;
        CHECK(mean == doctest::Approx(shape * scale).epsilon(0.03));
        CHECK(var == doctest::Approx(shape * scale * scale).epsilon(0.06));
    }
    CounterRng rng(3, 0);
    CHECK_THROWS_AS(rng.next_gamma(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("poisson sampling matches its moments on both branches") {
    for (double mean : {0.3, 3.0, 50.0, 400.0}) {
        CounterRng rng(4, static_cast<std::uint64_t>(mean * 10));
        const int n = 100000;
        double sum = 0, sum2 = 0;
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<double>(rng.next_poisson(mean));
            CHECK(k >= 0);
            sum += k;
            sum2 += k * k;
        }
        const double m = sum / n;
        const double var = sum2 / n - m * m;
        const double se_mean = 3 * std::sqrt(mean / n);
        CHECK(std::abs(m - mean) < se_mean + 1e-9);
        CHECK(var == doctest::Approx(mean).epsilon(0.06));
    }
    CounterRng rng(4, 0);
    CHECK(rng.next_poisson(0.0) == 0);
    CHECK_THROWS_AS(rng.next_poisson(-1.0), std::invalid_argument);
}
