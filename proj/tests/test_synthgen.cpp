#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "segsafe/aggregate.hpp"
#include "segsafe/glm.hpp"
#include "segsafe/hbe.hpp"
#include "segsafe/ingest.hpp"
#include "segsafe/synthgen.hpp"

using namespace segsafe;

namespace {

// Degenerate mix: one road type, constant covariates, no hbe activity, and
// exposure pinned to exactly 1 MVMT so mu equals exp(x . beta).
GenConfig point_mass_config(double kappa, double intercept) {
    GenConfig cfg = GenConfig::va_like();
    cfg.kappa = kappa;
    cfg.beta.assign(9, 0.0);
    cfg.beta[0] = intercept;
    cfg.mix[0].proportion = 0;
    cfg.mix[1].proportion = 0;
    cfg.mix[2].proportion = 0;
    cfg.mix[3] = TypeMix{1.0, 2, 2, 0.0, 1.0, {0.0, 0.0}};
    cfg.length_mi = {std::log(1.0), 0.0};
    cfg.aadt = {std::log(1e6 / 3650.0), 0.0};
    cfg.hbe_distance_mi = {std::log(50.0), 0.0};
    cfg.lane_change_mean = 0.0;
    cfg.turn_angle_mean_deg = 0.0;
    cfg.observed_years = 10.0;
    // lanes enter the linear predictor; zero their coefficient contribution
    cfg.beta[5] = 0.0;
    return cfg;
}

std::string tmp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("segsafe_synth_" + name);
    std::filesystem::create_directories(dir);
    return dir.string();
}

}  // namespace

TEST_CASE("identical seeds reproduce the network bitwise") {
    GenConfig cfg = GenConfig::va_like();
    cfg.n_segments = 1000;
    cfg.seed = 7;
    const auto a = generate_segments(cfg);
    const auto b = generate_segments(cfg, 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].seg == b[i].seg);
        CHECK(a[i].hbe.count == b[i].hbe.count);
        CHECK(a[i].hbe.distance_mi == b[i].hbe.distance_mi);
    }
    const auto ca = sample_crashes(a, cfg.model, cfg.beta, cfg.kappa, cfg.seed);
    const auto cb = sample_crashes(b, cfg.model, cfg.beta, cfg.kappa, cfg.seed, 4);
    CHECK(ca == cb);

    cfg.seed = 8;
    const auto other = generate_segments(cfg);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        differs |= !(a[i].seg == other[i].seg);
    }
    CHECK(differs);
}

TEST_CASE("a degenerate mix produces only that road type") {
    GenConfig cfg = GenConfig::va_like();
    cfg.n_segments = 500;
    cfg.mix[0].proportion = 1;
    cfg.mix[1].proportion = 0;
    cfg.mix[2].proportion = 0;
    cfg.mix[3].proportion = 0;
    for (const auto& gen : generate_segments(cfg)) {
        CHECK(gen.seg.road_type == RoadType::local);
    }
}

TEST_CASE("road type proportions track the mix at n = 10000") {
    GenConfig cfg = GenConfig::va_like();
    cfg.n_segments = 10000;
    cfg.seed = 3;
    std::array<long long, 4> counts{};
    for (const auto& gen : generate_segments(cfg)) {
        ++counts[static_cast<std::size_t>(road_type_to_int(gen.seg.road_type)) - 1];
    }
    for (std::size_t t = 0; t < 4; ++t) {
        const double observed = static_cast<double>(counts[t]) / cfg.n_segments;
        CHECK(std::abs(observed - cfg.mix[t].proportion) < 0.02);
    }
}

TEST_CASE("generated segments satisfy the domain invariants") {
    GenConfig cfg = GenConfig::va_like();
    cfg.n_segments = 2000;
    for (const auto& gen : generate_segments(cfg)) {
        CHECK(gen.seg.length_miles > 0);
        CHECK(gen.seg.aadt >= 0);
        CHECK(gen.seg.num_lanes >= 1);
        CHECK(gen.seg.lane_changes >= 0);
        CHECK(gen.seg.cum_turn_angle_deg >= 0);
        CHECK(gen.seg.observed_years > 0);
        CHECK(gen.hbe.distance_mi > 0);
        CHECK(gen.hbe.count >= 0);
        // distance floor leaves room for the telemetry pulses
        CHECK(gen.hbe.distance_mi * kMetersPerMile >=
              min_telemetry_distance_m(gen.hbe.count) - 1e-9);
    }
}

TEST_CASE("mean realized hbe rate tracks the configured distribution") {
    GenConfig cfg = GenConfig::va_like();
    cfg.n_segments = 100000;
    cfg.seed = 5;
    std::array<double, 4> sum{}, n{};
    for (const auto& gen : generate_segments(cfg, 4)) {
        const auto t = static_cast<std::size_t>(road_type_to_int(gen.seg.road_type)) - 1;
        sum[t] += static_cast<double>(gen.hbe.count) / gen.hbe.distance_mi;
        n[t] += 1;
    }
    for (std::size_t t = 0; t < 4; ++t) {
        const TypeMix& mix = cfg.mix[t];
        const double configured =
            (1.0 - mix.hbe_zero_prob) *
            std::exp(mix.hbe_rate.log_mu + 0.5 * mix.hbe_rate.log_sigma * mix.hbe_rate.log_sigma);
        CHECK(sum[t] / n[t] == doctest::Approx(configured).epsilon(0.10));
    }
}

TEST_CASE("crash counts follow the mean/variance law") {
    struct Preset {
        double intercept_mu;  // mu = exp(intercept) with unit exposure
        double kappa;
    };
    for (const Preset preset : {Preset{1.0, 0.0}, Preset{2.0, 1.0}, Preset{5.0, 0.5}}) {
        GenConfig cfg = point_mass_config(preset.kappa, std::log(preset.intercept_mu));
        cfg.n_segments = 100000;
        cfg.seed = 11;
        const auto segments = generate_segments(cfg, 4);
        const auto counts = sample_crashes(segments, cfg.model, cfg.beta, cfg.kappa, cfg.seed, 4);
        double sum = 0, sum2 = 0;
        for (long long c : counts) {
            sum += static_cast<double>(c);
            sum2 += static_cast<double>(c) * static_cast<double>(c);
        }
        const double n = static_cast<double>(counts.size());
        const double mean = sum / n;
        const double var = sum2 / n - mean * mean;
        const double mu = preset.intercept_mu;
        const double want_var = mu + preset.kappa * mu * mu;
        CHECK(std::abs(mean - mu) < 3 * std::sqrt(want_var / n));
        CHECK(var == doctest::Approx(want_var).epsilon(0.10));
    }
}

TEST_CASE("sample_crashes validates kappa") {
    GenConfig cfg = GenConfig::va_like();
    cfg.n_segments = 10;
    const auto segments = generate_segments(cfg);
    CHECK_THROWS_AS(sample_crashes(segments, cfg.model, cfg.beta, -0.1, 1),
                    std::invalid_argument);
}

TEST_CASE("fit_negbin recovers the generating coefficients across seeds") {
    GenConfig cfg = GenConfig::va_like();
    cfg.n_segments = 20000;
    int passes = 0;
    const int n_seeds = 20;
    for (int seed = 1; seed <= n_seeds; ++seed) {
        cfg.seed = static_cast<std::uint64_t>(seed * 1000);
        const auto segments = generate_segments(cfg, 4);
        const auto counts = sample_crashes(segments, cfg.model, cfg.beta, cfg.kappa, cfg.seed, 4);
        std::vector<AnalysisRow> rows;
        rows.reserve(segments.size());
        for (std::size_t i = 0; i < segments.size(); ++i) {
            AnalysisRow row = row_from_generated(segments[i]);
            row.crash_count = counts[i];
            rows.push_back(std::move(row));
        }
        const auto design = build_design(rows, cfg.model);
        const auto fit = fit_negbin(design.X, design.y, design.offset);
        REQUIRE(fit.converged);
        bool ok = true;
        for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
            // the offset is vehicle-miles, the preset acts per MVMT
            const double target = cfg.beta[static_cast<std::size_t>(j)] -
                                  (j == 0 ? std::log(1e6) : 0.0);
            const double se = std::sqrt(fit.covariance(j, j));
            ok = ok && std::abs(fit.beta[j] - target) <= 3 * se;
        }
        passes += ok;
    }
    CHECK(passes >= 19);
}

TEST_CASE("emitted telemetry realizes each segment's summary") {
    GenConfig cfg = GenConfig::va_like();
    cfg.n_segments = 120;
    cfg.seed = 31;
    cfg.hbe_distance_mi = {std::log(1.5), 0.6};
    for (auto& mix : cfg.mix) {
        mix.hbe_rate.log_mu = std::log(1.2);  // a few events per short trace
        mix.hbe_zero_prob = 0.2;
    }
    const auto segments = generate_segments(cfg);
    const std::string dir = tmp_dir("telemetry");
    write_telemetry_csv(dir + "/telemetry.csv", segments, nullptr);

    const auto telemetry = parse_telemetry(dir + "/telemetry.csv");
    CHECK(telemetry.report.rejections.empty());
    const auto detected = aggregate_hbes(telemetry.traces, DetectorConfig{});
    long long with_events = 0;
    for (const auto& gen : segments) {
        const auto it = detected.find(gen.seg.segment_id);
        REQUIRE(it != detected.end());
        CHECK(it->second.count == gen.hbe.count);
        CHECK(it->second.distance_mi ==
              doctest::Approx(gen.hbe.distance_mi).epsilon(1e-9));
        with_events += gen.hbe.count > 0;
    }
    CHECK(with_events > 10);  // the fixture actually exercises braking pulses
}

TEST_CASE("config parsing applies presets then overrides, strictly") {
    const std::string dir = tmp_dir("config");
    {
        std::ofstream out(dir + "/good.cfg");
        out << "# comment\npreset=va_like\nn_segments=123\nbeta.hbe_rate=0.5\n"
            << "type1.ramp_prob=0.2\nhbe_transform=identity\n";
    }
    const GenConfig cfg = parse_gen_config(dir + "/good.cfg");
    CHECK(cfg.n_segments == 123);
    CHECK(cfg.beta[1] == 0.5);
    CHECK(cfg.beta[2] == GenConfig::va_like().beta[2]);
    CHECK(cfg.mix[0].ramp_prob == 0.2);
    CHECK(cfg.model.hbe_transform == HbeTransform::identity);

    {
        std::ofstream out(dir + "/unknown.cfg");
        out << "nonsense_field=1\n";
    }
    CHECK_THROWS_WITH_AS(parse_gen_config(dir + "/unknown.cfg"),
                         doctest::Contains("nonsense_field"), std::invalid_argument);

    {
        std::ofstream out(dir + "/badvalue.cfg");
        out << "kappa=abc\n";
    }
    CHECK_THROWS_WITH_AS(parse_gen_config(dir + "/badvalue.cfg"), doctest::Contains("kappa"),
                         std::invalid_argument);

    {
        std::ofstream out(dir + "/badprops.cfg");
        out << "type1.proportion=0.9\ntype2.proportion=0.9\ntype3.proportion=0\n"
            << "type4.proportion=0\n";
    }
    CHECK_THROWS_WITH_AS(parse_gen_config(dir + "/badprops.cfg"),
                         doctest::Contains("proportions"), std::invalid_argument);
}
