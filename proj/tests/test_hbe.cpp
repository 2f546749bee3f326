#include <doctest.h>

#include <cmath>

#include "oracle_detector.hpp"
#include "segsafe/hbe.hpp"
#include "synthetic_traces.hpp"

using namespace segsafe;

namespace {

TripTrace trace_from(const std::vector<std::pair<double, double>>& tv,
                     const std::string& segment = "s1") {
    TripTrace trace;
    trace.trip_id = "t";
    for (const auto& [t, v] : tv) trace.samples.push_back({t, v, segment});
    return trace;
}

// Constant-deceleration pulse appended at the trace's tail: linear drop, then
// recovery at +2 m/s^2. Expects tv.back() == (start, cruise_v).
void add_pulse(std::vector<std::pair<double, double>>& tv, double start, double cruise_v,
               double decel, double duration) {
    const double low_v = cruise_v - decel * duration;
    tv.push_back({start + duration, low_v});
    tv.push_back({start + duration + (cruise_v - low_v) / 2.0, cruise_v});
}

}  // namespace

TEST_CASE("derive_acceleration takes first differences at midpoints") {
    const auto trace = trace_from({{0, 20}, {1, 17}});
    const auto accel = derive_acceleration(trace, 5.0);
    REQUIRE(accel.size() == 1);
    CHECK(accel[0].accel_mps2 == doctest::Approx(-3.0));
    CHECK(accel[0].time_s == doctest::Approx(0.5));
}

TEST_CASE("constant speed gives zero acceleration") {
    const auto trace = trace_from({{0, 15}, {1, 15}, {2, 15}, {3, 15}});
    for (const auto& pt : derive_acceleration(trace, 5.0)) {
        CHECK(pt.accel_mps2 == 0.0);
    }
}

TEST_CASE("pairs spanning a sampling gap are omitted") {
    const auto trace = trace_from({{0, 20}, {10, 5}});
    CHECK(derive_acceleration(trace, 5.0).empty());
    CHECK(derive_acceleration(trace_from({{0, 20}}), 5.0).empty());
}

TEST_CASE("a single linear braking ramp is one event with its peak") {
    // 20 -> 5 m/s over 3 s: a = -5 throughout
    const auto trace = trace_from({{0, 20}, {1, 15}, {2, 10}, {3, 5}});
    DetectorConfig cfg;
    cfg.decel_threshold_mps2 = 3.0;
    const auto events = detect_hbes(trace, cfg);
    REQUIRE(events.size() == 1);
    CHECK(events[0].peak_decel_mps2 == doctest::Approx(5.0));
    CHECK(events[0].onset_time_s == 0.0);
    CHECK(events[0].segment_id == "s1");
}

TEST_CASE("steady cruising yields no events") {
    std::vector<std::pair<double, double>> tv;
    for (int t = 0; t <= 60; ++t) tv.push_back({static_cast<double>(t), 15.0});
    CHECK(detect_hbes(trace_from(tv), DetectorConfig{}).empty());
}

TEST_CASE("episodes merge only when closer than the minimum gap") {
    DetectorConfig cfg;  // threshold 3, merge gap 2
    // two -4 m/s^2 pulses of 2 s each, with 10 s between braking episodes
    std::vector<std::pair<double, double>> far = {{0, 20}};
    add_pulse(far, 0, 20, 4.0, 2.0);  // braking 0..2, recovered at t=6
    far.push_back({9, 20});
    far.push_back({12, 20});          // cruise until t=12
    add_pulse(far, 12, 20, 4.0, 2.0); // braking 12..14; gap 12 - 2 = 10 s
    const auto separate = detect_hbes(trace_from(far), cfg);
    REQUIRE(separate.size() == 2);
    CHECK(separate[0].onset_time_s == 0.0);
    CHECK(separate[1].onset_time_s == 12.0);

    // same pulses separated by 1 s of level speed: merged
    std::vector<std::pair<double, double>> near = {{0, 20}};
    near.push_back({2, 12});  // -4 for 2 s
    near.push_back({3, 12});  // 1 s level, below threshold
    near.push_back({5, 4});   // -4 for 2 s again
    near.push_back({9, 12});  // recovery
    const auto merged = detect_hbes(trace_from(near), cfg);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].onset_time_s == 0.0);
    CHECK(merged[0].peak_decel_mps2 == doctest::Approx(4.0));
}

TEST_CASE("monitored distance integrates speed over runs") {
    // 10 m/s held for 160.9344 s = exactly one mile
    const auto mile = trace_from({{0, 10}, {80, 10}, {160.9344, 10}});
    CHECK(monitored_distance_miles(mile, 200.0) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(monitored_distance_miles(trace_from({{0, 10}}), 5.0) == 0.0);

    // ramp 0 -> 10 m/s over 100 s: 500 m
    std::vector<std::pair<double, double>> ramp;
    for (int t = 0; t <= 100; t += 4) ramp.push_back({static_cast<double>(t), 0.1 * t});
    CHECK(monitored_distance_miles(trace_from(ramp), 5.0) ==
          doctest::Approx(500.0 / kMetersPerMile).epsilon(1e-12));
}

TEST_CASE("aggregate_hbes keys events and distance by segment") {
    DetectorConfig cfg;
    std::vector<TripTrace> traces;

    SUBCASE("single segment bucket") {
        std::vector<std::pair<double, double>> tv = {{0, 20}};
        add_pulse(tv, 0, 20, 4.0, 2.0);  // recovered at t=6
        for (double t = 10; t <= 98; t += 4) tv.push_back({t, 20});
        tv.push_back({100, 20});
        add_pulse(tv, 100, 20, 4.5, 2.0);  // recovered at t=106.5
        for (double t = 110; t <= 200; t += 4) tv.push_back({t, 20});
        traces.push_back(trace_from(tv));
        const auto summary = aggregate_hbes(traces, cfg);
        REQUIRE(summary.size() == 1);
        CHECK(summary.at("s1").count == 2);
        CHECK(summary.at("s1").distance_mi ==
              doctest::Approx(monitored_distance_miles(traces[0], cfg.max_sample_gap_s)));
    }

    SUBCASE("no trips") {
        CHECK(aggregate_hbes({}, cfg).empty());
    }

    SUBCASE("event crossing segments counts once, on the onset segment") {
        TripTrace trace;
        trace.trip_id = "t";
        trace.samples = {
            {0, 20, "s1"}, {1, 20, "s1"}, {2, 16, "s1"},  // braking starts on s1
            {3, 12, "s2"}, {4, 8, "s2"},  {5, 8, "s2"},   // continues onto s2
            {6, 8, "s2"},
        };
        const auto events = detect_hbes(trace, cfg);
        REQUIRE(events.size() == 1);
        CHECK(events[0].segment_id == "s1");
        const auto summary = aggregate_hbes({trace}, cfg);
        CHECK(summary.at("s1").count == 1);
        CHECK(summary.at("s2").count == 0);
        // distance: intervals attributed to their first sample's segment
        CHECK(summary.at("s1").distance_mi ==
              doctest::Approx((20 + 18 + 14) / kMetersPerMile));
        CHECK(summary.at("s2").distance_mi ==
              doctest::Approx((10 + 8 + 8) / kMetersPerMile));
    }
}

TEST_CASE("detector matches the naive reference on pulse traces") {
    const std::vector<double> thresholds = {2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0};
    for (std::uint64_t s = 0; s < 120; ++s) {
        const auto trace = testsupport::make_pulse_trace(42, s, thresholds);
        for (double th : thresholds) {
            DetectorConfig cfg;
            cfg.decel_threshold_mps2 = th;
            const auto got = detect_hbes(trace, cfg);
            const auto want = testsupport::naive_detect(trace, th, cfg.min_event_gap_s,
                                                        cfg.max_sample_gap_s);
            REQUIRE(got.size() == want.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].onset_time_s == want[i].onset_time);
                CHECK(got[i].peak_decel_mps2 == doctest::Approx(want[i].peak_decel));
                CHECK(got[i].segment_id == want[i].segment_id);
            }
        }
    }
}

TEST_CASE("detector matches the naive reference on adversarial traces") {
    for (std::uint64_t s = 0; s < 300; ++s) {
        const auto trace = testsupport::make_rough_trace(7, s);
        for (double th : {1.0, 2.0, 3.0, 4.5}) {
            for (double gap : {0.0, 0.5, 2.0, 6.0}) {
                DetectorConfig cfg;
                cfg.decel_threshold_mps2 = th;
                cfg.min_event_gap_s = gap;
                const auto got = detect_hbes(trace, cfg);
                const auto want =
                    testsupport::naive_detect(trace, th, gap, cfg.max_sample_gap_s);
                REQUIRE(got.size() == want.size());
                for (std::size_t i = 0; i < got.size(); ++i) {
                    CHECK(got[i].onset_time_s == want[i].onset_time);
                    CHECK(got[i].peak_decel_mps2 == doctest::Approx(want[i].peak_decel));
                }
            }
        }
        CHECK(monitored_distance_miles(trace, 5.0) ==
              doctest::Approx(testsupport::naive_distance_miles(trace, 5.0)).epsilon(1e-12));
    }
}

TEST_CASE("raising the threshold never increases the event count on pulse traces") {
    const std::vector<double> thresholds = {2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0};
    for (std::uint64_t s = 0; s < 150; ++s) {
        const auto trace = testsupport::make_pulse_trace(11, s, thresholds);
        std::size_t prev = SIZE_MAX;
        for (double th : thresholds) {
            DetectorConfig cfg;
            cfg.decel_threshold_mps2 = th;
            const std::size_t count = detect_hbes(trace, cfg).size();
            CHECK(count <= prev);
            prev = count;
        }
    }
}

TEST_CASE("time-shifting a trace changes nothing but the clock") {
    for (std::uint64_t s = 0; s < 40; ++s) {
        const auto trace = testsupport::make_rough_trace(21, s);
        TripTrace shifted = trace;
        const double delta = 12345.0;
        for (auto& sample : shifted.samples) sample.timestamp_s += delta;

        DetectorConfig cfg;
        const auto base = detect_hbes(trace, cfg);
        const auto moved = detect_hbes(shifted, cfg);
        REQUIRE(base.size() == moved.size());
        for (std::size_t i = 0; i < base.size(); ++i) {
            CHECK(moved[i].onset_time_s == doctest::Approx(base[i].onset_time_s + delta));
            CHECK(moved[i].peak_decel_mps2 == doctest::Approx(base[i].peak_decel_mps2));
        }
        CHECK(monitored_distance_miles(shifted, cfg.max_sample_gap_s) ==
              doctest::Approx(monitored_distance_miles(trace, cfg.max_sample_gap_s)));
    }
}

TEST_CASE("splitting a trace at a sample keeps total distance") {
    for (std::uint64_t s = 0; s < 40; ++s) {
        const auto trace = testsupport::make_pulse_trace(31, s, {3.0});
        if (trace.samples.size() < 4) continue;
        const std::size_t cut = trace.samples.size() / 2;
        TripTrace left, right;
        left.samples.assign(trace.samples.begin(), trace.samples.begin() + cut + 1);
        right.samples.assign(trace.samples.begin() + cut, trace.samples.end());
        const double whole = monitored_distance_miles(trace, 5.0);
        const double parts = monitored_distance_miles(left, 5.0) +
                             monitored_distance_miles(right, 5.0);
        CHECK(parts == doctest::Approx(whole).epsilon(1e-9));
    }
}

TEST_CASE("detector config validation") {
    DetectorConfig cfg;
    CHECK(cfg.validate().empty());
    cfg.decel_threshold_mps2 = 0;
    CHECK_FALSE(cfg.validate().empty());
    cfg = DetectorConfig{};
    cfg.max_sample_gap_s = 0;
    CHECK_FALSE(cfg.validate().empty());
    cfg = DetectorConfig{};
    cfg.min_event_gap_s = -1;
    CHECK_FALSE(cfg.validate().empty());
}
