#pragma once

// Test-only reference detector: a deliberately naive re-implementation of the
// braking-event semantics (flag arrays, quadratic merge passes) kept
// independent of the production single-pass scan.

#include <algorithm>
#include <string>
#include <vector>

#include "segsafe/types.hpp"

namespace testsupport {

struct NaiveEvent {
    double onset_time = 0.0;
    double end_time = 0.0;
    double peak_decel = 0.0;
    std::string segment_id;
};

inline std::vector<NaiveEvent> naive_detect(const segsafe::TripTrace& trace, double threshold,
                                            double min_gap, double max_gap) {
    const auto& s = trace.samples;
    std::vector<NaiveEvent> events;
    if (s.size() < 2) return events;

    const std::size_t m = s.size() - 1;
    std::vector<double> decel(m, 0.0);
    std::vector<bool> braking(m, false);
    for (std::size_t i = 0; i < m; ++i) {
        const double dt = s[i + 1].timestamp_s - s[i].timestamp_s;
        if (dt > max_gap) continue;
        decel[i] = -(s[i + 1].speed_mps - s[i].speed_mps) / dt;
        braking[i] = decel[i] >= threshold;
    }

    std::size_t i = 0;
    while (i < m) {
        if (!braking[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < m && braking[j + 1]) ++j;
        NaiveEvent ev;
        ev.onset_time = s[i].timestamp_s;
        ev.end_time = s[j + 1].timestamp_s;
        ev.peak_decel = *std::max_element(decel.begin() + i, decel.begin() + j + 1);
        ev.segment_id = s[i].segment_id;
        events.push_back(ev);
        i = j + 1;
    }

    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t k = 0; k + 1 < events.size(); ++k) {
            if (events[k + 1].onset_time - events[k].end_time < min_gap) {
                events[k].end_time = events[k + 1].end_time;
                events[k].peak_decel = std::max(events[k].peak_decel, events[k + 1].peak_decel);
                events.erase(events.begin() + static_cast<std::ptrdiff_t>(k) + 1);
                changed = true;
                break;
            }
        }
    }
    return events;
}

inline double naive_distance_miles(const segsafe::TripTrace& trace, double max_gap) {
    double meters = 0.0;
    const auto& s = trace.samples;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double dt = s[i + 1].timestamp_s - s[i].timestamp_s;
        if (dt > max_gap) continue;
        meters += 0.5 * (s[i].speed_mps + s[i + 1].speed_mps) * dt;
    }
    return meters / segsafe::kMetersPerMile;
}

}  // namespace testsupport
