#pragma once

#include <map>
#include <string>
#include <vector>

#include "segsafe/types.hpp"

namespace segsafe {

struct DetectorConfig {
    double decel_threshold_mps2 = 3.0;  // > 0
    double min_event_gap_s = 2.0;       // >= 0; closer events merge
    double max_sample_gap_s = 5.0;      // > 0; larger gaps split the trip into runs

    // Empty when valid, otherwise names the offending field.
    std::string validate() const;
};

// One finite-difference acceleration estimate between consecutive samples.
struct AccelPoint {
    double time_s = 0.0;        // midpoint of the sample pair
    double accel_mps2 = 0.0;    // (v1 - v0) / dt
    std::size_t left_index = 0; // index of the pair's first sample in the trace
};

// First differences of speed within runs; pairs spanning a gap larger than
// max_sample_gap_s are omitted. Fewer than two samples yields an empty result.
std::vector<AccelPoint> derive_acceleration(const TripTrace& trace, double max_sample_gap_s);

// Extracts hard-braking events: an event opens at the first interval whose
// deceleration reaches the threshold and closes when deceleration drops below
// it; events closer than min_event_gap_s merge. Each event carries the peak
// deceleration and the segment of its onset sample.
std::vector<HbeEvent> detect_hbes(const TripTrace& trace, const DetectorConfig& cfg);

// Trapezoidal integral of speed over time within runs, in miles.
double monitored_distance_miles(const TripTrace& trace, double max_sample_gap_s);

// Per-segment event counts and monitored distance. Events are keyed by their
// onset sample's segment; each inter-sample distance goes to the segment of
// the interval's first sample. Deterministic for any thread count.
std::map<std::string, SegmentHbe> aggregate_hbes(const std::vector<TripTrace>& traces,
                                                 const DetectorConfig& cfg, int threads = 1);

}  // namespace segsafe
