#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "segsafe/dates.hpp"

namespace segsafe {

inline constexpr const char* kToolName = "segsafe";
inline constexpr const char* kToolVersion = "0.1.0";

inline constexpr double kMetersPerMile = 1609.344;

// Four-tier road classification. Wire value is the tier number 1..4.
enum class RoadType : int {
    local = 1,       // local roads / rural routes
    arterial = 2,    // moderate-to-high capacity arterials
    highway = 3,     // non-controlled access highways
    controlled = 4,  // controlled-access highways (reference level in models)
};

std::optional<RoadType> road_type_from_int(int v);
inline int road_type_to_int(RoadType t) { return static_cast<int>(t); }
const char* road_type_label(RoadType t);

// Static attributes of one road segment.
struct RoadSegment {
    std::string segment_id;
    double length_miles = 0.0;        // > 0
    double aadt = 0.0;                // vehicles/day, >= 0
    RoadType road_type = RoadType::local;
    int num_lanes = 1;                // >= 1
    bool has_ramp = false;
    int lane_changes = 0;             // lane-count changes along the segment, >= 0
    double cum_turn_angle_deg = 0.0;  // >= 0
    double observed_years = 0.0;      // crash observation window, > 0

    bool operator==(const RoadSegment&) const = default;
};

struct CrashRecord {
    std::string segment_id;
    Date date;
};

struct TripSample {
    double timestamp_s = 0.0;
    double speed_mps = 0.0;
    std::string segment_id;
};

// One vehicle trip; samples strictly increasing in time.
struct TripTrace {
    std::string trip_id;
    std::vector<TripSample> samples;
};

// One detected hard-braking event. peak_decel is the deceleration magnitude.
struct HbeEvent {
    std::string trip_id;
    std::string segment_id;
    double onset_time_s = 0.0;
    double peak_decel_mps2 = 0.0;
};

// Per-segment hard-braking summary: event count plus monitored distance.
struct SegmentHbe {
    long long count = 0;
    double distance_mi = 0.0;
};

// Per-segment joined record; the regression's unit of observation.
struct AnalysisRow {
    std::string segment_id;
    double exposure_mvmt = 0.0;  // million vehicle-miles over the window
    long long crash_count = 0;
    double crash_rate = 0.0;  // crashes per MVMT
    long long hbe_count = 0;
    double hbe_distance_mi = 0.0;
    double hbe_rate = 0.0;  // events per vehicle-mile
    RoadType road_type = RoadType::local;
    int num_lanes = 1;
    bool has_ramp = false;
    int lane_changes = 0;
    double cum_turn_angle_deg = 0.0;
    // Carried for summaries; not part of the analysis-table file format.
    double length_miles = 0.0;
};

// Raw record keyed by canonical field name, all values still strings.
using RawRecord = std::map<std::string, std::string>;

// Outcome of validating a raw record: a value or the first violated constraint.
template <typename T>
struct Validated {
    std::optional<T> value;
    std::string error;

    bool ok() const { return value.has_value(); }
};

// Canonical segment field names, in file-header order.
const std::vector<std::string>& segment_field_names();

// Checks presence, numeric form, and range constraints in field order;
// the reported error names the first violation.
Validated<RoadSegment> validate_segment(const RawRecord& raw);

// Inverse of validate_segment for accepted segments (round-trip exact).
RawRecord segment_to_record(const RoadSegment& seg);

}  // namespace segsafe
