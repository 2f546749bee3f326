#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "segsafe/csvio.hpp"
#include "segsafe/dates.hpp"
#include "segsafe/types.hpp"

namespace segsafe {

// Per-file ingest accounting: rows_read == rows_accepted + rejections.size().
struct IngestReport {
    std::int64_t rows_read = 0;
    std::int64_t rows_accepted = 0;
    std::vector<std::pair<std::int64_t, std::string>> rejections;  // (line, reason)

    void reject(std::int64_t line, std::string reason) {
        rejections.emplace_back(line, std::move(reason));
    }
};

struct SegmentsResult {
    std::vector<RoadSegment> segments;
    IngestReport report;
};

struct CrashCountsResult {
    std::map<std::string, long long> counts;
    IngestReport report;
};

struct TelemetryResult {
    std::vector<TripTrace> traces;  // in order of first appearance
    IngestReport report;
};

struct HbeSummaryResult {
    std::map<std::string, SegmentHbe> by_segment;
    IngestReport report;
};

struct AnalysisTableResult {
    std::vector<AnalysisRow> rows;
    IngestReport report;
};

// Header: segment_id,length_miles,aadt,road_type,num_lanes,has_ramp,
//         lane_changes,cum_turn_angle_deg,observed_years
// Row-level constraint violations and duplicate ids become rejections;
// structural problems throw IngestError.
SegmentsResult parse_segments(const std::string& path);

// Header: segment_id,date. Counts rows with date inside [start, end];
// out-of-window and unparseable dates become rejections.
CrashCountsResult parse_crashes(const std::string& path, const Date& window_start,
                                const Date& window_end);

// Header: trip_id,timestamp_s,speed_mps,segment_id. Samples are grouped by
// trip_id in file order; a timestamp regression rejects the whole trip.
TelemetryResult parse_telemetry(const std::string& path);

// Header: segment_id,hbe_count,hbe_distance_mi (the detect command's output).
HbeSummaryResult parse_hbe_summary(const std::string& path);

// Reads back an analysis-table dump (the aggregate command's output).
AnalysisTableResult read_analysis_table(const std::string& path);

}  // namespace segsafe
