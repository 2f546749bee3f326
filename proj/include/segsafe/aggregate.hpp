#pragma once

#include <map>
#include <string>
#include <vector>

#include "segsafe/types.hpp"

namespace segsafe {

// length_miles * aadt * 365 * observed_years / 1e6.
double compute_exposure_mvmt(const RoadSegment& seg);

// Crashes per million vehicle-miles; requires exposure_mvmt > 0.
double crash_rate_per_mvmt(long long crash_count, double exposure_mvmt);

struct AnalysisTable {
    std::vector<AnalysisRow> rows;  // sorted by segment_id
    long long excluded = 0;         // rows dropped for exposure <= 0 or no monitored distance
    long long excluded_zero_exposure = 0;
    long long excluded_no_hbe_distance = 0;
};

// Joins segments with crash counts (inner join unless zero_fill_crashes, which
// treats segments absent from the crash data as zero-crash) and attaches HBE
// summaries, defaulting to zero events and zero distance. Rows without
// positive exposure or positive monitored distance are excluded and counted.
AnalysisTable build_analysis_table(const std::vector<RoadSegment>& segments,
                                   const std::map<std::string, long long>& crash_counts,
                                   const std::map<std::string, SegmentHbe>& hbe_summaries,
                                   bool zero_fill_crashes = false);

}  // namespace segsafe
