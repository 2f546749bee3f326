#include "segsafe/aggregate.hpp"

#include <algorithm>
#include <stdexcept>

namespace segsafe {

double compute_exposure_mvmt(const RoadSegment& seg) {
    return seg.length_miles * seg.aadt * 365.0 * seg.observed_years / 1e6;
}

double crash_rate_per_mvmt(long long crash_count, double exposure_mvmt) {
    if (!(exposure_mvmt > 0)) throw std::invalid_argument("crash_rate requires exposure > 0");
    return static_cast<double>(crash_count) / exposure_mvmt;
}

AnalysisTable build_analysis_table(const std::vector<RoadSegment>& segments,
                                   const std::map<std::string, long long>& crash_counts,
                                   const std::map<std::string, SegmentHbe>& hbe_summaries,
                                   bool zero_fill_crashes) {
    AnalysisTable table;
    for (const RoadSegment& seg : segments) {
        long long crashes = 0;
        auto crash_it = crash_counts.find(seg.segment_id);
        if (crash_it != crash_counts.end()) {
            crashes = crash_it->second;
        } else if (!zero_fill_crashes) {
            continue;  // no crash coverage for this segment
        }

        SegmentHbe hbe;
        auto hbe_it = hbe_summaries.find(seg.segment_id);
        if (hbe_it != hbe_summaries.end()) hbe = hbe_it->second;

        const double exposure = compute_exposure_mvmt(seg);
        if (!(exposure > 0)) {
            ++table.excluded;
            ++table.excluded_zero_exposure;
            continue;
        }
        if (!(hbe.distance_mi > 0)) {
            ++table.excluded;
            ++table.excluded_no_hbe_distance;
            continue;
        }

        AnalysisRow row;
        row.segment_id = seg.segment_id;
        row.exposure_mvmt = exposure;
        row.crash_count = crashes;
        row.crash_rate = crash_rate_per_mvmt(crashes, exposure);
        row.hbe_count = hbe.count;
        row.hbe_distance_mi = hbe.distance_mi;
        row.hbe_rate = static_cast<double>(hbe.count) / hbe.distance_mi;
        row.road_type = seg.road_type;
        row.num_lanes = seg.num_lanes;
        row.has_ramp = seg.has_ramp;
        row.lane_changes = seg.lane_changes;
        row.cum_turn_angle_deg = seg.cum_turn_angle_deg;
        row.length_miles = seg.length_miles;
        table.rows.push_back(std::move(row));
    }
    std::sort(table.rows.begin(), table.rows.end(),
              [](const AnalysisRow& a, const AnalysisRow& b) { return a.segment_id < b.segment_id; });
    return table;
}

}  // namespace segsafe
