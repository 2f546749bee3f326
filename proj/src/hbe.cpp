#include "segsafe/hbe.hpp"

#include <algorithm>

#include "segsafe/parallel.hpp"

namespace segsafe {

std::string DetectorConfig::validate() const {
    if (!(decel_threshold_mps2 > 0)) return "decel_threshold_mps2 must be > 0";
    if (!(min_event_gap_s >= 0)) return "min_event_gap_s must be >= 0";
    if (!(max_sample_gap_s > 0)) return "max_sample_gap_s must be > 0";
    return "";
}

std::vector<AccelPoint> derive_acceleration(const TripTrace& trace, double max_sample_gap_s) {
    std::vector<AccelPoint> out;
    if (trace.samples.size() < 2) return out;
    out.reserve(trace.samples.size() - 1);
    for (std::size_t i = 0; i + 1 < trace.samples.size(); ++i) {
        const TripSample& a = trace.samples[i];
        const TripSample& b = trace.samples[i + 1];
        const double dt = b.timestamp_s - a.timestamp_s;
        if (dt > max_sample_gap_s) continue;  // run boundary
        out.push_back(AccelPoint{a.timestamp_s + dt / 2.0, (b.speed_mps - a.speed_mps) / dt, i});
    }
    return out;
}

namespace {

struct RawEvent {
    std::size_t onset_index;  // first sample of the first braking interval
    double onset_time;
    double end_time;  // second sample of the last braking interval
    double peak_decel;
};

std::vector<RawEvent> raw_events(const TripTrace& trace, const DetectorConfig& cfg) {
    const auto accels = derive_acceleration(trace, cfg.max_sample_gap_s);
    std::vector<RawEvent> events;
    for (const AccelPoint& pt : accels) {
        if (-pt.accel_mps2 < cfg.decel_threshold_mps2) continue;
        const double left_t = trace.samples[pt.left_index].timestamp_s;
        const double right_t = trace.samples[pt.left_index + 1].timestamp_s;
        // A braking interval extends the previous event only when it shares a
        // sample with it; a calm interval, or an interval omitted at a run
        // boundary, breaks the chain.
        if (!events.empty() && events.back().end_time == left_t) {
            events.back().end_time = right_t;
            events.back().peak_decel = std::max(events.back().peak_decel, -pt.accel_mps2);
        } else {
            events.push_back(RawEvent{pt.left_index, left_t, right_t, -pt.accel_mps2});
        }
    }
    return events;
}

}  // namespace

std::vector<HbeEvent> detect_hbes(const TripTrace& trace, const DetectorConfig& cfg) {
    auto events = raw_events(trace, cfg);

    // Merge events separated by less than min_event_gap_s of quiet time.
    std::vector<RawEvent> merged;
    for (const RawEvent& ev : events) {
        if (!merged.empty() && ev.onset_time - merged.back().end_time < cfg.min_event_gap_s) {
            merged.back().end_time = ev.end_time;
            merged.back().peak_decel = std::max(merged.back().peak_decel, ev.peak_decel);
        } else {
            merged.push_back(ev);
        }
    }

    std::vector<HbeEvent> out;
    out.reserve(merged.size());
    for (const RawEvent& ev : merged) {
        out.push_back(HbeEvent{trace.trip_id, trace.samples[ev.onset_index].segment_id,
                               ev.onset_time, ev.peak_decel});
    }
    return out;
}

double monitored_distance_miles(const TripTrace& trace, double max_sample_gap_s) {
    double sum_m = 0.0, comp = 0.0;  // Kahan
    for (std::size_t i = 0; i + 1 < trace.samples.size(); ++i) {
        const TripSample& a = trace.samples[i];
        const TripSample& b = trace.samples[i + 1];
        const double dt = b.timestamp_s - a.timestamp_s;
        if (dt > max_sample_gap_s) continue;
        const double term = 0.5 * (a.speed_mps + b.speed_mps) * dt - comp;
        const double next = sum_m + term;
        comp = (next - sum_m) - term;
        sum_m = next;
    }
    return sum_m / kMetersPerMile;
}

std::map<std::string, SegmentHbe> aggregate_hbes(const std::vector<TripTrace>& traces,
                                                 const DetectorConfig& cfg, int threads) {
    struct TraceResult {
        std::vector<std::pair<std::string, long long>> counts;
        std::vector<std::pair<std::string, double>> distances_m;
    };
    std::vector<TraceResult> per_trace(traces.size());

    parallel_for_index(traces.size(), threads, [&](std::size_t t) {
        const TripTrace& trace = traces[t];
        TraceResult& res = per_trace[t];
        for (const HbeEvent& ev : detect_hbes(trace, cfg)) {
            res.counts.emplace_back(ev.segment_id, 1);
        }
        for (std::size_t i = 0; i + 1 < trace.samples.size(); ++i) {
            const TripSample& a = trace.samples[i];
            const TripSample& b = trace.samples[i + 1];
            const double dt = b.timestamp_s - a.timestamp_s;
            if (dt > cfg.max_sample_gap_s) continue;
            res.distances_m.emplace_back(a.segment_id, 0.5 * (a.speed_mps + b.speed_mps) * dt);
        }
    });

    // Reduce in trace order so output is independent of the thread count.
    std::map<std::string, SegmentHbe> out;
    std::map<std::string, double> meters;
    for (const TraceResult& res : per_trace) {
        for (const auto& [seg, n] : res.counts) out[seg].count += n;
        for (const auto& [seg, d] : res.distances_m) {
            meters[seg] += d;
            out[seg];  // ensure segments with distance but no events appear
        }
    }
    for (auto& [seg, summary] : out) summary.distance_mi = meters[seg] / kMetersPerMile;
    return out;
}

}  // namespace segsafe
