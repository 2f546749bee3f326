#include "segsafe/ingest.hpp"

#include <set>
#include <unordered_map>

namespace segsafe {

namespace {

// Reads and maps the header line; throws IngestError when absent or malformed.
std::map<std::string, std::size_t> read_header(CsvReader& reader,
                                               const std::vector<std::string>& required) {
    std::string line;
    std::int64_t line_no = 0;
    if (!reader.next(line, line_no)) throw IngestError(reader.path() + ": missing header row");
    return map_header(split_csv_line(line), required, reader.path());
}

}  // namespace

SegmentsResult parse_segments(const std::string& path) {
    CsvReader reader(path);
    const auto& fields = segment_field_names();
    const auto header = read_header(reader, fields);

    SegmentsResult result;
    std::set<std::string> seen_ids;
    std::string line;
    std::int64_t line_no = 0;
    while (reader.next(line, line_no)) {
        ++result.report.rows_read;
        const auto tokens = split_csv_line(line);
        if (tokens.size() != header.size()) {
            result.report.reject(line_no, "wrong number of fields");
            continue;
        }
        RawRecord raw;
        for (const auto& name : fields) raw[name] = tokens[header.at(name)];
        auto validated = validate_segment(raw);
        if (!validated.ok()) {
            result.report.reject(line_no, validated.error);
            continue;
        }
        if (!seen_ids.insert(validated.value->segment_id).second) {
            result.report.reject(line_no, "duplicate segment_id: " + validated.value->segment_id);
            continue;
        }
        result.segments.push_back(std::move(*validated.value));
        ++result.report.rows_accepted;
    }
    return result;
}

CrashCountsResult parse_crashes(const std::string& path, const Date& window_start,
                                const Date& window_end) {
    if (window_end < window_start) throw IngestError("crash window start is after end");
    CsvReader reader(path);
    const auto header = read_header(reader, {"segment_id", "date"});

    CrashCountsResult result;
    std::string line;
    std::int64_t line_no = 0;
    while (reader.next(line, line_no)) {
        ++result.report.rows_read;
        const auto tokens = split_csv_line(line);
        if (tokens.size() != header.size()) {
            result.report.reject(line_no, "wrong number of fields");
            continue;
        }
        const std::string id = trim(tokens[header.at("segment_id")]);
        if (id.empty()) {
            result.report.reject(line_no, "segment_id must be non-empty");
            continue;
        }
        const auto date = parse_date(trim(tokens[header.at("date")]));
        if (!date) {
            result.report.reject(line_no, "unparseable date: '" + trim(tokens[header.at("date")]) + "'");
            continue;
        }
        if (*date < window_start || window_end < *date) {
            result.report.reject(line_no, "outside window");
            continue;
        }
        ++result.counts[id];
        ++result.report.rows_accepted;
    }
    return result;
}

TelemetryResult parse_telemetry(const std::string& path) {
    CsvReader reader(path);
    const auto header = read_header(reader, {"trip_id", "timestamp_s", "speed_mps", "segment_id"});

    struct PendingTrip {
        TripTrace trace;
        std::vector<std::int64_t> lines;
        bool bad = false;
        std::int64_t bad_line = 0;
    };
    std::vector<PendingTrip> trips;
    std::unordered_map<std::string, std::size_t> trip_index;

    TelemetryResult result;
    std::string line;
    std::int64_t line_no = 0;
    while (reader.next(line, line_no)) {
        ++result.report.rows_read;
        const auto tokens = split_csv_line(line);
        if (tokens.size() != header.size()) {
            result.report.reject(line_no, "wrong number of fields");
            continue;
        }
        const std::string trip_id = trim(tokens[header.at("trip_id")]);
        const std::string segment_id = trim(tokens[header.at("segment_id")]);
        const auto ts = parse_double_strict(tokens[header.at("timestamp_s")]);
        const auto speed = parse_double_strict(tokens[header.at("speed_mps")]);
        if (trip_id.empty() || segment_id.empty()) {
            result.report.reject(line_no, "trip_id and segment_id must be non-empty");
            continue;
        }
        if (!ts) {
            result.report.reject(line_no, "non-numeric timestamp_s");
            continue;
        }
        if (!speed) {
            result.report.reject(line_no, "non-numeric speed_mps");
            continue;
        }
        if (*speed < 0) {
            result.report.reject(line_no, "negative speed");
            continue;
        }

        auto [it, inserted] = trip_index.try_emplace(trip_id, trips.size());
        if (inserted) {
            trips.emplace_back();
            trips.back().trace.trip_id = trip_id;
        }
        PendingTrip& trip = trips[it->second];
        if (trip.bad) {
            result.report.reject(line_no, "trip rejected: non-increasing timestamp");
            continue;
        }
        if (!trip.trace.samples.empty() && *ts <= trip.trace.samples.back().timestamp_s) {
            // The whole trip is invalid; its earlier rows are re-marked below.
            trip.bad = true;
            trip.bad_line = line_no;
            result.report.reject(line_no, "non-increasing timestamp");
            continue;
        }
        trip.trace.samples.push_back(TripSample{*ts, *speed, segment_id});
        trip.lines.push_back(line_no);
    }

    for (auto& trip : trips) {
        if (trip.bad) {
            for (std::int64_t row_line : trip.lines) {
                result.report.reject(row_line, "trip rejected: non-increasing timestamp");
            }
            continue;
        }
        result.report.rows_accepted += static_cast<std::int64_t>(trip.trace.samples.size());
        result.traces.push_back(std::move(trip.trace));
    }
    return result;
}

HbeSummaryResult parse_hbe_summary(const std::string& path) {
    CsvReader reader(path);
    const auto header = read_header(reader, {"segment_id", "hbe_count", "hbe_distance_mi"});

    HbeSummaryResult result;
    std::string line;
    std::int64_t line_no = 0;
    while (reader.next(line, line_no)) {
        ++result.report.rows_read;
        const auto tokens = split_csv_line(line);
        if (tokens.size() != header.size()) {
            result.report.reject(line_no, "wrong number of fields");
            continue;
        }
        const std::string id = trim(tokens[header.at("segment_id")]);
        const auto count = parse_int_strict(tokens[header.at("hbe_count")]);
        const auto dist = parse_double_strict(tokens[header.at("hbe_distance_mi")]);
        if (id.empty()) {
            result.report.reject(line_no, "segment_id must be non-empty");
            continue;
        }
        if (!count || *count < 0) {
            result.report.reject(line_no, "hbe_count must be a non-negative integer");
            continue;
        }
        if (!dist || *dist < 0) {
            result.report.reject(line_no, "hbe_distance_mi must be a non-negative number");
            continue;
        }
        if (result.by_segment.count(id)) {
            result.report.reject(line_no, "duplicate segment_id: " + id);
            continue;
        }
        result.by_segment[id] = SegmentHbe{*count, *dist};
        ++result.report.rows_accepted;
    }
    return result;
}

AnalysisTableResult read_analysis_table(const std::string& path) {
    static const std::vector<std::string> columns = {
        "segment_id", "exposure_mvmt", "crash_count",     "crash_rate",
        "hbe_count",  "hbe_distance_mi", "hbe_rate",      "road_type",
        "num_lanes",  "has_ramp",      "lane_changes",    "cum_turn_angle_deg",
    };
    CsvReader reader(path);
    const auto header = read_header(reader, columns);

    AnalysisTableResult result;
    std::string line;
    std::int64_t line_no = 0;
    while (reader.next(line, line_no)) {
        ++result.report.rows_read;
        const auto tokens = split_csv_line(line);
        if (tokens.size() != header.size()) {
            result.report.reject(line_no, "wrong number of fields");
            continue;
        }
        auto tok = [&](const char* name) { return tokens[header.at(name)]; };
        AnalysisRow row;
        row.segment_id = trim(tok("segment_id"));
        const auto exposure = parse_double_strict(tok("exposure_mvmt"));
        const auto crash_count = parse_int_strict(tok("crash_count"));
        const auto crash_rate = parse_double_strict(tok("crash_rate"));
        const auto hbe_count = parse_int_strict(tok("hbe_count"));
        const auto hbe_distance = parse_double_strict(tok("hbe_distance_mi"));
        const auto hbe_rate = parse_double_strict(tok("hbe_rate"));
        const auto type_code = parse_int_strict(tok("road_type"));
        const auto lanes = parse_int_strict(tok("num_lanes"));
        const auto ramp = parse_int_strict(tok("has_ramp"));
        const auto changes = parse_int_strict(tok("lane_changes"));
        const auto turn = parse_double_strict(tok("cum_turn_angle_deg"));
        if (row.segment_id.empty() || !exposure || !crash_count || !crash_rate || !hbe_count ||
            !hbe_distance || !hbe_rate || !type_code || !lanes || !ramp || !changes || !turn) {
            result.report.reject(line_no, "malformed analysis row");
            continue;
        }
        const auto type = road_type_from_int(static_cast<int>(*type_code));
        if (!type || *exposure <= 0 || *crash_count < 0 || *hbe_count < 0 || *hbe_distance < 0 ||
            (*ramp != 0 && *ramp != 1)) {
            result.report.reject(line_no, "analysis row violates range constraints");
            continue;
        }
        row.exposure_mvmt = *exposure;
        row.crash_count = *crash_count;
        row.crash_rate = *crash_rate;
        row.hbe_count = *hbe_count;
        row.hbe_distance_mi = *hbe_distance;
        row.hbe_rate = *hbe_rate;
        row.road_type = *type;
        row.num_lanes = static_cast<int>(*lanes);
        row.has_ramp = *ramp == 1;
        row.lane_changes = static_cast<int>(*changes);
        row.cum_turn_angle_deg = *turn;
        result.rows.push_back(std::move(row));
        ++result.report.rows_accepted;
    }
    return result;
}

}  // namespace segsafe
