#include "segsafe/types.hpp"

#include "segsafe/csvio.hpp"

namespace segsafe {

std::optional<RoadType> road_type_from_int(int v) {
    if (v < 1 || v > 4) return std::nullopt;
    return static_cast<RoadType>(v);
}

const char* road_type_label(RoadType t) {
    switch (t) {
        case RoadType::local: return "local";
        case RoadType::arterial: return "arterial";
        case RoadType::highway: return "non_controlled_highway";
        case RoadType::controlled: return "controlled_highway";
    }
    return "unknown";
}

const std::vector<std::string>& segment_field_names() {
    static const std::vector<std::string> names = {
        "segment_id",   "length_miles", "aadt",
        "road_type",    "num_lanes",    "has_ramp",
        "lane_changes", "cum_turn_angle_deg", "observed_years",
    };
    return names;
}

namespace {

Validated<RoadSegment> reject(const std::string& reason) {
    return Validated<RoadSegment>{std::nullopt, reason};
}

// Fetches a field and parses it as a double; on failure fills `err`.
std::optional<double> field_double(const RawRecord& raw, const std::string& name, std::string& err) {
    auto it = raw.find(name);
    if (it == raw.end()) {
        err = "missing field: " + name;
        return std::nullopt;
    }
    auto v = parse_double_strict(it->second);
    if (!v) err = "non-numeric value for " + name + ": '" + trim(it->second) + "'";
    return v;
}

std::optional<std::int64_t> field_int(const RawRecord& raw, const std::string& name, std::string& err) {
    auto it = raw.find(name);
    if (it == raw.end()) {
        err = "missing field: " + name;
        return std::nullopt;
    }
    auto v = parse_int_strict(it->second);
    if (!v) err = "non-integer value for " + name + ": '" + trim(it->second) + "'";
    return v;
}

}  // namespace

Validated<RoadSegment> validate_segment(const RawRecord& raw) {
    std::string err;
    RoadSegment seg;

    auto id_it = raw.find("segment_id");
    if (id_it == raw.end()) return reject("missing field: segment_id");
    seg.segment_id = trim(id_it->second);
    if (seg.segment_id.empty()) return reject("segment_id must be non-empty");

    auto length = field_double(raw, "length_miles", err);
    if (!length) return reject(err);
    if (*length <= 0) return reject("length must be > 0");
    seg.length_miles = *length;

    auto aadt = field_double(raw, "aadt", err);
    if (!aadt) return reject(err);
    if (*aadt < 0) return reject("aadt must be >= 0");
    seg.aadt = *aadt;

    auto type_code = field_int(raw, "road_type", err);
    if (!type_code) return reject(err);
    auto type = road_type_from_int(static_cast<int>(*type_code));
    if (!type) return reject("road_type must be 1..4");
    seg.road_type = *type;

    auto lanes = field_int(raw, "num_lanes", err);
    if (!lanes) return reject(err);
    if (*lanes < 1) return reject("num_lanes must be >= 1");
    seg.num_lanes = static_cast<int>(*lanes);

    auto ramp = field_int(raw, "has_ramp", err);
    if (!ramp) return reject(err);
    if (*ramp != 0 && *ramp != 1) return reject("has_ramp must be 0 or 1");
    seg.has_ramp = *ramp == 1;

    auto changes = field_int(raw, "lane_changes", err);
    if (!changes) return reject(err);
    if (*changes < 0) return reject("lane_changes must be >= 0");
    seg.lane_changes = static_cast<int>(*changes);

    auto turn = field_double(raw, "cum_turn_angle_deg", err);
    if (!turn) return reject(err);
    if (*turn < 0) return reject("cum_turn_angle_deg must be >= 0");
    seg.cum_turn_angle_deg = *turn;

    auto years = field_double(raw, "observed_years", err);
    if (!years) return reject(err);
    if (*years <= 0) return reject("observed_years must be > 0");
    seg.observed_years = *years;

    return Validated<RoadSegment>{seg, ""};
}

RawRecord segment_to_record(const RoadSegment& seg) {
    RawRecord raw;
    raw["segment_id"] = seg.segment_id;
    raw["length_miles"] = fmt_double(seg.length_miles);
    raw["aadt"] = fmt_double(seg.aadt);
    raw["road_type"] = std::to_string(road_type_to_int(seg.road_type));
    raw["num_lanes"] = std::to_string(seg.num_lanes);
    raw["has_ramp"] = seg.has_ramp ? "1" : "0";
    raw["lane_changes"] = std::to_string(seg.lane_changes);
    raw["cum_turn_angle_deg"] = fmt_double(seg.cum_turn_angle_deg);
    raw["observed_years"] = fmt_double(seg.observed_years);
    return raw;
}

}  // namespace segsafe
