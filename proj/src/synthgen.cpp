#include "segsafe/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "segsafe/aggregate.hpp"
#include "segsafe/csvio.hpp"
#include "segsafe/manifest.hpp"
#include "segsafe/parallel.hpp"
#include "segsafe/rng.hpp"

namespace segsafe {

namespace {

// Substream roles per segment index.
constexpr std::uint64_t kStreamCovariates = 0;
constexpr std::uint64_t kStreamCrashes = 1;
constexpr std::uint64_t kStreamDates = 2;

std::uint64_t stream_id(long long index, std::uint64_t role) {
    return static_cast<std::uint64_t>(index) * 4 + role;
}

// Braking-pulse geometry for telemetry realization.
constexpr double kCruiseSpeed = 20.0;    // m/s
constexpr double kBrakeSpeed = 8.0;      // m/s at the bottom of a pulse
constexpr double kBrakeDecel = 5.0;      // m/s^2, well above the default threshold
constexpr double kRecoverAccel = 3.0;    // m/s^2; keeps the leg under the run-split gap
constexpr double kMinCruise_m = 240.0;   // keeps pulses far apart in time
constexpr double kMaxSampleSpacing = 4.5;  // below the default run-split gap

double pulse_distance_m() {
    const double brake_t = (kCruiseSpeed - kBrakeSpeed) / kBrakeDecel;
    const double recover_t = (kCruiseSpeed - kBrakeSpeed) / kRecoverAccel;
    return 0.5 * (kCruiseSpeed + kBrakeSpeed) * (brake_t + recover_t);
}

std::string segment_name(long long index) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "s%07lld", index);
    return buf;
}

}  // namespace

double min_telemetry_distance_m(long long hbe_count) {
    return static_cast<double>(hbe_count) * pulse_distance_m() +
           static_cast<double>(hbe_count + 1) * kMinCruise_m;
}

long long GenConfig::window_days() const {
    return std::llround(observed_years * 365.0);
}

Date GenConfig::window_end() const {
    return civil_from_days(days_from_civil(window_start) + window_days() - 1);
}

std::string GenConfig::validate() const {
    if (n_segments <= 0) return "n_segments must be > 0";
    if (!(observed_years > 0)) return "observed_years must be > 0";
    if (!date_valid(window_start)) return "window_start is not a valid date";
    if (!(kappa >= 0) || !std::isfinite(kappa)) return "kappa must be >= 0";
    if (beta.size() != design_column_names(model).size()) {
        return "beta must have " + std::to_string(design_column_names(model).size()) +
               " entries to match the model columns";
    }
    for (double b : beta) {
        if (!std::isfinite(b)) return "beta entries must be finite";
    }
    double prop_sum = 0.0;
    for (std::size_t t = 0; t < mix.size(); ++t) {
        const TypeMix& m = mix[t];
        const std::string prefix = "type" + std::to_string(t + 1) + ".";
        if (!(m.proportion >= 0) || !(m.proportion <= 1)) return prefix + "proportion must be in [0,1]";
        prop_sum += m.proportion;
        if (m.lanes_min < 1) return prefix + "lanes_min must be >= 1";
        if (m.lanes_max < m.lanes_min) return prefix + "lanes_max must be >= lanes_min";
        if (!(m.ramp_prob >= 0) || !(m.ramp_prob <= 1)) return prefix + "ramp_prob must be in [0,1]";
        if (!(m.hbe_zero_prob >= 0) || !(m.hbe_zero_prob <= 1)) {
            return prefix + "hbe_zero_prob must be in [0,1]";
        }
        if (!std::isfinite(m.hbe_rate.log_mu) || !(m.hbe_rate.log_sigma >= 0)) {
            return prefix + "hbe rate log-normal parameters are invalid";
        }
    }
    if (std::abs(prop_sum - 1.0) > 1e-9) return "type proportions must sum to 1";
    for (const auto& [spec, name] :
         {std::pair{&length_mi, "length"}, {&aadt, "aadt"}, {&hbe_distance_mi, "hbe_distance"}}) {
        if (!std::isfinite(spec->log_mu) || !(spec->log_sigma >= 0)) {
            return std::string(name) + " log-normal parameters are invalid";
        }
    }
    if (!(lane_change_mean >= 0)) return "lane_change_mean must be >= 0";
    if (!(turn_angle_mean_deg >= 0)) return "turn_angle_mean_deg must be >= 0";
    if (!(model.hbe_floor > 0)) return "hbe_floor must be > 0";
    return "";
}

GenConfig GenConfig::va_like() {
    GenConfig cfg;
    cfg.n_segments = 50000;
    cfg.seed = 1;
    cfg.kappa = 0.5;
    cfg.beta = {-0.81, 0.23, 1.22, 1.41, 1.08, 0.35, 0.52, 0.07, -0.001};
    cfg.length_mi = {std::log(0.35), 0.7};
    cfg.aadt = {std::log(1500.0), 1.0};
    cfg.hbe_distance_mi = {std::log(150.0), 0.9};
    cfg.mix[0] = TypeMix{0.19, 1, 2, 0.05, 0.15, {std::log(0.02), 0.8}};
    cfg.mix[1] = TypeMix{0.20, 2, 4, 0.10, 0.10, {std::log(0.03), 0.8}};
    cfg.mix[2] = TypeMix{0.38, 2, 3, 0.10, 0.20, {std::log(0.002), 0.8}};
    cfg.mix[3] = TypeMix{0.23, 3, 5, 0.40, 0.25, {std::log(0.003), 0.8}};
    return cfg;
}

namespace {

[[noreturn]] void bad_field(const std::string& key, const std::string& detail) {
    throw std::invalid_argument("config field '" + key + "': " + detail);
}

double want_double(const std::string& key, const std::string& value) {
    const auto v = parse_double_strict(value);
    if (!v) bad_field(key, "expected a number, got '" + value + "'");
    return *v;
}

long long want_int(const std::string& key, const std::string& value) {
    const auto v = parse_int_strict(value);
    if (!v) bad_field(key, "expected an integer, got '" + value + "'");
    return *v;
}

// Coefficient index in design_column_names(all_predictors()) order.
int beta_index_for(const std::string& suffix) {
    static const std::vector<std::string> order = {
        "intercept",          "hbe_rate",  "road_type_local", "road_type_arterial",
        "road_type_highway",  "num_lanes", "has_ramp",        "lane_changes",
        "cum_turn_angle",
    };
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[i] == suffix) return static_cast<int>(i);
    }
    return -1;
}

void assign_field(GenConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "preset") return;  // handled before field assignment
    if (key == "n_segments") {
        cfg.n_segments = want_int(key, value);
    } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(want_int(key, value));
    } else if (key == "kappa") {
        cfg.kappa = want_double(key, value);
    } else if (key == "observed_years") {
        cfg.observed_years = want_double(key, value);
    } else if (key == "window_start") {
        const auto d = parse_date(value);
        if (!d) bad_field(key, "expected YYYY-MM-DD, got '" + value + "'");
        cfg.window_start = *d;
    } else if (key == "hbe_transform") {
        if (value == "log1p_scaled") {
            cfg.model.hbe_transform = HbeTransform::log1p_scaled;
        } else if (value == "identity") {
            cfg.model.hbe_transform = HbeTransform::identity;
        } else {
            bad_field(key, "expected log1p_scaled or identity");
        }
    } else if (key == "hbe_floor") {
        cfg.model.hbe_floor = want_double(key, value);
    } else if (key == "lane_change_mean") {
        cfg.lane_change_mean = want_double(key, value);
    } else if (key == "turn_angle_mean_deg") {
        cfg.turn_angle_mean_deg = want_double(key, value);
    } else if (key.rfind("beta.", 0) == 0) {
        const int idx = beta_index_for(key.substr(5));
        if (idx < 0) bad_field(key, "unknown coefficient name");
        if (cfg.beta.size() != design_column_names(cfg.model).size()) {
            cfg.beta.assign(design_column_names(cfg.model).size(), 0.0);
        }
        cfg.beta[static_cast<std::size_t>(idx)] = want_double(key, value);
    } else if (key.rfind("length.", 0) == 0 || key.rfind("aadt.", 0) == 0 ||
               key.rfind("hbe_distance.", 0) == 0) {
        LogNormalSpec& spec = key.rfind("length.", 0) == 0 ? cfg.length_mi
                              : key.rfind("aadt.", 0) == 0 ? cfg.aadt
                                                           : cfg.hbe_distance_mi;
        const std::string field = key.substr(key.find('.') + 1);
        if (field == "log_mu") {
            spec.log_mu = want_double(key, value);
        } else if (field == "log_sigma") {
            spec.log_sigma = want_double(key, value);
        } else {
            bad_field(key, "unknown log-normal parameter");
        }
    } else if (key.size() > 6 && key.rfind("type", 0) == 0 && key[5] == '.') {
        const int t = key[4] - '1';
        if (t < 0 || t > 3) bad_field(key, "road type must be type1..type4");
        TypeMix& m = cfg.mix[static_cast<std::size_t>(t)];
        const std::string field = key.substr(6);
        if (field == "proportion") {
            m.proportion = want_double(key, value);
        } else if (field == "lanes_min") {
            m.lanes_min = static_cast<int>(want_int(key, value));
        } else if (field == "lanes_max") {
            m.lanes_max = static_cast<int>(want_int(key, value));
        } else if (field == "ramp_prob") {
            m.ramp_prob = want_double(key, value);
        } else if (field == "hbe_zero_prob") {
            m.hbe_zero_prob = want_double(key, value);
        } else if (field == "hbe_log_mu") {
            m.hbe_rate.log_mu = want_double(key, value);
        } else if (field == "hbe_log_sigma") {
            m.hbe_rate.log_sigma = want_double(key, value);
        } else {
            bad_field(key, "unknown road-type parameter");
        }
    } else {
        throw std::invalid_argument("unknown config field '" + key + "'");
    }
}

}  // namespace

GenConfig parse_gen_config(const std::string& path) {
    CsvReader reader(path);
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    std::int64_t line_no = 0;
    while (reader.next(line, line_no)) {
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        " is not key=value: '" + trim(line) + "'");
        }
        pairs.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }

    GenConfig cfg;
    bool preset_applied = false;
    for (const auto& [key, value] : pairs) {
        if (key != "preset") continue;
        if (value == "va_like") {
            cfg = GenConfig::va_like();
        } else if (value == "none") {
            cfg = GenConfig();
        } else {
            bad_field(key, "unknown preset '" + value + "'");
        }
        preset_applied = true;
    }
    if (!preset_applied) cfg = GenConfig::va_like();

    for (const auto& [key, value] : pairs) assign_field(cfg, key, value);

    const std::string problem = cfg.validate();
    if (!problem.empty()) throw std::invalid_argument("invalid config: " + problem);
    return cfg;
}

std::vector<GeneratedSegment> generate_segments(const GenConfig& cfg, int threads) {
    const std::string problem = cfg.validate();
    if (!problem.empty()) throw std::invalid_argument(problem);

    std::vector<GeneratedSegment> out(static_cast<std::size_t>(cfg.n_segments));
    parallel_for_index(out.size(), threads, [&](std::size_t i) {
        CounterRng rng(cfg.seed, stream_id(static_cast<long long>(i), kStreamCovariates));
        GeneratedSegment& gen = out[i];
        RoadSegment& seg = gen.seg;
        seg.segment_id = segment_name(static_cast<long long>(i));
        seg.observed_years = cfg.observed_years;

        const double u_type = rng.next_unit();
        std::size_t type_idx = 0;
        double cum = 0.0;
        for (std::size_t t = 0; t < cfg.mix.size(); ++t) {
            cum += cfg.mix[t].proportion;
            if (u_type < cum) {
                type_idx = t;
                break;
            }
            type_idx = t;  // rounding tail lands in the last type
        }
        const TypeMix& mixspec = cfg.mix[type_idx];
        seg.road_type = *road_type_from_int(static_cast<int>(type_idx) + 1);

        seg.length_miles = std::exp(cfg.length_mi.log_mu + cfg.length_mi.log_sigma * rng.next_normal());
        seg.aadt = std::exp(cfg.aadt.log_mu + cfg.aadt.log_sigma * rng.next_normal());
        const int lane_span = mixspec.lanes_max - mixspec.lanes_min + 1;
        seg.num_lanes = mixspec.lanes_min +
                        std::min<int>(lane_span - 1, static_cast<int>(rng.next_unit() * lane_span));
        seg.has_ramp = rng.next_unit() < mixspec.ramp_prob;
        seg.lane_changes = static_cast<int>(rng.next_poisson(cfg.lane_change_mean));
        seg.cum_turn_angle_deg = -cfg.turn_angle_mean_deg * std::log(1.0 - rng.next_unit());

        double raw_rate = 0.0;
        if (rng.next_unit() >= mixspec.hbe_zero_prob) {
            raw_rate = std::exp(mixspec.hbe_rate.log_mu + mixspec.hbe_rate.log_sigma * rng.next_normal());
        }
        double distance_mi =
            std::exp(cfg.hbe_distance_mi.log_mu + cfg.hbe_distance_mi.log_sigma * rng.next_normal());
        const long long count = raw_rate > 0 ? rng.next_poisson(raw_rate * distance_mi) : 0;
        // Telemetry realization needs room for the pulses; the floor keeps the
        // summary and any emitted trace consistent.
        distance_mi = std::max(distance_mi, min_telemetry_distance_m(count) / kMetersPerMile);
        gen.hbe = SegmentHbe{count, distance_mi};
    });
    return out;
}

AnalysisRow row_from_generated(const GeneratedSegment& gen) {
    AnalysisRow row;
    row.segment_id = gen.seg.segment_id;
    row.exposure_mvmt = compute_exposure_mvmt(gen.seg);
    row.hbe_count = gen.hbe.count;
    row.hbe_distance_mi = gen.hbe.distance_mi;
    row.hbe_rate = gen.hbe.distance_mi > 0
                       ? static_cast<double>(gen.hbe.count) / gen.hbe.distance_mi
                       : 0.0;
    row.road_type = gen.seg.road_type;
    row.num_lanes = gen.seg.num_lanes;
    row.has_ramp = gen.seg.has_ramp;
    row.lane_changes = gen.seg.lane_changes;
    row.cum_turn_angle_deg = gen.seg.cum_turn_angle_deg;
    row.length_miles = gen.seg.length_miles;
    return row;
}

std::vector<long long> sample_crashes(const std::vector<GeneratedSegment>& segments,
                                      const ModelSpec& model, const std::vector<double>& beta,
                                      double kappa, std::uint64_t seed, int threads) {
    if (kappa < 0 || !std::isfinite(kappa)) throw std::invalid_argument("kappa must be >= 0");
    if (beta.size() != design_column_names(model).size()) {
        throw std::invalid_argument("beta length does not match the model columns");
    }
    std::vector<long long> counts(segments.size(), 0);
    parallel_for_index(segments.size(), threads, [&](std::size_t i) {
        const AnalysisRow row = row_from_generated(segments[i]);
        if (!(row.exposure_mvmt > 0)) throw std::invalid_argument("exposure must be > 0");
        const auto x = encode_design_row(row, model);
        double eta = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) eta += x[j] * beta[j];
        const double mu = row.exposure_mvmt * std::exp(std::min(eta, 300.0));

        CounterRng rng(seed, stream_id(static_cast<long long>(i), kStreamCrashes));
        if (kappa == 0.0) {
            counts[i] = rng.next_poisson(mu);
        } else {
            const double rate = rng.next_gamma(1.0 / kappa, kappa * mu);
            counts[i] = rng.next_poisson(rate);
        }
    });
    return counts;
}

namespace {

// Renders per-segment chunks in parallel, then writes them in index order so
// the bytes never depend on the thread count.
template <typename RenderFn>
void write_chunks(const std::string& path, std::size_t n, const std::string& header,
                  const Manifest* manifest, int threads, RenderFn&& render) {
    std::vector<std::string> chunks(n);
    parallel_for_index(n, threads, [&](std::size_t i) { render(i, chunks[i]); });
    AtomicFile file(path);
    if (manifest) file.stream() << manifest->comment_block();
    file.stream() << header;
    for (const std::string& chunk : chunks) file.stream() << chunk;
    file.commit();
}

}  // namespace

void write_segments_csv(const std::string& path, const std::vector<GeneratedSegment>& segments,
                        const Manifest* manifest, int threads) {
    write_chunks(path, segments.size(),
                 "segment_id,length_miles,aadt,road_type,num_lanes,has_ramp,lane_changes,"
                 "cum_turn_angle_deg,observed_years\n",
                 manifest, threads, [&](std::size_t i, std::string& chunk) {
                     const RoadSegment& seg = segments[i].seg;
                     chunk = seg.segment_id + ',' + fmt_double(seg.length_miles) + ',' +
                             fmt_double(seg.aadt) + ',' + std::to_string(road_type_to_int(seg.road_type)) +
                             ',' + std::to_string(seg.num_lanes) + ',' + (seg.has_ramp ? "1" : "0") +
                             ',' + std::to_string(seg.lane_changes) + ',' +
                             fmt_double(seg.cum_turn_angle_deg) + ',' +
                             fmt_double(seg.observed_years) + '\n';
                 });
}

void write_hbe_summary_csv(const std::string& path, const std::vector<GeneratedSegment>& segments,
                           const Manifest* manifest, int threads) {
    write_chunks(path, segments.size(), "segment_id,hbe_count,hbe_distance_mi\n", manifest, threads,
                 [&](std::size_t i, std::string& chunk) {
                     const GeneratedSegment& gen = segments[i];
                     chunk = gen.seg.segment_id + ',' + std::to_string(gen.hbe.count) + ',' +
                             fmt_double(gen.hbe.distance_mi) + '\n';
                 });
}

void write_crashes_csv(const std::string& path, const std::vector<GeneratedSegment>& segments,
                       const std::vector<long long>& counts, const GenConfig& cfg,
                       const Manifest* manifest, int threads) {
    if (counts.size() != segments.size()) throw std::invalid_argument("counts size mismatch");
    const std::int64_t start_day = days_from_civil(cfg.window_start);
    const long long n_days = cfg.window_days();
    write_chunks(path, segments.size(), "segment_id,date\n", manifest, threads,
                 [&](std::size_t i, std::string& chunk) {
                     CounterRng rng(cfg.seed, stream_id(static_cast<long long>(i), kStreamDates));
                     std::vector<std::int64_t> days(static_cast<std::size_t>(counts[i]));
                     for (auto& d : days) {
                         const long long offset =
                             std::min<long long>(n_days - 1,
                                                 static_cast<long long>(rng.next_unit() * n_days));
                         d = start_day + offset;
                     }
                     std::sort(days.begin(), days.end());
                     for (std::int64_t d : days) {
                         chunk += segments[i].seg.segment_id + ',' + format_date(civil_from_days(d)) + '\n';
                     }
                 });
}

namespace {

// Piecewise-linear speed profile realizing (count, distance): cruise sections
// interleaved with braking pulses; the detector's trapezoid integral matches
// the summary distance because every sample sits on a profile knot.
void render_trip(const GeneratedSegment& gen, std::string& chunk) {
    const std::string trip_id = "t" + gen.seg.segment_id;
    const long long k = gen.hbe.count;
    const double total_m = gen.hbe.distance_mi * kMetersPerMile;
    const double cruise_m =
        (total_m - static_cast<double>(k) * pulse_distance_m()) / static_cast<double>(k + 1);

    double t = 0.0;
    double v = kCruiseSpeed;
    auto emit = [&](double time, double speed) {
        chunk += trip_id + ',' + fmt_double(time) + ',' + fmt_double(speed) + ',' +
                 gen.seg.segment_id + '\n';
    };
    auto cruise = [&](double duration) {
        // subdivide so sample spacing stays below the run-split gap
        const int steps = std::max(1, static_cast<int>(std::ceil(duration / kMaxSampleSpacing)));
        double last = t;
        for (int s = 1; s <= steps; ++s) {
            last = t + duration * s / steps;
            emit(last, v);
        }
        t = last;  // exactly the last emitted timestamp
    };

    emit(0.0, v);
    cruise(cruise_m / kCruiseSpeed);
    for (long long pulse = 0; pulse < k; ++pulse) {
        const double brake_t = (kCruiseSpeed - kBrakeSpeed) / kBrakeDecel;
        t += brake_t;
        v = kBrakeSpeed;
        emit(t, v);
        const double recover_t = (kCruiseSpeed - kBrakeSpeed) / kRecoverAccel;
        t += recover_t;
        v = kCruiseSpeed;
        emit(t, v);
        cruise(cruise_m / kCruiseSpeed);
    }
}

}  // namespace

void write_telemetry_csv(const std::string& path, const std::vector<GeneratedSegment>& segments,
                         const Manifest* manifest, int threads) {
    write_chunks(path, segments.size(), "trip_id,timestamp_s,speed_mps,segment_id\n", manifest,
                 threads, [&](std::size_t i, std::string& chunk) {
                     if (segments[i].hbe.distance_mi > 0) render_trip(segments[i], chunk);
                 });
}

}  // namespace segsafe
