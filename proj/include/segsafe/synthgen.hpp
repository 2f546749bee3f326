#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "segsafe/dates.hpp"
#include "segsafe/glm.hpp"
#include "segsafe/types.hpp"

namespace segsafe {

class Manifest;

struct LogNormalSpec {
    double log_mu = 0.0;
    double log_sigma = 1.0;  // >= 0
};

// Covariate mix for one road type.
struct TypeMix {
    double proportion = 0.25;
    int lanes_min = 1;
    int lanes_max = 2;
    double ramp_prob = 0.1;
    double hbe_zero_prob = 0.15;   // zero-inflation of the hbe rate
    LogNormalSpec hbe_rate;        // positive part, events per mile
};

// Deterministic network generator configuration. beta acts on the crash rate
// per million vehicle-miles: crash counts are drawn with mean
// exposure_mvmt * exp(x . beta), overdispersed through a Gamma-Poisson
// mixture with Var = mu + kappa mu^2.
struct GenConfig {
    long long n_segments = 50000;
    std::uint64_t seed = 1;
    ModelSpec model = ModelSpec::all_predictors();
    std::vector<double> beta;  // matches design_column_names(model)
    double kappa = 0.5;
    std::array<TypeMix, 4> mix{};
    LogNormalSpec length_mi;
    LogNormalSpec aadt;
    LogNormalSpec hbe_distance_mi;
    double lane_change_mean = 0.6;     // Poisson
    double turn_angle_mean_deg = 18.0;  // exponential
    double observed_years = 10.0;
    Date window_start{2015, 1, 1};

    // Empty when valid, otherwise names the offending field.
    std::string validate() const;

    long long window_days() const;
    Date window_end() const;

    // Default preset: covariate mix loosely shaped like a mid-Atlantic state
    // network, kappa 0.5.
    static GenConfig va_like();
};

// Reads key=value lines (see README for the key list); "preset=" applies
// first. Throws std::invalid_argument naming the offending field.
GenConfig parse_gen_config(const std::string& path);

struct GeneratedSegment {
    RoadSegment seg;
    SegmentHbe hbe;  // realized monitored distance and event count
};

// Per-index substreams (stream 4i for covariates) make generation
// embarrassingly parallel with bitwise-identical output for any thread count.
// The hbe rate covariate is the realized count/distance ratio, so downstream
// fits see exactly the rates the crash sampler used.
std::vector<GeneratedSegment> generate_segments(const GenConfig& cfg, int threads = 1);

AnalysisRow row_from_generated(const GeneratedSegment& gen);

// Gamma-Poisson crash counts (stream 4i+1): rate ~ Gamma(1/kappa, kappa mu),
// count ~ Poisson(rate); kappa = 0 degenerates to pure Poisson.
std::vector<long long> sample_crashes(const std::vector<GeneratedSegment>& segments,
                                      const ModelSpec& model, const std::vector<double>& beta,
                                      double kappa, std::uint64_t seed, int threads = 1);

// File emitters, formats identical to what the ingest parsers consume.
void write_segments_csv(const std::string& path, const std::vector<GeneratedSegment>& segments,
                        const Manifest* manifest, int threads = 1);
void write_hbe_summary_csv(const std::string& path, const std::vector<GeneratedSegment>& segments,
                           const Manifest* manifest, int threads = 1);
// Expands counts to dated rows uniform over the window (stream 4i+2).
void write_crashes_csv(const std::string& path, const std::vector<GeneratedSegment>& segments,
                       const std::vector<long long>& counts, const GenConfig& cfg,
                       const Manifest* manifest, int threads = 1);
// Speed traces that realize each segment's summary: the default detector
// finds exactly hbe.count events and integrates to hbe.distance_mi.
void write_telemetry_csv(const std::string& path, const std::vector<GeneratedSegment>& segments,
                         const Manifest* manifest, int threads = 1);

// Floor on the monitored distance needed to lay out k braking pulses.
double min_telemetry_distance_m(long long hbe_count);

}  // namespace segsafe
