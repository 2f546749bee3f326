#pragma once

#include <string>
#include <vector>

#include "segsafe/types.hpp"

namespace segsafe {

class Manifest;

struct TypeSummary {
    RoadType road_type = RoadType::local;
    long long n_segments = 0;
    double total_length_mi = 0.0;
    long long total_crashes = 0;
    double mean_crash_rate = 0.0;  // unweighted over segments
    double mean_hbe_rate = 0.0;
};

// Per-road-type totals and unweighted means, ordered by type.
std::vector<TypeSummary> summarize_by_road_type(const std::vector<AnalysisRow>& rows);

// One decile-bin statistic for one road class. bin_index 0 collects zero-rate
// segments; bins 1..10 are rank deciles of positive rates.
struct BinRow {
    RoadType road_type = RoadType::local;
    int bin_index = 0;
    double hbe_rate_mean = 0.0;
    double crash_rate_mean = 0.0;
    long long n_segments = 0;
};

struct BinResult {
    std::vector<BinRow> bins;
    std::vector<std::string> warnings;  // classes skipped for too few positive rates
};

// Rank-decile binning per road class, ties broken by segment_id. Classes with
// fewer than min_positive positive-rate segments are skipped with a warning.
BinResult decile_bins(const std::vector<AnalysisRow>& rows, int min_positive = 10);

// Writes an SVG log-log plot (one polyline per road class over bins 1..10,
// the zero-HBE bin as a reference marker at x = -10) plus the numeric bin
// table beside it. Bins whose mean crash rate is zero are left out of the
// plot but stay in the table. Throws std::invalid_argument on empty bins and
// std::runtime_error on unwritable paths.
void emit_bin_plot(const std::vector<BinRow>& bins, const std::string& svg_path,
                   const std::string& table_path, const Manifest* manifest = nullptr);

void write_bin_table(const std::vector<BinRow>& bins, const std::string& path,
                     const Manifest* manifest = nullptr);

void write_type_summaries(const std::vector<TypeSummary>& summaries, const std::string& path,
                          const Manifest* manifest = nullptr);

}  // namespace segsafe
