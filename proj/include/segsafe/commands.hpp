#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "segsafe/dates.hpp"
#include "segsafe/hbe.hpp"

namespace segsafe {

// Exit-code contract shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitNoConvergence = 3;

struct DetectOptions {
    std::string telemetry_path;
    std::string out_summary;
    std::string out_events;  // optional events dump
    std::string manifest_out;
    DetectorConfig detector;
    int threads = 1;
};

struct AggregateOptions {
    std::string segments_path;
    std::string crashes_path;
    std::string hbe_summary_path;
    std::string out_path;
    std::string manifest_out;
    bool zero_fill_crashes = false;
    Date window_start{1900, 1, 1};
    Date window_end{2100, 12, 31};
};

struct FitOptions {
    std::string table_path;
    std::string out_path;
    std::string manifest_out;
    std::string family = "auto";             // auto | poisson | negbin
    std::string hbe_transform = "log1p_scaled";  // log1p_scaled | identity
    double hbe_floor = 1e-3;
    std::vector<std::string> predictors;  // empty selects all
};

struct BinsOptions {
    std::string table_path;
    std::string out_table;
    std::string out_plot;
    std::string manifest_out;
    int min_class_positive = 10;
};

struct SummaryOptions {
    std::string segments_path;
    std::string crashes_path;
    std::string hbe_summary_path;
    std::string out_path;
    std::string manifest_out;
    bool zero_fill_crashes = false;
    Date window_start{1900, 1, 1};
    Date window_end{2100, 12, 31};
};

struct SimulateOptions {
    std::string config_path;
    std::string out_dir;
    std::string manifest_out;
    bool emit_telemetry = false;
    std::optional<std::uint64_t> seed_override;
    std::optional<long long> n_segments_override;
    int threads = 1;
};

// Each command returns the process exit code and reports problems on err.
int cmd_detect(const DetectOptions& opts, std::ostream& err);
int cmd_aggregate(const AggregateOptions& opts, std::ostream& err);
int cmd_fit(const FitOptions& opts, std::ostream& err);
int cmd_bins(const BinsOptions& opts, std::ostream& err);
int cmd_summary(const SummaryOptions& opts, std::ostream& err);
int cmd_simulate(const SimulateOptions& opts, std::ostream& err);

}  // namespace segsafe
