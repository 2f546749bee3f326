#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "segsafe/commands.hpp"
#include "segsafe/types.hpp"

namespace {

segsafe::Date parse_date_or_throw(const std::string& text, const std::string& flag) {
    const auto d = segsafe::parse_date(text);
    if (!d) throw CLI::ValidationError(flag, "expected YYYY-MM-DD, got '" + text + "'");
    return *d;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Segment-level crash/hard-braking safety pipeline"};
    app.set_version_flag("--version", std::string(segsafe::kToolVersion));
    app.require_subcommand(1);
    app.fallthrough();

    int threads = 1;
    std::string manifest_out;
    app.add_option("--threads", threads, "Worker threads (default 1 for bitwise reproducibility)")
        ->check(CLI::PositiveNumber);
    app.add_option("--manifest-out", manifest_out, "Also write the run manifest to this path");

    // detect
    segsafe::DetectOptions detect;
    auto* cmd_detect = app.add_subcommand("detect", "Detect hard-braking events from telemetry");
    cmd_detect->add_option("--telemetry", detect.telemetry_path, "Telemetry CSV")->required();
    cmd_detect->add_option("--out-summary", detect.out_summary, "Per-segment summary CSV")
        ->required();
    cmd_detect->add_option("--out-events", detect.out_events, "Optional per-event dump CSV");
    cmd_detect->add_option("--decel-threshold", detect.detector.decel_threshold_mps2,
                           "Deceleration threshold, m/s^2");
    cmd_detect->add_option("--min-event-gap", detect.detector.min_event_gap_s,
                           "Merge events closer than this, seconds");
    cmd_detect->add_option("--max-sample-gap", detect.detector.max_sample_gap_s,
                           "Sampling gaps above this split a trip, seconds");

    // aggregate
    segsafe::AggregateOptions aggregate;
    std::string agg_start = "1900-01-01", agg_end = "2100-12-31";
    auto* cmd_aggregate =
        app.add_subcommand("aggregate", "Join segments, crashes, and HBE summaries");
    cmd_aggregate->add_option("--segments", aggregate.segments_path, "Segments CSV")->required();
    cmd_aggregate->add_option("--crashes", aggregate.crashes_path, "Crash records CSV")->required();
    cmd_aggregate->add_option("--hbe-summary", aggregate.hbe_summary_path, "HBE summary CSV")
        ->required();
    cmd_aggregate->add_option("--out", aggregate.out_path, "Analysis table CSV")->required();
    cmd_aggregate->add_flag("--zero-fill-crashes", aggregate.zero_fill_crashes,
                            "Treat segments missing from the crash file as zero-crash");
    cmd_aggregate->add_option("--window-start", agg_start, "Crash window start (YYYY-MM-DD)");
    cmd_aggregate->add_option("--window-end", agg_end, "Crash window end (YYYY-MM-DD)");

    // fit
    segsafe::FitOptions fit;
    auto* cmd_fit = app.add_subcommand("fit", "Fit the count-regression model");
    cmd_fit->add_option("--table", fit.table_path, "Analysis table CSV")->required();
    cmd_fit->add_option("--out", fit.out_path, "Coefficient report CSV")->required();
    cmd_fit->add_option("--family", fit.family, "auto, poisson, or negbin")
        ->check(CLI::IsMember({"auto", "poisson", "negbin"}));
    cmd_fit->add_option("--hbe-transform", fit.hbe_transform, "log1p_scaled or identity")
        ->check(CLI::IsMember({"log1p_scaled", "identity"}));
    cmd_fit->add_option("--hbe-floor", fit.hbe_floor, "Scale for the log1p transform");
    cmd_fit->add_option("--predictors", fit.predictors,
                        "Predictor subset (default: all)")
        ->delimiter(',');

    // bins
    segsafe::BinsOptions bins;
    auto* cmd_bins = app.add_subcommand("bins", "Decile-bin crash rate against HBE rate");
    cmd_bins->add_option("--table", bins.table_path, "Analysis table CSV")->required();
    cmd_bins->add_option("--out-table", bins.out_table, "Bin table CSV")->required();
    cmd_bins->add_option("--out-plot", bins.out_plot, "SVG plot path")->required();
    cmd_bins->add_option("--min-class-positive", bins.min_class_positive,
                         "Minimum positive-rate segments per road class");

    // summary
    segsafe::SummaryOptions summary;
    std::string sum_start = "1900-01-01", sum_end = "2100-12-31";
    auto* cmd_summary = app.add_subcommand("summary", "Per-road-type summary statistics");
    cmd_summary->add_option("--segments", summary.segments_path, "Segments CSV")->required();
    cmd_summary->add_option("--crashes", summary.crashes_path, "Crash records CSV")->required();
    cmd_summary->add_option("--hbe-summary", summary.hbe_summary_path, "HBE summary CSV")
        ->required();
    cmd_summary->add_option("--out", summary.out_path, "Summary CSV")->required();
    cmd_summary->add_flag("--zero-fill-crashes", summary.zero_fill_crashes,
                          "Treat segments missing from the crash file as zero-crash");
    cmd_summary->add_option("--window-start", sum_start, "Crash window start (YYYY-MM-DD)");
    cmd_summary->add_option("--window-end", sum_end, "Crash window end (YYYY-MM-DD)");

    // simulate
    segsafe::SimulateOptions simulate;
    std::uint64_t seed_flag = 0;
    long long n_flag = 0;
    auto* cmd_simulate = app.add_subcommand("simulate", "Generate a synthetic network");
    cmd_simulate->add_option("--config", simulate.config_path, "key=value generator config")
        ->required();
    cmd_simulate->add_option("--out-dir", simulate.out_dir, "Output directory")->required();
    cmd_simulate->add_flag("--emit-telemetry", simulate.emit_telemetry,
                           "Also write speed traces realizing each segment's summary");
    auto* seed_opt = cmd_simulate->add_option("--seed", seed_flag, "Override the config seed");
    auto* n_opt =
        cmd_simulate->add_option("--n-segments", n_flag, "Override the config segment count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return segsafe::kExitInputError;
    }

    try {
        if (cmd_detect->parsed()) {
            detect.threads = threads;
            detect.manifest_out = manifest_out;
            return segsafe::cmd_detect(detect, std::cerr);
        }
        if (cmd_aggregate->parsed()) {
            aggregate.window_start = parse_date_or_throw(agg_start, "--window-start");
            aggregate.window_end = parse_date_or_throw(agg_end, "--window-end");
            aggregate.manifest_out = manifest_out;
            return segsafe::cmd_aggregate(aggregate, std::cerr);
        }
        if (cmd_fit->parsed()) {
            fit.manifest_out = manifest_out;
            return segsafe::cmd_fit(fit, std::cerr);
        }
        if (cmd_bins->parsed()) {
            bins.manifest_out = manifest_out;
            return segsafe::cmd_bins(bins, std::cerr);
        }
        if (cmd_summary->parsed()) {
            summary.window_start = parse_date_or_throw(sum_start, "--window-start");
            summary.window_end = parse_date_or_throw(sum_end, "--window-end");
            summary.manifest_out = manifest_out;
            return segsafe::cmd_summary(summary, std::cerr);
        }
        if (cmd_simulate->parsed()) {
            if (*seed_opt) simulate.seed_override = seed_flag;
            if (*n_opt) simulate.n_segments_override = n_flag;
            simulate.threads = threads;
            simulate.manifest_out = manifest_out;
            return segsafe::cmd_simulate(simulate, std::cerr);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return segsafe::kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return segsafe::kExitInputError;
}
