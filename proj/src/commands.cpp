#include "segsafe/commands.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>

#include "segsafe/aggregate.hpp"
#include "segsafe/analysis.hpp"
#include "segsafe/csvio.hpp"
#include "segsafe/glm.hpp"
#include "segsafe/ingest.hpp"
#include "segsafe/manifest.hpp"
#include "segsafe/synthgen.hpp"

namespace segsafe {

namespace {

void report_ingest(const std::string& label, const IngestReport& report, std::ostream& err) {
    err << label << ": " << report.rows_read << " rows read, " << report.rows_accepted
        << " accepted, " << report.rejections.size() << " rejected\n";
    const std::size_t shown = std::min<std::size_t>(report.rejections.size(), 10);
    for (std::size_t i = 0; i < shown; ++i) {
        err << "  line " << report.rejections[i].first << ": " << report.rejections[i].second
            << "\n";
    }
    if (report.rejections.size() > shown) {
        err << "  ... " << report.rejections.size() - shown << " more\n";
    }
}

int input_error(std::ostream& err, const std::string& message) {
    err << "error: " << message << "\n";
    return kExitInputError;
}

ModelSpec model_from_options(const FitOptions& opts) {
    ModelSpec spec = ModelSpec::all_predictors();
    if (!opts.predictors.empty()) {
        spec.predictors.clear();
        for (const std::string& name : opts.predictors) {
            if (name == "hbe_rate") {
                spec.predictors.push_back(Predictor::hbe_rate);
            } else if (name == "road_type") {
                spec.predictors.push_back(Predictor::road_type);
            } else if (name == "num_lanes") {
                spec.predictors.push_back(Predictor::num_lanes);
            } else if (name == "has_ramp") {
                spec.predictors.push_back(Predictor::has_ramp);
            } else if (name == "lane_changes") {
                spec.predictors.push_back(Predictor::lane_changes);
            } else if (name == "cum_turn_angle") {
                spec.predictors.push_back(Predictor::cum_turn_angle);
            } else {
                throw std::invalid_argument("unknown predictor '" + name + "'");
            }
        }
    }
    if (opts.hbe_transform == "log1p_scaled") {
        spec.hbe_transform = HbeTransform::log1p_scaled;
    } else if (opts.hbe_transform == "identity") {
        spec.hbe_transform = HbeTransform::identity;
    } else {
        throw std::invalid_argument("unknown hbe transform '" + opts.hbe_transform + "'");
    }
    spec.hbe_floor = opts.hbe_floor;
    return spec;
}

const char* transform_name(HbeTransform t) {
    return t == HbeTransform::log1p_scaled ? "log1p_scaled" : "identity";
}

}  // namespace

int cmd_detect(const DetectOptions& opts, std::ostream& err) {
    const std::string problem = opts.detector.validate();
    if (!problem.empty()) return input_error(err, problem);

    TelemetryResult telemetry;
    try {
        telemetry = parse_telemetry(opts.telemetry_path);
    } catch (const IngestError& e) {
        return input_error(err, e.what());
    }
    report_ingest("telemetry", telemetry.report, err);

    Manifest manifest;
    manifest.add_input("telemetry", opts.telemetry_path);
    manifest.set("decel_threshold_mps2", opts.detector.decel_threshold_mps2);
    manifest.set("min_event_gap_s", opts.detector.min_event_gap_s);
    manifest.set("max_sample_gap_s", opts.detector.max_sample_gap_s);

    const auto summary = aggregate_hbes(telemetry.traces, opts.detector, opts.threads);
    {
        AtomicFile file(opts.out_summary);
        file.stream() << manifest.comment_block();
        file.stream() << "segment_id,hbe_count,hbe_distance_mi\n";
        for (const auto& [segment_id, hbe] : summary) {
            file.stream() << segment_id << ',' << hbe.count << ',' << fmt_double(hbe.distance_mi)
                          << '\n';
        }
        file.commit();
    }

    if (!opts.out_events.empty()) {
        AtomicFile file(opts.out_events);
        file.stream() << manifest.comment_block();
        file.stream() << "trip_id,segment_id,onset_time_s,peak_decel_mps2\n";
        for (const TripTrace& trace : telemetry.traces) {
            for (const HbeEvent& ev : detect_hbes(trace, opts.detector)) {
                file.stream() << ev.trip_id << ',' << ev.segment_id << ','
                              << fmt_double(ev.onset_time_s) << ',' << fmt_double(ev.peak_decel_mps2)
                              << '\n';
            }
        }
        file.commit();
    }

    if (!opts.manifest_out.empty()) manifest.write_file(opts.manifest_out);
    return kExitOk;
}

namespace {

// Shared source-file join for aggregate and summary.
int load_analysis_inputs(const std::string& segments_path, const std::string& crashes_path,
                         const std::string& hbe_path, const Date& window_start,
                         const Date& window_end, bool zero_fill, std::ostream& err,
                         AnalysisTable& out, Manifest& manifest) {
    if (window_end < window_start) {
        return input_error(err, "window start is after window end");
    }
    SegmentsResult segments;
    CrashCountsResult crashes;
    HbeSummaryResult hbe;
    try {
        segments = parse_segments(segments_path);
        crashes = parse_crashes(crashes_path, window_start, window_end);
        hbe = parse_hbe_summary(hbe_path);
    } catch (const IngestError& e) {
        return input_error(err, e.what());
    }
    report_ingest("segments", segments.report, err);
    report_ingest("crashes", crashes.report, err);
    report_ingest("hbe summary", hbe.report, err);

    manifest.add_input("segments", segments_path);
    manifest.add_input("crashes", crashes_path);
    manifest.add_input("hbe_summary", hbe_path);
    manifest.set("window_start", format_date(window_start));
    manifest.set("window_end", format_date(window_end));
    manifest.set("zero_fill_crashes", std::int64_t{zero_fill ? 1 : 0});

    out = build_analysis_table(segments.segments, crashes.counts, hbe.by_segment, zero_fill);
    err << "analysis table: " << out.rows.size() << " rows, " << out.excluded << " excluded ("
        << out.excluded_zero_exposure << " zero exposure, " << out.excluded_no_hbe_distance
        << " no monitored distance)\n";
    return kExitOk;
}

void write_analysis_table_file(const std::string& path, const std::vector<AnalysisRow>& rows,
                               const Manifest& manifest) {
    AtomicFile file(path);
    file.stream() << manifest.comment_block();
    file.stream() << "segment_id,exposure_mvmt,crash_count,crash_rate,hbe_count,hbe_distance_mi,"
                     "hbe_rate,road_type,num_lanes,has_ramp,lane_changes,cum_turn_angle_deg\n";
    for (const AnalysisRow& row : rows) {
        file.stream() << row.segment_id << ',' << fmt_double(row.exposure_mvmt) << ','
                      << row.crash_count << ',' << fmt_double(row.crash_rate) << ','
                      << row.hbe_count << ',' << fmt_double(row.hbe_distance_mi) << ','
                      << fmt_double(row.hbe_rate) << ',' << road_type_to_int(row.road_type) << ','
                      << row.num_lanes << ',' << (row.has_ramp ? 1 : 0) << ',' << row.lane_changes
                      << ',' << fmt_double(row.cum_turn_angle_deg) << '\n';
    }
    file.commit();
}

}  // namespace

int cmd_aggregate(const AggregateOptions& opts, std::ostream& err) {
    AnalysisTable table;
    Manifest manifest;
    const int rc = load_analysis_inputs(opts.segments_path, opts.crashes_path,
                                        opts.hbe_summary_path, opts.window_start, opts.window_end,
                                        opts.zero_fill_crashes, err, table, manifest);
    if (rc != kExitOk) return rc;
    write_analysis_table_file(opts.out_path, table.rows, manifest);
    if (!opts.manifest_out.empty()) manifest.write_file(opts.manifest_out);
    return kExitOk;
}

int cmd_summary(const SummaryOptions& opts, std::ostream& err) {
    AnalysisTable table;
    Manifest manifest;
    const int rc = load_analysis_inputs(opts.segments_path, opts.crashes_path,
                                        opts.hbe_summary_path, opts.window_start, opts.window_end,
                                        opts.zero_fill_crashes, err, table, manifest);
    if (rc != kExitOk) return rc;
    if (table.rows.empty()) return input_error(err, "no rows admitted to the analysis table");
    write_type_summaries(summarize_by_road_type(table.rows), opts.out_path, &manifest);
    if (!opts.manifest_out.empty()) manifest.write_file(opts.manifest_out);
    return kExitOk;
}

int cmd_fit(const FitOptions& opts, std::ostream& err) {
    if (opts.family != "auto" && opts.family != "poisson" && opts.family != "negbin") {
        return input_error(err, "unknown family '" + opts.family + "'");
    }
    ModelSpec spec;
    try {
        spec = model_from_options(opts);
    } catch (const std::invalid_argument& e) {
        return input_error(err, e.what());
    }

    AnalysisTableResult table;
    try {
        table = read_analysis_table(opts.table_path);
    } catch (const IngestError& e) {
        return input_error(err, e.what());
    }
    report_ingest("analysis table", table.report, err);
    if (table.rows.empty()) return input_error(err, "analysis table has no usable rows");

    Design design;
    FitResult poisson, final_fit;
    DispersionCheck dispersion;
    try {
        design = build_design(table.rows, spec);
        for (const std::string& warning : design.warnings) err << "warning: " << warning << "\n";
        poisson = fit_poisson(design.X, design.y, design.offset);
        dispersion = dispersion_check(poisson, design.X.rows(), design.X.cols());
    } catch (const std::invalid_argument& e) {
        return input_error(err, e.what());
    }

    std::string family_used = "poisson";
    if (opts.family == "negbin" || (opts.family == "auto" && dispersion.overdispersed)) {
        final_fit = fit_negbin(design.X, design.y, design.offset);
        family_used = "negbin";
    } else {
        final_fit = poisson;
    }
    if (opts.family == "poisson" && dispersion.overdispersed) {
        err << "warning: Poisson Pearson ratio " << fmt_double(dispersion.pearson_ratio)
            << " > 1.5 suggests overdispersion; consider --family negbin\n";
    }
    if (final_fit.kappa_at_upper) {
        err << "warning: kappa at upper bound (severe overdispersion)\n";
    }
    if (!final_fit.converged) {
        err << "error: " << family_used << " fit did not converge after " << final_fit.iterations
            << " iterations\n";
        return kExitNoConvergence;
    }

    Manifest manifest;
    manifest.add_input("table", opts.table_path);
    manifest.set("requested_family", opts.family);
    manifest.set("family", family_used);
    manifest.set("hbe_transform", transform_name(spec.hbe_transform));
    manifest.set("hbe_floor", spec.hbe_floor);
    manifest.set("n", static_cast<std::int64_t>(design.X.rows()));
    manifest.set("p", static_cast<std::int64_t>(design.X.cols()));
    manifest.set("kappa", final_fit.kappa);
    manifest.set("log_likelihood", final_fit.log_likelihood);
    manifest.set("deviance", final_fit.deviance);
    manifest.set("pearson_chi2", final_fit.pearson_chi2);
    manifest.set("poisson_pearson_ratio", dispersion.pearson_ratio);
    manifest.set("poisson_overdispersed", std::int64_t{dispersion.overdispersed ? 1 : 0});
    manifest.set("iterations", static_cast<std::int64_t>(final_fit.iterations));
    manifest.set("converged", std::int64_t{final_fit.converged ? 1 : 0});
    manifest.set("ridge_applied", std::int64_t{final_fit.ridge_applied ? 1 : 0});
    manifest.set("kappa_at_lower", std::int64_t{final_fit.kappa_at_lower ? 1 : 0});
    manifest.set("kappa_at_upper", std::int64_t{final_fit.kappa_at_upper ? 1 : 0});

    const auto rows = wald_inference(final_fit, design.names);
    {
        AtomicFile file(opts.out_path);
        file.stream() << manifest.comment_block();
        file.stream() << "name,estimate,std_error,z,p_value,signif\n";
        for (const CoefRow& row : rows) {
            file.stream() << row.name << ',' << fmt_double(row.estimate) << ','
                          << fmt_double(row.std_error) << ',' << fmt_double(row.z) << ','
                          << fmt_double(row.p_value) << ',' << row.signif << '\n';
        }
        file.commit();
    }
    if (!opts.manifest_out.empty()) manifest.write_file(opts.manifest_out);
    return kExitOk;
}

int cmd_bins(const BinsOptions& opts, std::ostream& err) {
    AnalysisTableResult table;
    try {
        table = read_analysis_table(opts.table_path);
    } catch (const IngestError& e) {
        return input_error(err, e.what());
    }
    report_ingest("analysis table", table.report, err);
    if (table.rows.empty()) return input_error(err, "analysis table has no usable rows");

    const BinResult bins = decile_bins(table.rows, opts.min_class_positive);
    for (const std::string& warning : bins.warnings) err << "warning: " << warning << "\n";
    if (bins.bins.empty()) return input_error(err, "no bins");

    Manifest manifest;
    manifest.add_input("table", opts.table_path);
    manifest.set("min_class_positive", static_cast<std::int64_t>(opts.min_class_positive));
    emit_bin_plot(bins.bins, opts.out_plot, opts.out_table, &manifest);
    if (!opts.manifest_out.empty()) manifest.write_file(opts.manifest_out);
    return kExitOk;
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& err) {
    GenConfig cfg;
    try {
        cfg = parse_gen_config(opts.config_path);
        if (opts.seed_override) cfg.seed = *opts.seed_override;
        if (opts.n_segments_override) cfg.n_segments = *opts.n_segments_override;
        const std::string problem = cfg.validate();
        if (!problem.empty()) throw std::invalid_argument("invalid config: " + problem);
    } catch (const std::exception& e) {
        return input_error(err, e.what());
    }

    std::error_code ec;
    std::filesystem::create_directories(opts.out_dir, ec);
    if (ec) return input_error(err, "cannot create output directory " + opts.out_dir);

    Manifest manifest;
    manifest.add_input("config", opts.config_path);
    manifest.set("seed", static_cast<std::int64_t>(cfg.seed));
    manifest.set("n_segments", static_cast<std::int64_t>(cfg.n_segments));
    manifest.set("kappa", cfg.kappa);
    manifest.set("window_start", format_date(cfg.window_start));
    manifest.set("window_end", format_date(cfg.window_end()));
    manifest.set("hbe_transform", transform_name(cfg.model.hbe_transform));
    manifest.set("hbe_floor", cfg.model.hbe_floor);
    const auto names = design_column_names(cfg.model);
    for (std::size_t j = 0; j < names.size(); ++j) {
        manifest.set("beta." + names[j], cfg.beta[j]);
    }

    const auto segments = generate_segments(cfg, opts.threads);
    const auto counts =
        sample_crashes(segments, cfg.model, cfg.beta, cfg.kappa, cfg.seed, opts.threads);

    const std::filesystem::path dir(opts.out_dir);
    write_segments_csv((dir / "segments.csv").string(), segments, &manifest, opts.threads);
    write_crashes_csv((dir / "crashes.csv").string(), segments, counts, cfg, &manifest,
                      opts.threads);
    write_hbe_summary_csv((dir / "hbe_summary.csv").string(), segments, &manifest, opts.threads);
    if (opts.emit_telemetry) {
        write_telemetry_csv((dir / "telemetry.csv").string(), segments, &manifest, opts.threads);
    }
    if (!opts.manifest_out.empty()) manifest.write_file(opts.manifest_out);

    long long total_crashes = 0;
    for (long long c : counts) total_crashes += c;
    err << "simulated " << segments.size() << " segments, " << total_crashes << " crash rows\n";
    return kExitOk;
}

}  // namespace segsafe
