#include "segsafe/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "segsafe/csvio.hpp"
#include "segsafe/manifest.hpp"

namespace segsafe {

std::vector<TypeSummary> summarize_by_road_type(const std::vector<AnalysisRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("no rows to summarize");
    std::map<RoadType, TypeSummary> by_type;
    for (const AnalysisRow& row : rows) {
        TypeSummary& s = by_type[row.road_type];
        s.road_type = row.road_type;
        ++s.n_segments;
        s.total_length_mi += row.length_miles;
        s.total_crashes += row.crash_count;
        s.mean_crash_rate += row.crash_rate;
        s.mean_hbe_rate += row.hbe_rate;
    }
    std::vector<TypeSummary> out;
    for (auto& [_, s] : by_type) {
        s.mean_crash_rate /= static_cast<double>(s.n_segments);
        s.mean_hbe_rate /= static_cast<double>(s.n_segments);
        out.push_back(s);
    }
    return out;
}

BinResult decile_bins(const std::vector<AnalysisRow>& rows, int min_positive) {
    std::map<RoadType, std::vector<const AnalysisRow*>> by_type;
    for (const AnalysisRow& row : rows) by_type[row.road_type].push_back(&row);

    BinResult result;
    for (auto& [type, type_rows] : by_type) {
        std::vector<const AnalysisRow*> zeros, positives;
        for (const AnalysisRow* row : type_rows) {
            (row->hbe_rate > 0 ? positives : zeros).push_back(row);
        }
        if (static_cast<int>(positives.size()) < min_positive) {
            result.warnings.push_back("road type " + std::to_string(road_type_to_int(type)) +
                                      " skipped: only " + std::to_string(positives.size()) +
                                      " segments with a positive hbe rate");
            continue;
        }
        std::sort(positives.begin(), positives.end(),
                  [](const AnalysisRow* a, const AnalysisRow* b) {
                      if (a->hbe_rate != b->hbe_rate) return a->hbe_rate < b->hbe_rate;
                      return a->segment_id < b->segment_id;
                  });

        if (!zeros.empty()) {
            BinRow bin;
            bin.road_type = type;
            bin.bin_index = 0;
            bin.n_segments = static_cast<long long>(zeros.size());
            for (const AnalysisRow* row : zeros) bin.crash_rate_mean += row->crash_rate;
            bin.crash_rate_mean /= static_cast<double>(zeros.size());
            result.bins.push_back(bin);
        }

        const std::size_t n = positives.size();
        for (int b = 0; b < 10; ++b) {
            const std::size_t lo = n * b / 10;
            const std::size_t hi = n * (b + 1) / 10;
            BinRow bin;
            bin.road_type = type;
            bin.bin_index = b + 1;
            bin.n_segments = static_cast<long long>(hi - lo);
            for (std::size_t i = lo; i < hi; ++i) {
                bin.hbe_rate_mean += positives[i]->hbe_rate;
                bin.crash_rate_mean += positives[i]->crash_rate;
            }
            bin.hbe_rate_mean /= static_cast<double>(hi - lo);
            bin.crash_rate_mean /= static_cast<double>(hi - lo);
            result.bins.push_back(bin);
        }
    }
    return result;
}

void write_bin_table(const std::vector<BinRow>& bins, const std::string& path,
                     const Manifest* manifest) {
    AtomicFile file(path);
    if (manifest) file.stream() << manifest->comment_block();
    file.stream() << "road_type,bin_index,hbe_rate_mean,crash_rate_mean,n_segments\n";
    for (const BinRow& bin : bins) {
        file.stream() << road_type_to_int(bin.road_type) << ',' << bin.bin_index << ','
                      << fmt_double(bin.hbe_rate_mean) << ',' << fmt_double(bin.crash_rate_mean)
                      << ',' << bin.n_segments << '\n';
    }
    file.commit();
}

void write_type_summaries(const std::vector<TypeSummary>& summaries, const std::string& path,
                          const Manifest* manifest) {
    AtomicFile file(path);
    if (manifest) file.stream() << manifest->comment_block();
    file.stream()
        << "road_type,n_segments,total_length_mi,total_crashes,mean_crash_rate,mean_hbe_rate\n";
    for (const TypeSummary& s : summaries) {
        file.stream() << road_type_to_int(s.road_type) << ',' << s.n_segments << ','
                      << fmt_double(s.total_length_mi) << ',' << s.total_crashes << ','
                      << fmt_double(s.mean_crash_rate) << ',' << fmt_double(s.mean_hbe_rate)
                      << '\n';
    }
    file.commit();
}

namespace {

struct PlotPoint {
    double x, y;
};

constexpr double kZeroBinX = -10.0;
constexpr int kWidth = 720, kHeight = 520;
constexpr int kMarginLeft = 70, kMarginRight = 180, kMarginTop = 30, kMarginBottom = 60;

const char* class_color(RoadType t) {
    switch (t) {
        case RoadType::local: return "#1f77b4";
        case RoadType::arterial: return "#d62728";
        case RoadType::highway: return "#2ca02c";
        case RoadType::controlled: return "#9467bd";
    }
    return "#000000";
}

std::string fmt_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

void emit_bin_plot(const std::vector<BinRow>& bins, const std::string& svg_path,
                   const std::string& table_path, const Manifest* manifest) {
    if (bins.empty()) throw std::invalid_argument("no bins");

    write_bin_table(bins, table_path, manifest);

    // Log-domain points per class; zero-HBE bins become reference markers at
    // x = -10, and zero-crash-rate bins are kept in the table only.
    std::map<RoadType, std::vector<PlotPoint>> lines;
    std::map<RoadType, std::vector<PlotPoint>> zero_markers;
    double min_x = kZeroBinX, max_x = kZeroBinX + 1;
    double min_y = 0, max_y = 0;
    bool have_y = false;
    for (const BinRow& bin : bins) {
        if (!(bin.crash_rate_mean > 0)) continue;
        const double y = std::log(bin.crash_rate_mean);
        const double x = bin.bin_index == 0 ? kZeroBinX : std::log(bin.hbe_rate_mean);
        if (!have_y) {
            min_y = max_y = y;
            have_y = true;
        }
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        if (bin.bin_index == 0) {
            zero_markers[bin.road_type].push_back(PlotPoint{x, y});
        } else {
            lines[bin.road_type].push_back(PlotPoint{x, y});
        }
    }
    if (!have_y) {
        min_y = -1;
        max_y = 1;
    }
    if (max_y - min_y < 1e-9) {
        min_y -= 1;
        max_y += 1;
    }

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    auto px = [&](double x) { return kMarginLeft + (x - min_x) / (max_x - min_x) * plot_w; };
    auto py = [&](double y) { return kMarginTop + (max_y - y) / (max_y - min_y) * plot_h; };

    AtomicFile file(svg_path);
    std::ofstream& out = file.stream();
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    if (manifest) out << "<!--\n" << manifest->comment_block() << "-->\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";

    // Axes.
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + plot_h << "\" x2=\""
        << kMarginLeft + plot_w << "\" y2=\"" << kMarginTop + plot_h
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
        << "\" y2=\"" << kMarginTop + plot_h << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = min_x + (max_x - min_x) * i / 4.0;
        const double yv = min_y + (max_y - min_y) * i / 4.0;
        out << "<text x=\"" << fmt_coord(px(xv)) << "\" y=\"" << kMarginTop + plot_h + 20
            << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt_coord(xv) << "</text>\n";
        out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << fmt_coord(py(yv) + 4)
            << "\" font-size=\"11\" text-anchor=\"end\">" << fmt_coord(yv) << "</text>\n";
    }
    out << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 15
        << "\" font-size=\"13\" text-anchor=\"middle\">ln(mean HBE rate), zero bin at x="
        << kZeroBinX << "</text>\n";
    out << "<text x=\"18\" y=\"" << kMarginTop + plot_h / 2
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << kMarginTop + plot_h / 2 << ")\">ln(mean crash rate)</text>\n";

    int legend_row = 0;
    for (const auto& [type, points] : lines) {
        out << "<polyline fill=\"none\" stroke=\"" << class_color(type)
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (i) out << ' ';
            out << fmt_coord(px(points[i].x)) << ',' << fmt_coord(py(points[i].y));
        }
        out << "\"/>\n";
        for (const PlotPoint& pt : points) {
            out << "<circle cx=\"" << fmt_coord(px(pt.x)) << "\" cy=\"" << fmt_coord(py(pt.y))
                << "\" r=\"2.5\" fill=\"" << class_color(type) << "\"/>\n";
        }
        const int ly = kMarginTop + 14 + 18 * legend_row++;
        out << "<rect x=\"" << kMarginLeft + plot_w + 14 << "\" y=\"" << ly - 9
            << "\" width=\"10\" height=\"10\" fill=\"" << class_color(type) << "\"/>\n";
        out << "<text x=\"" << kMarginLeft + plot_w + 30 << "\" y=\"" << ly
            << "\" font-size=\"12\">type " << road_type_to_int(type) << " ("
            << road_type_label(type) << ")</text>\n";
    }
    for (const auto& [type, points] : zero_markers) {
        for (const PlotPoint& pt : points) {
            out << "<circle cx=\"" << fmt_coord(px(pt.x)) << "\" cy=\"" << fmt_coord(py(pt.y))
                << "\" r=\"3.5\" fill=\"none\" stroke=\"" << class_color(type)
                << "\" stroke-width=\"1.5\"/>\n";
        }
    }
    out << "</svg>\n";
    file.commit();
}

}  // namespace segsafe
