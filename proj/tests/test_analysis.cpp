#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "segsafe/analysis.hpp"
#include "segsafe/rng.hpp"

using namespace segsafe;

namespace {

AnalysisRow make_row(const std::string& id, RoadType type, double hbe_rate, double crash_rate,
                     double length = 1.0) {
    AnalysisRow row;
    row.segment_id = id;
    row.road_type = type;
    row.hbe_rate = hbe_rate;
    row.crash_rate = crash_rate;
    row.crash_count = static_cast<long long>(crash_rate * 10);
    row.exposure_mvmt = 10.0;
    row.hbe_distance_mi = 100.0;
    row.hbe_count = static_cast<long long>(hbe_rate * 100);
    row.length_miles = length;
    return row;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_substr(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("segsafe_analysis_" + name)).string();
}

}  // namespace

TEST_CASE("summaries use unweighted means and summed totals") {
    std::vector<AnalysisRow> rows = {
        make_row("a", RoadType::local, 0.01, 6.0, 0.5),
        make_row("b", RoadType::local, 0.03, 8.0, 1.5),
    };
    const auto summaries = summarize_by_road_type(rows);
    REQUIRE(summaries.size() == 1);
    CHECK(summaries[0].road_type == RoadType::local);
    CHECK(summaries[0].n_segments == 2);
    CHECK(summaries[0].mean_crash_rate == doctest::Approx(7.0));
    CHECK(summaries[0].mean_hbe_rate == doctest::Approx(0.02));
    CHECK(summaries[0].total_length_mi == doctest::Approx(2.0));
    CHECK(summaries[0].total_crashes == 60 + 80);
}

TEST_CASE("decile bins partition positive rates into near-equal groups") {
    std::vector<AnalysisRow> rows;
    for (int i = 0; i < 20; ++i) {
        rows.push_back(make_row("p" + std::to_string(100 + i), RoadType::local,
                                0.001 * (i + 1), 1.0 + i));
    }
    const auto result = decile_bins(rows);
    CHECK(result.warnings.empty());
    REQUIRE(result.bins.size() == 10);  // no zero bin
    for (const BinRow& bin : result.bins) {
        CHECK(bin.n_segments == 2);
        CHECK(bin.bin_index >= 1);
    }

    rows.push_back(make_row("p121", RoadType::local, 0.03, 30.0));
    const auto odd = decile_bins(rows);
    long long total = 0;
    int threes = 0;
    for (const BinRow& bin : odd.bins) {
        total += bin.n_segments;
        CHECK(bin.n_segments >= 2);
        CHECK(bin.n_segments <= 3);
        threes += bin.n_segments == 3;
    }
    CHECK(total == 21);
    CHECK(threes == 1);
}

TEST_CASE("zero-rate segments land in bin zero and classes partition") {
    std::vector<AnalysisRow> rows;
    for (int i = 0; i < 25; ++i) {
        rows.push_back(make_row("z" + std::to_string(100 + i), RoadType::arterial,
                                i < 5 ? 0.0 : 0.002 * i, 2.0 + i));
    }
    const auto result = decile_bins(rows);
    long long total = 0;
    bool saw_zero_bin = false;
    for (const BinRow& bin : result.bins) {
        total += bin.n_segments;
        if (bin.bin_index == 0) {
            saw_zero_bin = true;
            CHECK(bin.n_segments == 5);
            CHECK(bin.hbe_rate_mean == 0.0);
        }
    }
    CHECK(saw_zero_bin);
    CHECK(total == 25);
}

TEST_CASE("classes with too few positive rates are skipped with a warning") {
    std::vector<AnalysisRow> rows;
    for (int i = 0; i < 30; ++i) {
        rows.push_back(make_row("a" + std::to_string(100 + i), RoadType::local, 0.001 * (i + 1),
                                1.0 + i));
    }
    for (int i = 0; i < 8; ++i) {
        rows.push_back(make_row("b" + std::to_string(100 + i), RoadType::controlled,
                                0.001 * (i + 1), 1.0));
    }
    const auto result = decile_bins(rows);
    REQUIRE(result.warnings.size() == 1);
    CHECK(result.warnings[0].find("road type 4") != std::string::npos);
    for (const BinRow& bin : result.bins) CHECK(bin.road_type == RoadType::local);
}

TEST_CASE("bin statistics ignore input order and ranks are monotone") {
    CounterRng rng(5, 0);
    std::vector<AnalysisRow> rows;
    for (int i = 0; i < 137; ++i) {
        rows.push_back(make_row("m" + std::to_string(1000 + i), RoadType::highway,
                                rng.next_unit() < 0.2 ? 0.0 : 0.05 * rng.next_unit(),
                                10.0 * rng.next_unit()));
    }
    auto shuffled = rows;
    // deterministic Fisher-Yates
    for (std::size_t i = shuffled.size(); i > 1; --i) {
        std::swap(shuffled[i - 1], shuffled[static_cast<std::size_t>(rng.next_unit() * i)]);
    }
    const auto a = decile_bins(rows);
    const auto b = decile_bins(shuffled);
    REQUIRE(a.bins.size() == b.bins.size());
    for (std::size_t i = 0; i < a.bins.size(); ++i) {
        CHECK(a.bins[i].bin_index == b.bins[i].bin_index);
        CHECK(a.bins[i].hbe_rate_mean == b.bins[i].hbe_rate_mean);
        CHECK(a.bins[i].crash_rate_mean == b.bins[i].crash_rate_mean);
        CHECK(a.bins[i].n_segments == b.bins[i].n_segments);
    }

    // bin b's positive rates sit at or above bin b-1's
    std::vector<const AnalysisRow*> positives;
    for (const auto& row : rows) {
        if (row.hbe_rate > 0) positives.push_back(&row);
    }
    std::sort(positives.begin(), positives.end(), [](const AnalysisRow* x, const AnalysisRow* y) {
        return x->hbe_rate < y->hbe_rate;
    });
    const std::size_t n = positives.size();
    for (int bin = 2; bin <= 10; ++bin) {
        const std::size_t prev_hi = n * (bin - 1) / 10;
        const std::size_t lo = prev_hi;
        if (lo >= n || prev_hi == 0) continue;
        CHECK(positives[lo]->hbe_rate >= positives[prev_hi - 1]->hbe_rate);
    }
}

TEST_CASE("emit_bin_plot writes one polyline per class plus the table") {
    std::vector<AnalysisRow> rows;
    for (int i = 0; i < 40; ++i) {
        rows.push_back(make_row("p" + std::to_string(100 + i), RoadType::local,
                                i < 4 ? 0.0 : 0.001 * (i + 1), 1.0 + i));
    }
    const auto bins = decile_bins(rows);
    const std::string svg = tmp_path("plot.svg");
    const std::string table = tmp_path("plot_table.csv");
    emit_bin_plot(bins.bins, svg, table);

    const std::string svg_text = slurp(svg);
    CHECK(count_substr(svg_text, "<polyline") == 1);
    CHECK(count_substr(svg_text, "<circle") >= 11);  // 10 vertices + zero-bin marker
    const std::string table_text = slurp(table);
    CHECK(table_text.find("road_type,bin_index,hbe_rate_mean,crash_rate_mean,n_segments") !=
          std::string::npos);
    CHECK(count_substr(table_text, "\n") == 12);  // header + zero bin + 10 bins

    CHECK_THROWS_AS(emit_bin_plot({}, svg, table), std::invalid_argument);
}

TEST_CASE("bins with zero mean crash rate stay in the table but not the plot") {
    std::vector<BinRow> bins;
    for (int b = 1; b <= 10; ++b) {
        BinRow bin;
        bin.road_type = RoadType::local;
        bin.bin_index = b;
        bin.hbe_rate_mean = 0.001 * b;
        bin.crash_rate_mean = b == 3 ? 0.0 : 1.0 * b;
        bin.n_segments = 5;
        bins.push_back(bin);
    }
    const std::string svg = tmp_path("zeroplot.svg");
    const std::string table = tmp_path("zeroplot_table.csv");
    emit_bin_plot(bins, svg, table);
    const std::string svg_text = slurp(svg);
    CHECK(count_substr(svg_text, "<polyline") == 1);
    CHECK(count_substr(svg_text, "<circle cx") == 9);  // vertex dots, bin 3 omitted
    CHECK(count_substr(slurp(table), "\n") == 11);     // header + all 10 bins
}
