#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace segsafe {

// Structural input failure (unreadable file, malformed header).
class IngestError : public std::runtime_error {
  public:
    explicit IngestError(const std::string& what) : std::runtime_error(what) {}
};

std::string trim(const std::string& s);

// Plain comma split; the toolchain's formats carry no quoting or embedded commas.
std::vector<std::string> split_csv_line(const std::string& line);

// Strict full-token numeric parses; reject empty, partial, or non-finite input.
std::optional<double> parse_double_strict(const std::string& token);
std::optional<std::int64_t> parse_int_strict(const std::string& token);

// Shortest round-trip decimal form of a double.
std::string fmt_double(double v);

// Reads data lines, skipping blank lines and '#' comment lines, tracking
// 1-based physical line numbers.
class CsvReader {
  public:
    explicit CsvReader(const std::string& path);

    bool next(std::string& line, std::int64_t& line_no);
    const std::string& path() const { return path_; }

  private:
    std::string path_;
    std::ifstream in_;
    std::int64_t line_no_ = 0;
};

// Maps required column names to indices; order free, names fixed.
// Throws IngestError on missing or unknown columns.
std::map<std::string, std::size_t> map_header(const std::vector<std::string>& header_fields,
                                              const std::vector<std::string>& required,
                                              const std::string& path);

// Writes to "<path>.tmp" and renames into place on commit, so interrupted
// runs never leave a partial file at the destination.
class AtomicFile {
  public:
    explicit AtomicFile(const std::string& path);
    ~AtomicFile();

    AtomicFile(const AtomicFile&) = delete;
    AtomicFile& operator=(const AtomicFile&) = delete;

    std::ofstream& stream() { return out_; }
    void commit();

  private:
    std::string path_;
    std::string tmp_path_;
    std::ofstream out_;
    bool committed_ = false;
};

}  // namespace segsafe
