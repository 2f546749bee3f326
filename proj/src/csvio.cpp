#include "segsafe/csvio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <set>

namespace segsafe {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    std::size_t e = s.size();
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_double_strict(const std::string& token) {
    const std::string t = trim(token);
    if (t.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<std::int64_t> parse_int_strict(const std::string& token) {
    const std::string t = trim(token);
    if (t.empty()) return std::nullopt;
    char* end = nullptr;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size()) return std::nullopt;
    return v;
}

std::string fmt_double(double v) {
    char buf[40];
    // Shortest form that parses back to the same double.
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvReader::CsvReader(const std::string& path) : path_(path), in_(path) {
    if (!in_.is_open()) throw IngestError("cannot open file: " + path);
}

bool CsvReader::next(std::string& line, std::int64_t& line_no) {
    while (std::getline(in_, line)) {
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        line_no = line_no_;
        return true;
    }
    return false;
}

std::map<std::string, std::size_t> map_header(const std::vector<std::string>& header_fields,
                                              const std::vector<std::string>& required,
                                              const std::string& path) {
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < header_fields.size(); ++i) {
        const std::string name = trim(header_fields[i]);
        if (idx.count(name)) throw IngestError(path + ": duplicate column '" + name + "'");
        idx[name] = i;
    }
    const std::set<std::string> wanted(required.begin(), required.end());
    for (const auto& name : required) {
        if (!idx.count(name)) throw IngestError(path + ": missing column '" + name + "'");
    }
    for (const auto& [name, _] : idx) {
        if (!wanted.count(name)) throw IngestError(path + ": unknown column '" + name + "'");
    }
    return idx;
}

AtomicFile::AtomicFile(const std::string& path) : path_(path), tmp_path_(path + ".tmp"), out_(tmp_path_, std::ios::binary) {
    if (!out_.is_open()) throw std::runtime_error("cannot open for writing: " + tmp_path_);
}

AtomicFile::~AtomicFile() {
    if (!committed_) {
        out_.close();
        std::error_code ec;
        std::filesystem::remove(tmp_path_, ec);
    }
}

void AtomicFile::commit() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed: " + tmp_path_);
    out_.close();
    std::error_code ec;
    std::filesystem::rename(tmp_path_, path_, ec);
    if (ec) throw std::runtime_error("cannot rename " + tmp_path_ + " to " + path_ + ": " + ec.message());
    committed_ = true;
}

}  // namespace segsafe
