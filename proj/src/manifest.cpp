#include "segsafe/manifest.hpp"

#include <cstdio>
#include <fstream>

#include "segsafe/csvio.hpp"
#include "segsafe/types.hpp"

namespace segsafe {

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) throw std::runtime_error("cannot open for hashing: " + path);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ULL;
        }
    }
    return hash;
}

Manifest::Manifest() {
    entries_.emplace_back("tool", kToolName);
    entries_.emplace_back("version", kToolVersion);
}

void Manifest::set(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, value);
}

void Manifest::set(const std::string& key, double value) {
    entries_.emplace_back(key, fmt_double(value));
}

void Manifest::set(const std::string& key, std::int64_t value) {
    entries_.emplace_back(key, std::to_string(value));
}

void Manifest::add_input(const std::string& label, const std::string& path) {
    char hex[20];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(fnv1a64_file(path)));
    entries_.emplace_back("input." + label + ".path", path);
    entries_.emplace_back("input." + label + ".fnv1a64", hex);
}

std::string Manifest::comment_block() const {
    std::string out;
    for (const auto& [key, value] : entries_) {
        out += "# " + key + "=" + value + "\n";
    }
    return out;
}

void Manifest::write_file(const std::string& path) const {
    AtomicFile file(path);
    for (const auto& [key, value] : entries_) {
        file.stream() << key << "=" << value << "\n";
    }
    file.commit();
}

}  // namespace segsafe
