#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace segsafe {

// FNV-1a over the file's bytes; throws std::runtime_error if unreadable.
std::uint64_t fnv1a64_file(const std::string& path);

// Run provenance: tool version, configuration values, and content hashes of
// every input. Embedded as '#' comment lines at the top of each output so
// results stay auditable; contains nothing time- or host-dependent, keeping
// outputs byte-reproducible.
class Manifest {
  public:
    Manifest();

    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, std::int64_t value);
    void add_input(const std::string& label, const std::string& path);

    // "# key=value\n" lines, tool/version first.
    std::string comment_block() const;

    // Bare key=value lines, written atomically.
    void write_file(const std::string& path) const;

  private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace segsafe
