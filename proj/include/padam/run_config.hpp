#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace padam {

// INI-style run configuration: [section] headers, key = value lines, #
// comments. Every key has a documented default (see defaults()); unknown
// sections or keys are rejected so typos fail loudly. The canonical
// serialization feeds the config hash recorded in every output.
class RunConfig {
public:
    RunConfig(); // defaults

    static RunConfig from_file(const std::string& path);
    static RunConfig from_text(const std::string& text);

    /// Flags win over file values: "section.key" notation.
    void set(const std::string& dotted_key, const std::string& value);

    const std::string& get(const std::string& dotted_key) const;
    double get_double(const std::string& dotted_key) const;
    int get_int(const std::string& dotted_key) const;
    long get_long(const std::string& dotted_key) const;
    bool get_bool(const std::string& dotted_key) const;

    /// Sorted "section.key=value" lines; input to the FNV-1a hash.
    std::string canonical() const;
    std::string hash() const;

    static const std::map<std::string, std::string>& defaults();

private:
    std::map<std::string, std::string> values_;
};

/// FNV-1a 64 over bytes, hex-encoded; shared by config and dataset digests.
std::string fnv1a_hex(const std::string& bytes);

} // namespace padam
