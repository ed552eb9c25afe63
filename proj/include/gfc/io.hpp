#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gfc::io {

/// All numeric file output goes through this: "%.12e", locale-independent.
std::string sci(double v);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char delim);

double parse_double(std::string_view text, const std::string& context);
long parse_long(std::string_view text, const std::string& context);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames onto the target.
void atomic_write(const std::filesystem::path& path, std::string_view content);

/// Ordered key/value document ("key = value" lines, '#' comments).
/// Keys may repeat; find/get return the first match.
struct TextDoc {
    std::vector<std::pair<std::string, std::string>> entries;

    void set(std::string key, std::string value);
    void set(std::string key, double value);
    const std::string* find(std::string_view key) const;
    bool has(std::string_view key) const { return find(key) != nullptr; }
    std::string get(std::string_view key) const;
    double get_double(std::string_view key) const;
    double get_double_or(std::string_view key, double fallback) const;
    long get_long_or(std::string_view key, long fallback) const;

    std::string to_string() const;
    static TextDoc parse(std::string_view text);
    static TextDoc load(const std::filesystem::path& path);
};

/// Numeric CSV with a single header line. Parse errors carry the line number.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(std::string_view name) const;  // throws if absent
    bool has_column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace gfc::io
