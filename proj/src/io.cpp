#include "gfc/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gfc::io {

std::string sci(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12e", v);
    return buf;
}

std::string trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(delim, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

double parse_double(std::string_view text, const std::string& context) {
    std::string t = trim(text);
    if (t.empty()) throw std::runtime_error(context + ": empty numeric field");
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(t.c_str(), &end);
    if (errno != 0 || end != t.c_str() + t.size())
        throw std::runtime_error(context + ": cannot parse '" + t + "' as a number");
    return v;
}

long parse_long(std::string_view text, const std::string& context) {
    std::string t = trim(text);
    if (t.empty()) throw std::runtime_error(context + ": empty integer field");
    char* end = nullptr;
    errno = 0;
    long v = std::strtol(t.c_str(), &end, 10);
    if (errno != 0 || end != t.c_str() + t.size())
        throw std::runtime_error(context + ": cannot parse '" + t + "' as an integer");
    return v;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void TextDoc::set(std::string key, std::string value) {
    entries.emplace_back(std::move(key), std::move(value));
}

void TextDoc::set(std::string key, double value) { set(std::move(key), sci(value)); }

const std::string* TextDoc::find(std::string_view key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return &v;
    return nullptr;
}

std::string TextDoc::get(std::string_view key) const {
    const std::string* v = find(key);
    if (!v) throw std::runtime_error("missing key '" + std::string(key) + "'");
    return *v;
}

double TextDoc::get_double(std::string_view key) const {
    return parse_double(get(key), "key '" + std::string(key) + "'");
}

double TextDoc::get_double_or(std::string_view key, double fallback) const {
    const std::string* v = find(key);
    return v ? parse_double(*v, "key '" + std::string(key) + "'") : fallback;
}

long TextDoc::get_long_or(std::string_view key, long fallback) const {
    const std::string* v = find(key);
    return v ? parse_long(*v, "key '" + std::string(key) + "'") : fallback;
}

std::string TextDoc::to_string() const {
    std::string out;
    for (const auto& [k, v] : entries) {
        out += k;
        out += " = ";
        out += v;
        out += '\n';
    }
    return out;
}

TextDoc TextDoc::parse(std::string_view text) {
    TextDoc doc;
    std::size_t lineno = 0;
    for (const auto& raw : split(text, '\n')) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("line " + std::to_string(lineno) +
                                     ": expected 'key = value', got '" + line + "'");
        doc.entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return doc;
}

TextDoc TextDoc::load(const std::filesystem::path& path) {
    try {
        return parse(read_file(path));
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw std::runtime_error("missing CSV column '" + std::string(name) + "'");
}

bool CsvTable::has_column(std::string_view name) const {
    for (const auto& h : header)
        if (h == name) return true;
    return false;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::string text = read_file(path);
    auto lines = split(text, '\n');
    CsvTable table;
    std::size_t lineno = 0;
    for (const auto& raw : lines) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty()) continue;
        if (table.header.empty()) {
            for (auto& cell : split(line, ','))
                table.header.push_back(trim(cell));
            continue;
        }
        auto cells = split(line, ',');
        if (cells.size() != table.header.size())
            throw std::runtime_error(path.string() + " line " + std::to_string(lineno) + ": expected " +
                                     std::to_string(table.header.size()) + " fields, got " +
                                     std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& cell : cells)
            row.push_back(parse_double(cell, path.string() + " line " + std::to_string(lineno)));
        table.rows.push_back(std::move(row));
    }
    if (table.header.empty())
        throw std::runtime_error(path.string() + ": empty CSV");
    return table;
}

}  // namespace gfc::io
