#pragma once

// Minimal reader/writer for the plain comma-separated files this project
// exchanges. Fields are never quoted in these formats, so a quoted field is
// rejected rather than half-supported.

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "oascen/errors.hpp"

namespace oascen::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line per row

    /// Column index for `name`; throws ParseError if absent.
    [[nodiscard]] std::size_t column(const std::string& name) const {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return c;
        throw ParseError("csv: missing column '" + name + "'");
    }
};

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        auto field = trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (!field.empty() && field.front() == '"') throw ParseError("csv: quoted fields are not supported");
        out.emplace_back(field);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline Table parse(std::istream& in) {
    Table t;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto fields = split_line(line);
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size())
            throw ParseError("csv: line " + std::to_string(lineno) + " has " + std::to_string(fields.size()) +
                             " fields, expected " + std::to_string(t.header.size()));
        t.rows.push_back(std::move(fields));
        t.line_numbers.push_back(lineno);
    }
    if (!have_header) throw ParseError("csv: empty input");
    return t;
}

inline Table parse(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

inline Table read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return parse(in);
}

inline double to_double(std::string_view s, const std::string& where) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        throw ParseError(where + ": not a finite number: '" + std::string(s) + "'");
    return v;
}

inline long long to_int(std::string_view s, const std::string& where) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError(where + ": not an integer: '" + std::string(s) + "'");
    return v;
}

/// Shortest representation that parses back to the same double.
inline std::string fmt(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

/// Accumulates rows and writes them out in one go.
class Writer {
public:
    explicit Writer(std::vector<std::string> header) : ncols_(header.size()) { row(header); }

    template <class... Fields>
    void add(const Fields&... fields) {
        std::vector<std::string> r{cell(fields)...};
        row(r);
    }

    [[nodiscard]] const std::string& str() const { return out_; }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw IoError("cannot write '" + path + "'");
        f << out_;
        if (!f) throw IoError("write failed for '" + path + "'");
    }

private:
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    static std::string cell(double v) { return fmt(v); }
    template <class I>
        requires std::is_integral_v<I>
    static std::string cell(I v) {
        return std::to_string(v);
    }

    void row(const std::vector<std::string>& r) {
        if (r.size() != ncols_) throw DimensionMismatch("csv writer: wrong field count");
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (c) out_ += ',';
            out_ += r[c];
        }
        out_ += '\n';
    }

    std::size_t ncols_;
    std::string out_;
};

}  // namespace oascen::csv
