#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cpscan/series.hpp"

namespace cpscan {

/// I/O failure (missing file, unwritable path).
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Single-column series files
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace detail

/// Reads one value per row; an optional header "x" on the first line is
/// skipped. NaN/Inf and non-numeric content are rejected with the line number.
inline std::vector<double> read_column_csv(std::istream& in) {
    std::vector<double> values;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string field = detail::trim(line);
        if (field.empty()) continue;
        if (line_no == 1 && (field == "x" || field == "\"x\"")) continue;
        std::size_t pos = 0;
        double v = 0.0;
        bool bad = false;
        try {
            v = std::stod(field, &pos);
        } catch (const std::exception&) {
            bad = true;
        }
        if (bad || pos != field.size() || !std::isfinite(v))
            throw input_error("line " + std::to_string(line_no) +
                              ": expected a finite number, got \"" + field + "\"");
        values.push_back(v);
    }
    return values;
}

inline std::vector<double> read_column_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open input file: " + path);
    return read_column_csv(in);
}

inline void write_column_csv(std::ostream& out, std::span<const double> values) {
    out << "x\n";
    char buf[40];
    for (double v : values) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf << "\n";
    }
}

// ---------------------------------------------------------------------------
// Result tables (experiment output)
// ---------------------------------------------------------------------------

using cell = std::variant<std::int64_t, double, std::string>;

/// A tidy table plus a provenance footer. Written as RFC-4180 CSV with the
/// footer appended as '#'-prefixed comment lines.
struct result_table {
    std::vector<std::string> columns;
    std::vector<std::vector<cell>> rows;
    std::vector<std::pair<std::string, std::string>> footer;

    void add_row(std::vector<cell> row) {
        if (row.size() != columns.size())
            throw std::logic_error("result_table: row width does not match header");
        rows.push_back(std::move(row));
    }
    void note(std::string key, std::string value) {
        footer.emplace_back(std::move(key), std::move(value));
    }
};

namespace detail {

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string format_cell(const cell& c) {
    struct visitor {
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(double v) const {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.10g", v);
            return buf;
        }
        std::string operator()(const std::string& v) const { return csv_escape(v); }
    };
    return std::visit(visitor{}, c);
}

} // namespace detail

inline void write_csv(std::ostream& out, const result_table& table) {
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        if (j) out << ',';
        out << detail::csv_escape(table.columns[j]);
    }
    out << "\r\n";
    for (const auto& row : table.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out << ',';
            out << detail::format_cell(row[j]);
        }
        out << "\r\n";
    }
    for (const auto& [key, value] : table.footer)
        out << "# " << key << ": " << value << "\r\n";
}

inline void write_csv(const std::string& path, const result_table& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open output file: " + path);
    write_csv(out, table);
    if (!out) throw io_error("failed writing output file: " + path);
}

} // namespace cpscan
