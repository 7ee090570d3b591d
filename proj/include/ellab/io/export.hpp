#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "ellab/error.hpp"
#include "ellab/io/field_io.hpp"
#include "ellab/io/report.hpp"
#include "ellab/io/svg.hpp"

namespace ellab::io {

namespace detail {

inline std::string file_stem(const std::string& name) {
    std::string out;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
        out += ok ? c : '_';
    }
    return out.empty() ? "table" : out;
}

inline std::string csv_cell(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", *d);
        return buf;
    }
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + p.string());
    out << text;
    out.flush();
    if (!out) fail(ErrorCode::IoError, "write failed for " + p.string());
}

} // namespace detail

inline std::string table_csv(const Table& t) {
    std::string s;
    for (size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + detail::csv_cell(t.columns[i]);
    s += "\n";
    for (const auto& r : t.rows) {
        for (size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + detail::csv_cell(r[i]);
        s += "\n";
    }
    return s;
}

/// Writes report.json, one CSV per table and one SVG per rate-fit table;
/// returns the written paths.
inline std::vector<std::filesystem::path> export_report(const Report& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) fail(ErrorCode::IoError, "cannot create output directory " + dir.string());
    std::vector<std::filesystem::path> written;
    const auto json_path = dir / "report.json";
    detail::write_text(json_path, report_to_json(r).dump(2) + "\n");
    written.push_back(json_path);
    for (const auto& t : r.tables) {
        const std::string stem = detail::file_stem(t.name);
        const auto csv = dir / (stem + ".csv");
        detail::write_text(csv, table_csv(t));
        written.push_back(csv);
        if (t.fit) {
            const auto svg = dir / (stem + ".plots.svg");
            detail::write_text(svg, render_rate_svg(t));
            written.push_back(svg);
        }
    }
    return written;
}

} // namespace ellab::io
