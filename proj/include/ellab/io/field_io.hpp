#pragma once

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ellab/error.hpp"
#include "ellab/field.hpp"
#include "ellab/grid.hpp"

namespace ellab::io {

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

/// CSV: header "x,c0,...,c{k-1}", one row per interior node.
inline void save_field(const Field& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path);
    out << "x";
    for (int c = 0; c < f.k(); ++c) out << ",c" << c;
    out << "\n";
    for (int j = 0; j < f.n(); ++j) {
        out << format_double(f.grid().node(j));
        for (int c = 0; c < f.k(); ++c) {
            char buf[40];
            // 17 significant digits: every stored double survives the round trip
            std::snprintf(buf, sizeof buf, "%.17g", f(j, c));
            out << "," << buf;
        }
        out << "\n";
    }
    if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

namespace detail {

inline double parse_cell(const std::string& s, size_t line) {
    if (s.empty()) fail(ErrorCode::FormatError, "line " + std::to_string(line) + ": empty cell");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
        fail(ErrorCode::FormatError, "line " + std::to_string(line) + ": not a finite number '" + s + "'");
    }
    return v;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace detail

/// Reads a field; the grid is inferred from the node column unless given,
/// in which case the nodes must match it.
inline Field load_field(const std::string& path, const std::optional<SpatialGrid>& grid = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::FormatError, path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = detail::split_csv(line);
    if (header.size() < 2 || header[0] != "x") fail(ErrorCode::FormatError, path + ": header must be x,c0,...");
    const int k = static_cast<int>(header.size()) - 1;
    for (int c = 0; c < k; ++c) {
        if (header[static_cast<size_t>(c + 1)] != "c" + std::to_string(c)) {
            fail(ErrorCode::FormatError, path + ": header column " + std::to_string(c + 1) + " must be c" + std::to_string(c));
        }
    }
    std::vector<double> xs;
    std::vector<std::vector<double>> rows;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = detail::split_csv(line);
        if (static_cast<int>(cells.size()) != k + 1) {
            fail(ErrorCode::FormatError, path + ": line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                                             " columns, expected " + std::to_string(k + 1));
        }
        xs.push_back(detail::parse_cell(cells[0], lineno));
        std::vector<double> r;
        for (int c = 0; c < k; ++c) r.push_back(detail::parse_cell(cells[static_cast<size_t>(c + 1)], lineno));
        rows.push_back(std::move(r));
    }
    if (rows.empty()) fail(ErrorCode::FormatError, path + ": no data rows");
    const int n = static_cast<int>(rows.size());
    SpatialGrid g;
    if (grid) {
        g = *grid;
        if (g.n_interior() != n) fail(ErrorCode::FormatError, path + ": row count does not match the grid");
        for (int j = 0; j < n; ++j) {
            if (std::abs(xs[static_cast<size_t>(j)] - g.node(j)) > 1e-9 * g.length()) {
                fail(ErrorCode::FormatError, path + ": node " + std::to_string(j) + " does not match the grid");
            }
        }
    } else {
        const double h = xs.back() / n;
        for (int j = 0; j < n; ++j) {
            if (std::abs(xs[static_cast<size_t>(j)] - (j + 1) * h) > 1e-9 * (n + 1) * h) {
                fail(ErrorCode::FormatError, path + ": nodes are not uniform interior nodes");
            }
        }
        g = SpatialGrid(h * (n + 1), n);
    }
    Eigen::MatrixXd v(n, k);
    for (int j = 0; j < n; ++j)
        for (int c = 0; c < k; ++c) v(j, c) = rows[static_cast<size_t>(j)][static_cast<size_t>(c)];
    return Field(g, std::move(v));
}

} // namespace ellab::io
