#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <deque>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ellab/error.hpp"
#include "ellab/experiments.hpp"

namespace ellab::io {

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    /// Rate-fit tables carry the fit and the columns it was fitted on.
    std::optional<RateFit> fit;
    std::string x_column, y_column;

    size_t add_row(std::vector<Cell> row) {
        require(row.size() == columns.size(), ErrorCode::ShapeMismatch, "row width does not match table " + name);
        rows.push_back(std::move(row));
        return rows.size() - 1;
    }
    [[nodiscard]] int column(const std::string& c) const {
        for (size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == c) return static_cast<int>(i);
        fail(ErrorCode::InvalidArgument, "table " + name + " has no column " + c);
    }
    [[nodiscard]] std::vector<double> numeric_column(const std::string& c) const {
        const auto ci = static_cast<size_t>(column(c));
        std::vector<double> out;
        for (const auto& r : rows) {
            if (const auto* d = std::get_if<double>(&r[ci])) out.push_back(*d);
            else if (const auto* i = std::get_if<long long>(&r[ci])) out.push_back(static_cast<double>(*i));
            else fail(ErrorCode::InvalidArgument, "column " + c + " is not numeric");
        }
        return out;
    }
};

/// A pass/fail decision tied to one row of one table.
struct Verdict {
    std::string name;
    bool pass = false;
    std::string table;
    size_t row = 0;
    double value = 0.0;
    double threshold = 0.0;
    std::string comparator;  // "<=", ">=", "<", ">", "=="
    std::string detail;
};

struct Report {
    std::string kind, study;
    std::uint64_t seed = 0;
    nlohmann::json config;
    std::deque<Table> tables;  // stable references across add_table
    std::vector<Verdict> verdicts;
    double wall_clock_s = 0.0;
    std::string started_at;

    [[nodiscard]] bool all_pass() const {
        if (verdicts.empty()) return false;
        for (const auto& v : verdicts)
            if (!v.pass) return false;
        return true;
    }
    Table& add_table(std::string name, std::vector<std::string> columns) {
        Table t;
        t.name = std::move(name);
        t.columns = std::move(columns);
        tables.push_back(std::move(t));
        return tables.back();
    }
    [[nodiscard]] const Table* find_table(const std::string& name) const {
        for (const auto& t : tables)
            if (t.name == name) return &t;
        return nullptr;
    }
};

/// Verdict value <= threshold (or >=); non-finite values never pass.
inline Verdict compare(std::string name, const std::string& table, size_t row, double value, const std::string& op,
                       double threshold, std::string detail = {}) {
    Verdict v;
    v.name = std::move(name);
    v.table = table;
    v.row = row;
    v.value = value;
    v.threshold = threshold;
    v.comparator = op;
    v.detail = std::move(detail);
    if (!std::isfinite(value)) v.pass = false;
    else if (op == "<=") v.pass = value <= threshold;
    else if (op == ">=") v.pass = value >= threshold;
    else if (op == "<") v.pass = value < threshold;
    else if (op == ">") v.pass = value > threshold;
    else if (op == "==") v.pass = value == threshold;
    else fail(ErrorCode::InvalidArgument, "unknown comparator " + op);
    return v;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace detail {

inline nlohmann::json cell_json(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) {
        return std::isfinite(*d) ? nlohmann::json(*d) : nlohmann::json(nullptr);
    }
    if (const auto* i = std::get_if<long long>(&c)) return *i;
    return std::get<std::string>(c);
}

inline nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

} // namespace detail

inline nlohmann::json report_to_json(const Report& r) {
    using nlohmann::json;
    json j;
    j["schema_version"] = 1;
    j["kind"] = r.kind;
    j["study"] = r.study;
    j["seed"] = r.seed;
    j["config"] = r.config;
    json tables = json::array();
    for (const auto& t : r.tables) {
        json jt;
        jt["name"] = t.name;
        jt["columns"] = t.columns;
        json rows = json::array();
        for (const auto& row : t.rows) {
            json jr = json::array();
            for (const auto& c : row) jr.push_back(detail::cell_json(c));
            rows.push_back(std::move(jr));
        }
        jt["rows"] = std::move(rows);
        if (t.fit) {
            jt["fit"] = {{"x", t.x_column},
                         {"y", t.y_column},
                         {"slope", detail::finite_or_null(t.fit->slope)},
                         {"intercept", detail::finite_or_null(t.fit->intercept)},
                         {"max_residual", detail::finite_or_null(t.fit->max_residual)}};
        }
        tables.push_back(std::move(jt));
    }
    j["tables"] = std::move(tables);
    json verdicts = json::array();
    for (const auto& v : r.verdicts) {
        verdicts.push_back({{"name", v.name},
                            {"pass", v.pass},
                            {"table", v.table},
                            {"row", v.row},
                            {"value", detail::finite_or_null(v.value)},
                            {"threshold", detail::finite_or_null(v.threshold)},
                            {"comparator", v.comparator},
                            {"detail", v.detail}});
    }
    j["verdicts"] = std::move(verdicts);
    j["all_pass"] = r.all_pass();
    j["wall_clock_s"] = r.wall_clock_s;
    j["started_at"] = r.started_at;
    return j;
}

} // namespace ellab::io
