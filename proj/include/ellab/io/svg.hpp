#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "ellab/error.hpp"
#include "ellab/io/report.hpp"

namespace ellab::io {

/// Plot frame in pixels; data map to the inner box affinely in natural logs.
struct SvgLayout {
    static constexpr double width = 640.0;
    static constexpr double height = 480.0;
    static constexpr double margin = 64.0;
};

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

inline std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace detail

/// Log-log scatter of the fitted columns with the fitted line over the data
/// range. Points are small circles; the fit is the path with id "fit".
inline std::string render_rate_svg(const Table& t) {
    require(t.fit.has_value(), ErrorCode::InvalidArgument, "table " + t.name + " has no rate fit");
    const auto xs = t.numeric_column(t.x_column);
    const auto ys = t.numeric_column(t.y_column);
    std::vector<double> lx, ly;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] > 0.0 && ys[i] > 0.0) {
            lx.push_back(std::log(xs[i]));
            ly.push_back(std::log(ys[i]));
        }
    }
    require(!lx.empty(), ErrorCode::NonPositiveData, "no positive points to plot in " + t.name);
    double x0 = *std::min_element(lx.begin(), lx.end());
    double x1 = *std::max_element(lx.begin(), lx.end());
    const double fy0 = t.fit->slope * x0 + t.fit->intercept;
    const double fy1 = t.fit->slope * x1 + t.fit->intercept;
    double y0 = std::min({*std::min_element(ly.begin(), ly.end()), fy0, fy1});
    double y1 = std::max({*std::max_element(ly.begin(), ly.end()), fy0, fy1});
    if (x1 - x0 < 1e-12) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if (y1 - y0 < 1e-12) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    constexpr double w = SvgLayout::width, h = SvgLayout::height, m = SvgLayout::margin;
    auto px = [&](double lxv) { return m + (lxv - x0) / (x1 - x0) * (w - 2.0 * m); };
    auto py = [&](double lyv) { return m + (y1 - lyv) / (y1 - y0) * (h - 2.0 * m); };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::num(w) + "\" height=\"" + detail::num(h) +
         "\" viewBox=\"0 0 " + detail::num(w) + " " + detail::num(h) + "\">\n";
    s += "<title>" + detail::escape_xml(t.name) + "</title>\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<path id=\"axes\" d=\"M " + detail::num(m) + " " + detail::num(m) + " L " + detail::num(m) + " " +
         detail::num(h - m) + " L " + detail::num(w - m) + " " + detail::num(h - m) +
         "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    for (size_t i = 0; i < lx.size(); ++i) {
        s += "<circle class=\"point\" cx=\"" + detail::num(px(lx[i])) + "\" cy=\"" + detail::num(py(ly[i])) +
             "\" r=\"4\" fill=\"steelblue\"/>\n";
    }
    s += "<path id=\"fit\" d=\"M " + detail::num(px(x0)) + " " + detail::num(py(fy0)) + " L " + detail::num(px(x1)) + " " +
         detail::num(py(fy1)) + "\" fill=\"none\" stroke=\"firebrick\" stroke-width=\"1.5\"/>\n";
    char label[128];
    std::snprintf(label, sizeof label, "slope %.4f", t.fit->slope);
    s += "<text x=\"" + detail::num(m) + "\" y=\"" + detail::num(m / 2.0) + "\" font-size=\"14\">" +
         detail::escape_xml(t.name) + ": " + label + "</text>\n";
    s += "<text x=\"" + detail::num(w / 2.0) + "\" y=\"" + detail::num(h - m / 3.0) +
         "\" font-size=\"12\" text-anchor=\"middle\">log " + detail::escape_xml(t.x_column) + "</text>\n";
    s += "<text x=\"" + detail::num(m / 3.0) + "\" y=\"" + detail::num(h / 2.0) + "\" font-size=\"12\">log " +
         detail::escape_xml(t.y_column) + "</text>\n";
    s += "</svg>\n";
    return s;
}

} // namespace ellab::io
