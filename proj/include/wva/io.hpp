#pragma once

// CSV tables and minimal SVG renderers for the figure outputs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wva/errors.hpp"

namespace wva::io {

// 17 significant digits round-trip every double; non-finite values print as nan/inf.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

using Cell = std::variant<double, long long, std::string>;

// Comma-separated table, header first, LF line endings.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::initializer_list<Cell> cells) { add_row(std::vector<Cell>(cells)); }

    void add_row(const std::vector<Cell>& cells) {
        if (cells.size() != header_.size())
            throw Error("CsvTable: row width does not match header");
        std::string line;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) line += ',';
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) line += format_number(v);
                    else if constexpr (std::is_same_v<T, long long>) line += std::to_string(v);
                    else line += v;
                },
                cells[i]);
        }
        rows_.push_back(std::move(line));
    }

    std::size_t rows() const { return rows_.size(); }

    std::string str() const {
        std::string out;
        for (std::size_t i = 0; i < header_.size(); ++i) {
            if (i) out += ',';
            out += header_[i];
        }
        out += '\n';
        for (const auto& r : rows_) {
            out += r;
            out += '\n';
        }
        return out;
    }

private:
    std::vector<std::string> header_;
    std::vector<std::string> rows_;
};

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create output directory '" + dir.string() + "'");
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f << text;
    f.flush();
    if (!f) throw IoError("write to '" + path.string() + "' failed");
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

// Monotone piecewise-linear map from sample values to pixel positions, so
// log-spaced samples get evenly spaced cells.
class AxisMap {
public:
    AxisMap(std::vector<double> samples, double pixel_lo, double pixel_hi)
        : samples_(std::move(samples)), lo_(pixel_lo), hi_(pixel_hi) {
        std::sort(samples_.begin(), samples_.end());
        samples_.erase(std::unique(samples_.begin(), samples_.end()), samples_.end());
    }

    std::size_t size() const { return samples_.size(); }
    double cell() const { return (hi_ - lo_) / std::max<std::size_t>(samples_.size(), 1); }

    // Pixel center of sample value v (interpolated between samples, clamped).
    double operator()(double v) const {
        if (samples_.empty()) return lo_;
        if (samples_.size() == 1 || v <= samples_.front()) return lo_ + 0.5 * cell();
        if (v >= samples_.back()) return hi_ - 0.5 * cell();
        const auto it = std::upper_bound(samples_.begin(), samples_.end(), v);
        const std::size_t j = static_cast<std::size_t>(it - samples_.begin());
        const double a = samples_[j - 1];
        const double b = samples_[j];
        const double frac = (v - a) / (b - a);
        return lo_ + (static_cast<double>(j - 1) + 0.5 + frac) * cell();
    }

private:
    std::vector<double> samples_;
    double lo_;
    double hi_;
};

inline std::string color_ramp(double t) {
    static constexpr double stops[5][3] = {
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
    if (!std::isfinite(t)) return "#808080";
    t = std::clamp(t, 0.0, 1.0) * 4.0;
    const int i = std::min(3, static_cast<int>(t));
    const double f = t - i;
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                  static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                  static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                  static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
    return buf;
}

struct Polyline {
    std::vector<std::pair<double, double>> points;  // (x, y) in data units
    std::string stroke = "white";
    std::string dash;                               // stroke-dasharray, empty for solid
    std::string label;
};

struct Heatmap {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<double> x;  // columns
    std::vector<double> y;  // rows
    std::vector<double> z;  // row-major, z[iy * x.size() + ix]
    std::vector<Polyline> overlays;
};

inline std::string render_heatmap(const Heatmap& h) {
    constexpr double W = 640, H = 480, L = 70, R = 20, T = 40, B = 60;
    const AxisMap xm(h.x, L, W - R);
    const AxisMap ym(h.y, H - B, T);
    double zmin = INFINITY, zmax = -INFINITY;
    for (double v : h.z)
        if (std::isfinite(v)) zmin = std::min(zmin, v), zmax = std::max(zmax, v);
    const double span = (zmax > zmin) ? zmax - zmin : 1.0;

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\">" << h.title << "</text>\n";
    const double cw = std::abs(xm.cell());
    const double ch = std::abs(ym.cell());
    for (std::size_t iy = 0; iy < h.y.size(); ++iy) {
        for (std::size_t ix = 0; ix < h.x.size(); ++ix) {
            const double v = h.z[iy * h.x.size() + ix];
            s << "<rect x=\"" << format_number(xm(h.x[ix]) - 0.5 * cw) << "\" y=\""
              << format_number(ym(h.y[iy]) - 0.5 * ch) << "\" width=\"" << format_number(cw)
              << "\" height=\"" << format_number(ch) << "\" fill=\""
              << color_ramp((v - zmin) / span) << "\"/>\n";
        }
    }
    for (const auto& line : h.overlays) {
        s << "<polyline fill=\"none\" stroke=\"" << line.stroke << "\" stroke-width=\"1.5\"";
        if (!line.dash.empty()) s << " stroke-dasharray=\"" << line.dash << "\"";
        s << " points=\"";
        for (const auto& [x, y] : line.points)
            if (std::isfinite(x) && std::isfinite(y))
                s << format_number(xm(x)) << ',' << format_number(ym(y)) << ' ';
        s << "\"><title>" << line.label << "</title></polyline>\n";
    }
    s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
      << h.x_label << "</text>\n";
    s << "<text x=\"15\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << (T + H - B) / 2 << ")\">" << h.y_label << "</text>\n";
    s << "<text x=\"" << L << "\" y=\"" << H - 35 << "\">" << format_number(h.x.empty() ? 0 : h.x.front())
      << "</text>\n<text x=\"" << W - R << "\" y=\"" << H - 35 << "\" text-anchor=\"end\">"
      << format_number(h.x.empty() ? 0 : h.x.back()) << "</text>\n";
    s << "<text x=\"" << W - R << "\" y=\"" << T - 5 << "\" text-anchor=\"end\">color: "
      << format_number(zmin) << " .. " << format_number(zmax) << "</text>\n";
    s << "</svg>\n";
    return s.str();
}

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = true;
    bool log_y = true;
    std::vector<Polyline> series;
};

inline std::string render_lineplot(const LinePlot& p) {
    constexpr double W = 640, H = 480, L = 70, R = 20, T = 40, B = 60;
    auto tx = [&](double v) { return p.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return p.log_y ? std::log10(v) : v; };
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : p.series)
        for (const auto& [x, y] : s.points) {
            const double a = tx(x), b = ty(y);
            if (!std::isfinite(a) || !std::isfinite(b)) continue;
            x0 = std::min(x0, a), x1 = std::max(x1, a), y0 = std::min(y0, b), y1 = std::max(y1, b);
        }
    if (!(x1 > x0)) x1 = x0 + 1;
    if (!(y1 > y0)) y1 = y0 + 1;
    auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - T - B); };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
      << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\">" << p.title << "</text>\n";
    double legend_y = T + 15;
    for (const auto& line : p.series) {
        s << "<polyline fill=\"none\" stroke=\"" << line.stroke << "\" stroke-width=\"1.5\"";
        if (!line.dash.empty()) s << " stroke-dasharray=\"" << line.dash << "\"";
        s << " points=\"";
        for (const auto& [x, y] : line.points)
            if (std::isfinite(tx(x)) && std::isfinite(ty(y)))
                s << format_number(px(x)) << ',' << format_number(py(y)) << ' ';
        s << "\"/>\n";
        s << "<text x=\"" << L + 10 << "\" y=\"" << legend_y << "\" fill=\"" << line.stroke << "\">"
          << line.label << "</text>\n";
        legend_y += 15;
    }
    s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
      << p.x_label << (p.log_x ? " (log)" : "") << "</text>\n";
    s << "<text x=\"15\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << (T + H - B) / 2 << ")\">" << p.y_label << (p.log_y ? " (log)" : "") << "</text>\n";
    s << "</svg>\n";
    return s.str();
}

}  // namespace wva::io
