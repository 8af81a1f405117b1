#include "hcd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

namespace hcd {
namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 790.0;   // legend lives to the right of this
constexpr double kTop = 40.0;
constexpr double kBottom = 545.0;

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v, const char* format = "%.2f") {
    char buf[48];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

std::string escape_xml(const std::string& s) {
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

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

// {1,2,5}*10^k tick spacing aiming for ~6 intervals.
std::vector<double> nice_ticks(const Range& range) {
    const double span = range.hi - range.lo;
    if (!(span > 0.0)) return {range.lo};
    const double raw_step = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw_step)));
    double step = 10.0 * mag;
    for (double mult : {1.0, 2.0, 5.0}) {
        if (mult * mag >= raw_step) {
            step = mult * mag;
            break;
        }
    }
    std::vector<double> ticks;
    double t = std::ceil(range.lo / step) * step;
    for (; t <= range.hi + 0.5 * step; t += step) {
        if (std::abs(t) < 1e-12 * step) t = 0.0;
        ticks.push_back(t);
    }
    return ticks;
}

double x_value(const EpochMetrics& row, Axis axis) {
    return axis == Axis::Epoch ? static_cast<double>(row.epoch) : row.elapsed_s;
}

} // namespace

void emit_plot(const std::vector<Curve>& curves, Axis x_axis,
               const std::filesystem::path& path) {
    if (curves.empty()) throw std::invalid_argument("emit_plot: no curves");
    for (const Curve& curve : curves)
        if (curve.metrics.empty())
            throw std::invalid_argument("emit_plot: curve '" + curve.label + "' is empty");

    Range xr{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    Range yr = xr;
    bool any_finite_y = false;
    for (const Curve& curve : curves) {
        for (const EpochMetrics& row : curve.metrics) {
            const double x = x_value(row, x_axis);
            xr.lo = std::min(xr.lo, x);
            xr.hi = std::max(xr.hi, x);
            if (std::isfinite(row.ln_loss)) {
                yr.lo = std::min(yr.lo, row.ln_loss);
                yr.hi = std::max(yr.hi, row.ln_loss);
                any_finite_y = true;
            }
        }
    }
    if (!any_finite_y) {
        yr = {-1.0, 1.0};
    } else if (yr.hi == yr.lo) {
        yr.lo -= 1.0;
        yr.hi += 1.0;
    } else {
        const double pad = 0.05 * (yr.hi - yr.lo);
        yr.lo -= pad;
        yr.hi += pad;
    }
    if (xr.hi == xr.lo) {
        xr.lo -= 1.0;
        xr.hi += 1.0;
    }

    const auto to_px_x = [&](double x) {
        return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * (kRight - kLeft);
    };
    // -inf (zero loss) is clipped to the bottom edge of the plot area.
    const auto to_px_y = [&](double y) {
        if (y == -std::numeric_limits<double>::infinity() || std::isnan(y)) return kBottom;
        if (y == std::numeric_limits<double>::infinity()) return kTop;
        const double py = kBottom - (y - yr.lo) / (yr.hi - yr.lo) * (kBottom - kTop);
        return std::clamp(py, kTop, kBottom);
    };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";

    for (double t : nice_ticks(xr)) {
        const double px = to_px_x(t);
        out << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(px)
            << "\" y2=\"" << fmt(kBottom) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(kBottom + 18.0)
            << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
            << fmt(t, "%.6g") << "</text>\n";
    }
    for (double t : nice_ticks(yr)) {
        const double py = to_px_y(t);
        out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(kRight)
            << "\" y2=\"" << fmt(py) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << fmt(kLeft - 8.0) << "\" y=\"" << fmt(py + 4.0)
            << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">"
            << fmt(t, "%.6g") << "</text>\n";
    }

    out << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\""
        << fmt(kRight - kLeft) << "\" height=\"" << fmt(kBottom - kTop)
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

    const char* x_label = x_axis == Axis::Epoch ? "epoch" : "elapsed seconds";
    out << "<text x=\"" << fmt((kLeft + kRight) / 2.0) << "\" y=\"" << fmt(kHeight - 12.0)
        << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">" << x_label
        << "</text>\n";
    out << "<text x=\"18\" y=\"" << fmt((kTop + kBottom) / 2.0)
        << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 18 "
        << fmt((kTop + kBottom) / 2.0) << ")\">ln loss</text>\n";

    for (std::size_t c = 0; c < curves.size(); ++c) {
        const char* color = kPalette[c % (sizeof(kPalette) / sizeof(kPalette[0]))];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (const EpochMetrics& row : curves[c].metrics) {
            if (!first) out << ' ';
            first = false;
            out << fmt(to_px_x(x_value(row, x_axis))) << ',' << fmt(to_px_y(row.ln_loss));
        }
        out << "\"/>\n";

        const double ly = kTop + 10.0 + 20.0 * static_cast<double>(c);
        out << "<line x1=\"" << fmt(kRight + 12.0) << "\" y1=\"" << fmt(ly) << "\" x2=\""
            << fmt(kRight + 40.0) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << fmt(kRight + 46.0) << "\" y=\"" << fmt(ly + 4.0)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(curves[c].label)
            << "</text>\n";
    }

    out << "</svg>\n";
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

} // namespace hcd
