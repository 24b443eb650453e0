#include "mrpc/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

namespace mrpc::svg {

namespace {

constexpr double kPanelW = 320.0;
constexpr double kPanelH = 230.0;
constexpr double kMarginL = 58.0;
constexpr double kMarginR = 14.0;
constexpr double kMarginT = 28.0;
constexpr double kMarginB = 42.0;
constexpr double kTitleH = 34.0;
constexpr double kLegendW = 150.0;

const char* const kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e",
                                "#e6ab02", "#a6761d", "#666666", "#1f78b4", "#b2df8a"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

/// Roughly five round tick positions spanning [lo, hi].
std::vector<double> nice_ticks(double lo, double hi) {
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double f : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        step = f * mag;
        if (span / step <= 6.0) break;
    }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) {
        out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        } else if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

}  // namespace

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
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

std::string line_plot(const std::vector<Panel>& panels, const PlotSpec& spec) {
    const int np = std::max<int>(1, static_cast<int>(panels.size()));
    int cols = spec.columns > 0 ? spec.columns : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(np))));
    cols = std::min(cols, np);
    const int rows = (np + cols - 1) / cols;

    // Legend entries in order of first appearance across panels.
    std::vector<std::string> labels;
    for (const auto& p : panels) {
        for (const auto& s : p.series) {
            if (std::find(labels.begin(), labels.end(), s.label) == labels.end()) labels.push_back(s.label);
        }
    }
    auto color_of = [&](const std::string& label) {
        const auto i = static_cast<std::size_t>(std::find(labels.begin(), labels.end(), label) - labels.begin());
        return kPalette[i % (sizeof kPalette / sizeof *kPalette)];
    };

    Range yr;
    for (const auto& p : panels) {
        for (const auto& s : p.series) {
            for (double v : s.y) yr.add(v);
        }
    }
    yr.finish();

    const double width = cols * kPanelW + kLegendW;
    const double height = kTitleH + rows * kPanelH;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
       << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\" font-family=\"sans-serif\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << num(width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">"
       << escape(spec.title) << "</text>\n";

    for (int idx = 0; idx < static_cast<int>(panels.size()); ++idx) {
        const Panel& panel = panels[static_cast<std::size_t>(idx)];
        const double ox = (idx % cols) * kPanelW;
        const double oy = kTitleH + (idx / cols) * kPanelH;
        const double x0 = ox + kMarginL;
        const double x1 = ox + kPanelW - kMarginR;
        const double y0 = oy + kPanelH - kMarginB;
        const double y1 = oy + kMarginT;

        Range xr;
        for (const auto& s : panel.series) {
            for (double v : s.x) xr.add(v);
        }
        if (!panel.x_ticks.empty()) {
            xr.add(0.0);
            xr.add(static_cast<double>(panel.x_ticks.size() - 1));
        }
        xr.finish();
        const double pad = panel.x_ticks.empty() ? 0.0 : 0.3;
        const double xlo = xr.lo - pad;
        const double xhi = xr.hi + pad;
        auto sx = [&](double v) { return x0 + (v - xlo) / (xhi - xlo) * (x1 - x0); };
        auto sy = [&](double v) { return y0 - (v - yr.lo) / (yr.hi - yr.lo) * (y0 - y1); };

        os << "<g>\n<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\"" << num(x1 - x0)
           << "\" height=\"" << num(y0 - y1) << "\" fill=\"none\" stroke=\"#444\"/>\n";
        os << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(y1 - 8) << "\" text-anchor=\"middle\" font-size=\"12\">"
           << escape(panel.title) << "</text>\n";
        for (double t : nice_ticks(yr.lo, yr.hi)) {
            os << "<line x1=\"" << num(x0 - 4) << "\" y1=\"" << num(sy(t)) << "\" x2=\"" << num(x0) << "\" y2=\""
               << num(sy(t)) << "\" stroke=\"#444\"/>"
               << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(sy(t) + 4)
               << "\" text-anchor=\"end\" font-size=\"10\">" << tick_label(t) << "</text>\n";
        }
        if (!panel.x_ticks.empty()) {
            for (std::size_t i = 0; i < panel.x_ticks.size(); ++i) {
                const double px = sx(static_cast<double>(i));
                os << "<text x=\"" << num(px) << "\" y=\"" << num(y0 + 14) << "\" text-anchor=\"middle\" font-size=\"10\">"
                   << escape(panel.x_ticks[i]) << "</text>\n";
            }
        } else {
            for (double t : nice_ticks(xr.lo, xr.hi)) {
                os << "<line x1=\"" << num(sx(t)) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(sx(t)) << "\" y2=\""
                   << num(y0 + 4) << "\" stroke=\"#444\"/>"
                   << "<text x=\"" << num(sx(t)) << "\" y=\"" << num(y0 + 15)
                   << "\" text-anchor=\"middle\" font-size=\"10\">" << tick_label(t) << "</text>\n";
            }
        }
        os << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(y0 + 32)
           << "\" text-anchor=\"middle\" font-size=\"11\">" << escape(spec.x_label) << "</text>\n";
        os << "<text transform=\"translate(" << num(ox + 14) << ',' << num((y0 + y1) / 2)
           << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"11\">" << escape(spec.y_label) << "</text>\n";

        for (const auto& s : panel.series) {
            std::ostringstream pts;
            auto flush = [&]() {
                const std::string p = pts.str();
                if (!p.empty()) {
                    os << "<polyline fill=\"none\" stroke-width=\"1.6\" stroke=\"" << color_of(s.label)
                       << "\" points=\"" << p << "\"/>\n";
                }
                pts.str("");
            };
            const std::size_t n = std::min(s.x.size(), s.y.size());
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                    flush();
                    continue;
                }
                pts << num(sx(s.x[i])) << ',' << num(sy(s.y[i])) << ' ';
            }
            flush();
        }
        os << "</g>\n";
    }

    const double lx = cols * kPanelW + 10.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double ly = kTitleH + kMarginT + 18.0 * static_cast<double>(i);
        os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 22) << "\" y2=\"" << num(ly)
           << "\" stroke-width=\"2\" stroke=\"" << color_of(labels[i]) << "\"/>"
           << "<text x=\"" << num(lx + 28) << "\" y=\"" << num(ly + 4) << "\" font-size=\"11\">" << escape(labels[i])
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

double silverman_bandwidth(const std::vector<double>& sample) {
    const std::size_t n = sample.size();
    if (n < 2) return 1.0;
    double mean = 0.0;
    for (double v : sample) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : sample) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) return 1.0;
    return 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
}

std::vector<double> kde(const std::vector<double>& sample, const std::vector<double>& grid, double bandwidth) {
    std::vector<double> out(grid.size(), 0.0);
    if (sample.empty()) return out;
    const double norm = 1.0 / (static_cast<double>(sample.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double acc = 0.0;
        for (double v : sample) {
            const double z = (grid[g] - v) / bandwidth;
            acc += std::exp(-0.5 * z * z);
        }
        out[g] = acc * norm;
    }
    return out;
}

std::vector<double> kde_grid(const std::vector<double>& sample, double bandwidth, int points) {
    if (sample.empty() || points < 2) return {};
    const auto [lo_it, hi_it] = std::minmax_element(sample.begin(), sample.end());
    const double lo = *lo_it - 3.0 * bandwidth;
    const double hi = *hi_it + 3.0 * bandwidth;
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
    return out;
}

}  // namespace mrpc::svg
