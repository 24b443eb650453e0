#pragma once

#include <string>
#include <vector>

namespace mrpc::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct Panel {
    std::string title;
    std::vector<Series> series;
    std::vector<std::string> x_ticks;  // optional categorical labels at x = 0, 1, ...
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    int columns = 0;  // panels per row; 0 picks a near-square layout
};

/// Grid of line-chart panels with a shared legend; non-finite points break polylines.
std::string line_plot(const std::vector<Panel>& panels, const PlotSpec& spec);

/// 1.06 * sd * n^(-1/5); falls back to 1 for degenerate samples.
double silverman_bandwidth(const std::vector<double>& sample);
/// Gaussian kernel density estimate evaluated on `grid`.
std::vector<double> kde(const std::vector<double>& sample, const std::vector<double>& grid, double bandwidth);
/// Evenly spaced grid covering the sample padded by three bandwidths.
std::vector<double> kde_grid(const std::vector<double>& sample, double bandwidth, int points = 200);

std::string escape(const std::string& text);

}  // namespace mrpc::svg
