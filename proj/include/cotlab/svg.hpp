#pragma once

#include <span>
#include <string>
#include <vector>

namespace cotlab {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct SvgOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;  // points with y <= 0 are dropped in log mode
  int width = 800;
  int height = 500;
};

// Self-contained line chart (no external resources), deterministic bytes for
// identical inputs.
std::string render_svg(std::span<const SvgSeries> series,
                       const SvgOptions& options);

void write_svg(std::span<const SvgSeries> series, const SvgOptions& options,
               const std::string& path);

}  // namespace cotlab
