#include "cotlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "cotlab/model_io.hpp"

namespace cotlab {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.6g", value);
  return buffer;
}

std::string escape_text(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(std::span<const SvgSeries> series,
                       const SvgOptions& options) {
  const double left = 70, right = 160, top = 40, bottom = 50;
  const double plot_w = options.width - left - right;
  const double plot_h = options.height - top - bottom;

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double y = s.y[i];
      if (options.log_y && y <= 0.0) continue;
      if (options.log_y) y = std::log10(y);
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  const bool has_data = x_min <= x_max;
  if (!has_data) {
    x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;

  auto to_px_x = [&](double x) {
    return left + (x - x_min) / (x_max - x_min) * plot_w;
  };
  auto to_px_y = [&](double y) {
    if (options.log_y) y = std::log10(y);
    return top + plot_h - (y - y_min) / (y_max - y_min) * plot_h;
  };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(options.width) + "\" height=\"" +
         std::to_string(options.height) + "\" viewBox=\"0 0 " +
         std::to_string(options.width) + " " + std::to_string(options.height) +
         "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!options.title.empty()) {
    out += "<text x=\"" + num(left + plot_w / 2) +
           "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"15\">" +
           escape_text(options.title) + "</text>\n";
  }

  // Axes.
  out += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" +
         num(left) + "\" y2=\"" + num(top + plot_h) +
         "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + num(left) + "\" y1=\"" + num(top + plot_h) +
         "\" x2=\"" + num(left + plot_w) + "\" y2=\"" + num(top + plot_h) +
         "\" stroke=\"black\"/>\n";

  const int n_ticks = 5;
  for (int i = 0; i <= n_ticks; ++i) {
    const double fx = x_min + (x_max - x_min) * i / n_ticks;
    const double px = to_px_x(fx);
    out += "<line x1=\"" + num(px) + "\" y1=\"" + num(top + plot_h) +
           "\" x2=\"" + num(px) + "\" y2=\"" + num(top + plot_h + 5) +
           "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(px) + "\" y=\"" + num(top + plot_h + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           num(fx) + "</text>\n";

    const double fy = y_min + (y_max - y_min) * i / n_ticks;
    const double py = top + plot_h - plot_h * i / n_ticks;
    out += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(py) + "\" x2=\"" +
           num(left) + "\" y2=\"" + num(py) + "\" stroke=\"black\"/>\n";
    const double label = options.log_y ? std::pow(10.0, fy) : fy;
    out += "<text x=\"" + num(left - 8) + "\" y=\"" + num(py + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           num(label) + "</text>\n";
  }
  if (!options.x_label.empty()) {
    out += "<text x=\"" + num(left + plot_w / 2) + "\" y=\"" +
           num(top + plot_h + 38) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\">" +
           escape_text(options.x_label) + "</text>\n";
  }
  if (!options.y_label.empty()) {
    out += "<text x=\"16\" y=\"" + num(top + plot_h / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\" transform=\"rotate(-90 16 " +
           num(top + plot_h / 2) + ")\">" +
           escape_text(options.y_label) + "</text>\n";
  }

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::string points;
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (options.log_y && series[s].y[i] <= 0.0) continue;
      if (!points.empty()) points += ' ';
      points += num(to_px_x(series[s].x[i])) + "," + num(to_px_y(series[s].y[i]));
    }
    if (!points.empty()) {
      out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    }
    const double ly = top + 14 + 16 * static_cast<double>(s);
    out += "<line x1=\"" + num(left + plot_w + 10) + "\" y1=\"" + num(ly - 4) +
           "\" x2=\"" + num(left + plot_w + 30) + "\" y2=\"" + num(ly - 4) +
           "\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
    out += "<text x=\"" + num(left + plot_w + 35) + "\" y=\"" + num(ly) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" +
           escape_text(series[s].label) + "</text>\n";
  }

  out += "</svg>\n";
  return out;
}

void write_svg(std::span<const SvgSeries> series, const SvgOptions& options,
               const std::string& path) {
  write_file(path, render_svg(series, options));
}

}  // namespace cotlab
