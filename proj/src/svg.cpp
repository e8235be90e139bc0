#include "heartradar/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "heartradar/errors.hpp"

namespace heartradar::svg {

namespace {

constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 30;
constexpr int kMarginBottom = 45;
constexpr std::size_t kMaxBuckets = 1500;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Keeps the first, minimum and maximum sample of each bucket in time order
// so narrow peaks survive the decimation.
Line decimate(const Line& line) {
  const std::size_t n = std::min(line.x.size(), line.y.size());
  if (n <= 2 * kMaxBuckets) return line;
  Line out;
  out.color = line.color;
  out.label = line.label;
  for (std::size_t b = 0; b < kMaxBuckets; ++b) {
    const std::size_t lo = b * n / kMaxBuckets;
    const std::size_t hi = (b + 1) * n / kMaxBuckets;
    std::size_t imin = lo;
    std::size_t imax = lo;
    for (std::size_t i = lo; i < hi; ++i) {
      if (line.y[i] < line.y[imin]) imin = i;
      if (line.y[i] > line.y[imax]) imax = i;
    }
    for (std::size_t i : {std::min(imin, imax), std::max(imin, imax)}) {
      if (!out.x.empty() && out.x.back() == line.x[i] && out.y.back() == line.y[i]) continue;
      out.x.push_back(line.x[i]);
      out.y.push_back(line.y[i]);
    }
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
  void settle() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (lo == hi) {
      const double pad = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
      lo -= pad;
      hi += pad;
    }
  }
};

}  // namespace

std::string render(const Plot& plot) {
  std::vector<Line> lines;
  for (const auto& l : plot.lines) lines.push_back(decimate(l));
  Range xr;
  Range yr;
  for (const auto& l : lines) {
    for (double x : l.x) xr.add(x);
    for (double y : l.y) yr.add(y);
  }
  for (const auto& m : plot.markers) xr.add(m.x);
  xr.settle();
  yr.settle();

  const double w = plot.width - kMarginLeft - kMarginRight;
  const double h = plot.height - kMarginTop - kMarginBottom;
  auto px = [&](double x) { return kMarginLeft + (x - xr.lo) / (xr.hi - xr.lo) * w; };
  auto py = [&](double y) { return kMarginTop + (yr.hi - y) / (yr.hi - yr.lo) * h; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(plot.width) + "\" height=\"" +
       std::to_string(plot.height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(plot.width / 2.0) + "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" +
       escape(plot.title) + "</text>\n";
  s += "<rect x=\"" + num(kMarginLeft) + "\" y=\"" + num(kMarginTop) + "\" width=\"" + num(w) + "\" height=\"" +
       num(h) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = xr.lo + (xr.hi - xr.lo) * k / 4.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * k / 4.0;
    s += "<text x=\"" + num(px(fx)) + "\" y=\"" + num(kMarginTop + h + 15) + "\" text-anchor=\"middle\">" + tick(fx) +
         "</text>\n";
    s += "<text x=\"" + num(kMarginLeft - 5) + "\" y=\"" + num(py(fy) + 4) + "\" text-anchor=\"end\">" + tick(fy) +
         "</text>\n";
  }
  s += "<text x=\"" + num(kMarginLeft + w / 2) + "\" y=\"" + num(plot.height - 8) + "\" text-anchor=\"middle\">" +
       escape(plot.x_label) + "</text>\n";
  s += "<text x=\"14\" y=\"" + num(kMarginTop + h / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
       num(kMarginTop + h / 2) + ")\">" + escape(plot.y_label) + "</text>\n";

  for (const auto& m : plot.markers) {
    s += "<line class=\"marker-" + escape(m.kind) + "\" x1=\"" + num(px(m.x)) + "\" y1=\"" + num(kMarginTop) +
         "\" x2=\"" + num(px(m.x)) + "\" y2=\"" + num(kMarginTop + h) + "\" stroke=\"" + m.color +
         "\" stroke-width=\"0.6\" stroke-opacity=\"0.7\"/>\n";
  }
  for (const auto& l : lines) {
    const std::size_t n = std::min(l.x.size(), l.y.size());
    if (plot.points) {
      for (std::size_t i = 0; i < n; ++i) {
        s += "<circle cx=\"" + num(px(l.x[i])) + "\" cy=\"" + num(py(l.y[i])) + "\" r=\"2.5\" fill=\"" + l.color +
             "\"/>\n";
      }
      continue;
    }
    s += "<polyline fill=\"none\" stroke=\"" + l.color + "\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < n; ++i) {
      if (i) s += ' ';
      s += num(px(l.x[i])) + "," + num(py(l.y[i]));
    }
    s += "\"/>\n";
  }
  int legend_y = kMarginTop + 14;
  for (const auto& l : lines) {
    if (l.label.empty()) continue;
    s += "<text x=\"" + num(kMarginLeft + w - 8) + "\" y=\"" + std::to_string(legend_y) +
         "\" text-anchor=\"end\" fill=\"" + l.color + "\">" + escape(l.label) + "</text>\n";
    legend_y += 14;
  }
  s += "</svg>\n";
  return s;
}

std::string velocity_plot(const VelocitySeries& v, const std::vector<double>& r_times,
                          const std::vector<double>& t_times) {
  Plot p;
  p.title = "Chest velocity";
  p.x_label = "time (s)";
  p.y_label = "velocity (m/s)";
  Line l;
  for (std::size_t i = 0; i < v.size(); ++i) {
    l.x.push_back(v.time(i));
    l.y.push_back(v.values[i]);
  }
  l.label = "velocity";
  p.lines.push_back(std::move(l));
  for (double t : r_times) p.markers.push_back({t, "r", "#d62728"});
  for (double t : t_times) p.markers.push_back({t, "t", "#2ca02c"});
  return render(p);
}

std::string displacement_plot(const DisplacementSeries& d) {
  Plot p;
  p.title = "Chest displacement";
  p.x_label = "time (s)";
  p.y_label = "displacement (mm)";
  Line l;
  for (std::size_t i = 0; i < d.size(); ++i) {
    l.x.push_back(d.time(i));
    l.y.push_back(d.values[i] * 1e3);
  }
  p.lines.push_back(std::move(l));
  return render(p);
}

std::string distance_curve_plot(const sync::SyncResult& result) {
  Plot p;
  p.title = "Comb distance against ECG shift";
  p.x_label = "shift (s)";
  p.y_label = "distance";
  Line l;
  for (const auto& [s, d] : result.curve) {
    l.x.push_back(s);
    l.y.push_back(d);
  }
  p.lines.push_back(std::move(l));
  p.markers.push_back({result.best_offset, "best", "#d62728"});
  return render(p);
}

std::string interval_scatter_plot(const metrics::IntervalReport& report) {
  Plot p;
  p.title = "RR interval against radar interval";
  p.x_label = "time (s)";
  p.y_label = "interval (s)";
  p.points = true;
  Line rr;
  Line rad;
  rr.color = "#d62728";
  rr.label = "ECG RR";
  rad.color = "#1f77b4";
  rad.label = "radar";
  for (const auto& row : report.rows) {
    rr.x.push_back(row.r_start);
    rr.y.push_back(row.rr_interval);
    rad.x.push_back(row.r_start);
    rad.y.push_back(row.radar_interval);
  }
  p.lines.push_back(std::move(rr));
  p.lines.push_back(std::move(rad));
  return render(p);
}

std::string range_heatmap(const radar::RangeProfileSeries& profiles, std::size_t rx, std::size_t max_columns,
                          std::size_t max_bins) {
  if (rx >= profiles.config.n_rx) throw InvalidArgument("range heat map: rx out of range");
  if (max_columns == 0 || max_bins == 0) throw InvalidArgument("range heat map: empty canvas");
  const std::size_t cols = std::min(max_columns, profiles.n_frames);
  const std::size_t bins = std::min(max_bins, profiles.fft_size);
  std::vector<double> cell(cols * bins, 0.0);
  double peak = 0.0;
  for (std::size_t c = 0; c < cols; ++c) {
    const std::size_t lo = c * profiles.n_frames / cols;
    const std::size_t hi = (c + 1) * profiles.n_frames / cols;
    for (std::size_t b = 0; b < bins; ++b) {
      double sum = 0.0;
      for (std::size_t f = lo; f < hi; ++f) sum += std::abs(profiles.at(rx, f, b));
      cell[c * bins + b] = sum / static_cast<double>(hi - lo);
      peak = std::max(peak, cell[c * bins + b]);
    }
  }
  const int width = 900;
  const int height = 420;
  const double w = width - kMarginLeft - kMarginRight;
  const double h = height - kMarginTop - kMarginBottom;
  const double cw = w / static_cast<double>(cols);
  const double ch = h / static_cast<double>(bins);
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
       std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"11\" shape-rendering=\"crispEdges\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(width / 2.0) + "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">Range profile modulus (rx " +
       std::to_string(rx) + ")</text>\n";
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t b = 0; b < bins; ++b) {
      const double v = cell[c * bins + b];
      const double db = peak > 0.0 && v > 0.0 ? std::max(-60.0, 20.0 * std::log10(v / peak)) : -60.0;
      const int level = static_cast<int>(std::lround(255.0 * (1.0 + db / 60.0)));
      char color[8];
      std::snprintf(color, sizeof color, "#%02x%02x%02x", level, level / 2, 255 - level);
      s += "<rect x=\"" + num(kMarginLeft + static_cast<double>(c) * cw) + "\" y=\"" +
           num(kMarginTop + h - static_cast<double>(b + 1) * ch) + "\" width=\"" + num(cw + 0.05) + "\" height=\"" +
           num(ch + 0.05) + "\" fill=\"" + color + "\"/>\n";
    }
  }
  const double t_end = static_cast<double>(profiles.n_frames) / profiles.config.frame_rate;
  s += "<text x=\"" + num(kMarginLeft + w / 2) + "\" y=\"" + num(height - 8.0) +
       "\" text-anchor=\"middle\">time (s), 0 to " + tick(t_end) + "</text>\n";
  s += "<text x=\"14\" y=\"" + num(kMarginTop + h / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
       num(kMarginTop + h / 2) + ")\">range (m), 0 to " + tick(profiles.bin_distance(bins)) + "</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace heartradar::svg
