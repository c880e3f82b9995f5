#pragma once

// Static SVG output: the truth-vs-estimate scatter of one trial and line
// charts of sweep results.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "coloc/geometry.hpp"
#include "coloc/harness.hpp"
#include "coloc/network.hpp"

namespace coloc {

namespace detail {

inline std::string xml_escape(const std::string& s) {
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

inline std::string polygon_points(const std::vector<Point2>& pts) {
  std::string s;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (k) s += ' ';
    s += format_number(pts[k].x) + ',' + format_number(pts[k].y);
  }
  return s;
}

inline std::vector<Point2> star_shape(Point2 c, double outer) {
  constexpr double kPi = 3.14159265358979323846;
  std::vector<Point2> pts;
  for (int k = 0; k < 10; ++k) {
    const double r = (k % 2 == 0) ? outer : 0.45 * outer;
    const double a = kPi / 2 + k * kPi / 5;
    pts.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  }
  return pts;
}

inline std::vector<Point2> diamond_shape(Point2 c, double r) {
  return {{c.x, c.y + r}, {c.x + r, c.y}, {c.x, c.y - r}, {c.x - r, c.y}};
}

// Round tick step: 1, 2 or 5 times a power of ten.
inline double nice_step(double span, int target) {
  const double raw = span / std::max(target, 1);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double f : {1.0, 2.0, 5.0, 10.0}) {
    if (f * mag >= raw) return f * mag;
  }
  return 10.0 * mag;
}

}  // namespace detail

struct ScatterOptions {
  std::string title;
  double pixels_per_meter = 16.0;
};

/// Green circles: true blind positions. Red stars: estimates. Blue diamonds:
/// anchors. Blue segments join each truth to its estimate. Marker geometry is
/// written in meters inside a group that maps meters to pixels (y up), so
/// stroke widths there are in meters too.
inline std::string render_scatter(const Network& net, const Points& estimates, const ScatterOptions& opts = {}) {
  const double s = opts.pixels_per_meter;
  const double left = 60, top = 40, right = 20, bottom = 50;
  // axes span the box, widened to any estimate that fell outside it
  double x0 = 0.0, x1 = net.box.width, y0 = 0.0, y1 = net.box.height;
  for (const auto& p : estimates) {
    if (!is_finite(p)) continue;
    x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
  }
  const double xstep = detail::nice_step(x1 - x0, 6);
  const double ystep = detail::nice_step(y1 - y0, 6);
  x0 = std::floor(x0 / xstep) * xstep, x1 = std::ceil(x1 / xstep) * xstep;
  y0 = std::floor(y0 / ystep) * ystep, y1 = std::ceil(y1 / ystep) * ystep;
  const double w = (x1 - x0) * s, h = (y1 - y0) * s;
  const double marker = 0.02 * std::max(net.box.width, net.box.height);
  const std::string px1 = format_number(1.0 / s);  // one pixel, in meters
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + w + right << "\" height=\""
     << top + h + bottom << "\" viewBox=\"0 0 " << left + w + right << ' ' << top + h + bottom << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opts.title.empty()) {
    os << "<text x=\"" << left + w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       << "font-size=\"14\">" << detail::xml_escape(opts.title) << "</text>\n";
  }

  // axes in pixel space
  os << "<g class=\"axes\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect class=\"frame\" x=\"" << left << "\" y=\"" << top << "\" width=\"" << w << "\" height=\"" << h
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double v = x0; v <= x1 + 1e-9 * xstep; v += xstep) {
    const double px = left + (v - x0) * s;
    os << "<line class=\"tick\" x1=\"" << px << "\" y1=\"" << top + h << "\" x2=\"" << px << "\" y2=\""
       << top + h + 5 << "\" stroke=\"black\"/>";
    os << "<text x=\"" << px << "\" y=\"" << top + h + 18 << "\" text-anchor=\"middle\">"
       << format_number(std::round(v * 1e6) / 1e6) << "</text>\n";
  }
  for (double v = y0; v <= y1 + 1e-9 * ystep; v += ystep) {
    const double py = top + h - (v - y0) * s;
    os << "<line class=\"tick\" x1=\"" << left - 5 << "\" y1=\"" << py << "\" x2=\"" << left << "\" y2=\"" << py
       << "\" stroke=\"black\"/>";
    os << "<text x=\"" << left - 8 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">"
       << format_number(std::round(v * 1e6) / 1e6) << "</text>\n";
  }
  os << "<text x=\"" << left + w / 2 << "\" y=\"" << top + h + 38 << "\" text-anchor=\"middle\">x (m)</text>\n";
  os << "<text x=\"16\" y=\"" << top + h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << top + h / 2 << ")\">y (m)</text>\n";
  os << "</g>\n";

  os << "<g class=\"data\" transform=\"translate(" << left - x0 * s << ' ' << top + h + y0 * s << ") scale(" << s
     << ' ' << -s << ")\">\n";
  os << "<rect class=\"box\" x=\"0\" y=\"0\" width=\"" << format_number(net.box.width) << "\" height=\""
     << format_number(net.box.height) << "\" fill=\"none\" stroke=\"#999\" stroke-dasharray=\"" << px1
     << "\" stroke-width=\"" << px1 << "\"/>\n";
  const std::size_t m = std::min(net.blind.size(), estimates.size());
  for (std::size_t i = 0; i < m; ++i) {
    os << "<line class=\"error\" x1=\"" << format_number(net.blind[i].x) << "\" y1=\""
       << format_number(net.blind[i].y) << "\" x2=\"" << format_number(estimates[i].x) << "\" y2=\""
       << format_number(estimates[i].y) << "\" stroke=\"blue\" stroke-width=\"" << px1 << "\"/>\n";
  }
  for (const auto& p : net.blind) {
    os << "<circle class=\"truth\" cx=\"" << format_number(p.x) << "\" cy=\"" << format_number(p.y) << "\" r=\""
       << format_number(marker) << "\" fill=\"none\" stroke=\"green\" stroke-width=\"" << format_number(1.5 / s)
       << "\"/>\n";
  }
  for (std::size_t i = 0; i < m; ++i) {
    os << "<polygon class=\"estimate\" points=\"" << detail::polygon_points(detail::star_shape(estimates[i], marker))
       << "\" fill=\"red\"/>\n";
  }
  for (const auto& a : net.anchors) {
    os << "<polygon class=\"anchor\" points=\"" << detail::polygon_points(detail::diamond_shape(a, 1.2 * marker))
       << "\" fill=\"blue\"/>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

struct ChartSeries {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  double width = 640;
  double height = 420;
};

/// Line chart with markers and a legend. Non-positive values are skipped on a
/// log axis.
inline std::string render_line_chart(const std::vector<ChartSeries>& series, const ChartOptions& opts = {}) {
  const double left = 70, top = 40, right = 150, bottom = 50;
  const double w = opts.width - left - right, h = opts.height - top - bottom;
  auto ty = [&](double v) { return opts.log_y ? std::log10(v) : v; };
  auto usable = [&](double v) { return std::isfinite(v) && (!opts.log_y || v > 0.0); };

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!usable(s.y[k])) continue;
      xmin = std::min(xmin, s.x[k]);
      xmax = std::max(xmax, s.x[k]);
      ymin = std::min(ymin, ty(s.y[k]));
      ymax = std::max(ymax, ty(s.y[k]));
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
  if (opts.log_y) {
    ymin = std::floor(ymin);
    ymax = std::ceil(ymax);
    if (ymax == ymin) ymax += 1;
  } else {
    ymin = std::min(ymin, 0.0);
    if (ymax == ymin) ymax += 1;
    const double step = detail::nice_step(ymax - ymin, 6);
    ymax = std::ceil(ymax / step) * step;
  }
  auto px = [&](double v) { return left + (v - xmin) / (xmax - xmin) * w; };
  auto py = [&](double v) { return top + h - (ty(v) - ymin) / (ymax - ymin) * h; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width << "\" height=\"" << opts.height
     << "\" viewBox=\"0 0 " << opts.width << ' ' << opts.height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opts.title.empty()) {
    os << "<text x=\"" << left + w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
       << detail::xml_escape(opts.title) << "</text>\n";
  }
  os << "<rect class=\"frame\" x=\"" << left << "\" y=\"" << top << "\" width=\"" << w << "\" height=\"" << h
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  const double xstep = detail::nice_step(xmax - xmin, 8);
  for (double v = std::ceil(xmin / xstep) * xstep; v <= xmax + 1e-9 * xstep; v += xstep) {
    os << "<line class=\"tick\" x1=\"" << px(v) << "\" y1=\"" << top + h << "\" x2=\"" << px(v) << "\" y2=\""
       << top + h + 5 << "\" stroke=\"black\"/><text x=\"" << px(v) << "\" y=\"" << top + h + 18
       << "\" text-anchor=\"middle\">" << format_number(std::round(v * 1e6) / 1e6) << "</text>\n";
  }
  if (opts.log_y) {
    for (double e = ymin; e <= ymax; e += 1.0) {
      const double ypix = top + h - (e - ymin) / (ymax - ymin) * h;
      os << "<line class=\"grid\" x1=\"" << left << "\" y1=\"" << ypix << "\" x2=\"" << left + w << "\" y2=\""
         << ypix << "\" stroke=\"#ddd\"/><text x=\"" << left - 8 << "\" y=\"" << ypix + 4
         << "\" text-anchor=\"end\">1e" << static_cast<int>(e) << "</text>\n";
    }
  } else {
    const double ystep = detail::nice_step(ymax - ymin, 6);
    for (double v = ymin; v <= ymax + 1e-9 * ystep; v += ystep) {
      os << "<line class=\"grid\" x1=\"" << left << "\" y1=\"" << py(v) << "\" x2=\"" << left + w << "\" y2=\""
         << py(v) << "\" stroke=\"#ddd\"/><text x=\"" << left - 8 << "\" y=\"" << py(v) + 4
         << "\" text-anchor=\"end\">" << format_number(std::round(v * 1e6) / 1e6) << "</text>\n";
    }
  }
  os << "<text x=\"" << left + w / 2 << "\" y=\"" << opts.height - 12 << "\" text-anchor=\"middle\">"
     << detail::xml_escape(opts.x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << top + h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << top + h / 2 << ")\">" << detail::xml_escape(opts.y_label) << "</text>\n";

  double legend_y = top + 10;
  for (const auto& s : series) {
    std::string pts;
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!usable(s.y[k])) continue;
      pts += (pts.empty() ? "" : " ") + format_number(px(s.x[k])) + ',' + format_number(py(s.y[k]));
      os << "<circle class=\"point\" cx=\"" << px(s.x[k]) << "\" cy=\"" << py(s.y[k]) << "\" r=\"3\" fill=\""
         << s.color << "\"/>\n";
    }
    os << "<polyline class=\"series\" points=\"" << pts << "\" fill=\"none\" stroke=\"" << s.color
       << "\" stroke-width=\"1.5\"/>\n";
    os << "<line x1=\"" << left + w + 10 << "\" y1=\"" << legend_y << "\" x2=\"" << left + w + 30 << "\" y2=\""
       << legend_y << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/><text x=\"" << left + w + 35
       << "\" y=\"" << legend_y + 4 << "\">" << detail::xml_escape(s.label) << "</text>\n";
    legend_y += 18;
  }
  os << "</svg>\n";
  return os.str();
}

inline std::string sweep_axis_label(SweepKind kind) {
  switch (kind) {
    case SweepKind::Anchors: return "number of anchors";
    case SweepKind::Density: return "number of blind nodes";
    case SweepKind::NlosFraction: return "NLOS fraction";
    default: return "swept value";
  }
}

/// P_mu against the swept value, one series per (scenario, rho). Log axis
/// whenever the ideal channel is present.
inline std::string render_sweep_chart(SweepKind kind, const std::vector<SweepPoint>& points,
                                      const std::string& title = {}) {
  std::vector<ChartSeries> series;
  bool has_ideal = false;
  const std::vector<std::string> palette{"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};
  std::vector<double> rhos;
  for (const auto& p : points) {
    if (std::find(rhos.begin(), rhos.end(), p.rho) == rhos.end()) rhos.push_back(p.rho);
  }
  for (const auto& p : points) {
    has_ideal = has_ideal || p.scenario == ChannelKind::Ideal;
    std::string label(scenario_name(p.scenario));
    if (rhos.size() > 1) label += " rho=" + format_number(p.rho) + " m";
    auto it = std::find_if(series.begin(), series.end(), [&](const ChartSeries& s) { return s.label == label; });
    if (it == series.end()) {
      series.push_back({label, palette[series.size() % palette.size()], {}, {}});
      it = series.end() - 1;
    }
    it->x.push_back(p.swept_value);
    it->y.push_back(p.p_mu);
  }
  ChartOptions opts;
  opts.title = title;
  opts.x_label = sweep_axis_label(kind);
  opts.y_label = "mean position error P_mu (m)";
  opts.log_y = has_ideal;
  return render_line_chart(series, opts);
}

}  // namespace coloc
