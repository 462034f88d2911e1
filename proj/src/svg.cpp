#include "semcoord/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "semcoord/error.hpp"

namespace semcoord {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

std::string fixed(double v, int decimals = 2) {
  if (std::abs(v) < 0.5 * std::pow(10.0, -decimals)) v = 0.0;  // no "-0.00"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  void widen() {
    if (!(hi > lo)) {
      const double pad = std::max(1.0, std::abs(lo) * 0.1);
      lo -= pad;
      hi += pad;
    } else {
      const double pad = 0.05 * (hi - lo);
      lo -= pad;
      hi += pad;
    }
  }
};

Range span_of(const std::vector<double>& v) {
  Range r{v.front(), v.front()};
  for (double x : v) {
    r.lo = std::min(r.lo, x);
    r.hi = std::max(r.hi, x);
  }
  r.widen();
  return r;
}

class Frame {
 public:
  Frame(Range x, Range y) : x_(x), y_(y) {}
  double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y_.lo) / (y_.hi - y_.lo) * (kHeight - kTop - kBottom); }
  const Range& x() const { return x_; }
  const Range& y() const { return y_; }

 private:
  Range x_;
  Range y_;
};

std::string header(const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kWidth, 0) + "\" height=\"" +
                  fixed(kHeight, 0) + "\" viewBox=\"0 0 " + fixed(kWidth, 0) + " " + fixed(kHeight, 0) +
                  "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fixed(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + xml_escape(title) +
       "</text>\n";
  return s;
}

std::string axes(const Frame& f) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kTop, y1 = kHeight - kBottom;
  std::string s = "<rect x=\"" + fixed(x0) + "\" y=\"" + fixed(y0) + "\" width=\"" + fixed(x1 - x0) + "\" height=\"" +
                  fixed(y1 - y0) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = f.y().lo + (f.y().hi - f.y().lo) * i / 4.0;
    const double y = f.py(v);
    s += "<line x1=\"" + fixed(x0 - 4) + "\" y1=\"" + fixed(y) + "\" x2=\"" + fixed(x0) + "\" y2=\"" + fixed(y) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fixed(x0 - 6) + "\" y=\"" + fixed(y + 4) + "\" text-anchor=\"end\">" + fixed(v, 3) + "</text>\n";
  }
  return s;
}

}  // namespace

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_trajectory_svg(const TrajectoryPlot& plot) {
  const std::size_t n = plot.values.size();
  if (n == 0) throw Error("trajectory plot: no points");
  if (plot.slice_labels.size() != n) throw Error("trajectory plot: label count differs from point count");
  if (!plot.clamped.empty() && plot.clamped.size() != n) throw Error("trajectory plot: clamp flags differ in length");

  std::vector<double> ys = plot.values;
  ys.push_back(plot.fit.slope * 1.0 + plot.fit.intercept);
  ys.push_back(plot.fit.slope * static_cast<double>(n) + plot.fit.intercept);
  Range xr{0.5, static_cast<double>(n) + 0.5};
  const Frame f(xr, span_of(ys));

  std::string s = header(plot.title);
  s += axes(f);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = f.px(static_cast<double>(i + 1));
    s += "<text x=\"" + fixed(x) + "\" y=\"" + fixed(kHeight - kBottom + 16) +
         "\" text-anchor=\"end\" transform=\"rotate(-45 " + fixed(x) + " " + fixed(kHeight - kBottom + 16) + ")\">" +
         xml_escape(plot.slice_labels[i]) + "</text>\n";
  }
  s += "<text x=\"18\" y=\"" + fixed((kTop + kHeight - kBottom) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       fixed((kTop + kHeight - kBottom) / 2) + ")\">d_rel</text>\n";

  const double fx0 = 1.0, fx1 = static_cast<double>(n);
  s += "<line class=\"fit\" x1=\"" + fixed(f.px(fx0)) + "\" y1=\"" + fixed(f.py(plot.fit.slope * fx0 + plot.fit.intercept)) +
       "\" x2=\"" + fixed(f.px(fx1)) + "\" y2=\"" + fixed(f.py(plot.fit.slope * fx1 + plot.fit.intercept)) +
       "\" stroke=\"#d62728\" stroke-dasharray=\"6 3\"/>\n";

  std::string path;
  for (std::size_t i = 0; i < n; ++i)
    path += (i ? " " : "") + fixed(f.px(static_cast<double>(i + 1))) + "," + fixed(f.py(plot.values[i]));
  s += "<polyline points=\"" + path + "\" fill=\"none\" stroke=\"#1f77b4\"/>\n";
  for (std::size_t i = 0; i < n; ++i) {
    const bool hollow = !plot.clamped.empty() && plot.clamped[i];
    s += "<circle class=\"point\" cx=\"" + fixed(f.px(static_cast<double>(i + 1))) + "\" cy=\"" +
         fixed(f.py(plot.values[i])) + "\" r=\"3.5\" fill=\"" + (hollow ? "white" : "#1f77b4") +
         "\" stroke=\"#1f77b4\"/>\n";
  }
  s += "<text x=\"" + fixed(kWidth - kRight) + "\" y=\"" + fixed(kTop - 6) + "\" text-anchor=\"end\">k = " +
       fixed(plot.fit.slope, 4) + ", b = " + fixed(plot.fit.intercept, 4) + "</text>\n";
  s += "</svg>\n";
  return s;
}

std::string render_scatter_svg(const ScatterPlot& plot) {
  if (plot.points.empty()) throw Error("scatter plot: no points");
  std::vector<double> xs, ys;
  for (const auto& p : plot.points) {
    xs.push_back(p.xy[0]);
    ys.push_back(p.xy[1]);
  }
  const Frame f(span_of(xs), span_of(ys));

  std::string s = header(plot.title);
  s += axes(f);
  s += "<text x=\"" + fixed((kLeft + kWidth - kRight) / 2) + "\" y=\"" + fixed(kHeight - 20) +
       "\" text-anchor=\"middle\">" + xml_escape(plot.x_label) + "</text>\n";
  s += "<text x=\"18\" y=\"" + fixed((kTop + kHeight - kBottom) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       fixed((kTop + kHeight - kBottom) / 2) + ")\">" + xml_escape(plot.y_label) + "</text>\n";

  if (plot.connect_trajectory) {
    std::string path;
    for (const auto& p : plot.points)
      if (p.kind == PointKind::trajectory)
        path += (path.empty() ? "" : " ") + fixed(f.px(p.xy[0])) + "," + fixed(f.py(p.xy[1]));
    if (!path.empty()) s += "<polyline points=\"" + path + "\" fill=\"none\" stroke=\"#9ecae1\"/>\n";
  }
  for (const auto& p : plot.points) {
    const double x = f.px(p.xy[0]), y = f.py(p.xy[1]);
    if (p.kind == PointKind::trajectory) {
      s += "<circle class=\"point\" cx=\"" + fixed(x) + "\" cy=\"" + fixed(y) + "\" r=\"3.5\" fill=\"#1f77b4\"/>\n";
    } else {
      s += "<rect class=\"point\" x=\"" + fixed(x - 4) + "\" y=\"" + fixed(y - 4) +
           "\" width=\"8\" height=\"8\" fill=\"#d62728\"/>\n";
    }
    s += "<text class=\"label\" x=\"" + fixed(x + 6) + "\" y=\"" + fixed(y - 6) + "\">" + xml_escape(p.label) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace semcoord
