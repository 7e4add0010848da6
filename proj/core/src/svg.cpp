#include "elsg/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "elsg/util.hpp"

namespace elsg {
namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void absorb(double x) {
    if (!std::isfinite(x)) return;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  bool ok() const { return lo <= hi; }
  void pad(double frac) {
    double w = hi - lo;
    if (w <= 0) w = std::max(1.0, std::abs(lo));
    lo -= frac * w;
    hi += frac * w;
  }
};

double nice_step(double span, int target) {
  double raw = span / std::max(1, target);
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double r = raw / mag;
  double snap = r < 1.5 ? 1.0 : r < 3.0 ? 2.0 : r < 7.0 ? 5.0 : 10.0;
  return snap * mag;
}

std::vector<double> ticks(const Range& r, int target = 5) {
  std::vector<double> out;
  double step = nice_step(r.hi - r.lo, target);
  if (!(step > 0) || !std::isfinite(step)) return out;
  double t0 = std::ceil(r.lo / step) * step;
  for (double t = t0; t <= r.hi + 0.5 * step; t += step) {
    if (std::abs(t) < 1e-12 * step) t = 0.0;
    out.push_back(t);
  }
  return out;
}

// One chart drawn into an existing document at vertical offset y0.
void draw_panel(std::ostringstream& out, const LineChart& chart, int width, int height, int y0) {
  const double ml = 62, mr = 14, mt = 34, mb = 38;
  const double x0 = ml, x1 = width - mr;
  const double yTop = y0 + mt, yBot = y0 + height - mb;

  Range rx, ry;
  for (const Series& s : chart.series) {
    for (double v : s.x) rx.absorb(v);
    for (double v : s.y) ry.absorb(v);
  }
  if (!rx.ok()) {
    rx.lo = 0;
    rx.hi = 1;
  }
  if (!ry.ok()) {
    ry.lo = 0;
    ry.hi = 1;
  }
  if (rx.hi == rx.lo) rx.hi = rx.lo + 1;
  ry.pad(0.06);
  if (ry.hi == ry.lo) ry.hi = ry.lo + 1;

  auto px = [&](double v) { return x0 + (v - rx.lo) / (rx.hi - rx.lo) * (x1 - x0); };
  auto py = [&](double v) { return yBot - (v - ry.lo) / (ry.hi - ry.lo) * (yBot - yTop); };

  out << "<rect x=\"" << num(x0) << "\" y=\"" << num(yTop) << "\" width=\"" << num(x1 - x0)
      << "\" height=\"" << num(yBot - yTop)
      << "\" fill=\"#fbfbfb\" stroke=\"#888\" stroke-width=\"1\"/>\n";

  for (double t : ticks(rx)) {
    double x = px(t);
    out << "<line x1=\"" << num(x) << "\" y1=\"" << num(yTop) << "\" x2=\"" << num(x)
        << "\" y2=\"" << num(yBot) << "\" stroke=\"#e3e3e3\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << num(x) << "\" y=\"" << num(yBot + 15)
        << "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333\">" << num(t) << "</text>\n";
  }
  for (double t : ticks(ry)) {
    double y = py(t);
    out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x1)
        << "\" y2=\"" << num(y) << "\" stroke=\"#e3e3e3\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(y + 4)
        << "\" font-size=\"11\" text-anchor=\"end\" fill=\"#333\">" << num(t) << "</text>\n";
  }

  for (const Series& s : chart.series) {
    std::size_t i = 0;
    const std::size_t m = std::min(s.x.size(), s.y.size());
    while (i < m) {
      while (i < m && !(std::isfinite(s.x[i]) && std::isfinite(s.y[i]))) ++i;
      std::string pts;
      std::size_t count = 0;
      for (; i < m && std::isfinite(s.x[i]) && std::isfinite(s.y[i]); ++i, ++count) {
        pts += num(px(s.x[i]));
        pts += ',';
        pts += num(py(s.y[i]));
        pts += ' ';
      }
      if (count >= 2) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.4\"";
        if (s.dashed) out << " stroke-dasharray=\"6 4\"";
        out << " points=\"" << pts << "\"/>\n";
      } else if (count == 1) {
        out << "<circle cx=\"" << num(px(s.x[i - 1])) << "\" cy=\"" << num(py(s.y[i - 1]))
            << "\" r=\"1.6\" fill=\"" << s.color << "\"/>\n";
      }
    }
  }

  out << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(y0 + 17)
      << "\" font-size=\"13\" font-weight=\"bold\" text-anchor=\"middle\" fill=\"#111\">"
      << escape(chart.title) << "</text>\n";
  out << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(yBot + 31)
      << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#111\">" << escape(chart.x_label)
      << "</text>\n";
  out << "<text x=\"14\" y=\"" << num((yTop + yBot) / 2)
      << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#111\" transform=\"rotate(-90 14 "
      << num((yTop + yBot) / 2) << ")\">" << escape(chart.y_label) << "</text>\n";

  // legend: entries right-aligned above the frame
  double lx = x1;
  for (std::size_t k = chart.series.size(); k-- > 0;) {
    const Series& s = chart.series[k];
    if (s.label.empty()) continue;
    double w = 24 + 6.6 * static_cast<double>(s.label.size());
    lx -= w;
    out << "<line x1=\"" << num(lx) << "\" y1=\"" << num(yTop - 7) << "\" x2=\"" << num(lx + 16)
        << "\" y2=\"" << num(yTop - 7) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"";
    if (s.dashed) out << " stroke-dasharray=\"5 3\"";
    out << "/>\n<text x=\"" << num(lx + 19) << "\" y=\"" << num(yTop - 3)
        << "\" font-size=\"11\" fill=\"#333\">" << escape(s.label) << "</text>\n";
  }
}

Series bound_line(double t0, double t1, double level, const std::string& label,
                  const std::string& color) {
  Series s;
  s.label = label;
  s.x = {t0, t1};
  s.y = {level, level};
  s.color = color;
  s.dashed = true;
  return s;
}

}  // namespace

std::string render_chart(const LineChart& chart, int width, int height) {
  return render_chart_column({chart}, width, height);
}

std::string render_chart_column(const std::vector<LineChart>& charts, int width,
                                int panel_height) {
  const int total = panel_height * std::max<std::size_t>(1, charts.size());
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << total
      << "\" viewBox=\"0 0 " << width << ' ' << total << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << total
      << "\" fill=\"white\"/>\n";
  int y = 0;
  for (const LineChart& c : charts) {
    draw_panel(out, c, width, panel_height, y);
    y += panel_height;
  }
  out << "</svg>\n";
  return out.str();
}

std::string trace_svg(const SimTrace& trace, const ConstraintSpec& spec) {
  const int n = spec.dof();
  const int m = spec.input_dim();
  std::vector<LineChart> charts(4);

  if (trace.records.empty()) return render_chart_column(charts);

  const double t0 = trace.records.front().t;
  const double t1 = trace.records.back().t;
  std::vector<double> ts;
  ts.reserve(trace.records.size());
  for (const TickRecord& r : trace.records) ts.push_back(r.t);

  LineChart& qs = charts[0];
  qs.title = trace.scenario.empty() ? std::string("positions")
                                    : trace.scenario + " (" + controller_mode_name(trace.mode) +
                                          "): positions";
  qs.x_label = "t [s]";
  qs.y_label = "q";
  for (int i = 0; i < n; ++i) {
    Series s;
    s.label = "q" + std::to_string(i + 1);
    s.color = kPalette[i % 8];
    s.x = ts;
    for (const TickRecord& r : trace.records) s.y.push_back(r.q(i));
    qs.series.push_back(std::move(s));
  }
  for (int i = 0; i < n; ++i) {
    qs.series.push_back(bound_line(t0, t1, spec.q_max(i), i == 0 ? "bounds" : "", kPalette[i % 8]));
    qs.series.push_back(bound_line(t0, t1, spec.q_min(i), "", kPalette[i % 8]));
  }

  LineChart& vs = charts[1];
  vs.title = "velocities";
  vs.x_label = "t [s]";
  vs.y_label = "v";
  for (int i = 0; i < n; ++i) {
    Series s;
    s.label = "v" + std::to_string(i + 1);
    s.color = kPalette[i % 8];
    s.x = ts;
    for (const TickRecord& r : trace.records) s.y.push_back(r.v(i));
    vs.series.push_back(std::move(s));
  }
  for (int i = 0; i < n; ++i) {
    vs.series.push_back(bound_line(t0, t1, spec.v_max(i), i == 0 ? "bounds" : "", kPalette[i % 8]));
    vs.series.push_back(bound_line(t0, t1, -spec.v_max(i), "", kPalette[i % 8]));
  }

  LineChart& us = charts[2];
  us.title = "inputs";
  us.x_label = "t [s]";
  us.y_label = "u";
  for (int j = 0; j < m; ++j) {
    Series s;
    s.label = "u" + std::to_string(j + 1);
    s.color = kPalette[j % 8];
    s.x = ts;
    for (const TickRecord& r : trace.records) s.y.push_back(r.u(j));
    us.series.push_back(std::move(s));
  }
  for (int j = 0; j < m; ++j) {
    us.series.push_back(bound_line(t0, t1, spec.u_max(j), j == 0 ? "bounds" : "", kPalette[j % 8]));
    us.series.push_back(bound_line(t0, t1, -spec.u_max(j), "", kPalette[j % 8]));
  }

  LineChart& bs = charts[3];
  bs.title = "barrier margins";
  bs.x_label = "t [s]";
  bs.y_label = "min over joints";
  {
    Series up, low;
    up.label = "b_up";
    up.color = kPalette[0];
    low.label = "b_low";
    low.color = kPalette[1];
    up.x = ts;
    low.x = ts;
    for (const TickRecord& r : trace.records) {
      up.y.push_back(r.b_up.minCoeff());
      low.y.push_back(r.b_low.minCoeff());
    }
    bs.series.push_back(std::move(up));
    bs.series.push_back(std::move(low));
    bs.series.push_back(bound_line(t0, t1, 0.0, "zero", "#444"));
  }

  return render_chart_column(charts);
}

void write_trace_svg(const SimTrace& trace, const ConstraintSpec& spec, const std::string& path) {
  atomic_write_file(path, trace_svg(trace, spec));
}

}  // namespace elsg
