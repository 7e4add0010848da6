#pragma once

#include <string>
#include <vector>

#include "elsg/barrier.hpp"
#include "elsg/sim.hpp"

namespace elsg {

struct Series {
  std::string label;
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct LineChart {
  std::string title, x_label, y_label;
  std::vector<Series> series;
};

// Self-contained SVG, one chart.
std::string render_chart(const LineChart& chart, int width = 880, int height = 280);

// Several charts stacked into one document.
std::string render_chart_column(const std::vector<LineChart>& charts, int width = 880,
                                int panel_height = 280);

// Standard four-panel view of a closed-loop run: positions, velocities and
// inputs against their (dashed) bounds, plus the per-tick barrier margins.
std::string trace_svg(const SimTrace& trace, const ConstraintSpec& spec);

void write_trace_svg(const SimTrace& trace, const ConstraintSpec& spec, const std::string& path);

}  // namespace elsg
