#pragma once

#include <array>
#include <string>
#include <vector>

#include "semcoord/numerics.hpp"

namespace semcoord {

struct TrajectoryPlot {
  std::string title;
  std::vector<std::string> slice_labels;
  std::vector<double> values;
  std::vector<bool> clamped;  // drawn hollow; may be empty
  LineFit fit;                // evaluated at t = 1..T
};

enum class PointKind { trajectory, coordinate };

struct LabeledPoint {
  std::string label;
  std::array<double, 2> xy{};
  PointKind kind = PointKind::trajectory;
};

struct ScatterPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<LabeledPoint> points;
  /// Draw a polyline through the trajectory points in order.
  bool connect_trajectory = true;
};

/// Self-contained SVG documents. Coordinates are printed with a fixed number
/// of decimals so the bytes depend only on the inputs.
std::string render_trajectory_svg(const TrajectoryPlot& plot);
std::string render_scatter_svg(const ScatterPlot& plot);

/// Escapes &, <, >, " and ' for XML text and attributes.
std::string xml_escape(std::string_view text);

}  // namespace semcoord
