#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "spillcast/error.hpp"

namespace spillcast {

/// Regular 2-D grid of cell centers: x_i = x0 + (i + 0.5) dx, y_j likewise.
/// Values are stored x-major: values[i * ny + j].
struct Grid2D {
  double x0 = 0.0, y0 = 0.0;
  double dx = 1.0, dy = 1.0;
  std::size_t nx = 0, ny = 0;
  std::vector<double> values;

  static Grid2D span(double x_lo, double x_hi, double y_lo, double y_hi, std::size_t nx, std::size_t ny) {
    if (nx == 0 || ny == 0 || !(x_hi > x_lo) || !(y_hi > y_lo))
      throw Error(Errc::InvariantViolation, "grid extent must be positive");
    Grid2D g;
    g.x0 = x_lo;
    g.y0 = y_lo;
    g.nx = nx;
    g.ny = ny;
    g.dx = (x_hi - x_lo) / static_cast<double>(nx);
    g.dy = (y_hi - y_lo) / static_cast<double>(ny);
    g.values.assign(nx * ny, 0.0);
    return g;
  }

  std::size_t size() const { return values.size(); }
  double x(std::size_t i) const { return x0 + (static_cast<double>(i) + 0.5) * dx; }
  double y(std::size_t j) const { return y0 + (static_cast<double>(j) + 0.5) * dy; }
  double x_hi() const { return x0 + static_cast<double>(nx) * dx; }
  double y_hi() const { return y0 + static_cast<double>(ny) * dy; }
  double cell_area() const { return dx * dy; }
  double& at(std::size_t i, std::size_t j) { return values[i * ny + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * ny + j]; }

  bool contains(double px, double py) const { return px >= x0 && px <= x_hi() && py >= y0 && py <= y_hi(); }

  /// Riemann sum of values * cell area.
  double mass() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * cell_area();
  }

  bool same_shape(const Grid2D& o) const {
    return nx == o.nx && ny == o.ny && x0 == o.x0 && y0 == o.y0 && dx == o.dx && dy == o.dy;
  }
};

struct CellIndex {
  std::size_t i = 0, j = 0;
  bool clamped = false;  // point lay outside the grid
};

inline CellIndex nearest_cell(const Grid2D& g, double px, double py) {
  auto axis = [](double p, double lo, double d, std::size_t n, bool& out) {
    const double f = std::floor((p - lo) / d);
    if (!(f >= 0.0)) {
      out = true;
      return std::size_t{0};
    }
    if (f >= static_cast<double>(n)) {
      // the upper edge itself belongs to the last cell
      if (p > lo + static_cast<double>(n) * d) out = true;
      return n - 1;
    }
    return static_cast<std::size_t>(f);
  };
  CellIndex c;
  c.i = axis(px, g.x0, g.dx, g.nx, c.clamped);
  c.j = axis(py, g.y0, g.dy, g.ny, c.clamped);
  return c;
}

}  // namespace spillcast
