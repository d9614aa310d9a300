#pragma once

#include <string>
#include <vector>

#include "clelab/sphere_geometry.hpp"

namespace clelab {

// Closed Jordan curve in the plane: circle, ellipse, or simple polygon.
// Shared by region masks, loop-event detectors and curve deformations.
class ClosedCurve {
 public:
  enum class Kind { Circle, Ellipse, Polygon };

  static ClosedCurve circle(Cplx center, double radius);
  static ClosedCurve ellipse(const EllipseSpec& e);
  // Simple polygon; stored positively oriented (reversed if needed).
  static ClosedCurve polygon(std::vector<Cplx> vertices);

  Kind kind() const { return kind_; }
  const EllipseSpec& as_ellipse() const;
  Cplx circle_center() const;
  double circle_radius() const;
  const std::vector<Cplx>& polygon_vertices() const;

  bool contains(Cplx z) const;         // strict interior
  bool contains_closed(Cplx z) const;  // interior with boundary

  std::vector<Cplx> sample(int n) const;  // n boundary points, in order
  Cplx interior_anchor() const;           // a point of the bounded interior
  // Radius of the smallest disk about `c` covering the curve.
  double outer_radius_about(Cplx c) const;
  ClosedCurve translated(Cplx t) const;

  std::string describe() const;  // canonical text, used in hashes and ids

 private:
  ClosedCurve() = default;
  Kind kind_ = Kind::Circle;
  Cplx center_{0.0, 0.0};
  double radius_ = 1.0;
  EllipseSpec ellipse_{Cplx{0.0}, 1.0, 0.0, 2.0};
  std::vector<Cplx> vertices_;
};

// Signed area of a closed polyline (shoelace); positive = counterclockwise.
double polygon_signed_area(const std::vector<Cplx>& pts);
// Strict interior test for a simple polygon (nonzero winding).
bool polygon_contains(const std::vector<Cplx>& pts, Cplx z);
// Distance from z to the polygon boundary.
double polygon_boundary_distance(const std::vector<Cplx>& pts, Cplx z);
bool segments_intersect(Cplx a, Cplx b, Cplx c, Cplx d);

}  // namespace clelab
