#pragma once

#include <string>

#include "clelab/curves.hpp"

namespace clelab {

// Lattice region mask in continuum units. FullPlaneProxy is a large disk
// with free boundary standing in for the sphere/plane; ExteriorProxy is the
// complement of a Jordan domain, cut off by the same kind of proxy circle.
class RegionSpec {
 public:
  enum class Kind { Disk, Annulus, Polygon, FullPlaneProxy, ExteriorProxy };

  static RegionSpec disk(Cplx center, double radius);
  static RegionSpec annulus(Cplx center, double r_inner, double r_outer);
  static RegionSpec polygon(std::vector<Cplx> vertices);
  static RegionSpec full_plane_proxy(double radius);
  static RegionSpec exterior_proxy(ClosedCurve inner, double proxy_radius);

  Kind kind() const { return kind_; }
  bool contains(Cplx z) const;
  bool has_hole() const {
    return kind_ == Kind::Annulus || kind_ == Kind::ExteriorProxy;
  }
  Cplx hole_anchor() const;  // a point inside the hole

  Cplx center() const { return center_; }
  double radius() const { return radius_; }
  double r_inner() const { return r_inner_; }
  double r_outer() const { return r_outer_; }
  const std::vector<Cplx>& vertices() const { return vertices_; }
  const ClosedCurve& inner_curve() const { return inner_; }

  // Disk covering the region (loose), for candidate-face scans.
  void bounding_disk(Cplx* center, double* radius) const;

  std::string canonical() const;  // stable text form, used for hashing

  RegionSpec translated(Cplx t) const;

 private:
  RegionSpec() = default;
  Kind kind_ = Kind::Disk;
  Cplx center_{0.0, 0.0};
  double radius_ = 1.0;
  double r_inner_ = 0.0, r_outer_ = 1.0;
  std::vector<Cplx> vertices_;
  ClosedCurve inner_ = ClosedCurve::circle(Cplx{0.0, 0.0}, 1.0);
};

}  // namespace clelab
