#include "clelab/region.hpp"

#include <cmath>
#include <sstream>

namespace clelab {

RegionSpec RegionSpec::disk(Cplx center, double radius) {
  if (!(radius > 0.0))
    throw std::invalid_argument("RegionSpec: disk radius must be positive");
  RegionSpec r;
  r.kind_ = Kind::Disk;
  r.center_ = center;
  r.radius_ = radius;
  return r;
}

RegionSpec RegionSpec::annulus(Cplx center, double r_inner, double r_outer) {
  if (!(r_inner > 0.0) || !(r_outer > r_inner))
    throw std::invalid_argument("RegionSpec: need 0 < r_inner < r_outer");
  RegionSpec r;
  r.kind_ = Kind::Annulus;
  r.center_ = center;
  r.r_inner_ = r_inner;
  r.r_outer_ = r_outer;
  return r;
}

RegionSpec RegionSpec::polygon(std::vector<Cplx> vertices) {
  RegionSpec r;
  r.kind_ = Kind::Polygon;
  const ClosedCurve c = ClosedCurve::polygon(std::move(vertices));
  r.vertices_ = c.polygon_vertices();
  return r;
}

RegionSpec RegionSpec::full_plane_proxy(double radius) {
  if (!(radius > 0.0))
    throw std::invalid_argument("RegionSpec: proxy radius must be positive");
  RegionSpec r;
  r.kind_ = Kind::FullPlaneProxy;
  r.center_ = Cplx{0.0, 0.0};
  r.radius_ = radius;
  return r;
}

RegionSpec RegionSpec::exterior_proxy(ClosedCurve inner, double proxy_radius) {
  RegionSpec r;
  r.kind_ = Kind::ExteriorProxy;
  r.inner_ = std::move(inner);
  r.center_ = r.inner_.interior_anchor();
  r.radius_ = proxy_radius;
  if (!(proxy_radius > r.inner_.outer_radius_about(r.center_)))
    throw std::invalid_argument(
        "RegionSpec: proxy circle must enclose the inner curve");
  return r;
}

bool RegionSpec::contains(Cplx z) const {
  switch (kind_) {
    case Kind::Disk:
    case Kind::FullPlaneProxy:
      return std::abs(z - center_) < radius_;
    case Kind::Annulus: {
      const double d = std::abs(z - center_);
      return d > r_inner_ && d < r_outer_;
    }
    case Kind::Polygon:
      return polygon_contains(vertices_, z);
    case Kind::ExteriorProxy:
      return std::abs(z - center_) < radius_ && !inner_.contains_closed(z);
  }
  return false;
}

Cplx RegionSpec::hole_anchor() const {
  if (kind_ == Kind::Annulus) return center_;
  if (kind_ == Kind::ExteriorProxy) return inner_.interior_anchor();
  throw std::logic_error("RegionSpec: region has no hole");
}

void RegionSpec::bounding_disk(Cplx* center, double* radius) const {
  switch (kind_) {
    case Kind::Disk:
    case Kind::FullPlaneProxy:
    case Kind::ExteriorProxy:
      *center = center_;
      *radius = radius_;
      return;
    case Kind::Annulus:
      *center = center_;
      *radius = r_outer_;
      return;
    case Kind::Polygon: {
      Cplx c{0.0, 0.0};
      for (const Cplx& v : vertices_) c += v;
      c /= double(vertices_.size());
      double r = 0.0;
      for (const Cplx& v : vertices_) r = std::max(r, std::abs(v - c));
      *center = c;
      *radius = r;
      return;
    }
  }
}

std::string RegionSpec::canonical() const {
  std::ostringstream os;
  os.precision(12);
  switch (kind_) {
    case Kind::Disk:
      os << "disk(" << center_.real() << "," << center_.imag() << ";"
         << radius_ << ")";
      break;
    case Kind::Annulus:
      os << "annulus(" << center_.real() << "," << center_.imag() << ";"
         << r_inner_ << ";" << r_outer_ << ")";
      break;
    case Kind::Polygon: {
      os << "polygon[";
      for (const Cplx& v : vertices_)
        os << v.real() << "," << v.imag() << ";";
      os << "]";
      break;
    }
    case Kind::FullPlaneProxy:
      os << "plane(" << radius_ << ")";
      break;
    case Kind::ExteriorProxy:
      os << "exterior(" << inner_.describe() << ";" << radius_ << ")";
      break;
  }
  return os.str();
}

RegionSpec RegionSpec::translated(Cplx t) const {
  switch (kind_) {
    case Kind::Disk:
      return disk(center_ + t, radius_);
    case Kind::Annulus:
      return annulus(center_ + t, r_inner_, r_outer_);
    case Kind::Polygon: {
      std::vector<Cplx> v = vertices_;
      for (Cplx& p : v) p += t;
      return polygon(std::move(v));
    }
    case Kind::FullPlaneProxy: {
      if (t != Cplx{0.0, 0.0})
        throw std::invalid_argument("RegionSpec: plane proxy is centered");
      return *this;
    }
    case Kind::ExteriorProxy:
      return exterior_proxy(inner_.translated(t), radius_);
  }
  throw std::logic_error("RegionSpec: bad kind");
}

}  // namespace clelab
