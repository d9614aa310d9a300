#include "clelab/curves.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace clelab {

double polygon_signed_area(const std::vector<Cplx>& pts) {
  double acc = 0.0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Cplx& a = pts[i];
    const Cplx& b = pts[(i + 1) % n];
    acc += a.real() * b.imag() - b.real() * a.imag();
  }
  return 0.5 * acc;
}

bool polygon_contains(const std::vector<Cplx>& pts, Cplx z) {
  // Nonzero-winding via signed horizontal-ray crossings.
  int winding = 0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Cplx& a = pts[i];
    const Cplx& b = pts[(i + 1) % n];
    const double cross = (b.real() - a.real()) * (z.imag() - a.imag()) -
                         (z.real() - a.real()) * (b.imag() - a.imag());
    if (a.imag() <= z.imag()) {
      if (b.imag() > z.imag() && cross > 0) ++winding;
    } else {
      if (b.imag() <= z.imag() && cross < 0) --winding;
    }
  }
  return winding != 0;
}

double polygon_boundary_distance(const std::vector<Cplx>& pts, Cplx z) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Cplx a = pts[i];
    const Cplx b = pts[(i + 1) % n];
    const Cplx ab = b - a;
    const double len2 = std::norm(ab);
    double t = len2 > 0 ? ((z - a).real() * ab.real() + (z - a).imag() * ab.imag()) / len2
                        : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, std::abs(z - (a + t * ab)));
  }
  return best;
}

namespace {

double orient(Cplx a, Cplx b, Cplx c) {
  return (b.real() - a.real()) * (c.imag() - a.imag()) -
         (b.imag() - a.imag()) * (c.real() - a.real());
}

bool on_segment(Cplx a, Cplx b, Cplx p) {
  return std::min(a.real(), b.real()) <= p.real() &&
         p.real() <= std::max(a.real(), b.real()) &&
         std::min(a.imag(), b.imag()) <= p.imag() &&
         p.imag() <= std::max(a.imag(), b.imag());
}

}  // namespace

bool segments_intersect(Cplx a, Cplx b, Cplx c, Cplx d) {
  const double o1 = orient(a, b, c), o2 = orient(a, b, d);
  const double o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0 && ((o1 > 0) != (o2 > 0)) &&
      ((o3 > 0) != (o4 > 0)))
    return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

ClosedCurve ClosedCurve::circle(Cplx center, double radius) {
  if (!(radius > 0.0))
    throw std::invalid_argument("ClosedCurve: circle radius must be positive");
  ClosedCurve c;
  c.kind_ = Kind::Circle;
  c.center_ = center;
  c.radius_ = radius;
  return c;
}

ClosedCurve ClosedCurve::ellipse(const EllipseSpec& e) {
  ClosedCurve c;
  c.kind_ = Kind::Ellipse;
  c.ellipse_ = e;
  return c;
}

ClosedCurve ClosedCurve::polygon(std::vector<Cplx> vertices) {
  if (vertices.size() < 3)
    throw std::invalid_argument("ClosedCurve: polygon needs >= 3 vertices");
  if (polygon_signed_area(vertices) < 0.0)
    std::reverse(vertices.begin(), vertices.end());
  ClosedCurve c;
  c.kind_ = Kind::Polygon;
  c.vertices_ = std::move(vertices);
  return c;
}

const EllipseSpec& ClosedCurve::as_ellipse() const {
  if (kind_ != Kind::Ellipse)
    throw std::logic_error("ClosedCurve: not an ellipse");
  return ellipse_;
}

Cplx ClosedCurve::circle_center() const {
  if (kind_ != Kind::Circle) throw std::logic_error("ClosedCurve: not a circle");
  return center_;
}

double ClosedCurve::circle_radius() const {
  if (kind_ != Kind::Circle) throw std::logic_error("ClosedCurve: not a circle");
  return radius_;
}

const std::vector<Cplx>& ClosedCurve::polygon_vertices() const {
  if (kind_ != Kind::Polygon)
    throw std::logic_error("ClosedCurve: not a polygon");
  return vertices_;
}

bool ClosedCurve::contains(Cplx z) const {
  switch (kind_) {
    case Kind::Circle:
      return std::abs(z - center_) < radius_;
    case Kind::Ellipse:
      return ellipse_contains(ellipse_, SpherePoint(z));
    case Kind::Polygon:
      return polygon_contains(vertices_, z);
  }
  return false;
}

bool ClosedCurve::contains_closed(Cplx z) const {
  switch (kind_) {
    case Kind::Circle:
      return std::abs(z - center_) <= radius_;
    case Kind::Ellipse:
      return ellipse_contains_closed(ellipse_, SpherePoint(z));
    case Kind::Polygon:
      return polygon_contains(vertices_, z) ||
             polygon_boundary_distance(vertices_, z) == 0.0;
  }
  return false;
}

std::vector<Cplx> ClosedCurve::sample(int n) const {
  if (n < 3) throw std::invalid_argument("ClosedCurve: need >= 3 samples");
  std::vector<Cplx> out;
  out.reserve(std::size_t(n));
  switch (kind_) {
    case Kind::Circle:
      for (int k = 0; k < n; ++k)
        out.push_back(center_ + std::polar(radius_, 2.0 * kPi * k / n));
      break;
    case Kind::Ellipse:
      for (int k = 0; k < n; ++k)
        out.push_back(ellipse_boundary(ellipse_, 2.0 * kPi * k / n));
      break;
    case Kind::Polygon: {
      // resample by arc length so deformations act on evenly spread points
      double total = 0.0;
      const std::size_t m = vertices_.size();
      std::vector<double> cum(m + 1, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        total += std::abs(vertices_[(i + 1) % m] - vertices_[i]);
        cum[i + 1] = total;
      }
      std::size_t seg = 0;
      for (int k = 0; k < n; ++k) {
        const double s = total * k / n;
        while (seg + 1 < m && cum[seg + 1] <= s) ++seg;
        const Cplx a = vertices_[seg];
        const Cplx b = vertices_[(seg + 1) % m];
        const double seg_len = cum[seg + 1] - cum[seg];
        const double t = seg_len > 0 ? (s - cum[seg]) / seg_len : 0.0;
        out.push_back(a + t * (b - a));
      }
      break;
    }
  }
  return out;
}

Cplx ClosedCurve::interior_anchor() const {
  switch (kind_) {
    case Kind::Circle:
      return center_;
    case Kind::Ellipse:
      return ellipse_.center;
    case Kind::Polygon: {
      Cplx c{0.0, 0.0};
      for (const Cplx& v : vertices_) c += v;
      c /= double(vertices_.size());
      if (polygon_contains(vertices_, c)) return c;
      for (std::size_t i = 0; i < vertices_.size(); ++i)
        for (std::size_t j = i + 1; j < vertices_.size(); ++j) {
          const Cplx m = 0.5 * (vertices_[i] + vertices_[j]);
          if (polygon_contains(vertices_, m)) return m;
        }
      throw std::runtime_error("ClosedCurve: no interior anchor found");
    }
  }
  throw std::logic_error("ClosedCurve: bad kind");
}

double ClosedCurve::outer_radius_about(Cplx c) const {
  switch (kind_) {
    case Kind::Circle:
      return std::abs(center_ - c) + radius_;
    case Kind::Ellipse:
      return std::abs(ellipse_.center - c) + ellipse_.major_semi_axis();
    case Kind::Polygon: {
      double r = 0.0;
      for (const Cplx& v : vertices_) r = std::max(r, std::abs(v - c));
      return r;
    }
  }
  return 0.0;
}

ClosedCurve ClosedCurve::translated(Cplx t) const {
  switch (kind_) {
    case Kind::Circle:
      return circle(center_ + t, radius_);
    case Kind::Ellipse:
      return ellipse(EllipseSpec(ellipse_.center + t, ellipse_.eps,
                                 ellipse_.theta, ellipse_.b));
    case Kind::Polygon: {
      std::vector<Cplx> v = vertices_;
      for (Cplx& p : v) p += t;
      return polygon(std::move(v));
    }
  }
  throw std::logic_error("ClosedCurve: bad kind");
}

std::string ClosedCurve::describe() const {
  std::ostringstream os;
  os.precision(12);
  switch (kind_) {
    case Kind::Circle:
      os << "circle(" << center_.real() << "," << center_.imag() << ";"
         << radius_ << ")";
      break;
    case Kind::Ellipse:
      os << "ellipse(" << ellipse_.center.real() << "," << ellipse_.center.imag()
         << ";" << ellipse_.eps << ";" << ellipse_.theta << ";" << ellipse_.b
         << ")";
      break;
    case Kind::Polygon:
      os << "polygon[" << vertices_.size() << "](" << vertices_.front().real()
         << "," << vertices_.front().imag() << ")";
      break;
  }
  return os.str();
}

}  // namespace clelab
