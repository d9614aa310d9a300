#include "clelab/events.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace clelab {

int winding_number(const std::vector<Cplx>& loop, Cplx z) {
  const std::size_t n = loop.size();
  if (n < 3) throw std::invalid_argument("winding_number: degenerate curve");
  // reject z on the curve
  double scale = 0.0;
  for (const Cplx& p : loop) scale = std::max(scale, std::abs(p - z));
  const double tol = 1e-12 * std::max(1.0, scale);
  for (std::size_t i = 0; i < n; ++i) {
    const Cplx a = loop[i], b = loop[(i + 1) % n];
    const Cplx ab = b - a;
    const double len2 = std::norm(ab);
    double t = len2 > 0 ? ((z - a).real() * ab.real() + (z - a).imag() * ab.imag()) / len2
                        : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    if (std::abs(z - (a + t * ab)) <= tol)
      throw std::domain_error("winding_number: point lies on the curve");
  }
  int winding = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Cplx& a = loop[i];
    const Cplx& b = loop[(i + 1) % n];
    const double cross = (b.real() - a.real()) * (z.imag() - a.imag()) -
                         (z.real() - a.real()) * (b.imag() - a.imag());
    if (a.imag() <= z.imag()) {
      if (b.imag() > z.imag() && cross > 0) ++winding;
    } else {
      if (b.imag() <= z.imag() && cross < 0) --winding;
    }
  }
  return winding;
}

AnnulusSpec::AnnulusSpec(ClosedCurve outer_, ClosedCurve inner_)
    : outer(std::move(outer_)),
      inner(std::move(inner_)),
      marked_inner_point(inner.interior_anchor()) {
  // closures disjoint, inner strictly inside outer
  for (const Cplx p : inner.sample(64))
    if (!outer.contains(p))
      throw std::invalid_argument(
          "AnnulusSpec: inner curve must lie strictly inside the outer curve");
  for (const Cplx p : outer.sample(64))
    if (inner.contains_closed(p))
      throw std::invalid_argument("AnnulusSpec: curve closures intersect");
}

double AnnulusSpec::min_width() const {
  const auto in = inner.sample(256);
  const auto out = outer.sample(256);
  double best = std::numeric_limits<double>::infinity();
  for (const Cplx a : in)
    for (const Cplx b : out) best = std::min(best, std::abs(a - b));
  return best;
}

EventSpec EventSpec::winding_loop_in(AnnulusSpec annulus) {
  EventSpec e;
  e.kind_ = Kind::WindingLoopIn;
  e.annulus_.push_back(std::move(annulus));
  return e;
}

EventSpec EventSpec::separation(std::vector<Cplx> group1,
                                std::vector<Cplx> group2) {
  if (group1.empty() || group2.empty())
    throw std::invalid_argument("EventSpec: separation needs two point groups");
  EventSpec e;
  e.kind_ = Kind::Separation;
  e.group1_ = std::move(group1);
  e.group2_ = std::move(group2);
  return e;
}

EventSpec EventSpec::surround_pair(Cplx z1, Cplx z2, int min_count) {
  if (z1 == z2)
    throw std::invalid_argument("EventSpec: surround pair needs z1 != z2");
  if (min_count < 1)
    throw std::invalid_argument("EventSpec: min_count must be >= 1");
  EventSpec e;
  e.kind_ = Kind::SurroundPair;
  e.z1_ = z1;
  e.z2_ = z2;
  e.min_count_ = min_count;
  return e;
}

EventSpec EventSpec::sure() { return EventSpec(); }

const AnnulusSpec& EventSpec::annulus() const {
  if (annulus_.empty()) throw std::logic_error("EventSpec: no annulus");
  return annulus_.front();
}

std::string EventSpec::describe() const {
  std::ostringstream os;
  os.precision(12);
  switch (kind_) {
    case Kind::WindingLoopIn:
      os << "winding_loop_in(" << annulus().outer.describe() << " \\ "
         << annulus().inner.describe() << ")";
      break;
    case Kind::Separation:
      os << "separation[" << group1_.size() << "|" << group2_.size() << "]";
      break;
    case Kind::SurroundPair:
      os << "surround_pair(" << z1_.real() << "," << z1_.imag() << ";"
         << z2_.real() << "," << z2_.imag() << ";" << min_count_ << ")";
      break;
    case Kind::Sure:
      os << "sure";
      break;
  }
  return os.str();
}

namespace {

bool loop_crosses_segment(const std::vector<Cplx>& loop, Cplx a, Cplx b) {
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i)
    if (segments_intersect(loop[i], loop[(i + 1) % n], a, b)) return true;
  return false;
}

bool separates_groups(const std::vector<Cplx>& loop,
                      const std::vector<Cplx>& g1,
                      const std::vector<Cplx>& g2) {
  bool all_in_1 = true, all_out_1 = true;
  for (const Cplx p : g1) {
    const int w = std::abs(winding_number(loop, p));
    all_in_1 &= (w == 1);
    all_out_1 &= (w == 0);
  }
  bool all_in_2 = true, all_out_2 = true;
  for (const Cplx p : g2) {
    const int w = std::abs(winding_number(loop, p));
    all_in_2 &= (w == 1);
    all_out_2 &= (w == 0);
  }
  return (all_in_1 && all_out_2) || (all_out_1 && all_in_2);
}

}  // namespace

bool EventSpec::loop_touches_support(const std::vector<Cplx>& loop,
                                     double far_radius) const {
  switch (kind_) {
    case Kind::Sure:
      return false;  // empty support
    case Kind::WindingLoopIn: {
      const AnnulusSpec& a = annulus();
      for (std::size_t i = 0; i < loop.size(); ++i) {
        const Cplx p = loop[i];
        const Cplx m = 0.5 * (loop[i] + loop[(i + 1) % loop.size()]);
        if (a.in_closed_annulus(p) || a.in_closed_annulus(m)) return true;
      }
      return false;
    }
    case Kind::Separation: {
      // support: star of segments from group1[0] to all other points
      const Cplx hub = group1_.front();
      for (std::size_t i = 1; i < group1_.size(); ++i)
        if (loop_crosses_segment(loop, hub, group1_[i])) return true;
      for (const Cplx p : group2_)
        if (loop_crosses_segment(loop, hub, p)) return true;
      return false;
    }
    case Kind::SurroundPair: {
      // support: rightward ray from z1, cut off at the region proxy scale
      const Cplx far = z1_ + Cplx{far_radius, 0.0};
      return loop_crosses_segment(loop, z1_, far);
    }
  }
  return false;
}

EventSpec EventSpec::translated(Cplx t) const {
  switch (kind_) {
    case Kind::Sure:
      return sure();
    case Kind::WindingLoopIn:
      return winding_loop_in(AnnulusSpec(annulus().outer.translated(t),
                                         annulus().inner.translated(t)));
    case Kind::Separation: {
      auto g1 = group1_;
      auto g2 = group2_;
      for (Cplx& p : g1) p += t;
      for (Cplx& p : g2) p += t;
      return separation(std::move(g1), std::move(g2));
    }
    case Kind::SurroundPair:
      return surround_pair(z1_ + t, z2_ + t, min_count_);
  }
  throw std::logic_error("EventSpec: bad kind");
}

bool eval_event(const EventSpec& e, const LoopsView& loops) {
  switch (e.kind()) {
    case EventSpec::Kind::Sure:
      return true;
    case EventSpec::Kind::WindingLoopIn: {
      const AnnulusSpec& a = e.annulus();
      for (const auto& loop : loops.curves) {
        bool inside = true;
        for (std::size_t i = 0; i < loop.size() && inside; ++i) {
          const Cplx m = 0.5 * (loop[i] + loop[(i + 1) % loop.size()]);
          inside = a.in_open_annulus(m);
        }
        if (!inside) continue;
        if (std::abs(winding_number(loop, a.marked_inner_point)) == 1)
          return true;
      }
      return false;
    }
    case EventSpec::Kind::Separation: {
      for (const auto& loop : loops.curves)
        if (separates_groups(loop, e.group1(), e.group2())) return true;
      return false;
    }
    case EventSpec::Kind::SurroundPair:
      return eval_count(e, loops) >= double(e.min_count());
  }
  return false;
}

double eval_count(const EventSpec& e, const LoopsView& loops) {
  if (e.kind() == EventSpec::Kind::SurroundPair) {
    int count = 0;
    for (const auto& loop : loops.curves)
      if (std::abs(winding_number(loop, e.z1())) == 1 &&
          std::abs(winding_number(loop, e.z2())) == 1)
        ++count;
    return double(count);
  }
  return eval_event(e, loops) ? 1.0 : 0.0;
}

double pair_loop_count(const LoopsView& loops, Cplx z1, Cplx z2, double k) {
  if (z1 == z2) throw std::invalid_argument("pair_loop_count: z1 == z2");
  if (!(k > 0.0)) throw std::invalid_argument("pair_loop_count: k must be > 0");
  return k * eval_count(EventSpec::surround_pair(z1, z2), loops);
}

EventSpec regularized_ellipse_event(Cplx w, double eps, double theta, double b,
                                    double eta) {
  const EllipseSpec outer(w, eps, theta, b);
  const EllipseSpec inner = ellipse_shrunk(outer, eta);
  return EventSpec::winding_loop_in(
      AnnulusSpec(ClosedCurve::ellipse(outer), ClosedCurve::ellipse(inner)));
}

namespace {

void check_point_margin(Cplx p, const HexLattice& lat, const char* what) {
  const double margin = 2.0 * lat.spacing();
  const RegionSpec& region = lat.region();
  if (!region.contains(p))
    throw std::invalid_argument(std::string("event geometry: ") + what +
                                " lies outside the lattice region");
  for (int k = 0; k < 4; ++k)
    if (!region.contains(p + std::polar(margin, kPi * k / 2.0)))
      throw std::invalid_argument(std::string("event geometry: ") + what +
                                  " closer than 2 spacings to the boundary");
}

}  // namespace

void check_event_fits(const EventSpec& e, const HexLattice& lat) {
  switch (e.kind()) {
    case EventSpec::Kind::Sure:
      return;
    case EventSpec::Kind::WindingLoopIn: {
      const AnnulusSpec& a = e.annulus();
      for (const Cplx p : a.outer.sample(64))
        check_point_margin(p, lat, "annulus outer curve");
      const double w = a.min_width();
      const double need = 3.0 * lat.spacing();
      if (w < need * (1.0 - 1e-9)) {
        std::ostringstream os;
        os << "event geometry: annulus width " << w
           << " is below the detectability bound 3*spacing = " << need
           << "; refine the lattice to spacing <= " << w / 3.0;
        throw std::invalid_argument(os.str());
      }
      return;
    }
    case EventSpec::Kind::Separation: {
      for (const Cplx p : e.group1()) check_point_margin(p, lat, "group1 point");
      for (const Cplx p : e.group2()) check_point_margin(p, lat, "group2 point");
      return;
    }
    case EventSpec::Kind::SurroundPair:
      check_point_margin(e.z1(), lat, "first point");
      check_point_margin(e.z2(), lat, "second point");
      return;
  }
}

Observable event_observable(const EventSpec& e, const HexLattice& lat,
                            bool as_count) {
  check_event_fits(e, lat);
  Observable obs;
  obs.name = e.describe();
  if (as_count)
    obs.eval = [e](const LoopConfig&, const LoopsView& v) {
      return eval_count(e, v);
    };
  else
    obs.eval = [e](const LoopConfig&, const LoopsView& v) {
      return eval_event(e, v) ? 1.0 : 0.0;
    };
  return obs;
}

}  // namespace clelab
