#include "clelab/sphere_geometry.hpp"

#include <cmath>

namespace clelab {

double round_distance(const SpherePoint& z1, const SpherePoint& z2) {
  if (z1.is_infinity() && z2.is_infinity()) return 0.0;
  if (z1.is_infinity()) return std::atan(1.0 / std::abs(z2.value()));
  if (z2.is_infinity()) return std::atan(1.0 / std::abs(z1.value()));
  const Cplx a = z1.value();
  const Cplx b = z2.value();
  const double num = std::abs(a - b);
  const double den = std::abs(1.0 + a * std::conj(b));
  if (den == 0.0) return kPi / 2.0;  // antipodal
  return std::atan(num / den);
}

MobiusMap::MobiusMap(Cplx a, Cplx b, Cplx c, Cplx d)
    : a_(a), b_(b), c_(c), d_(d) {
  if (det() == Cplx(0.0, 0.0))
    throw std::invalid_argument("MobiusMap: degenerate coefficients (ad-bc=0)");
}

MobiusMap MobiusMap::scaling_rotation(Cplx s) {
  if (s == Cplx(0.0, 0.0))
    throw std::invalid_argument("MobiusMap: zero scale factor");
  return {s, 0.0, 0.0, 1.0};
}

MobiusMap MobiusMap::to_zero_infinity(const SpherePoint& z1,
                                      const SpherePoint& z2) {
  if (z1 == z2)
    throw std::invalid_argument("MobiusMap: coincident fixed points");
  if (z2.is_infinity()) return {1.0, -z1.value(), 0.0, 1.0};
  if (z1.is_infinity()) return {0.0, 1.0, 1.0, -z2.value()};
  return {1.0, -z1.value(), 1.0, -z2.value()};
}

SpherePoint MobiusMap::apply(const SpherePoint& z) const {
  if (z.is_infinity()) {
    if (c_ == Cplx(0.0, 0.0)) return SpherePoint::infinity();
    return SpherePoint(a_ / c_);
  }
  const Cplx zz = z.value();
  const Cplx den = c_ * zz + d_;
  if (den == Cplx(0.0, 0.0)) return SpherePoint::infinity();
  return SpherePoint((a_ * zz + b_) / den);
}

MobiusMap MobiusMap::compose(const MobiusMap& inner) const {
  return {a_ * inner.a_ + b_ * inner.c_, a_ * inner.b_ + b_ * inner.d_,
          c_ * inner.a_ + d_ * inner.c_, c_ * inner.b_ + d_ * inner.d_};
}

MobiusMap MobiusMap::inverse() const { return {d_, -b_, -c_, a_}; }

MobiusMap MobiusMap::normalized() const {
  const Cplx s = std::sqrt(det());
  return {a_ / s, b_ / s, c_ / s, d_ / s};
}

bool MobiusMap::proportional_to(const MobiusMap& other, double tol) const {
  // Cross products of coefficient vectors vanish iff proportional.
  const std::array<Cplx, 4> u{a_, b_, c_, d_};
  const std::array<Cplx, 4> v{other.a_, other.b_, other.c_, other.d_};
  double scale = 0.0;
  for (int i = 0; i < 4; ++i)
    scale = std::max(scale, std::abs(u[i]) * std::abs(v[i]));
  if (scale == 0.0) return false;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (std::abs(u[i] * v[j] - u[j] * v[i]) > tol * std::max(1.0, scale))
        return false;
  return true;
}

Cplx cross_ratio(const SpherePoint& z1, const SpherePoint& z2,
                 const SpherePoint& z3, const SpherePoint& z4) {
  // (z1-z3)(z2-z4) / ((z1-z4)(z2-z3)), with the factors containing an
  // infinite point cancelled against each other.
  auto diff_or_one = [](const SpherePoint& p, const SpherePoint& q) -> Cplx {
    if (p.is_infinity() || q.is_infinity()) return 1.0;
    return p.value() - q.value();
  };
  return diff_or_one(z1, z3) * diff_or_one(z2, z4) /
         (diff_or_one(z1, z4) * diff_or_one(z2, z3));
}

AnalyticMap::AnalyticMap(Fn f, Fn d1, Fn d2, Fn d3, bool exact)
    : f_(std::move(f)),
      d1_(std::move(d1)),
      d2_(std::move(d2)),
      d3_(std::move(d3)),
      exact_(exact) {}

AnalyticMap AnalyticMap::numeric(Fn f) {
  // Central differences with Richardson extrapolation. The step grows with
  // the derivative order: at fixed step the third-order stencil loses all
  // significance to roundoff.
  auto d1 = [f](Cplx w) {
    const double h = 1e-5 * (1.0 + std::abs(w));
    auto D = [&](double hh) { return (f(w + hh) - f(w - hh)) / (2.0 * hh); };
    return (4.0 * D(h / 2) - D(h)) / 3.0;
  };
  auto d2 = [f](Cplx w) {
    const double h = 2e-4 * (1.0 + std::abs(w));
    auto S = [&](double hh) {
      return (f(w + hh) - 2.0 * f(w) + f(w - hh)) / (hh * hh);
    };
    return (4.0 * S(h / 2) - S(h)) / 3.0;
  };
  auto d3 = [f](Cplx w) {
    const double h = 8e-4 * (1.0 + std::abs(w));
    auto T = [&](double hh) {
      return (f(w + 2 * hh) - 2.0 * f(w + hh) + 2.0 * f(w - hh) -
              f(w - 2 * hh)) /
             (2.0 * hh * hh * hh);
    };
    return (4.0 * T(h / 2) - T(h)) / 3.0;
  };
  return AnalyticMap(std::move(f), d1, d2, d3, /*exact=*/false);
}

AnalyticMap as_map(const MobiusMap& m) {
  const Cplx a = m.a(), b = m.b(), c = m.c(), d = m.d();
  const Cplx det = m.det();
  auto f = [a, b, c, d](Cplx z) { return (a * z + b) / (c * z + d); };
  auto d1 = [c, d, det](Cplx z) {
    const Cplx q = c * z + d;
    return det / (q * q);
  };
  auto d2 = [c, d, det](Cplx z) {
    const Cplx q = c * z + d;
    return -2.0 * c * det / (q * q * q);
  };
  auto d3 = [c, d, det](Cplx z) {
    const Cplx q = c * z + d;
    return 6.0 * c * c * det / (q * q * q * q);
  };
  return AnalyticMap(f, d1, d2, d3);
}

AnalyticMap polynomial_map(std::vector<Cplx> coeffs) {
  auto horner = [](const std::vector<Cplx>& c, Cplx z) {
    Cplx acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
    return acc;
  };
  auto deriv = [](const std::vector<Cplx>& c) {
    std::vector<Cplx> d;
    for (std::size_t k = 1; k < c.size(); ++k)
      d.push_back(double(k) * c[k]);
    return d;
  };
  const auto c1 = deriv(coeffs);
  const auto c2 = deriv(c1);
  const auto c3 = deriv(c2);
  return AnalyticMap([=](Cplx z) { return horner(coeffs, z); },
                     [=](Cplx z) { return horner(c1, z); },
                     [=](Cplx z) { return horner(c2, z); },
                     [=](Cplx z) { return horner(c3, z); });
}

AnalyticMap exp_map() {
  auto e = [](Cplx z) { return std::exp(z); };
  return AnalyticMap(e, e, e, e);
}

AnalyticMap compose(const AnalyticMap& f, const AnalyticMap& g) {
  auto val = [f, g](Cplx z) { return f(g(z)); };
  auto d1 = [f, g](Cplx z) { return f.d1(g(z)) * g.d1(z); };
  auto d2 = [f, g](Cplx z) {
    const Cplx u = g(z), g1 = g.d1(z), g2 = g.d2(z);
    return f.d2(u) * g1 * g1 + f.d1(u) * g2;
  };
  auto d3 = [f, g](Cplx z) {
    const Cplx u = g(z), g1 = g.d1(z), g2 = g.d2(z), g3 = g.d3(z);
    return f.d3(u) * g1 * g1 * g1 + 3.0 * f.d2(u) * g1 * g2 + f.d1(u) * g3;
  };
  return AnalyticMap(val, d1, d2, d3, f.exact_jets() && g.exact_jets());
}

namespace {

bool value_blows_up(const AnalyticMap& g, Cplx w, Cplx* out) {
  try {
    const Cplx v = g(w);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return true;
    *out = v;
    return false;
  } catch (const std::exception&) {
    return true;
  }
}

// -3 lim_{z→w} ( 2 g'(z) / ((z-w) g(z)) + g''(z)/g(z) ), evaluated on a
// shrinking-step sequence with one Richardson sweep.
Cplx schwarzian_pole_branch(const AnalyticMap& g, Cplx w) {
  auto probe = [&](double h) {
    const Cplx z = w + Cplx(h, 0.37 * h);  // off-axis, avoids real-axis zeros
    return -3.0 * (2.0 * g.d1(z) / ((z - w) * g(z)) + g.d2(z) / g(z));
  };
  const double h0 = 1e-3 * (1.0 + std::abs(w));
  const Cplx a = probe(h0), b = probe(h0 / 2), c = probe(h0 / 4);
  const Cplx r1 = 2.0 * b - a, r2 = 2.0 * c - b;  // kill O(h)
  return 2.0 * r2 - r1;                           // kill O(h^2)
}

}  // namespace

Cplx schwarzian(const AnalyticMap& g, Cplx w) {
  Cplx value;
  if (value_blows_up(g, w, &value)) return schwarzian_pole_branch(g, w);
  const Cplx g1 = g.d1(w);
  if (g1 == Cplx(0.0, 0.0))
    throw std::domain_error("schwarzian: map not conformal at w (g'(w)=0)");
  const Cplx r = g.d2(w) / g1;
  return g.d3(w) / g1 - 1.5 * r * r;
}

std::pair<MobiusMap, Cplx> normalize_cubic(const AnalyticMap& g, Cplx w) {
  Cplx g0;
  if (value_blows_up(g, w, &g0))
    throw std::domain_error("normalize_cubic: g(w) must be finite");
  const Cplx g1 = g.d1(w);
  if (g1 == Cplx(0.0, 0.0))
    throw std::domain_error("normalize_cubic: map not conformal at w");
  const Cplx g2 = g.d2(w);
  // G(u) = w + (u-g0) / (g1 + q (u-g0)) with q = g2/(2 g1) is the unique
  // Mobius map with G(g0)=w, (G∘g)'(w)=1, (G∘g)''(w)=0.
  const Cplx q = g2 / (2.0 * g1);
  MobiusMap G(1.0 + w * q, -g0 + w * (g1 - g0 * q), q, g1 - g0 * q);
  return {G, schwarzian(g, w)};
}

EllipseSpec::EllipseSpec(Cplx w, double eps_, double theta_, double b_)
    : center(w), eps(eps_), theta(theta_), b(b_) {
  if (!(b > 1.0)) throw std::invalid_argument("EllipseSpec: requires b > 1");
  if (!(eps > 0.0)) throw std::invalid_argument("EllipseSpec: requires eps > 0");
  theta = std::fmod(theta, 2.0 * kPi);
  if (theta < 0.0) theta += 2.0 * kPi;
}

Cplx ellipse_boundary(const EllipseSpec& e, double alpha) {
  const Cplx phase = std::polar(1.0, e.theta);
  return e.center +
         e.eps * phase *
             (e.b * std::polar(1.0, alpha) + std::polar(1.0 / e.b, -alpha));
}

namespace {

// Exterior inverse-Joukowski branch: the root of ζ^2 - uζ + 1 with |ζ| ≥ 1.
double exterior_branch_modulus(Cplx u) {
  const Cplx s = std::sqrt(u * u - 4.0);
  const Cplx r1 = 0.5 * (u + s);
  const Cplx r2 = 0.5 * (u - s);
  return std::max(std::abs(r1), std::abs(r2));
}

}  // namespace

bool ellipse_contains(const EllipseSpec& e, const SpherePoint& z) {
  if (z.is_infinity()) return false;
  const Cplx u = (z.value() - e.center) / (e.eps * std::polar(1.0, e.theta));
  return exterior_branch_modulus(u) < e.b;
}

bool ellipse_contains_closed(const EllipseSpec& e, const SpherePoint& z) {
  if (z.is_infinity()) return false;
  const Cplx u = (z.value() - e.center) / (e.eps * std::polar(1.0, e.theta));
  return exterior_branch_modulus(u) <= e.b;
}

EllipseSpec ellipse_shrunk(const EllipseSpec& e, double eta) {
  if (!(eta >= 0.0 && eta < 1.0))
    throw std::invalid_argument("ellipse_shrunk: eta must lie in [0,1)");
  const double nb = (1.0 - eta) * e.b;
  if (!(nb > 1.0))
    throw std::invalid_argument(
        "ellipse_shrunk: (1-eta) b <= 1 degenerates the ellipse");
  return EllipseSpec(e.center, e.eps, e.theta, nb);
}

AnalyticMap joukowski_map(Cplx w, double eps, double theta) {
  const Cplx k = eps * eps * std::polar(1.0, 2.0 * theta);
  auto guard = [w](Cplx z) {
    if (z == w) throw std::domain_error("joukowski_map: pole at z = w");
  };
  return AnalyticMap(
      [w, k, guard](Cplx z) {
        guard(z);
        return z + k / (z - w);
      },
      [w, k, guard](Cplx z) {
        guard(z);
        const Cplx d = z - w;
        return 1.0 - k / (d * d);
      },
      [w, k, guard](Cplx z) {
        guard(z);
        const Cplx d = z - w;
        return 2.0 * k / (d * d * d);
      },
      [w, k, guard](Cplx z) {
        guard(z);
        const Cplx d = z - w;
        return -6.0 * k / (d * d * d * d);
      });
}

SpherePoint joukowski_apply(Cplx w, double eps, double theta,
                            const SpherePoint& z) {
  if (z.is_infinity()) return SpherePoint::infinity();
  if (z.value() == w) throw std::domain_error("joukowski_apply: pole at z = w");
  const Cplx k = eps * eps * std::polar(1.0, 2.0 * theta);
  return SpherePoint(z.value() + k / (z.value() - w));
}

MobiusMap generalized_scale(double lambda, const SpherePoint& z1,
                            const SpherePoint& z2) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("generalized_scale: lambda must be positive");
  if (z1 == z2)
    throw std::invalid_argument("generalized_scale: fixed points coincide");
  const MobiusMap g = MobiusMap::to_zero_infinity(z1, z2);
  const MobiusMap s = MobiusMap::scaling_rotation(lambda);
  return g.inverse().compose(s).compose(g);
}

Cplx VectorField::eval(Cplx z) const {
  if (is_pole(z)) throw std::domain_error("VectorField: evaluation at a pole");
  Cplx acc = 0.0;
  for (auto it = poly.rbegin(); it != poly.rend(); ++it) acc = acc * z + *it;
  for (const auto& p : poles) {
    const Cplx inv = 1.0 / (z - p.at);
    Cplx pw = inv;
    for (const Cplx& c : p.coeff) {
      acc += c * pw;
      pw *= inv;
    }
  }
  return acc;
}

VectorField VectorField::derivative() const {
  VectorField d;
  for (std::size_t k = 1; k < poly.size(); ++k)
    d.poly.push_back(double(k) * poly[k]);
  for (const auto& p : poles) {
    Pole dp;
    dp.at = p.at;
    dp.coeff.assign(p.coeff.size() + 1, Cplx(0.0));
    for (std::size_t j = 0; j < p.coeff.size(); ++j)
      dp.coeff[j + 1] = -double(j + 1) * p.coeff[j];
    d.poles.push_back(std::move(dp));
  }
  return d;
}

bool VectorField::is_pole(Cplx z, double tol) const {
  for (const auto& p : poles)
    if (std::abs(z - p.at) <= tol) return true;
  return false;
}

VectorField VectorField::constant(Cplx c) {
  VectorField v;
  v.poly = {c};
  return v;
}

VectorField VectorField::monomial(int m, Cplx coeff) {
  if (m < 0) throw std::invalid_argument("VectorField: negative monomial order");
  VectorField v;
  v.poly.assign(std::size_t(m) + 1, Cplx(0.0));
  v.poly[std::size_t(m)] = coeff;
  return v;
}

VectorField VectorField::simple_pole(Cplx at, Cplx residue) {
  VectorField v;
  v.poles.push_back({at, {residue}});
  return v;
}

}  // namespace clelab
