#include "clelab/sphere_geometry.hpp"

#include <cmath>
#include <random>

#include "doctest.h"

using namespace clelab;

namespace {

std::mt19937_64 rng(20240817);

Cplx random_cplx(double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng)};
}

MobiusMap random_mobius() {
  for (;;) {
    const Cplx a = random_cplx(2.0), b = random_cplx(2.0),
               c = random_cplx(2.0), d = random_cplx(2.0);
    if (std::abs(a * d - b * c) > 0.1) return {a, b, c, d};
  }
}

}  // namespace

TEST_CASE("round metric matches the arctan formula") {
  CHECK(round_distance(SpherePoint(0.0), SpherePoint(0.0)) == 0.0);
  CHECK(round_distance(SpherePoint::infinity(), SpherePoint(1.0)) ==
        doctest::Approx(kPi / 4).epsilon(1e-14));
  CHECK(round_distance(SpherePoint(0.0), SpherePoint(1.0)) ==
        doctest::Approx(kPi / 4).epsilon(1e-14));
  CHECK(round_distance(SpherePoint::infinity(), SpherePoint::infinity()) == 0.0);
  // antipodal pair z and -1/conj(z)
  const Cplx z{0.3, 0.7};
  CHECK(round_distance(SpherePoint(z), SpherePoint(-1.0 / std::conj(z))) ==
        doctest::Approx(kPi / 2).epsilon(1e-12));
}

TEST_CASE("round metric symmetry and triangle inequality on random triples") {
  for (int i = 0; i < 500; ++i) {
    SpherePoint a(random_cplx(5.0)), b(random_cplx(5.0)), c(random_cplx(5.0));
    if (i % 7 == 0) a = SpherePoint::infinity();
    const double dab = round_distance(a, b);
    const double dba = round_distance(b, a);
    CHECK(dab == doctest::Approx(dba).epsilon(1e-15));
    CHECK(dab <= round_distance(a, c) + round_distance(c, b) + 1e-12);
  }
}

TEST_CASE("Mobius action: identity, pole convention, group law") {
  const SpherePoint z(Cplx{5.0, 2.0});
  CHECK(MobiusMap::identity().apply(z) == z);

  const MobiusMap inv_map(0.0, 1.0, 1.0, 0.0);  // 1/z
  CHECK(inv_map.apply(SpherePoint(0.0)).is_infinity());
  CHECK(inv_map.apply(SpherePoint::infinity()) == SpherePoint(0.0));

  const MobiusMap g = random_mobius();
  CHECK(g.compose(g.inverse()).proportional_to(MobiusMap::identity()));
  CHECK_THROWS_AS(MobiusMap(1.0, 2.0, 2.0, 4.0), std::invalid_argument);
}

TEST_CASE("compose/apply associate") {
  for (int i = 0; i < 100; ++i) {
    const MobiusMap g = random_mobius(), h = random_mobius();
    const SpherePoint z(random_cplx(3.0));
    const SpherePoint lhs = g.compose(h).apply(z);
    const SpherePoint rhs = g.apply(h.apply(z));
    REQUIRE(!lhs.is_infinity());
    REQUIRE(!rhs.is_infinity());
    CHECK(std::abs(lhs.value() - rhs.value()) < 1e-9);
  }
}

TEST_CASE("cross-ratio is Mobius invariant") {
  for (int i = 0; i < 200; ++i) {
    const MobiusMap g = random_mobius();
    SpherePoint p[4];
    for (auto& q : p) q = SpherePoint(random_cplx(3.0));
    const Cplx before = cross_ratio(p[0], p[1], p[2], p[3]);
    const Cplx after = cross_ratio(g.apply(p[0]), g.apply(p[1]),
                                   g.apply(p[2]), g.apply(p[3]));
    CHECK(std::abs(before - after) < 1e-12 * (1.0 + std::abs(before)));
  }
}

TEST_CASE("Schwarzian reference values") {
  // exp: 1 - 3/2 = -1/2, independent of the base point
  CHECK(std::abs(schwarzian(exp_map(), Cplx{0.3, -0.8}) - Cplx(-0.5)) < 1e-13);
  // z^2 at w=1: 0 - (3/2)(2/2)^2 = -3/2
  CHECK(std::abs(schwarzian(polynomial_map({0.0, 0.0, 1.0}), Cplx{1.0}) -
                 Cplx(-1.5)) < 1e-13);
  // Mobius maps: exactly zero via the exact-jet path
  for (int i = 0; i < 50; ++i) {
    const Cplx s = schwarzian(as_map(random_mobius()), random_cplx(2.0));
    CHECK(std::abs(s) < 1e-12);
  }
  CHECK_THROWS_AS(schwarzian(polynomial_map({0.0, 0.0, 1.0}), Cplx{0.0}),
                  std::domain_error);
}

TEST_CASE("Schwarzian pole branch agrees with the Mobius value") {
  // g(z) = 1/z has a pole at 0; the limit definition must give 0 there.
  const MobiusMap inv_map(0.0, 1.0, 1.0, 0.0);
  CHECK(schwarzian(inv_map, SpherePoint(0.0)) == Cplx(0.0));
  const Cplx s = schwarzian(as_map(inv_map), Cplx{0.0});
  CHECK(std::abs(s) < 1e-6);
}

TEST_CASE("Schwarzian cocycle identity with exact jets") {
  // {f∘g, w} = {f, g(w)} (g'(w))^2 + {g, w}
  for (int i = 0; i < 300; ++i) {
    AnalyticMap g = compose(as_map(random_mobius()),
                            polynomial_map({random_cplx(0.5), 1.0,
                                            random_cplx(0.1), random_cplx(0.05)}));
    AnalyticMap f = (i % 2 == 0)
                        ? compose(exp_map(), as_map(random_mobius()))
                        : polynomial_map({0.0, 1.0, random_cplx(0.1)});
    const Cplx w = random_cplx(0.5);
    Cplx gw, sw_fg, sw_f, sw_g;
    try {
      gw = g(w);
      sw_fg = schwarzian(compose(f, g), w);
      sw_f = schwarzian(f, gw);
      sw_g = schwarzian(g, w);
    } catch (const std::domain_error&) {
      continue;  // non-conformal sample, skip
    }
    const Cplx d = g.d1(w);
    if (std::abs(sw_f * d * d) > 50.0 || std::abs(sw_g) > 50.0) continue;
    CHECK(std::abs(sw_fg - (sw_f * d * d + sw_g)) < 1e-8);
  }
}

TEST_CASE("numeric jets track exact jets") {
  const AnalyticMap exact = compose(exp_map(), polynomial_map({0.0, 1.0, 0.3}));
  const AnalyticMap num = AnalyticMap::numeric([&](Cplx z) { return exact(z); });
  for (int i = 0; i < 20; ++i) {
    const Cplx w = random_cplx(0.8);
    CHECK(std::abs(num.d1(w) - exact.d1(w)) < 1e-9 * (1 + std::abs(exact.d1(w))));
    CHECK(std::abs(num.d2(w) - exact.d2(w)) < 1e-6 * (1 + std::abs(exact.d2(w))));
    CHECK(std::abs(num.d3(w) - exact.d3(w)) < 1e-4 * (1 + std::abs(exact.d3(w))));
    CHECK(std::abs(schwarzian(num, w) - schwarzian(exact, w)) < 1e-4);
  }
}

TEST_CASE("normalize_cubic: Mobius input and Taylor residual") {
  const MobiusMap m = random_mobius();
  auto [G, a] = normalize_cubic(as_map(m), Cplx{0.2, 0.1});
  CHECK(std::abs(a) < 1e-12);
  CHECK(G.proportional_to(m.inverse(), 1e-9));

  auto [Ge, ae] = normalize_cubic(exp_map(), Cplx{0.0});
  CHECK(std::abs(ae - Cplx(-0.5)) < 1e-13);

  // (G∘g)(w+δ) - (w+δ) = (a/6) δ^3 + O(δ^4)
  for (int i = 0; i < 30; ++i) {
    const AnalyticMap g =
        compose(exp_map(), polynomial_map({random_cplx(0.3), 1.0, random_cplx(0.2)}));
    const Cplx w = random_cplx(0.4);
    auto [Gn, an] = normalize_cubic(g, w);
    const AnalyticMap norm = compose(as_map(Gn), g);
    const double delta = 1e-3;
    for (const Cplx dir : {Cplx{1.0, 0.0}, Cplx{0.0, 1.0}, Cplx{0.6, -0.8}}) {
      const Cplx d = delta * dir;
      const Cplx resid = norm(w + d) - (w + d) - an / 6.0 * d * d * d;
      CHECK(std::abs(resid) < 50.0 * delta * delta * delta * delta);
    }
  }
}

TEST_CASE("ellipse family reference values") {
  const EllipseSpec E(0.0, 1.0, 0.0, 2.0);
  CHECK(std::abs(ellipse_boundary(E, 0.0) - Cplx(2.5)) < 1e-15);
  CHECK(ellipse_contains(E, SpherePoint(0.0)));
  CHECK(E.eccentricity() == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(!ellipse_contains(E, SpherePoint(Cplx{3.0, 0.0})));
  CHECK(!ellipse_contains(E, SpherePoint::infinity()));
  // boundary points are excluded from the strict interior
  CHECK(!ellipse_contains(E, SpherePoint(ellipse_boundary(E, 1.234))));
  CHECK(ellipse_contains_closed(E, SpherePoint(ellipse_boundary(E, 1.234))));
}

TEST_CASE("ellipse containment agrees with the boundary parametrization") {
  for (int i = 0; i < 50; ++i) {
    std::uniform_real_distribution<double> ub(1.1, 4.0), ut(0.0, 2 * kPi),
        ue(0.1, 3.0);
    const EllipseSpec E(random_cplx(2.0), ue(rng), ut(rng), ub(rng));
    // points slightly inside / outside along the boundary normal direction
    for (int k = 0; k < 16; ++k) {
      const double alpha = 2 * kPi * k / 16;
      const Cplx p = ellipse_boundary(E, alpha);
      const Cplx inward = E.center - p;
      CHECK(ellipse_contains(E, SpherePoint(p + 1e-6 * inward)));
      CHECK(!ellipse_contains(E, SpherePoint(p - 1e-6 * inward)));
    }
  }
}

TEST_CASE("ellipse_shrunk follows the partner rule") {
  const EllipseSpec E(0.0, 1.0, 0.0, 2.0);
  const EllipseSpec S = ellipse_shrunk(E, 0.25);
  CHECK(S.b == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(S.center == E.center);
  CHECK(S.eps == E.eps);
  CHECK(S.theta == E.theta);
  CHECK(ellipse_shrunk(E, 0.0).b == doctest::Approx(2.0));
  CHECK_THROWS_AS(ellipse_shrunk(E, 0.6), std::invalid_argument);
  // closure of the shrunk ellipse lies strictly inside the original
  for (int k = 0; k < 32; ++k) {
    const Cplx p = ellipse_boundary(S, 2 * kPi * k / 32);
    CHECK(ellipse_contains(E, SpherePoint(p)));
  }
}

TEST_CASE("joukowski map values and circle-to-ellipse image") {
  CHECK(std::abs(joukowski_apply(0.0, 1.0, 0.0, SpherePoint(2.0)).value() -
                 Cplx(2.5)) < 1e-15);
  CHECK(joukowski_apply(0.0, 1.0, 0.0, SpherePoint::infinity()).is_infinity());
  CHECK_THROWS_AS(joukowski_apply(0.0, 1.0, 0.0, SpherePoint(0.0)),
                  std::domain_error);

  // |z - w| = b eps maps onto the ellipse boundary pointwise
  std::uniform_real_distribution<double> ub(1.05, 3.5), ut(0.0, 2 * kPi),
      ue(0.05, 2.5);
  for (int i = 0; i < 40; ++i) {
    const Cplx w = random_cplx(2.0);
    const double eps = ue(rng), theta = ut(rng), b = ub(rng);
    const EllipseSpec E(w, eps, theta, b);
    const AnalyticMap g = joukowski_map(w, eps, theta);
    for (int k = 0; k < 64; ++k) {
      const double alpha = 2 * kPi * k / 64;
      const Cplx z = w + b * eps * std::polar(1.0, alpha);
      // image point must equal the boundary parametrization at alpha - theta
      const Cplx img = g(z);
      const Cplx bnd = ellipse_boundary(E, alpha - theta);
      CHECK(std::abs(img - bnd) < 1e-12 * (1.0 + std::abs(bnd)));
    }
  }
}

TEST_CASE("generalized scale: fixed points, particular cases, flow law") {
  // identity flow
  const MobiusMap one = generalized_scale(1.0, SpherePoint(0.3), SpherePoint(2.0));
  CHECK(one.proportional_to(MobiusMap::identity()));

  // usual scaling lambda_{0,inf}
  const MobiusMap s3 = generalized_scale(3.0, SpherePoint(0.0), SpherePoint::infinity());
  CHECK(std::abs(s3.apply(SpherePoint(2.0)).value() - Cplx(6.0)) < 1e-14);

  // lambda_{1,inf}(x) = 1 + lambda (x-1)
  const MobiusMap s2 = generalized_scale(2.0, SpherePoint(1.0), SpherePoint::infinity());
  CHECK(std::abs(s2.apply(SpherePoint(3.0)).value() - Cplx(5.0)) < 1e-14);

  // lambda_{inf,z2}(x) = z2 + (x - z2)/lambda
  const MobiusMap si = generalized_scale(4.0, SpherePoint::infinity(), SpherePoint(1.0));
  CHECK(std::abs(si.apply(SpherePoint(5.0)).value() - Cplx(2.0)) < 1e-14);

  CHECK_THROWS_AS(generalized_scale(2.0, SpherePoint(1.0), SpherePoint(1.0)),
                  std::invalid_argument);

  // flow law pointwise: lambda ∘ mu = (lambda mu)
  std::uniform_real_distribution<double> ul(0.2, 5.0);
  for (int i = 0; i < 200; ++i) {
    const SpherePoint z1(random_cplx(2.0)), z2(random_cplx(2.0));
    if (z1 == z2) continue;
    const double la = ul(rng), mu = ul(rng);
    const MobiusMap A = generalized_scale(la, z1, z2);
    const MobiusMap B = generalized_scale(mu, z1, z2);
    const MobiusMap AB = A.compose(B);
    const MobiusMap C = generalized_scale(la * mu, z1, z2);
    const SpherePoint x(random_cplx(3.0));
    const SpherePoint u = AB.apply(x), v = C.apply(x);
    if (u.is_infinity() || v.is_infinity()) continue;
    CHECK(std::abs(u.value() - v.value()) < 1e-10 * (1.0 + std::abs(v.value())));
    // fixed points stay put
    const SpherePoint f1 = A.apply(z1);
    CHECK((f1 == z1 || std::abs(f1.value() - z1.value()) < 1e-10));
  }
}

TEST_CASE("vector fields evaluate and differentiate") {
  VectorField h = VectorField::monomial(3);
  h.poles.push_back({Cplx{1.0, 0.0}, {Cplx{2.0, 0.0}, Cplx{0.0, 1.0}}});
  const Cplx z{0.5, 0.5};
  const Cplx expect = z * z * z + 2.0 / (z - 1.0) + Cplx{0.0, 1.0} / ((z - 1.0) * (z - 1.0));
  CHECK(std::abs(h.eval(z) - expect) < 1e-14);
  CHECK_THROWS_AS(h.eval(Cplx{1.0, 0.0}), std::domain_error);

  const VectorField d = h.derivative();
  const double step = 1e-6;
  const Cplx fd = (h.eval(z + step) - h.eval(z - step)) / (2.0 * step);
  CHECK(std::abs(d.eval(z) - fd) < 1e-7);
}
