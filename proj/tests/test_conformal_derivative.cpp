#include <cmath>

#include "clelab/conformal_derivative.hpp"
#include "doctest.h"

using namespace clelab;

namespace {

double total_length(const CurveCollection& s) {
  double len = 0.0;
  for (const auto& c : s.curves)
    for (std::size_t i = 0; i < c.size(); ++i)
      len += std::abs(c[(i + 1) % c.size()] - c[i]);
  return len;
}

double total_area(const CurveCollection& s) {
  double area = 0.0;
  for (const auto& c : s.curves) area += std::abs(polygon_signed_area(c));
  return area;
}

CurveCollection unit_circle(int samples = 256) {
  return CurveCollection::from_curves({ClosedCurve::circle(0.0, 1.0)}, samples);
}

}  // namespace

TEST_CASE("deform: identity, rigid translation, dilation") {
  const CurveCollection s = unit_circle();
  const CurveCollection s0 = deform(s, VectorField::constant(1.0), 0.0);
  CHECK(s0.curves == s.curves);

  const CurveCollection st = deform(s, VectorField::constant(1.0), 0.1);
  for (std::size_t i = 0; i < s.curves[0].size(); ++i)
    CHECK(std::abs(st.curves[0][i] - (s.curves[0][i] + 0.1)) < 1e-15);

  const CurveCollection sd = deform(s, VectorField::monomial(1), 0.05);
  for (std::size_t i = 0; i < s.curves[0].size(); ++i)
    CHECK(std::abs(sd.curves[0][i] - 1.05 * s.curves[0][i]) < 1e-15);
}

TEST_CASE("deform rejects collisions") {
  // two nearby circles pushed into each other
  const CurveCollection s = CurveCollection::from_curves(
      {ClosedCurve::circle(Cplx{-1.1, 0.0}, 1.0),
       ClosedCurve::circle(Cplx{1.1, 0.0}, 1.0)},
      64);
  // a pole between the curves pulls them through each other
  CHECK_THROWS_AS(deform(s, VectorField::simple_pole(0.0), -0.05),
                  std::invalid_argument);
  // strong quadratic flow folds a single curve over itself
  CHECK_THROWS_AS(deform(unit_circle(64), VectorField::monomial(2), 0.8),
                  std::invalid_argument);
}

TEST_CASE("derivatives of length and area under dilation") {
  const CurveCollection s = unit_circle();
  const double d_len =
      directional_derivative(total_length, s, VectorField::monomial(1)).value;
  CHECK(d_len == doctest::Approx(2.0 * kPi).epsilon(1e-4));
  const double d_area =
      directional_derivative(total_area, s, VectorField::monomial(1)).value;
  CHECK(d_area == doctest::Approx(2.0 * kPi).epsilon(1e-4));
}

TEST_CASE("rotation about the symmetry center kills invariant functionals") {
  const CurveCollection s = unit_circle();
  const double d =
      directional_derivative(total_area, s,
                             VectorField::monomial(1, Cplx{0.0, 1.0}))
          .value;
  CHECK(std::abs(d) < 1e-10);
}

TEST_CASE("chain rule through log") {
  const CurveCollection s = unit_circle();
  VectorField h;  // z^2 + 0.3: asymmetric, no pole near the curve
  h.poly = {Cplx{0.3, 0.0}, Cplx{0.0, 0.0}, Cplx{1.0, 0.0}};
  auto log_len = [](const CurveCollection& c) {
    return std::log(total_length(c));
  };
  const double lhs = directional_derivative(log_len, s, h).value;
  const double rhs =
      directional_derivative(total_length, s, h).value / total_length(s);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
}

TEST_CASE("linearity in the vector field") {
  const CurveCollection s = unit_circle();
  const double a = 0.7, b = -1.3;
  VectorField h1 = VectorField::monomial(1);
  VectorField h2 = VectorField::constant(Cplx{0.2, 0.5});
  VectorField combo;
  combo.poly = {b * Cplx{0.2, 0.5}, a * Cplx{1.0, 0.0}};
  const double d1 = directional_derivative(total_length, s, h1).value;
  const double d2 = directional_derivative(total_length, s, h2).value;
  const double dc = directional_derivative(total_length, s, combo).value;
  CHECK(dc == doctest::Approx(a * d1 + b * d2).epsilon(1e-8));
}

TEST_CASE("charge extraction recovers a planted z^-4 tail to 1e-6") {
  // Sigma: one quadrature circle; the functional sums an explicit
  // antiderivative so its deformation derivative is the contour pairing
  // with Delta(z) = (G0/2) z^-4 + g1 z^-5.
  const Cplx G0{0.8, -0.3};
  const Cplx g1{0.2, 0.1};
  const int M = 64;
  const CurveCollection sigma =
      CurveCollection::from_curves({ClosedCurve::circle(0.0, 1.5)}, M);
  auto p_fn = [&](Cplx z) {
    return -(G0 / 4.0) / (z * z) - (g1 / 3.0) / (z * z * z);
  };
  auto f = [&](const CurveCollection& c) {
    Cplx acc{0.0, 0.0};
    for (const Cplx& z : c.curves[0]) acc += p_fn(z);
    return 2.0 * (acc / double(M)).real();
  };
  const Cplx got = extract_charge(f, sigma);
  CHECK(std::abs(got - G0) < 1e-6);
}

TEST_CASE("schwarzian comparator recovers a planted c = 0.5 to 1e-6") {
  // u and v concentric circles about 2.0; w inside v; s(z) = z^2 is the
  // deliberately non-Mobius uniformizer with {s,z} = -3/(2 z^2).
  const double c_planted = 0.5;
  const Cplx center{2.0, 0.0};
  const Cplx w{2.1, 0.0};
  const int M = 64;
  const CurveCollection sigma = CurveCollection::from_curves(
      {ClosedCurve::circle(center, 1.5), ClosedCurve::circle(center, 0.5)}, M);
  // q' = -{s,z}(z - center) = (3/2)(1/z - center/z^2)
  auto q_fn = [&](Cplx z) {
    return 1.5 * (std::log(z) + center / z);
  };
  auto log_z = [&](const CurveCollection& c) {
    Cplx acc{0.0, 0.0};
    for (const Cplx& z : c.curves[1]) acc += q_fn(z);  // curve v
    return (c_planted / 12.0) * 2.0 * (acc / double(M)).real();
  };
  const AnalyticMap s = polynomial_map({0.0, 0.0, 1.0});
  const ComparatorReport rep = schwarzian_comparator(log_z, sigma, w, s);
  CHECK(std::abs(rep.c_fit - c_planted) < 1e-6);
  CHECK(std::abs(rep.imag_residual) < 1e-6);
  CHECK(std::abs(rep.schwarzian_s_w - Cplx(-1.5 / (2.1 * 2.1))) < 1e-12);
  const std::string js = comparator_report_json(rep);
  CHECK(js.find("c_fit") != std::string::npos);
}

TEST_CASE("field with no pole near Sigma and invariant f gives zero") {
  const CurveCollection s = unit_circle();
  // translation field: length and area are translation invariant
  const double d =
      directional_derivative(total_length, s, VectorField::constant(Cplx{1.0, 2.0}))
          .value;
  CHECK(std::abs(d) < 1e-9);
}

TEST_CASE("statistical mode flags unresolved derivatives") {
  const CurveCollection s = unit_circle(64);
  // a flat functional with a fat error bar cannot be resolved
  StatCurveFunction noisy = [](const CurveCollection& c) {
    return RatioEstimate{total_length(c) * 1e-9, 1.0};
  };
  const DeformationDerivative d =
      directional_derivative(noisy, s, VectorField::monomial(1), 1e-2);
  CHECK(!d.resolved);
  // a clean functional with tiny errors is resolved
  StatCurveFunction clean = [](const CurveCollection& c) {
    return RatioEstimate{total_length(c), 1e-12};
  };
  const DeformationDerivative d2 =
      directional_derivative(clean, s, VectorField::monomial(1), 1e-3);
  CHECK(d2.resolved);
  CHECK(d2.value == doctest::Approx(2.0 * kPi).epsilon(1e-3));
  CHECK(d2.stderror > 0.0);
}

TEST_CASE("holomorphic derivative of a locally constructed functional") {
  // f(Sigma) = 2 Re[(1/M) sum p(z_k)] over a circle about w0: the pairing
  // with h = e^{i phi}/(z-w) reproduces -2 Re(e^{i phi} Delta_w) for
  // Delta(z) = p'(z)(z-c)^{-1}-free construction as in the charge test,
  // but now with the pole excised about w (exterior-domain convention).
  const Cplx center{0.0, 0.0};
  const Cplx w{0.1, -0.05};
  const int M = 64;
  const CurveCollection sigma =
      CurveCollection::from_curves({ClosedCurve::circle(center, 1.0)}, M);
  const Cplx A{0.4, 0.7};
  // Delta(z) = A / (z - 3i): holomorphic near the contour and at w, and
  // log(z - 3i) keeps the contour clear of the principal branch cut
  const Cplx pole{0.0, 3.0};
  auto q_fn = [&](Cplx z) {
    // antiderivative of -Delta(z) * (z - center) = -A z/(z-3i)
    return -A * (z + pole * std::log(z - pole));
  };
  auto f = [&](const CurveCollection& c) {
    Cplx acc{0.0, 0.0};
    for (const Cplx& z : c.curves[0]) acc += q_fn(z);
    return 2.0 * (acc / double(M)).real();
  };
  const Cplx got = holomorphic_derivative_at(f, sigma, w);
  const Cplx want = A / (w - pole);
  CHECK(std::abs(got - want) < 1e-8);
}
