#include "clelab/conformal_derivative.hpp"

#include <cmath>
#include <sstream>

namespace clelab {

CurveCollection CurveCollection::from_curves(
    const std::vector<ClosedCurve>& cs, int samples_per_curve) {
  CurveCollection sigma;
  for (const auto& c : cs) sigma.curves.push_back(c.sample(samples_per_curve));
  sigma.validate();
  return sigma;
}

void CurveCollection::validate() const {
  if (curves.empty())
    throw std::invalid_argument("CurveCollection: no curves");
  for (const auto& c : curves)
    if (c.size() < 3)
      throw std::invalid_argument("CurveCollection: degenerate curve");
  // self-intersection: non-adjacent segment pairs must not cross
  for (const auto& c : curves) {
    const std::size_t n = c.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;  // adjacent around the seam
        if (segments_intersect(c[i], c[(i + 1) % n], c[j], c[(j + 1) % n]))
          throw std::invalid_argument(
              "CurveCollection: curve is not simple after deformation");
      }
  }
  for (std::size_t a = 0; a < curves.size(); ++a)
    for (std::size_t b = a + 1; b < curves.size(); ++b) {
      const auto& ca = curves[a];
      const auto& cb = curves[b];
      for (std::size_t i = 0; i < ca.size(); ++i)
        for (std::size_t j = 0; j < cb.size(); ++j)
          if (segments_intersect(ca[i], ca[(i + 1) % ca.size()], cb[j],
                                 cb[(j + 1) % cb.size()]))
            throw std::invalid_argument(
                "CurveCollection: curves intersect after deformation");
    }
}

double CurveCollection::extent() const {
  Cplx centroid{0.0, 0.0};
  std::size_t n = 0;
  for (const auto& c : curves)
    for (const Cplx& p : c) {
      centroid += p;
      ++n;
    }
  centroid /= double(n);
  double r = 0.0;
  for (const auto& c : curves)
    for (const Cplx& p : c) r = std::max(r, std::abs(p - centroid));
  return r;
}

CurveCollection deform(const CurveCollection& sigma, const VectorField& h,
                       double t) {
  CurveCollection out;
  out.curves.reserve(sigma.curves.size());
  for (const auto& c : sigma.curves) {
    std::vector<Cplx> moved;
    moved.reserve(c.size());
    for (const Cplx& z : c) moved.push_back(z + t * h.eval(z));
    out.curves.push_back(std::move(moved));
  }
  if (t != 0.0) out.validate();
  return out;
}

namespace {

double default_step(const CurveCollection& sigma, const VectorField& h) {
  double hmax = 0.0;
  for (const auto& c : sigma.curves)
    for (const Cplx& z : c) hmax = std::max(hmax, std::abs(h.eval(z)));
  if (hmax == 0.0) return 1e-3;
  return 1e-4 * std::max(sigma.extent(), 1e-6) / hmax;
}

}  // namespace

DeformationDerivative directional_derivative(const CurveFunction& f,
                                             const CurveCollection& sigma,
                                             const VectorField& h,
                                             double step) {
  const double t = step > 0.0 ? step : default_step(sigma, h);
  auto central = [&](double tt) {
    return (f(deform(sigma, h, tt)) - f(deform(sigma, h, -tt))) / (2.0 * tt);
  };
  const double d1 = central(t);
  const double d2 = central(t / 2.0);
  DeformationDerivative d;
  d.value = (4.0 * d2 - d1) / 3.0;
  d.step_used = t;
  d.richardson_order = 2;
  if (!std::isfinite(d.value))
    throw std::runtime_error("directional_derivative: non-finite result");
  return d;
}

DeformationDerivative directional_derivative(const StatCurveFunction& f,
                                             const CurveCollection& sigma,
                                             const VectorField& h,
                                             double step) {
  if (!(step > 0.0))
    throw std::invalid_argument(
        "directional_derivative: statistical mode needs an explicit step");
  const RatioEstimate plus = f(deform(sigma, h, step));
  const RatioEstimate minus = f(deform(sigma, h, -step));
  DeformationDerivative d;
  d.value = (plus.value - minus.value) / (2.0 * step);
  const double comb = std::sqrt(plus.stderror * plus.stderror +
                                minus.stderror * minus.stderror);
  d.stderror = comb / (2.0 * step);
  d.step_used = step;
  d.resolved = std::abs(plus.value - minus.value) >= 10.0 * comb;
  return d;
}

Cplx holomorphic_derivative_at(const CurveFunction& f,
                               const CurveCollection& sigma, Cplx w,
                               double step) {
  // Delta_w = -(D_0 - i D_1)/2 with D_phi the derivative along
  // e^{i phi}/(z-w); signs fixed by the counterclockwise-about-the-domain
  // contour convention with the pole excised around w.
  const VectorField h0 = VectorField::simple_pole(w, 1.0);
  const VectorField h1 = VectorField::simple_pole(w, Cplx{0.0, 1.0});
  const double d0 = directional_derivative(f, sigma, h0, step).value;
  const double d1 = directional_derivative(f, sigma, h1, step).value;
  return Cplx{-d0 / 2.0, d1 / 2.0};
}

StatHolomorphicDerivative holomorphic_derivative_at(
    const StatCurveFunction& f, const CurveCollection& sigma, Cplx w,
    double step) {
  const VectorField h0 = VectorField::simple_pole(w, 1.0);
  const VectorField h1 = VectorField::simple_pole(w, Cplx{0.0, 1.0});
  const DeformationDerivative d0 = directional_derivative(f, sigma, h0, step);
  const DeformationDerivative d1 = directional_derivative(f, sigma, h1, step);
  StatHolomorphicDerivative out;
  out.value = Cplx{-d0.value / 2.0, d1.value / 2.0};
  out.stderror = Cplx{d0.stderror / 2.0, d1.stderror / 2.0};
  out.resolved = d0.resolved && d1.resolved;
  return out;
}

Cplx extract_charge(const CurveFunction& f, const CurveCollection& sigma,
                    double step) {
  // Gamma = D_{z^3} - i D_{i z^3} for bounded domains (counterclockwise
  // contour, residue at infinity picks the z^-4 tail).
  const double d0 =
      directional_derivative(f, sigma, VectorField::monomial(3), step).value;
  const double d1 =
      directional_derivative(f, sigma, VectorField::monomial(3, Cplx{0.0, 1.0}),
                             step)
          .value;
  return Cplx{d0, -d1};
}

namespace {

ComparatorReport assemble_report(Cplx delta_w, Cplx delta_err, Cplx s_w,
                                 bool resolved) {
  ComparatorReport r;
  r.delta_w = delta_w;
  r.delta_w_err = delta_err;
  r.schwarzian_s_w = s_w;
  r.resolved = resolved;
  if (s_w == Cplx{0.0, 0.0})
    throw std::invalid_argument(
        "schwarzian_comparator: uniformizer has zero Schwarzian at w (pick a "
        "non-Mobius map or another point)");
  const Cplx ratio = delta_w / s_w;
  r.c_fit = 12.0 * ratio.real();
  r.imag_residual = 12.0 * ratio.imag();
  r.c_err = 12.0 * std::abs(delta_err) / std::abs(s_w);
  return r;
}

}  // namespace

ComparatorReport schwarzian_comparator(const CurveFunction& log_z,
                                       const CurveCollection& sigma, Cplx w,
                                       const AnalyticMap& uniformizer,
                                       double step) {
  const Cplx delta = holomorphic_derivative_at(log_z, sigma, w, step);
  return assemble_report(delta, Cplx{0.0, 0.0}, schwarzian(uniformizer, w),
                         true);
}

ComparatorReport schwarzian_comparator(const StatCurveFunction& log_z,
                                       const CurveCollection& sigma, Cplx w,
                                       const AnalyticMap& uniformizer,
                                       double step) {
  const StatHolomorphicDerivative delta =
      holomorphic_derivative_at(log_z, sigma, w, step);
  return assemble_report(delta.value, delta.stderror,
                         schwarzian(uniformizer, w), delta.resolved);
}

std::string comparator_report_json(const ComparatorReport& r) {
  std::ostringstream os;
  os.precision(15);
  os << "{\"delta_w\":[" << r.delta_w.real() << "," << r.delta_w.imag()
     << "],\"delta_w_err\":[" << r.delta_w_err.real() << ","
     << r.delta_w_err.imag() << "],\"schwarzian_s_w\":["
     << r.schwarzian_s_w.real() << "," << r.schwarzian_s_w.imag()
     << "],\"c_fit\":" << r.c_fit << ",\"c_err\":" << r.c_err
     << ",\"imag_residual\":" << r.imag_residual
     << ",\"resolved\":" << (r.resolved ? "true" : "false") << "}";
  return os.str();
}

}  // namespace clelab
