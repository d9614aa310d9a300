#pragma once

#include <functional>

#include "clelab/curves.hpp"
#include "clelab/sphere_geometry.hpp"
#include "clelab/stats.hpp"

namespace clelab {

// Deformable collection of closed curves, discretized as polygonal loops.
// Ellipses and circles enter through boundary sampling; the deformation
// z -> z + t h(z) then acts pointwise.
struct CurveCollection {
  std::vector<std::vector<Cplx>> curves;

  static CurveCollection from_curves(const std::vector<ClosedCurve>& cs,
                                     int samples_per_curve = 256);

  // Simplicity of each curve and pairwise disjointness; throws otherwise.
  void validate() const;
  double extent() const;  // radius about the collection centroid
};

// Pointwise flow z -> z + t h(z); validates the deformed collection.
CurveCollection deform(const CurveCollection& sigma, const VectorField& h,
                       double t);

struct DeformationDerivative {
  double value = 0.0;
  double stderror = 0.0;  // statistical mode only
  double step_used = 0.0;
  int richardson_order = 0;
  bool resolved = true;
};

using CurveFunction = std::function<double(const CurveCollection&)>;
// Statistical functionals report a value with an error bar.
using StatCurveFunction = std::function<RatioEstimate(const CurveCollection&)>;

// d/dt f(deform(sigma, h, t)) at t=0. Analytic mode: central differences
// with one Richardson sweep; step = 0 picks one from the collection scale.
DeformationDerivative directional_derivative(const CurveFunction& f,
                                             const CurveCollection& sigma,
                                             const VectorField& h,
                                             double step = 0.0);

// For statistical f: plain central difference. The result is flagged
// unresolved unless |f(+t) - f(-t)| >= 10 combined stderr.
DeformationDerivative directional_derivative(const StatCurveFunction& f,
                                             const CurveCollection& sigma,
                                             const VectorField& h, double step);

// Global holomorphic derivative at w of a Mobius-stationary functional,
// from the two directional derivatives along 1/(z-w) and i/(z-w).
Cplx holomorphic_derivative_at(const CurveFunction& f,
                               const CurveCollection& sigma, Cplx w,
                               double step = 0.0);

struct StatHolomorphicDerivative {
  Cplx value;
  Cplx stderror;  // per-component
  bool resolved = true;
};
StatHolomorphicDerivative holomorphic_derivative_at(
    const StatCurveFunction& f, const CurveCollection& sigma, Cplx w,
    double step);

// Coefficient of z^-4 in the global holomorphic derivative (times 2), from
// the directional derivatives along z^3 and i z^3.
Cplx extract_charge(const CurveFunction& f, const CurveCollection& sigma,
                    double step = 0.0);

// Compares the holomorphic derivative of a log-partition-function
// candidate against (c/12){s,w} and reports the fitted c.
struct ComparatorReport {
  Cplx delta_w;
  Cplx delta_w_err;
  Cplx schwarzian_s_w;
  double c_fit = 0.0;
  double c_err = 0.0;
  double imag_residual = 0.0;  // component orthogonal to the model
  bool resolved = true;
};

ComparatorReport schwarzian_comparator(const CurveFunction& log_z,
                                       const CurveCollection& sigma, Cplx w,
                                       const AnalyticMap& uniformizer,
                                       double step = 0.0);
ComparatorReport schwarzian_comparator(const StatCurveFunction& log_z,
                                       const CurveCollection& sigma, Cplx w,
                                       const AnalyticMap& uniformizer,
                                       double step);

std::string comparator_report_json(const ComparatorReport& r);

}  // namespace clelab
