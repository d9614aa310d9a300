#pragma once

#include <array>
#include <complex>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

// Exact conformal geometry on the Riemann sphere: points with a tagged
// infinity, PSL(2,C) maps, the elliptical domain family used for the
// stress-tensor regularization, Schwarzian derivatives, and rational
// vector fields for boundary deformations.

namespace clelab {

using Cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// A point of C ∪ {∞}. Infinity is a tag, never a large float: the round
// metric and the Schwarzian both branch explicitly at ∞.
class SpherePoint {
 public:
  SpherePoint() = default;
  SpherePoint(Cplx v) : value_(v) {}  // NOLINT: implicit by design
  SpherePoint(double re, double im = 0.0) : value_(re, im) {}

  static SpherePoint infinity() {
    SpherePoint p;
    p.inf_ = true;
    return p;
  }

  bool is_infinity() const { return inf_; }

  Cplx value() const {
    if (inf_) throw std::domain_error("SpherePoint: value() at infinity");
    return value_;
  }

  friend bool operator==(const SpherePoint& a, const SpherePoint& b) {
    if (a.inf_ || b.inf_) return a.inf_ && b.inf_;
    return a.value_ == b.value_;
  }
  friend bool operator!=(const SpherePoint& a, const SpherePoint& b) {
    return !(a == b);
  }

 private:
  Cplx value_{0.0, 0.0};
  bool inf_ = false;
};

// Round metric on the sphere: d(z1,z2) = arctan |z1-z2| / |1 + z1 conj(z2)|,
// d(z,∞) = arctan 1/|z|. Antipodal pairs (vanishing denominator) sit at π/2.
double round_distance(const SpherePoint& z1, const SpherePoint& z2);

// z ↦ (az+b)/(cz+d), ad-bc ≠ 0. Immutable after construction.
class MobiusMap {
 public:
  MobiusMap(Cplx a, Cplx b, Cplx c, Cplx d);

  static MobiusMap identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static MobiusMap translation(Cplx t) { return {1.0, t, 0.0, 1.0}; }
  static MobiusMap scaling_rotation(Cplx s);  // z ↦ s z, s ≠ 0
  // The unique Mobius map with z1 ↦ 0, z2 ↦ ∞ (up to scale); z1 ≠ z2.
  static MobiusMap to_zero_infinity(const SpherePoint& z1,
                                    const SpherePoint& z2);

  Cplx a() const { return a_; }
  Cplx b() const { return b_; }
  Cplx c() const { return c_; }
  Cplx d() const { return d_; }
  Cplx det() const { return a_ * d_ - b_ * c_; }

  SpherePoint apply(const SpherePoint& z) const;

  MobiusMap compose(const MobiusMap& inner) const;  // this ∘ inner
  MobiusMap inverse() const;
  MobiusMap normalized() const;  // det = 1 representative

  // Coefficient-proportionality test, the right notion of map equality.
  bool proportional_to(const MobiusMap& other, double tol = 1e-12) const;

 private:
  Cplx a_, b_, c_, d_;
};

Cplx cross_ratio(const SpherePoint& z1, const SpherePoint& z2,
                 const SpherePoint& z3, const SpherePoint& z4);

// Holomorphic map with its first three derivatives. Closed-form maps carry
// exact jets; numeric() falls back to Richardson-extrapolated central
// differences (step grows with derivative order to keep roundoff in check).
class AnalyticMap {
 public:
  using Fn = std::function<Cplx(Cplx)>;

  AnalyticMap(Fn f, Fn d1, Fn d2, Fn d3, bool exact = true);
  static AnalyticMap numeric(Fn f);

  Cplx operator()(Cplx z) const { return f_(z); }
  Cplx d1(Cplx z) const { return d1_(z); }
  Cplx d2(Cplx z) const { return d2_(z); }
  Cplx d3(Cplx z) const { return d3_(z); }
  bool exact_jets() const { return exact_; }

 private:
  Fn f_, d1_, d2_, d3_;
  bool exact_;
};

AnalyticMap as_map(const MobiusMap& m);
AnalyticMap polynomial_map(std::vector<Cplx> coeffs);  // Σ coeffs[k] z^k
AnalyticMap exp_map();
// f ∘ g with jets by the chain rule (Faa di Bruno to third order).
AnalyticMap compose(const AnalyticMap& f, const AnalyticMap& g);

// {g,w} = g'''/g' - (3/2)(g''/g')^2 when g(w) is finite; at a pole of g the
// limit -3 lim_{z→w} (2g'/( (z-w) g ) + g''/g) defines the same invariant.
// Mobius maps have Schwarzian 0 identically (handled exactly).
Cplx schwarzian(const AnalyticMap& g, Cplx w);
inline Cplx schwarzian(const MobiusMap&, const SpherePoint&) { return 0.0; }

// The unique Mobius map G with (G∘g)(z) = z + (a/6)(z-w)^3 + O((z-w)^4),
// together with a = {g,w}. Requires g(w) finite and g'(w) ≠ 0.
std::pair<MobiusMap, Cplx> normalize_cubic(const AnalyticMap& g, Cplx w);

// Ellipse family: boundary w + ε e^{iθ}(b e^{iα} + b^{-1} e^{-iα}), b > 1.
// Eccentricity 2b/(1+b^2), major semi-axis ε(b+1/b) at angle θ.
struct EllipseSpec {
  Cplx center;
  double eps;
  double theta;
  double b;

  EllipseSpec(Cplx w, double eps_, double theta_, double b_);

  double eccentricity() const { return 2.0 * b / (1.0 + b * b); }
  double major_semi_axis() const { return eps * (b + 1.0 / b); }
  double minor_semi_axis() const { return eps * (b - 1.0 / b); }
};

Cplx ellipse_boundary(const EllipseSpec& e, double alpha);
// Strict interior, decided by the exterior inverse-Joukowski branch
// (|ζ| < b with ζ + 1/ζ = (z-w)/(ε e^{iθ}), |ζ| ≥ 1): no polygonal error.
bool ellipse_contains(const EllipseSpec& e, const SpherePoint& z);
bool ellipse_contains_closed(const EllipseSpec& e, const SpherePoint& z);

// Regularization partner: b ↦ (1-η)b, same center/scale/angle.
// Degenerate unless (1-η)b > 1.
EllipseSpec ellipse_shrunk(const EllipseSpec& e, double eta);

// g_{w,ε,θ}(z) = z + ε^2 e^{2iθ}/(z-w). Maps the circle |z-w| = bε onto the
// boundary of the ellipse(w,ε,θ,b); fixes ∞; pole at w.
AnalyticMap joukowski_map(Cplx w, double eps, double theta);
SpherePoint joukowski_apply(Cplx w, double eps, double theta,
                            const SpherePoint& z);

// Flow fixing z1 and z2: conjugate of z ↦ λz by the map sending z1→0, z2→∞.
// λ=1 is the identity; λ_{0,∞} is the usual scaling.
MobiusMap generalized_scale(double lambda, const SpherePoint& z1,
                            const SpherePoint& z2);

// Rational vector field: polynomial part plus principal parts at poles.
// Closed under differentiation; exact pole bookkeeping.
struct VectorField {
  struct Pole {
    Cplx at;
    std::vector<Cplx> coeff;  // Σ_j coeff[j] / (z - at)^{j+1}
  };
  std::vector<Cplx> poly;  // Σ_k poly[k] z^k
  std::vector<Pole> poles;

  Cplx eval(Cplx z) const;  // throws on a declared pole
  VectorField derivative() const;
  bool is_pole(Cplx z, double tol = 0.0) const;

  static VectorField constant(Cplx c);
  static VectorField monomial(int m, Cplx coeff = 1.0);
  static VectorField simple_pole(Cplx at, Cplx residue = 1.0);
};

}  // namespace clelab
