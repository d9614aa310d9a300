#pragma once

#include "clelab/conformal_derivative.hpp"
#include "clelab/enumerate.hpp"
#include "clelab/events.hpp"

namespace clelab {

// Central charge of the dilute branch, c = (6-kappa)(3kappa-8)/(2kappa),
// kappa in [8/3, 4]; the inverse picks the dilute root.
double kappa_to_c(double kappa);
double c_to_kappa(double c);

// Lattice realization of a region: geometry in continuum units plus the
// spacing the estimators must respect.
struct LatticeJob {
  RegionSpec region = RegionSpec::disk(Cplx{0.0, 0.0}, 1.0);
  double spacing = 1.0;
};

// Per-chain results, merged deterministically by the callers.
std::vector<ChainRunResult> run_chains_raw(const HexLattice& lat,
                                           const ModelParams& p,
                                           const MCParams& mc,
                                           const std::vector<Observable>& obs,
                                           int n_threads = 0);

// Event probabilities from independent chains on one lattice (one chain set,
// all events measured jointly).
std::vector<BinnedEstimate> estimate_event_probabilities(
    const LatticeJob& job, const ModelParams& p, const MCParams& mc,
    const std::vector<EventSpec>& events, int n_threads = 0);

BinnedEstimate estimate_single_event(const LatticeJob& job,
                                     const ModelParams& p, const MCParams& mc,
                                     const EventSpec& event,
                                     int n_threads = 0);

// Normalization table: P_proxy(unit-disk quench event) per eta, estimated
// once and shared by every ratio that divides by it.
struct DenominatorTable {
  std::vector<double> eta_grid;
  std::vector<BinnedEstimate> probs;
  const BinnedEstimate& at(double eta) const;
  double max_relative_error() const;
};

DenominatorTable unit_disk_denominators(const std::vector<double>& eta_grid,
                                        const LatticeJob& proxy,
                                        const ModelParams& p,
                                        const MCParams& mc, int n_threads = 0);

// ---- renormalized weight -------------------------------------------------

struct WeightRatioPoint {
  double eta;
  BinnedEstimate numerator;  // P_domain(event(eta))
  RatioEstimate ratio;       // numerator / denominator(eta)
};

struct WeightRatioEstimate {
  std::vector<WeightRatioPoint> points;  // eta strictly decreasing
  double value = 0.0;                    // eta -> 0 extrapolation
  double stderror = 0.0;
  std::string model = "linear_eta";
  double fit_chi2 = 0.0;
  int fit_dof = 0;
  bool stderr_inflated = false;
};

// Generic eta family: P_domain(event_of_eta) / denominator(eta),
// extrapolated linearly in eta with residual-inflated errors.
WeightRatioEstimate estimate_weight_ratio(
    const LatticeJob& domain, const ModelParams& p, const MCParams& mc,
    const std::vector<double>& eta_grid,
    const std::function<EventSpec(double)>& event_of_eta,
    const DenominatorTable& den, int n_threads = 0);

// Renormalized weight of an elliptical domain A inside the region.
WeightRatioEstimate estimate_m(const LatticeJob& domain, const EllipseSpec& A,
                               const ModelParams& p, const MCParams& mc,
                               const std::vector<double>& eta_grid,
                               const DenominatorTable& den, int n_threads = 0);

// Quench events of a disk (annulus [(1-eta) r, r]) and of a disk complement
// (annulus [r, r/(1-eta)], the image of the standard family under r/z).
EventSpec disk_quench_event(Cplx center, double radius, double eta);
EventSpec disk_complement_quench_event(Cplx center, double radius, double eta);

// ---- relative partition function ------------------------------------------

struct RelPartitionPoint {
  double width;  // tubular-neighborhood width
  RatioEstimate ratio;
};

struct RelPartitionEstimate {
  std::vector<RelPartitionPoint> points;
  double value = 0.0;
  double stderror = 0.0;
  std::string model = "linear_width";
  double fit_chi2 = 0.0;
  int fit_dof = 0;
  bool stderr_inflated = false;
};

struct ZGeometry {
  Cplx u_center;
  double u_radius = 1.0;
  Cplx v_center;
  double v_radius = 2.0;
  double proxy_radius = 8.0;  // plane-proxy cutoff
  double spacing = 1.0;
};

// Z(u,v) for disjoint circles: whole-plane over V-region probabilities of
// the thin-annulus event around u, extrapolated in the annulus width.
RelPartitionEstimate estimate_Z(const ZGeometry& g, const ModelParams& p,
                                const MCParams& mc,
                                const std::vector<double>& widths,
                                int n_threads = 0);

// Dual route (u = outer circle bounding C, v = inner circle bounding D):
// plane-proxy over disk-C probabilities of the quench family of D.
RelPartitionEstimate estimate_Z_dual(const ZGeometry& g, const ModelParams& p,
                                     const MCParams& mc,
                                     const std::vector<double>& eta_grid,
                                     int n_threads = 0);

// ---- stress tensor ---------------------------------------------------------

// Second Fourier mode sum_j e^{-2 i theta_j} v_j on theta_j = 2 pi j / T.
// T must be a multiple of 4; the grouped summation cancels theta-independent
// signals exactly, not just to rounding.
Cplx fourier_second_mode(std::span<const double> values);

struct TauParams {
  std::vector<double> eps_grid;
  int theta_grid_size = 16;
  double b = 2.0;
  std::vector<double> eta_grid;
};

// Matched normalization for the stress tensor: plane-proxy probabilities of
// the same-scale quench family, per (eps, theta, eta). At shared eta the
// unit-disk denominator cancels between the tau ratio and N_b, so the
// per-theta ratio of domain to plane-proxy probabilities is the stable
// estimator of the same continuum quantity (lattice cutoff effects cancel
// between the matched event families).
struct TauNormalization {
  TauParams params;
  // probs[eps][theta][eta]
  std::vector<std::vector<std::vector<BinnedEstimate>>> probs;
  double max_relative_error() const;
};

TauNormalization estimate_tau_normalization(const LatticeJob& plane_proxy,
                                            const ModelParams& p,
                                            const MCParams& mc,
                                            const TauParams& tp,
                                            int n_threads = 0);

struct StressTensorPoint {
  double eps;
  Cplx value;
  Cplx stderror;  // componentwise, from the chain scatter
};

struct StressTensorEstimate {
  std::vector<StressTensorPoint> points;
  Cplx value;     // small-eps extrapolation (or the single point)
  Cplx stderror;  // includes the common normalization error
  int theta_grid_size = 0;
  double scale_relative_error = 0.0;  // shared N_b / denominator factor
  std::string model = "linear_eps";
};

// tau_{C,w}(X): per epsilon, the eta->0 extrapolated quench ratios around
// w, Fourier-projected on e^{-2 i theta} and scaled by 1/(2 pi eps^2 N_b)
// through the matched normalization table. Chains supply independent tau
// samples; errors come from the cross-chain scatter.
StressTensorEstimate estimate_tau(const LatticeJob& domain, Cplx w,
                                  const EventSpec& X, const ModelParams& p,
                                  const MCParams& mc, const TauParams& tp,
                                  const TauNormalization& norm,
                                  int n_threads = 0);

// ---- Ward identity check ---------------------------------------------------

struct WardOptions {
  TauParams tau;
  double displacement = 0.0;  // 0: use 2 * spacing
};

struct WardReport {
  Cplx lhs;
  Cplx lhs_err;
  Cplx rhs;
  Cplx rhs_err;
  std::vector<Cplx> point_derivatives;  // Wirtinger derivative per point
  double sigma_distance = 0.0;          // |lhs-rhs| vs combined errors
};

// LHS = tau_{C,w}(separation event); RHS = sum_k 1/(w-x_k) d/dx_k P(X)
// (plane proxy) or its disk-mapped form with the analytic uniformizer
// correction (disk regions). Derivatives are symmetric finite differences
// of jointly measured displaced events.
WardReport ward_check(const LatticeJob& domain, Cplx w,
                      const std::vector<Cplx>& group1,
                      const std::vector<Cplx>& group2, const ModelParams& p,
                      const MCParams& mc, const WardOptions& opts,
                      const TauNormalization& norm, int n_threads = 0);

// ---- central charge ---------------------------------------------------------

struct CentralChargeFit {
  double c = 0.0;
  double c_err = 0.0;
  std::string method;  // "transformation_law" or "logZ_schwarzian"
  double kappa_implied = 0.0;
  double fit_chi2 = 0.0;
  int fit_dof = 0;
  std::vector<double> residuals;
  bool resolved = true;
};

// Fit of y_i = (c/2) / (w_i^2 - 1)^2 -- the one-point amplitude on the
// ellipse exterior pulled back through z + 1/z.
CentralChargeFit fit_central_charge_curve(const std::vector<double>& w,
                                          const std::vector<double>& y,
                                          const std::vector<double>& yerr);

struct TransformationLawGeometry {
  double b = 2.0;             // eccentricity parameter of the excluded ellipse
  double ellipse_scale = 8.0; // continuum size of the unit-parametrized ellipse
  double proxy_radius = 48.0;
  double spacing = 1.0;
  std::vector<double> w_points;  // real w > b; insertion at scale * (w + 1/w)
  TauParams tau;
};

CentralChargeFit central_charge_transformation_law(
    const TransformationLawGeometry& g, const ModelParams& p,
    const MCParams& mc, int n_threads = 0);

struct LogZSchwarzianGeometry {
  double b = 2.0;
  double ellipse_scale = 8.0;   // the deformed curve u = boundary of C
  Cplx d_center;                // disk D in the ellipse exterior, w inside
  double d_radius = 4.0;
  double annulus_width = 3.0;   // tubular width of the quench event around u
  double proxy_radius = 48.0;
  double spacing = 1.0;
  double step = 0.5;            // deformation step for the finite difference
  int curve_samples = 96;
};

// (c/12){s,w} route: deformation derivative of log(P_plane / P_exterior)
// compared against the elementary uniformizer of the ellipse exterior.
CentralChargeFit central_charge_logZ_schwarzian(
    const LogZSchwarzianGeometry& g, const ModelParams& p, const MCParams& mc,
    int n_threads = 0);

// ---- ratio identity (nested disks) ----------------------------------------

struct RatioIdentityReport {
  RatioEstimate lhs;  // P_B(quench A) / P_C(quench A)
  RatioEstimate rhs;  // P_{C \ A}(quench B-complement) / P_C(same)
  double sigma_distance = 0.0;
};

RatioIdentityReport ratio_identity_check(double r_a, double r_b, double r_c,
                                         double eta, double spacing,
                                         const ModelParams& p,
                                         const MCParams& mc,
                                         int n_threads = 0);

}  // namespace clelab
