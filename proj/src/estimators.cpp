#include "clelab/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace clelab {

double kappa_to_c(double kappa) {
  if (!(kappa >= 8.0 / 3.0 && kappa <= 4.0))
    throw std::invalid_argument("kappa_to_c: dilute branch needs kappa in [8/3, 4]");
  return (6.0 - kappa) * (3.0 * kappa - 8.0) / (2.0 * kappa);
}

double c_to_kappa(double c) {
  if (!(c >= 0.0 && c <= 1.0))
    throw std::invalid_argument("c_to_kappa: dilute branch needs c in [0, 1]");
  // 3 kappa^2 + (2c - 26) kappa + 48 = 0; the dilute root is the smaller one
  const double bcoef = 2.0 * c - 26.0;
  const double disc = bcoef * bcoef - 4.0 * 3.0 * 48.0;
  return (-bcoef - std::sqrt(std::max(0.0, disc))) / 6.0;
}

std::vector<ChainRunResult> run_chains_raw(const HexLattice& lat,
                                           const ModelParams& p,
                                           const MCParams& mc,
                                           const std::vector<Observable>& obs,
                                           int n_threads) {
  mc.validate();
  if (n_threads <= 0)
    n_threads = int(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<ChainRunResult> results(std::size_t(mc.chains));
  std::vector<std::string> errors(std::size_t(mc.chains));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int c = next.fetch_add(1);
      if (c >= mc.chains) return;
      try {
        ChainState st(lat, mc.seed, std::uint64_t(c));
        results[std::size_t(c)] = run_chain(st, p, mc, obs);
      } catch (const std::exception& e) {
        errors[std::size_t(c)] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const int nw = std::min(n_threads, mc.chains);
  for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error("run_chains_raw: " + e);
  return results;
}

std::vector<BinnedEstimate> estimate_event_probabilities(
    const LatticeJob& job, const ModelParams& p, const MCParams& mc,
    const std::vector<EventSpec>& events, int n_threads) {
  const HexLattice lat = build_lattice(job.region, job.spacing);
  std::vector<Observable> obs;
  obs.reserve(events.size());
  for (const auto& e : events) obs.push_back(event_observable(e, lat));
  const auto raw = run_chains_raw(lat, p, mc, obs, n_threads);
  std::vector<BinnedEstimate> out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    std::vector<BinnedEstimate> parts;
    for (const auto& r : raw) parts.push_back(r.estimates[i]);
    out.push_back(BinnedEstimate::from_chains(parts));
  }
  return out;
}

BinnedEstimate estimate_single_event(const LatticeJob& job,
                                     const ModelParams& p, const MCParams& mc,
                                     const EventSpec& event, int n_threads) {
  return estimate_event_probabilities(job, p, mc, {event}, n_threads).front();
}

const BinnedEstimate& DenominatorTable::at(double eta) const {
  for (std::size_t i = 0; i < eta_grid.size(); ++i)
    if (eta_grid[i] == eta) return probs[i];
  throw std::invalid_argument("DenominatorTable: eta not tabulated");
}

double DenominatorTable::max_relative_error() const {
  double rel = 0.0;
  for (const auto& p : probs) {
    if (p.mean == 0.0)
      throw StatisticalResolutionError(
          "denominator table: zero event count; increase the sweep budget");
    rel = std::max(rel, p.stderror / p.mean);
  }
  return rel;
}

DenominatorTable unit_disk_denominators(const std::vector<double>& eta_grid,
                                        const LatticeJob& proxy,
                                        const ModelParams& p,
                                        const MCParams& mc, int n_threads) {
  if (proxy.region.kind() != RegionSpec::Kind::FullPlaneProxy)
    throw std::invalid_argument(
        "unit_disk_denominators: the normalization lives on the plane proxy");
  if (proxy.region.radius() < 4.0)
    throw std::invalid_argument(
        "unit_disk_denominators: proxy radius must exceed 4x the unit scale");
  std::vector<EventSpec> events;
  for (const double eta : eta_grid)
    events.push_back(disk_quench_event(Cplx{0.0, 0.0}, 1.0, eta));
  DenominatorTable table;
  table.eta_grid = eta_grid;
  table.probs = estimate_event_probabilities(proxy, p, mc, events, n_threads);
  return table;
}

EventSpec disk_quench_event(Cplx center, double radius, double eta) {
  if (!(eta > 0.0 && eta < 1.0))
    throw std::invalid_argument("disk_quench_event: eta must lie in (0,1)");
  return EventSpec::winding_loop_in(
      AnnulusSpec(ClosedCurve::circle(center, radius),
                  ClosedCurve::circle(center, (1.0 - eta) * radius)));
}

EventSpec disk_complement_quench_event(Cplx center, double radius, double eta) {
  if (!(eta > 0.0 && eta < 1.0))
    throw std::invalid_argument(
        "disk_complement_quench_event: eta must lie in (0,1)");
  // the exterior domain is uniformized by r/z, so the partner annulus
  // inflates the circle to r/(1-eta)
  return EventSpec::winding_loop_in(
      AnnulusSpec(ClosedCurve::circle(center, radius / (1.0 - eta)),
                  ClosedCurve::circle(center, radius)));
}

namespace {

void require_decreasing(const std::vector<double>& grid, const char* what) {
  if (grid.size() < 3)
    throw std::invalid_argument(std::string(what) +
                                ": need at least 3 grid points");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] < grid[i - 1]))
      throw std::invalid_argument(std::string(what) +
                                  ": grid must be strictly decreasing");
}

struct Extrapolation {
  double value, stderror, chi2;
  int dof;
  bool inflated;
};

Extrapolation extrapolate_to_zero(const std::vector<double>& xs,
                                  const std::vector<double>& ys,
                                  const std::vector<double>& errs) {
  const LinearFit fit = weighted_linear_fit(xs, ys, errs);
  return {fit.intercept, fit.intercept_err, fit.chi2, fit.dof,
          fit.stderr_inflated};
}

}  // namespace

WeightRatioEstimate estimate_weight_ratio(
    const LatticeJob& domain, const ModelParams& p, const MCParams& mc,
    const std::vector<double>& eta_grid,
    const std::function<EventSpec(double)>& event_of_eta,
    const DenominatorTable& den, int n_threads) {
  require_decreasing(eta_grid, "estimate_weight_ratio");
  std::vector<EventSpec> events;
  for (const double eta : eta_grid) events.push_back(event_of_eta(eta));
  if (domain.region.kind() == RegionSpec::Kind::FullPlaneProxy) {
    double scale = 0.0;
    for (const auto& e : events)
      if (e.kind() == EventSpec::Kind::WindingLoopIn)
        scale = std::max(scale, e.annulus().outer.outer_radius_about(
                                    domain.region.center()));
    if (domain.region.radius() < 4.0 * scale)
      throw std::invalid_argument(
          "estimate_weight_ratio: plane proxy must exceed 4x the observable "
          "scale");
  }
  const auto probs =
      estimate_event_probabilities(domain, p, mc, events, n_threads);

  WeightRatioEstimate est;
  std::vector<double> xs, ys, errs;
  for (std::size_t i = 0; i < eta_grid.size(); ++i) {
    WeightRatioPoint pt;
    pt.eta = eta_grid[i];
    pt.numerator = probs[i];
    pt.ratio = ratio_of(probs[i], den.at(eta_grid[i]), "estimate_weight_ratio");
    xs.push_back(pt.eta);
    ys.push_back(pt.ratio.value);
    errs.push_back(pt.ratio.stderror);
    est.points.push_back(std::move(pt));
  }
  const Extrapolation ex = extrapolate_to_zero(xs, ys, errs);
  est.value = ex.value;
  est.stderror = ex.stderror;
  est.fit_chi2 = ex.chi2;
  est.fit_dof = ex.dof;
  est.stderr_inflated = ex.inflated;
  return est;
}

WeightRatioEstimate estimate_m(const LatticeJob& domain, const EllipseSpec& A,
                               const ModelParams& p, const MCParams& mc,
                               const std::vector<double>& eta_grid,
                               const DenominatorTable& den, int n_threads) {
  return estimate_weight_ratio(
      domain, p, mc, eta_grid,
      [&A](double eta) {
        return regularized_ellipse_event(A.center, A.eps, A.theta, A.b, eta);
      },
      den, n_threads);
}

namespace {

RegionSpec z_denominator_region(const ZGeometry& g) {
  // V = the domain bounded by v that contains u
  const double centers = std::abs(g.u_center - g.v_center);
  if (centers + g.u_radius < g.v_radius)  // u strictly inside v
    return RegionSpec::disk(g.v_center, g.v_radius);
  if (centers > g.u_radius + g.v_radius ||
      centers + g.v_radius < g.u_radius)  // disjoint or v inside u
    return RegionSpec::exterior_proxy(
        ClosedCurve::circle(g.v_center, g.v_radius), g.proxy_radius);
  throw std::invalid_argument("estimate_Z: curves u and v must be disjoint");
}

}  // namespace

RelPartitionEstimate estimate_Z(const ZGeometry& g, const ModelParams& p,
                                const MCParams& mc,
                                const std::vector<double>& widths,
                                int n_threads) {
  require_decreasing(widths, "estimate_Z");
  if (!(g.proxy_radius >= 4.0 * (std::abs(g.u_center) + g.u_radius +
                                 0.5 * widths.front())))
    throw std::invalid_argument(
        "estimate_Z: proxy radius must exceed 4x the u-annulus scale");

  std::vector<EventSpec> events;
  for (const double w : widths)
    events.push_back(EventSpec::winding_loop_in(
        AnnulusSpec(ClosedCurve::circle(g.u_center, g.u_radius + 0.5 * w),
                    ClosedCurve::circle(g.u_center, g.u_radius - 0.5 * w))));

  const LatticeJob plane{RegionSpec::full_plane_proxy(g.proxy_radius),
                         g.spacing};
  const LatticeJob vregion{z_denominator_region(g), g.spacing};
  const auto num = estimate_event_probabilities(plane, p, mc, events, n_threads);
  MCParams mc_den = mc;
  mc_den.seed = mc.seed + 0x9E3779B97F4A7C15ULL;  // independent stream block
  const auto val =
      estimate_event_probabilities(vregion, p, mc_den, events, n_threads);

  RelPartitionEstimate est;
  std::vector<double> xs, ys, errs;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    RelPartitionPoint pt;
    pt.width = widths[i];
    pt.ratio = ratio_of(num[i], val[i], "estimate_Z");
    xs.push_back(pt.width);
    ys.push_back(pt.ratio.value);
    errs.push_back(pt.ratio.stderror);
    est.points.push_back(pt);
  }
  const Extrapolation ex = extrapolate_to_zero(xs, ys, errs);
  est.value = ex.value;
  est.stderror = ex.stderror;
  est.fit_chi2 = ex.chi2;
  est.fit_dof = ex.dof;
  est.stderr_inflated = ex.inflated;
  if (!(est.value > 0.0))
    throw StatisticalResolutionError(
        "estimate_Z: extrapolated value is not positive; widen the budget");
  return est;
}

RelPartitionEstimate estimate_Z_dual(const ZGeometry& g, const ModelParams& p,
                                     const MCParams& mc,
                                     const std::vector<double>& eta_grid,
                                     int n_threads) {
  // ZCD route for v strictly inside u: events quench the disk bounded by v,
  // regions are the plane proxy and the disk bounded by u.
  require_decreasing(eta_grid, "estimate_Z_dual");
  const double centers = std::abs(g.u_center - g.v_center);
  if (!(centers + g.v_radius < g.u_radius))
    throw std::invalid_argument(
        "estimate_Z_dual: needs v strictly inside u (disk form of the dual "
        "estimator)");
  std::vector<EventSpec> events;
  for (const double eta : eta_grid)
    events.push_back(disk_quench_event(g.v_center, g.v_radius, eta));
  const LatticeJob plane{RegionSpec::full_plane_proxy(g.proxy_radius),
                         g.spacing};
  const LatticeJob cregion{RegionSpec::disk(g.u_center, g.u_radius), g.spacing};
  const auto num = estimate_event_probabilities(plane, p, mc, events, n_threads);
  MCParams mc_den = mc;
  mc_den.seed = mc.seed + 0xD1B54A32D192ED03ULL;
  const auto val =
      estimate_event_probabilities(cregion, p, mc_den, events, n_threads);

  RelPartitionEstimate est;
  est.model = "linear_eta";
  std::vector<double> xs, ys, errs;
  for (std::size_t i = 0; i < eta_grid.size(); ++i) {
    RelPartitionPoint pt;
    pt.width = eta_grid[i];
    pt.ratio = ratio_of(num[i], val[i], "estimate_Z_dual");
    xs.push_back(pt.width);
    ys.push_back(pt.ratio.value);
    errs.push_back(pt.ratio.stderror);
    est.points.push_back(pt);
  }
  const Extrapolation ex = extrapolate_to_zero(xs, ys, errs);
  est.value = ex.value;
  est.stderror = ex.stderror;
  est.fit_chi2 = ex.chi2;
  est.fit_dof = ex.dof;
  est.stderr_inflated = ex.inflated;
  return est;
}

Cplx fourier_second_mode(std::span<const double> values) {
  const std::size_t T = values.size();
  if (T == 0 || T % 4 != 0)
    throw std::invalid_argument(
        "fourier_second_mode: theta grid size must be a positive multiple of 4");
  // phases repeat with period T/2 and negate at T/4 shifts: grouping the
  // four partners first makes constant inputs cancel exactly
  Cplx acc{0.0, 0.0};
  const std::size_t quarter = T / 4;
  for (std::size_t j = 0; j < quarter; ++j) {
    const double theta = 2.0 * kPi * double(j) / double(T);
    const Cplx phase = std::polar(1.0, -2.0 * theta);
    const double grouped = values[j] - values[j + quarter] +
                           values[j + 2 * quarter] - values[j + 3 * quarter];
    acc += phase * grouped;
  }
  return acc;
}

namespace {

void check_tau_preconditions(const LatticeJob& domain, Cplx w,
                             const EventSpec& X, const TauParams& tp) {
  if (tp.eps_grid.empty())
    throw std::invalid_argument("estimate_tau: empty epsilon grid");
  if (tp.theta_grid_size <= 0 || tp.theta_grid_size % 4 != 0)
    throw std::invalid_argument(
        "estimate_tau: theta grid size must be a positive multiple of 4");
  double max_eps = 0.0;
  for (const double e : tp.eps_grid) {
    if (e < 8.0 * domain.spacing)
      throw std::invalid_argument(
          "estimate_tau: scale separation violated (needs eps >= 8 spacing)");
    max_eps = std::max(max_eps, e);
  }
  const double reach = max_eps * (tp.b + 1.0 / tp.b);
  if (domain.region.kind() == RegionSpec::Kind::FullPlaneProxy) {
    double scale = std::abs(w) + reach;
    if (X.kind() == EventSpec::Kind::Separation) {
      for (const Cplx pt : X.group1()) scale = std::max(scale, std::abs(pt));
      for (const Cplx pt : X.group2()) scale = std::max(scale, std::abs(pt));
    } else if (X.kind() == EventSpec::Kind::SurroundPair) {
      scale = std::max({scale, std::abs(X.z1()), std::abs(X.z2())});
    }
    if (domain.region.radius() < 4.0 * scale)
      throw std::invalid_argument(
          "estimate_tau: plane proxy must exceed 4x the observable scale");
  }
  // X must stay away from the ellipse family around w
  auto too_close = [&](Cplx pt) { return std::abs(pt - w) <= reach; };
  switch (X.kind()) {
    case EventSpec::Kind::Sure:
      break;
    case EventSpec::Kind::Separation:
      for (const Cplx pt : X.group1())
        if (too_close(pt))
          throw std::invalid_argument(
              "estimate_tau: event support margin below max eps (b + 1/b)");
      for (const Cplx pt : X.group2())
        if (too_close(pt))
          throw std::invalid_argument(
              "estimate_tau: event support margin below max eps (b + 1/b)");
      break;
    case EventSpec::Kind::SurroundPair:
      if (too_close(X.z1()) || too_close(X.z2()))
        throw std::invalid_argument(
            "estimate_tau: event support margin below max eps (b + 1/b)");
      break;
    case EventSpec::Kind::WindingLoopIn:
      for (const Cplx pt : X.annulus().outer.sample(32))
        if (too_close(pt))
          throw std::invalid_argument(
              "estimate_tau: event support margin below max eps (b + 1/b)");
      break;
  }
}

}  // namespace

double TauNormalization::max_relative_error() const {
  double rel = 0.0;
  for (const auto& per_eps : probs)
    for (const auto& per_theta : per_eps)
      for (const auto& est : per_theta) {
        if (est.mean == 0.0)
          throw StatisticalResolutionError(
              "tau normalization: zero event count; increase the sweep budget");
        rel = std::max(rel, est.stderror / est.mean);
      }
  return rel;
}

TauNormalization estimate_tau_normalization(const LatticeJob& plane_proxy,
                                            const ModelParams& p,
                                            const MCParams& mc,
                                            const TauParams& tp,
                                            int n_threads) {
  if (plane_proxy.region.kind() != RegionSpec::Kind::FullPlaneProxy)
    throw std::invalid_argument(
        "estimate_tau_normalization: needs a plane-proxy region");
  check_tau_preconditions(plane_proxy, Cplx{0.0, 0.0}, EventSpec::sure(), tp);
  require_decreasing(tp.eta_grid, "estimate_tau_normalization");

  const HexLattice lat = build_lattice(plane_proxy.region, plane_proxy.spacing);
  const int T = tp.theta_grid_size;
  std::vector<Observable> obs;
  for (const double eps : tp.eps_grid)
    for (int j = 0; j < T; ++j)
      for (const double eta : tp.eta_grid) {
        const double theta = 2.0 * kPi * double(j) / double(T);
        const EventSpec quench =
            regularized_ellipse_event(Cplx{0.0, 0.0}, eps, theta, tp.b, eta);
        obs.push_back(event_observable(quench, lat));
      }
  const auto raw = run_chains_raw(lat, p, mc, obs, n_threads);

  TauNormalization norm;
  norm.params = tp;
  norm.probs.resize(tp.eps_grid.size());
  std::size_t idx = 0;
  for (std::size_t ie = 0; ie < tp.eps_grid.size(); ++ie) {
    norm.probs[ie].resize(std::size_t(T));
    for (int j = 0; j < T; ++j) {
      for (std::size_t k = 0; k < tp.eta_grid.size(); ++k) {
        std::vector<BinnedEstimate> parts;
        for (const auto& r : raw) parts.push_back(r.estimates[idx]);
        norm.probs[ie][std::size_t(j)].push_back(
            BinnedEstimate::from_chains(parts));
        ++idx;
      }
    }
  }
  return norm;
}

namespace {

void check_norm_matches(const TauNormalization& norm, const TauParams& tp) {
  if (norm.params.eps_grid != tp.eps_grid || norm.params.b != tp.b ||
      norm.params.theta_grid_size != tp.theta_grid_size ||
      norm.params.eta_grid != tp.eta_grid)
    throw std::invalid_argument(
        "estimate_tau: normalization table was built for different tau "
        "parameters");
}

}  // namespace

StressTensorEstimate estimate_tau(const LatticeJob& domain, Cplx w,
                                  const EventSpec& X, const ModelParams& p,
                                  const MCParams& mc, const TauParams& tp,
                                  const TauNormalization& norm, int n_threads) {
  check_tau_preconditions(domain, w, X, tp);
  require_decreasing(tp.eta_grid, "estimate_tau");
  check_norm_matches(norm, tp);
  const double scale_rel = norm.max_relative_error();

  const HexLattice lat = build_lattice(domain.region, domain.spacing);
  const int T = tp.theta_grid_size;
  const std::size_t n_eps = tp.eps_grid.size();
  const std::size_t n_eta = tp.eta_grid.size();

  if (X.kind() != EventSpec::Kind::Sure) check_event_fits(X, lat);

  // observable layout: [eps][theta][eta] indicator of quench-and-X
  std::vector<Observable> obs;
  obs.reserve(n_eps * std::size_t(T) * n_eta);
  for (const double eps : tp.eps_grid)
    for (int j = 0; j < T; ++j)
      for (const double eta : tp.eta_grid) {
        const double theta = 2.0 * kPi * double(j) / double(T);
        const EventSpec quench =
            regularized_ellipse_event(w, eps, theta, tp.b, eta);
        check_event_fits(quench, lat);
        Observable ob;
        ob.name = quench.describe();
        ob.eval = [quench, X](const LoopConfig&, const LoopsView& v) {
          if (!eval_event(X, v)) return 0.0;
          return eval_event(quench, v) ? 1.0 : 0.0;
        };
        obs.push_back(std::move(ob));
      }

  const auto raw = run_chains_raw(lat, p, mc, obs, n_threads);
  const std::size_t n_chains = raw.size();
  if (n_chains < 2)
    throw std::invalid_argument(
        "estimate_tau: needs >= 2 chains for scatter-based errors");

  // per chain, per eps: matched ratio against the plane-proxy table,
  // eta -> 0 extrapolation per theta, then the second Fourier mode; the
  // chain set then gives mean and scatter
  StressTensorEstimate est;
  est.theta_grid_size = T;
  est.scale_relative_error = scale_rel;

  std::vector<std::vector<Cplx>> tau_by_eps(n_eps);
  for (std::size_t ie = 0; ie < n_eps; ++ie) {
    const double eps = tp.eps_grid[ie];
    for (std::size_t c = 0; c < n_chains; ++c) {
      std::vector<double> mode_input(static_cast<std::size_t>(T), 0.0);
      for (int j = 0; j < T; ++j) {
        std::vector<double> xs, ys, errs;
        for (std::size_t k = 0; k < n_eta; ++k) {
          const std::size_t idx =
              (ie * std::size_t(T) + std::size_t(j)) * n_eta + k;
          const BinnedEstimate& num = raw[c].estimates[idx];
          const double nmean = norm.probs[ie][std::size_t(j)][k].mean;
          xs.push_back(tp.eta_grid[k]);
          ys.push_back(num.mean / nmean);
          // guard zero-count bins: floor the weight at one count
          const double floor_err =
              1.0 / (std::max(1.0, double(num.n_samples)) * nmean);
          errs.push_back(std::max(num.stderror / nmean, 0.1 * floor_err));
        }
        mode_input[std::size_t(j)] = extrapolate_to_zero(xs, ys, errs).value;
      }
      const Cplx mode = fourier_second_mode(mode_input);
      tau_by_eps[ie].push_back(mode / (double(T) * eps * eps));
    }
  }

  std::vector<double> exs, yre, yim, ere, eim;
  for (std::size_t ie = 0; ie < n_eps; ++ie) {
    Cplx mean{0.0, 0.0};
    for (const Cplx t : tau_by_eps[ie]) mean += t;
    mean /= double(n_chains);
    double vre = 0.0, vim = 0.0;
    for (const Cplx t : tau_by_eps[ie]) {
      vre += (t.real() - mean.real()) * (t.real() - mean.real());
      vim += (t.imag() - mean.imag()) * (t.imag() - mean.imag());
    }
    double sre = std::sqrt(vre / double(n_chains - 1) / double(n_chains));
    double sim = std::sqrt(vim / double(n_chains - 1) / double(n_chains));
    // all-zero chains give zero scatter; floor the weight so the pooled
    // average stays finite (the value is then an exact zero)
    sre = std::max(sre, 1e-12 * (1.0 + std::abs(mean.real())));
    sim = std::max(sim, 1e-12 * (1.0 + std::abs(mean.imag())));
    StressTensorPoint pt;
    pt.eps = tp.eps_grid[ie];
    pt.value = mean;
    pt.stderror = Cplx{sre, sim};
    est.points.push_back(pt);
    exs.push_back(pt.eps);
    yre.push_back(mean.real());
    yim.push_back(mean.imag());
    ere.push_back(sre);
    eim.push_back(sim);
  }

  if (n_eps >= 3) {
    const Extrapolation re = extrapolate_to_zero(exs, yre, ere);
    const Extrapolation im = extrapolate_to_zero(exs, yim, eim);
    est.value = Cplx{re.value, im.value};
    est.stderror = Cplx{re.stderror, im.stderror};
  } else {
    // too few points for a fit: inverse-variance average
    double wr = 0, sr = 0, wi = 0, si = 0;
    for (std::size_t ie = 0; ie < n_eps; ++ie) {
      const double wre = 1.0 / (ere[ie] * ere[ie]);
      const double wim = 1.0 / (eim[ie] * eim[ie]);
      wr += wre;
      sr += wre * yre[ie];
      wi += wim;
      si += wim * yim[ie];
    }
    est.value = Cplx{sr / wr, si / wi};
    est.stderror = Cplx{std::sqrt(1.0 / wr), std::sqrt(1.0 / wi)};
    est.model = "pooled_eps";
  }
  // fold the shared normalization error in as a scale factor
  est.stderror =
      Cplx{std::hypot(est.stderror.real(), est.value.real() * scale_rel),
           std::hypot(est.stderror.imag(), est.value.imag() * scale_rel)};
  return est;
}

WardReport ward_check(const LatticeJob& domain, Cplx w,
                      const std::vector<Cplx>& group1,
                      const std::vector<Cplx>& group2, const ModelParams& p,
                      const MCParams& mc, const WardOptions& opts,
                      const TauNormalization& norm, int n_threads) {
  const bool disk_mode = domain.region.kind() == RegionSpec::Kind::Disk;
  if (!disk_mode && domain.region.kind() != RegionSpec::Kind::FullPlaneProxy)
    throw std::invalid_argument(
        "ward_check: region must be a plane proxy or a disk");
  const double delta =
      opts.displacement > 0.0 ? opts.displacement : 2.0 * domain.spacing;
  if (delta < domain.spacing)
    throw std::invalid_argument(
        "ward_check: displacement below the lattice resolution");

  std::vector<Cplx> points = group1;
  points.insert(points.end(), group2.begin(), group2.end());
  // pairwise separation >= 4 max eps
  double max_eps = 0.0;
  for (const double e : opts.tau.eps_grid) max_eps = std::max(max_eps, e);
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (std::abs(points[i] - points[j]) < 4.0 * max_eps)
        throw std::invalid_argument(
            "ward_check: points closer than 4x the largest ellipse scale");

  const EventSpec X = EventSpec::separation(group1, group2);

  // LHS
  StressTensorEstimate tau =
      estimate_tau(domain, w, X, p, mc, opts.tau, norm, n_threads);

  // RHS: Wirtinger derivatives from jointly measured displaced events
  const HexLattice lat = build_lattice(domain.region, domain.spacing);
  auto displaced = [&](std::size_t k, Cplx shift) {
    std::vector<Cplx> g1 = group1, g2 = group2;
    if (k < g1.size())
      g1[k] += shift;
    else
      g2[k - g1.size()] += shift;
    return EventSpec::separation(g1, g2);
  };

  std::vector<Observable> obs;
  for (std::size_t k = 0; k < points.size(); ++k) {
    for (const Cplx dir : {Cplx{1.0, 0.0}, Cplx{0.0, 1.0}}) {
      const EventSpec plus = displaced(k, delta * dir);
      const EventSpec minus = displaced(k, -delta * dir);
      check_event_fits(plus, lat);
      check_event_fits(minus, lat);
      Observable ob;
      ob.name = "fd";
      ob.eval = [plus, minus](const LoopConfig&, const LoopsView& v) {
        return (eval_event(plus, v) ? 1.0 : 0.0) -
               (eval_event(minus, v) ? 1.0 : 0.0);
      };
      obs.push_back(std::move(ob));
    }
  }
  MCParams mc_fd = mc;
  mc_fd.seed = mc.seed + 0xA5A5A5A5ULL;
  const auto raw = run_chains_raw(lat, p, mc_fd, obs, n_threads);

  WardReport rep;
  rep.lhs = tau.value;
  rep.lhs_err = tau.stderror;

  Cplx rhs{0.0, 0.0};
  double var_re = 0.0, var_im = 0.0;
  // disk uniformizer s(z) = i (R + z)/(R - z) onto the upper half plane
  const double R = disk_mode ? domain.region.radius() : 0.0;
  const Cplx C0 = disk_mode ? domain.region.center() : Cplx{0.0, 0.0};
  auto s_of = [&](Cplx z) {
    const Cplx u = z - C0;
    return Cplx{0.0, 1.0} * (R + u) / (R - u);
  };
  auto ds_of = [&](Cplx z) {
    const Cplx u = z - C0;
    return Cplx{0.0, 1.0} * (2.0 * R) / ((R - u) * (R - u));
  };

  for (std::size_t k = 0; k < points.size(); ++k) {
    std::vector<BinnedEstimate> re_parts, im_parts;
    for (const auto& r : raw) {
      re_parts.push_back(r.estimates[2 * k]);
      im_parts.push_back(r.estimates[2 * k + 1]);
    }
    const BinnedEstimate dre = BinnedEstimate::from_chains(re_parts);
    const BinnedEstimate dim = BinnedEstimate::from_chains(im_parts);
    // Wirtinger: d/dx = (d_Re - i d_Im)/2, each central over 2 delta
    const Cplx Dk{dre.mean / (4.0 * delta), -dim.mean / (4.0 * delta)};
    rep.point_derivatives.push_back(Dk);
    const Cplx err_k{dre.stderror / (4.0 * delta),
                     dim.stderror / (4.0 * delta)};
    if (!disk_mode) {
      const Cplx coef = 1.0 / (w - points[k]);
      rhs += coef * Dk;
      var_re += std::norm(coef) * (err_k.real() * err_k.real() +
                                   err_k.imag() * err_k.imag()) *
                0.5;
      var_im += std::norm(coef) * (err_k.real() * err_k.real() +
                                   err_k.imag() * err_k.imag()) *
                0.5;
    } else {
      // map to the half plane; the uniformizer is Mobius so the Schwarzian
      // correction (c/12){s,w} P(X) vanishes identically
      const Cplx sw = s_of(w);
      const Cplx dw2 = ds_of(w) * ds_of(w);
      const Cplx Dk_mapped = Dk / ds_of(points[k]);
      const Cplx hol = 1.0 / (sw - s_of(points[k]));
      const Cplx anti = 1.0 / (sw - std::conj(s_of(points[k])));
      const Cplx term = dw2 * (hol * Dk_mapped + anti * std::conj(Dk_mapped));
      rhs += term;
      const double amp = std::abs(dw2) * (std::abs(hol) + std::abs(anti)) /
                         std::abs(ds_of(points[k]));
      const double e2 = err_k.real() * err_k.real() +
                        err_k.imag() * err_k.imag();
      var_re += amp * amp * e2 * 0.5;
      var_im += amp * amp * e2 * 0.5;
    }
  }
  rep.rhs = rhs;
  rep.rhs_err = Cplx{std::sqrt(var_re), std::sqrt(var_im)};

  const double dre = rep.lhs.real() - rep.rhs.real();
  const double dim = rep.lhs.imag() - rep.rhs.imag();
  const double sre =
      std::hypot(rep.lhs_err.real(), rep.rhs_err.real());
  const double sim =
      std::hypot(rep.lhs_err.imag(), rep.rhs_err.imag());
  rep.sigma_distance =
      std::max(sre > 0 ? std::abs(dre) / sre : 0.0,
               sim > 0 ? std::abs(dim) / sim : 0.0);
  return rep;
}

CentralChargeFit fit_central_charge_curve(const std::vector<double>& w,
                                          const std::vector<double>& y,
                                          const std::vector<double>& yerr) {
  if (w.size() != y.size() || w.size() != yerr.size() || w.empty())
    throw std::invalid_argument("fit_central_charge_curve: bad inputs");
  std::vector<double> model;
  for (const double wi : w) {
    if (!(wi > 1.0))
      throw std::invalid_argument("fit_central_charge_curve: needs w > 1");
    const double q = (wi * wi - 1.0);
    model.push_back(0.5 / (q * q));
  }
  const AmplitudeFit fit = weighted_amplitude_fit(model, y, yerr);
  CentralChargeFit out;
  out.c = fit.c;
  out.c_err = fit.c_err;
  out.method = "transformation_law";
  out.fit_chi2 = fit.chi2;
  out.fit_dof = fit.dof;
  out.residuals = fit.residuals;
  out.kappa_implied =
      (fit.c >= 0.0 && fit.c <= 1.0) ? c_to_kappa(fit.c) : 0.0;
  return out;
}

CentralChargeFit central_charge_transformation_law(
    const TransformationLawGeometry& g, const ModelParams& p,
    const MCParams& mc, int n_threads) {
  if (g.w_points.size() < 2)
    throw std::invalid_argument(
        "central_charge_transformation_law: need >= 2 insertion points");
  const double s = g.ellipse_scale;
  const EllipseSpec excluded(Cplx{0.0, 0.0}, s, 0.0, g.b);
  const LatticeJob job{
      RegionSpec::exterior_proxy(ClosedCurve::ellipse(excluded),
                                 g.proxy_radius),
      g.spacing};

  // matched normalization on the plane proxy, shared by all insertions
  const LatticeJob plane{RegionSpec::full_plane_proxy(g.proxy_radius),
                         g.spacing};
  MCParams mc_nb = mc;
  mc_nb.seed = mc.seed + 0xBEEFULL;
  const TauNormalization norm =
      estimate_tau_normalization(plane, p, mc_nb, g.tau, n_threads);

  std::vector<double> ws, ys, errs;
  CentralChargeFit out;
  for (const double wu : g.w_points) {
    if (!(wu > g.b))
      throw std::invalid_argument(
          "central_charge_transformation_law: w points must exceed b");
    const Cplx insertion = s * (wu + 1.0 / wu);
    TauParams tp = g.tau;
    // the lattice eps grid scales with the geometry
    const StressTensorEstimate tau = estimate_tau(
        job, insertion, EventSpec::sure(), p, mc, tp, norm, n_threads);
    // unit parametrization: tau_unit = s^2 tau_measured; the pulled-back
    // one-point amplitude is (1 - 1/w^2)^2 tau_unit = (c/2)/(w^2-1)^2
    const double jac = std::pow(1.0 - 1.0 / (wu * wu), 2.0) * s * s;
    ws.push_back(wu);
    ys.push_back(jac * tau.value.real());
    errs.push_back(std::max(jac * tau.stderror.real(), 1e-300));
  }
  out = fit_central_charge_curve(ws, ys, errs);
  return out;
}

CentralChargeFit central_charge_logZ_schwarzian(
    const LogZSchwarzianGeometry& g, const ModelParams& p, const MCParams& mc,
    int n_threads) {
  const double s = g.ellipse_scale;
  const EllipseSpec u_ellipse(Cplx{0.0, 0.0}, s, 0.0, g.b);
  const Cplx w = g.d_center;  // evaluate the derivative at the disk center
  if (!(std::abs(w) > u_ellipse.major_semi_axis() + g.d_radius))
    throw std::invalid_argument(
        "central_charge_logZ_schwarzian: disk D must sit clear of the ellipse");

  const CurveCollection sigma = CurveCollection::from_curves(
      {ClosedCurve::ellipse(u_ellipse),
       ClosedCurve::circle(g.d_center, g.d_radius)},
      g.curve_samples);

  // statistical log Z: ratio of plane-proxy to D-complement probabilities
  // of the quench event in the tubular neighborhood of the deformed u
  StatCurveFunction log_z = [&](const CurveCollection& cc) -> RatioEstimate {
    const auto& u_pts = cc.curves[0];
    const auto& d_pts = cc.curves[1];
    // offset polygons along outward normals by +- width/2
    const Cplx centroid = [&] {
      Cplx c{0.0, 0.0};
      for (const Cplx z : u_pts) c += z;
      return c / double(u_pts.size());
    }();
    std::vector<Cplx> outer, inner;
    const std::size_t n = u_pts.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Cplx prev = u_pts[(i + n - 1) % n];
      const Cplx next = u_pts[(i + 1) % n];
      Cplx tang = next - prev;
      tang /= std::abs(tang);
      Cplx normal{tang.imag(), -tang.real()};  // outward for ccw curves
      if (((u_pts[i] + normal) - centroid).real() * (u_pts[i] - centroid).real() +
              ((u_pts[i] + normal) - centroid).imag() *
                  (u_pts[i] - centroid).imag() <
          std::norm(u_pts[i] - centroid))
        normal = -normal;
      outer.push_back(u_pts[i] + 0.5 * g.annulus_width * normal);
      inner.push_back(u_pts[i] - 0.5 * g.annulus_width * normal);
    }
    const EventSpec quench = EventSpec::winding_loop_in(
        AnnulusSpec(ClosedCurve::polygon(outer), ClosedCurve::polygon(inner)));

    const LatticeJob plane{RegionSpec::full_plane_proxy(g.proxy_radius),
                           g.spacing};
    const LatticeJob dcomp{
        RegionSpec::exterior_proxy(ClosedCurve::polygon(d_pts),
                                   g.proxy_radius),
        g.spacing};
    const BinnedEstimate num =
        estimate_single_event(plane, p, mc, quench, n_threads);
    MCParams mc_den = mc;
    mc_den.seed = mc.seed + 0xC0FFEEULL;
    const BinnedEstimate val =
        estimate_single_event(dcomp, p, mc_den, quench, n_threads);
    const RatioEstimate r = ratio_of(num, val, "logZ");
    return RatioEstimate{std::log(r.value), r.stderror / r.value};
  };

  // elementary uniformizer of the ellipse exterior onto the disk:
  // b / J^{-1}(z/s) with the exterior branch of the inverse Joukowski map
  const double b = g.b;
  auto uniformizer = AnalyticMap::numeric([s, b](Cplx z) {
    const Cplx u = z / s;
    const Cplx root = std::sqrt(u * u - 4.0);
    Cplx zeta = 0.5 * (u + root);
    if (std::abs(zeta) < 1.0) zeta = 0.5 * (u - root);
    return b / zeta;
  });

  const ComparatorReport rep =
      schwarzian_comparator(log_z, sigma, w, uniformizer, g.step);
  CentralChargeFit out;
  out.method = "logZ_schwarzian";
  out.c = rep.c_fit;
  out.c_err = rep.c_err;
  out.resolved = rep.resolved;
  out.fit_dof = 0;
  out.residuals = {rep.imag_residual};
  out.kappa_implied =
      (rep.c_fit >= 0.0 && rep.c_fit <= 1.0) ? c_to_kappa(rep.c_fit) : 0.0;
  return out;
}

RatioIdentityReport ratio_identity_check(double r_a, double r_b, double r_c,
                                         double eta, double spacing,
                                         const ModelParams& p,
                                         const MCParams& mc, int n_threads) {
  if (!(r_a < r_b && r_b < r_c))
    throw std::invalid_argument("ratio_identity_check: need r_a < r_b < r_c");
  const Cplx origin{0.0, 0.0};
  const EventSpec quench_a = disk_quench_event(origin, r_a, eta);
  const EventSpec quench_bc = disk_complement_quench_event(origin, r_b, eta);

  const LatticeJob job_b{RegionSpec::disk(origin, r_b), spacing};
  const LatticeJob job_c{RegionSpec::disk(origin, r_c), spacing};
  const LatticeJob job_ca{RegionSpec::annulus(origin, r_a, r_c), spacing};

  MCParams m1 = mc, m2 = mc, m3 = mc, m4 = mc;
  m1.enable_topological_move = false;
  m2.enable_topological_move = false;
  m4.enable_topological_move = false;
  m2.seed = mc.seed + 101;
  m3.seed = mc.seed + 202;
  m4.seed = mc.seed + 303;
  // the C\A region is an annulus: the winding-loop event lives in the
  // nontrivial homology sector, so the generator move must be on
  m3.enable_topological_move = true;
  const BinnedEstimate pb = estimate_single_event(job_b, p, m1, quench_a, n_threads);
  const BinnedEstimate pc = estimate_single_event(job_c, p, m2, quench_a, n_threads);
  const BinnedEstimate pca =
      estimate_single_event(job_ca, p, m3, quench_bc, n_threads);
  const BinnedEstimate pcb =
      estimate_single_event(job_c, p, m4, quench_bc, n_threads);

  RatioIdentityReport rep;
  rep.lhs = ratio_of(pb, pc, "ratio identity lhs");
  rep.rhs = ratio_of(pca, pcb, "ratio identity rhs");
  const double err = std::hypot(rep.lhs.stderror, rep.rhs.stderror);
  rep.sigma_distance =
      err > 0 ? std::abs(rep.lhs.value - rep.rhs.value) / err : 0.0;
  return rep;
}

}  // namespace clelab
