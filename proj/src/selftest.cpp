#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "clelab/experiment.hpp"
#include "clelab/json_io.hpp"

namespace clelab {

namespace {

struct Check {
  const char* name;
  bool (*fn)();
};

std::mt19937_64 rng(0x5E1F7E57);

Cplx rc(double s) {
  std::uniform_real_distribution<double> u(-s, s);
  return {u(rng), u(rng)};
}

MobiusMap random_mobius() {
  for (;;) {
    const Cplx a = rc(2), b = rc(2), c = rc(2), d = rc(2);
    if (std::abs(a * d - b * c) > 0.1) return {a, b, c, d};
  }
}

bool check_mobius_schwarzian() {
  for (int i = 0; i < 1000; ++i)
    if (std::abs(schwarzian(as_map(random_mobius()), rc(2))) > 1e-10)
      return false;
  return true;
}

bool check_cocycle() {
  for (int i = 0; i < 200; ++i) {
    const AnalyticMap g =
        compose(as_map(random_mobius()), polynomial_map({rc(0.5), 1.0, rc(0.1)}));
    const AnalyticMap f = compose(exp_map(), as_map(random_mobius()));
    const Cplx w = rc(0.5);
    try {
      const Cplx a = schwarzian(f, g(w)) * g.d1(w) * g.d1(w);
      const Cplx b = schwarzian(g, w);
      if (std::abs(a) > 50.0 || std::abs(b) > 50.0) continue;  // keep O(1)
      const Cplx lhs = schwarzian(compose(f, g), w);
      if (std::abs(lhs - (a + b)) > 1e-8) return false;
    } catch (const std::domain_error&) {
      continue;
    }
  }
  return true;
}

bool check_circle_to_ellipse() {
  std::uniform_real_distribution<double> ub(1.05, 3.5), ut(0, 2 * kPi),
      ue(0.05, 2.5);
  for (int i = 0; i < 50; ++i) {
    const Cplx w = rc(2);
    const double eps = ue(rng), theta = ut(rng), b = ub(rng);
    const EllipseSpec E(w, eps, theta, b);
    const AnalyticMap g = joukowski_map(w, eps, theta);
    for (int k = 0; k < 32; ++k) {
      const double alpha = 2 * kPi * k / 32;
      const Cplx z = w + b * eps * std::polar(1.0, alpha);
      const Cplx want = ellipse_boundary(E, alpha - theta);
      if (std::abs(g(z) - want) > 1e-12 * (1 + std::abs(want))) return false;
    }
  }
  return true;
}

bool check_scale_flow() {
  std::uniform_real_distribution<double> ul(0.2, 5.0);
  for (int i = 0; i < 300; ++i) {
    const SpherePoint z1(rc(2)), z2(rc(2));
    if (z1 == z2) continue;
    const double la = ul(rng), mu = ul(rng);
    const MobiusMap ab =
        generalized_scale(la, z1, z2).compose(generalized_scale(mu, z1, z2));
    const MobiusMap c = generalized_scale(la * mu, z1, z2);
    const SpherePoint x(rc(3));
    const SpherePoint u = ab.apply(x), v = c.apply(x);
    if (u.is_infinity() || v.is_infinity()) continue;
    if (std::abs(u.value() - v.value()) > 1e-10 * (1 + std::abs(v.value())))
      return false;
  }
  return true;
}

bool check_kappa_map() {
  if (kappa_to_c(8.0 / 3.0) != 0.0) return false;
  if (std::abs(kappa_to_c(3.0) - 0.5) > 1e-15) return false;
  if (std::abs(kappa_to_c(4.0) - 1.0) > 1e-15) return false;
  for (int i = 0; i <= 100; ++i) {
    const double kappa = 8.0 / 3.0 + (4.0 - 8.0 / 3.0) * i / 100.0;
    if (std::abs(c_to_kappa(kappa_to_c(kappa)) - kappa) > 1e-12) return false;
  }
  return true;
}

bool check_enumeration_oracle() {
  const HexLattice lat = build_lattice(RegionSpec::disk({0.0, 0.0}, 0.4), 1.0);
  const ExactDistribution dist =
      enumerate_configs(lat, ModelParams::critical(1.0));
  const double p = dist.probability_of(
      [](const LoopConfig& c) { return c.occupied_edges() > 0; });
  return std::abs(p - 1.0 / 28.0) < 1e-12;
}

bool check_rng_restore() {
  PhiloxRng a(123, 7);
  for (int i = 0; i < 37; ++i) a.next_u32();
  PhiloxRng b = PhiloxRng::restore(123, 7, a.block(), a.buffer_pos());
  for (int i = 0; i < 64; ++i)
    if (a.next_u32() != b.next_u32()) return false;
  return true;
}

bool check_fourier_orthogonality() {
  for (const int T : {4, 8, 16, 32, 64}) {
    const std::vector<double> flat(std::size_t(T), 0.918273645);
    const Cplx m = fourier_second_mode(flat);
    if (m.real() != 0.0 || m.imag() != 0.0) return false;
  }
  return true;
}

bool check_charge_fitter() {
  std::vector<double> ws, ys, errs;
  for (const double w : {1.5, 2.0, 2.5, 3.0}) {
    const double q = w * w - 1.0;
    ws.push_back(w);
    ys.push_back(0.37 * 0.5 / (q * q));
    errs.push_back(1e-9);
  }
  const CentralChargeFit fit = fit_central_charge_curve(ws, ys, errs);
  return std::abs(fit.c - 0.37) < 1e-6;
}

bool check_comparator() {
  const Cplx center{2.0, 0.0}, w{2.1, 0.0};
  const int M = 64;
  const CurveCollection sigma = CurveCollection::from_curves(
      {ClosedCurve::circle(center, 1.5), ClosedCurve::circle(center, 0.5)}, M);
  auto log_z = [&](const CurveCollection& c) {
    Cplx acc{0.0, 0.0};
    for (const Cplx& z : c.curves[1])
      acc += 1.5 * (std::log(z) + center / z);
    return (0.5 / 12.0) * 2.0 * (acc / double(M)).real();
  };
  const ComparatorReport rep = schwarzian_comparator(
      log_z, sigma, w, polynomial_map({0.0, 0.0, 1.0}));
  return std::abs(rep.c_fit - 0.5) < 1e-6;
}

bool check_winding_oracle() {
  std::vector<Cplx> poly;
  for (int k = 0; k < 12; ++k)
    poly.push_back(std::polar(k % 2 ? 0.8 : 2.0, 2.0 * kPi * k / 12));
  for (int i = 0; i < 300; ++i) {
    const Cplx z = rc(3);
    int got;
    try {
      got = winding_number(poly, z);
    } catch (const std::domain_error&) {
      continue;
    }
    double total = 0;
    for (std::size_t k = 0; k < poly.size(); ++k)
      total += std::arg((poly[(k + 1) % poly.size()] - z) / (poly[k] - z));
    if (got != int(std::lround(total / (2 * kPi)))) return false;
  }
  return true;
}

bool check_checkpoint_roundtrip() {
  const HexLattice lat = build_lattice(RegionSpec::disk({0.0, 0.0}, 2.2), 1.0);
  const ModelParams p = ModelParams::critical(1.0);
  ChainState st(lat, 42, 3);
  run_sweeps(st, p, 300, false);
  MCParams mc;
  mc.seed = 42;
  const std::string ck = checkpoint_to_json(st, mc);
  ChainState st2(lat, 0, 0);
  MCParams mc2;
  checkpoint_restore(ck, lat, &st2, &mc2);
  run_sweeps(st, p, 100, false);
  run_sweeps(st2, p, 100, false);
  return st.config().occupancy() == st2.config().occupancy() &&
         st.rng() == st2.rng();
}

bool check_config_roundtrip() {
  const char* text =
      "[model]\nn = 1\nx = critical\n\n[lattice]\nregion = disk\ncenter = 0 "
      "0\nradius = 5\nspacing = 1\n\n[mc]\nseed = 7\n";
  const ConfigFile a = ConfigFile::parse(text);
  const ConfigFile b = ConfigFile::parse(a.serialize());
  return a == b && b.serialize() == a.serialize();
}

const Check kChecks[] = {
    {"mobius schwarzian vanishes (10^3 maps, 1e-10)", check_mobius_schwarzian},
    {"schwarzian cocycle identity (1e-8)", check_cocycle},
    {"joukowski circle-to-ellipse image (1e-12)", check_circle_to_ellipse},
    {"generalized-scale flow law (1e-10)", check_scale_flow},
    {"kappa<->c dilute map and round trip (1e-12)", check_kappa_map},
    {"single-hexagon enumeration P(loop)=1/28", check_enumeration_oracle},
    {"counter rng restore is bit exact", check_rng_restore},
    {"second Fourier mode kills constants exactly", check_fourier_orthogonality},
    {"central-charge fitter recovers 0.37 (1e-6)", check_charge_fitter},
    {"schwarzian comparator recovers 0.5 (1e-6)", check_comparator},
    {"winding number matches angle-sum oracle", check_winding_oracle},
    {"checkpoint round trip continues bit exact", check_checkpoint_roundtrip},
    {"config parse/serialize round trip", check_config_roundtrip},
};

}  // namespace

bool run_selftest(std::ostream& out) {
  bool all = true;
  for (const Check& c : kChecks) {
    bool ok = false;
    try {
      ok = c.fn();
    } catch (const std::exception& e) {
      out << "FAIL  " << c.name << "  (" << e.what() << ")\n";
      all = false;
      continue;
    }
    out << (ok ? "PASS  " : "FAIL  ") << c.name << "\n";
    all &= ok;
  }
  out << (all ? "selftest: all checks passed\n" : "selftest: FAILURES\n");
  return all;
}

}  // namespace clelab
