#include <cmath>
#include <set>

#include "clelab/enumerate.hpp"
#include "clelab/sampler.hpp"
#include "doctest.h"

using namespace clelab;

namespace {

HexLattice single_face_lattice() {
  return build_lattice(RegionSpec::disk(Cplx{0.0, 0.0}, 0.4), 1.0);
}

MCParams quick_mc(std::uint64_t seed, int sweeps, int therm = 200) {
  MCParams mc;
  mc.seed = seed;
  mc.thermalization_sweeps = therm;
  mc.measurement_sweeps = sweeps;
  mc.measure_every = 1;
  return mc;
}

}  // namespace

TEST_CASE("philox streams are deterministic, independent and restorable") {
  PhiloxRng a(42, 0), b(42, 0), c(42, 1);
  std::vector<std::uint32_t> va, vb, vc;
  for (int i = 0; i < 100; ++i) {
    va.push_back(a.next_u32());
    vb.push_back(b.next_u32());
    vc.push_back(c.next_u32());
  }
  CHECK(va == vb);
  CHECK(va != vc);

  // bit-exact restore mid-buffer
  PhiloxRng d(7, 3);
  for (int i = 0; i < 13; ++i) d.next_u32();
  PhiloxRng e = PhiloxRng::restore(7, 3, d.block(), d.buffer_pos());
  for (int i = 0; i < 50; ++i) CHECK(d.next_u32() == e.next_u32());

  // uniforms live in [0,1) and fill it
  PhiloxRng f(1, 0);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = f.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);

  // uniform_below stays in range and hits every residue
  PhiloxRng g(9, 2);
  std::set<std::uint32_t> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(g.uniform_below(7));
  CHECK(seen.size() == 7);
  CHECK(*seen.rbegin() == 6);
}

TEST_CASE("blocking analysis on an AR(1) series reports the inflated error") {
  // x_t = phi x_{t-1} + e_t: stderr of the mean known in closed form
  const double phi = 0.8;
  const int n = 1 << 16;
  PhiloxRng rng(5, 0);
  std::vector<double> x;
  double prev = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u1 = rng.uniform(), u2 = rng.uniform();
    const double e = std::sqrt(-2.0 * std::log(1.0 - u1)) *
                     std::cos(2.0 * kPi * u2);
    prev = phi * prev + e;
    x.push_back(prev);
  }
  const BinnedEstimate est = BinnedEstimate::from_series(x);
  CHECK(est.n_samples == n);
  const double var_x = 1.0 / (1.0 - phi * phi);
  const double truth = std::sqrt(var_x * (1 + phi) / (1 - phi) / n);
  CHECK(est.stderror > 2.5 * est.naive_stderr);  // autocorrelation detected
  CHECK(est.stderror == doctest::Approx(truth).epsilon(0.35));
  for (std::size_t i = 1; i < est.bin_sizes.size(); ++i)
    CHECK(est.bin_sizes[i] == 2 * est.bin_sizes[i - 1]);
}

TEST_CASE("face flip acceptance probabilities match the weight ratio") {
  const HexLattice lat = single_face_lattice();
  const ModelParams p = ModelParams::critical(1.0);
  ChainState st(lat, 1, 0);
  // from the empty configuration: ratio x^6 n = 1/27
  CHECK(face_flip_acceptance(st, p, 0) ==
        doctest::Approx(1.0 / 27.0).epsilon(1e-12));
  CHECK(st.config().occupied_edges() == 0);  // probe left no trace
  ChainState st2(lat, 1, 0);
  while (!face_flip_step(st2, p, 0)) {
  }
  CHECK(st2.config().occupied_edges() == 6);
  CHECK(st2.loop_count() == 1);
  // reverse move has ratio 27 -> probability 1
  CHECK(face_flip_acceptance(st2, p, 0) == doctest::Approx(1.0));
}

TEST_CASE("n=1, x=1: every proposal is accepted") {
  const HexLattice lat = build_lattice(RegionSpec::disk(Cplx{0, 0}, 2.2), 1.0);
  const ModelParams p(1.0, 1.0);
  ChainState st(lat, 3, 0);
  for (int f = 0; f < lat.n_faces(); ++f)
    CHECK(face_flip_acceptance(st, p, f) == doctest::Approx(1.0));
  ChainRunResult r = run_chain(st, p, quick_mc(3, 200), {});
  CHECK(r.acceptance_rate == doctest::Approx(1.0));
}

TEST_CASE("single-face chain reproduces P(loop) = 1/28 within 3 sigma") {
  const HexLattice lat = single_face_lattice();
  const ModelParams p = ModelParams::critical(1.0);
  MCParams mc = quick_mc(17, 200000, 1000);
  Observable loop_present{
      "loop", [](const LoopConfig& c, const LoopsView&) {
        return c.occupied_edges() > 0 ? 1.0 : 0.0;
      }};
  ChainState st(lat, mc.seed, 0);
  const ChainRunResult r = run_chain(st, p, mc, {loop_present});
  const double want = 1.0 / 28.0;
  const double got = r.estimates[0].mean;
  const double err = r.estimates[0].stderror;
  CHECK(std::abs(got - want) < 3.0 * err);
  CHECK(err < 0.002);
}

TEST_CASE("seed determinism: identical sample streams") {
  const HexLattice lat = build_lattice(RegionSpec::disk(Cplx{0, 0}, 2.2), 1.0);
  const ModelParams p = ModelParams::critical(1.3);
  const MCParams mc = quick_mc(99, 500);
  Observable edges{"edges", [](const LoopConfig& c, const LoopsView&) {
                     return double(c.occupied_edges());
                   }};
  ChainState a(lat, mc.seed, 0), b(lat, mc.seed, 0);
  const auto ra = run_chain(a, p, mc, {edges});
  const auto rb = run_chain(b, p, mc, {edges});
  CHECK(ra.series[0] == rb.series[0]);
  ChainState c(lat, mc.seed + 1, 0);
  const auto rc = run_chain(c, p, mc, {edges});
  CHECK(ra.series[0] != rc.series[0]);
}

TEST_CASE("chain visits states with exact-enumeration frequencies (chi^2)") {
  const HexLattice lat = build_lattice(RegionSpec::disk(Cplx{0, 0}, 1.8), 1.0);
  REQUIRE(lat.n_faces() == 7);
  const ModelParams p = ModelParams::critical(1.0);
  const ExactDistribution dist = enumerate_configs(lat, p);

  MCParams mc = quick_mc(23, 60000, 2000);
  ChainState st(lat, mc.seed, 0);
  const auto census = run_state_census(st, p, mc);

  long total = 0;
  for (const auto& [k, v] : census) total += v;
  REQUIRE(total == mc.measurement_sweeps);

  double chi2 = 0.0;
  int dof = -1;
  double pooled_expect = 0.0;
  long pooled_count = 0;
  for (const auto& s : dist.states()) {
    const std::string key(reinterpret_cast<const char*>(s.occ.data()),
                          s.occ.size());
    const auto it = census.find(key);
    const long count = it == census.end() ? 0 : it->second;
    const double expect = s.prob * double(total);
    if (expect < 5.0) {
      pooled_expect += expect;
      pooled_count += count;
      continue;
    }
    chi2 += (count - expect) * (count - expect) / expect;
    ++dof;
  }
  if (pooled_expect > 0.0) {
    chi2 += (pooled_count - pooled_expect) * (pooled_count - pooled_expect) /
            pooled_expect;
    ++dof;
  }
  REQUIRE(dof >= 1);
  const double pval = chi2_survival(chi2, dof);
  CHECK(pval > 1e-3);
}

TEST_CASE("ergodicity: face flips reach every even subgraph on a disk") {
  const HexLattice disk = build_lattice(RegionSpec::disk(Cplx{0, 0}, 1.8), 1.0);
  const ExactDistribution ddist =
      enumerate_configs(disk, ModelParams::critical(1.0));
  std::set<std::string> reachable;
  LoopConfig cfg(disk);
  auto key = [](const std::vector<std::uint8_t>& o) {
    return std::string(reinterpret_cast<const char*>(o.data()), o.size());
  };
  std::vector<std::vector<std::uint8_t>> frontier{cfg.occupancy()};
  reachable.insert(key(cfg.occupancy()));
  while (!frontier.empty()) {
    auto occ = frontier.back();
    frontier.pop_back();
    for (int f = 0; f < disk.n_faces(); ++f) {
      LoopConfig c2(disk);
      c2.set_occupancy(occ);
      c2.xor_face(f);
      if (reachable.insert(key(c2.occupancy())).second)
        frontier.push_back(c2.occupancy());
    }
  }
  CHECK(reachable.size() == ddist.states().size());
}

TEST_CASE("annulus winding parity is frozen without the topological move") {
  const HexLattice lat =
      build_lattice(RegionSpec::annulus(Cplx{0, 0}, 0.5, 2.8), 1.0);
  REQUIRE(lat.homology_rank() == 1);
  const ModelParams p = ModelParams::critical(1.0);
  ChainState st(lat, 5, 0);
  CHECK(winding_parity(st.config()) == 0);
  for (int s = 0; s < 300; ++s) {
    run_sweeps(st, p, 1, /*topological=*/false);
    REQUIRE(winding_parity(st.config()) == 0);
  }
  // with the move enabled both classes appear
  ChainState st2(lat, 5, 0);
  int seen[2] = {0, 0};
  for (int s = 0; s < 400; ++s) {
    run_sweeps(st2, p, 1, /*topological=*/true);
    ++seen[winding_parity(st2.config())];
  }
  CHECK(seen[0] > 0);
  CHECK(seen[1] > 0);

  // involution: two accepted generator flips cancel
  ChainState st3(lat, 5, 0);
  const auto before = st3.config().occupancy();
  REQUIRE(topological_flip_acceptance(st3, ModelParams(1.0, 1.0)) == 1.0);
  topological_flip_step(st3, ModelParams(1.0, 1.0));
  CHECK(winding_parity(st3.config()) == 1);
  topological_flip_step(st3, ModelParams(1.0, 1.0));
  CHECK(st3.config().occupancy() == before);

  // generator proposal from empty config: acceptance min(1, x^L n)
  ChainState st4(lat, 5, 0);
  const double want =
      std::min(1.0, std::pow(p.x, double(lat.hole_generator().size())) * p.n);
  CHECK(topological_flip_acceptance(st4, p) ==
        doctest::Approx(want).epsilon(1e-12));

  // topological move on a simply connected region is an error
  const HexLattice disk = build_lattice(RegionSpec::disk(Cplx{0, 0}, 1.8), 1.0);
  ChainState st5(disk, 5, 0);
  CHECK_THROWS_AS(topological_flip_step(st5, p), std::logic_error);
}

TEST_CASE("incremental loop counter matches full recount after long runs") {
  const HexLattice lat = build_lattice(RegionSpec::disk(Cplx{0, 0}, 3.0), 1.0);
  const ModelParams p = ModelParams::critical(1.0);
  ChainState st(lat, 31, 0);
  run_sweeps(st, p, 2000, false);
  CHECK_NOTHROW(st.audit());
  CHECK(st.occupied_edges() == st.config().occupied_edges());
  LoopConfig copy(lat);
  copy.set_occupancy(st.config().occupancy());
  CHECK(st.loop_count() == copy.loop_count());
}

TEST_CASE("restart from a captured state reproduces the continuation") {
  const HexLattice lat = build_lattice(RegionSpec::disk(Cplx{0, 0}, 2.2), 1.0);
  const ModelParams p = ModelParams::critical(1.0);

  ChainState full(lat, 77, 0);
  run_sweeps(full, p, 1500, false);

  ChainState part(lat, 77, 0);
  run_sweeps(part, p, 1000, false);
  ChainState resumed(lat, 77, 0);
  resumed.restore(part.config().occupancy(),
                  PhiloxRng::restore(77, 0, part.rng().block(),
                                     part.rng().buffer_pos()),
                  part.sweep_count());
  run_sweeps(resumed, p, 500, false);

  CHECK(resumed.config().occupancy() == full.config().occupancy());
  CHECK(resumed.sweep_count() == full.sweep_count());
  CHECK(resumed.rng() == full.rng());
}

TEST_CASE("parallel chains merge deterministically") {
  const HexLattice lat = build_lattice(RegionSpec::disk(Cplx{0, 0}, 2.2), 1.0);
  const ModelParams p = ModelParams::critical(1.0);
  MCParams mc = quick_mc(13, 2000, 500);
  mc.chains = 4;
  Observable edges{"edges", [](const LoopConfig& c, const LoopsView&) {
                     return double(c.occupied_edges());
                   }};
  const auto r1 = run_chains(lat, p, mc, {edges}, 2);
  const auto r2 = run_chains(lat, p, mc, {edges}, 1);
  CHECK(r1.series[0] == r2.series[0]);  // merge independent of pool size
  CHECK(r1.estimates[0].mean == doctest::Approx(r2.estimates[0].mean));
  CHECK(r1.estimates[0].n_samples == 4 * 2000);
}

TEST_CASE("chi-squared survival sanity") {
  CHECK(chi2_survival(0.0, 5) == doctest::Approx(1.0));
  CHECK(chi2_survival(4.35, 5) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(chi2_survival(100.0, 5) < 1e-15);
}
