#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "clelab/events.hpp"
#include "doctest.h"

using namespace clelab;

namespace {

std::mt19937_64 rng(424242);

Cplx random_cplx(double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng)};
}

// XOR all faces whose center lies within radius of c: occupied set becomes
// the boundary of the flipped region.
void flip_disk(LoopConfig& cfg, const HexLattice& lat, Cplx c, double radius) {
  for (int f = 0; f < lat.n_faces(); ++f)
    if (std::abs(lat.faces()[std::size_t(f)].center - c) <= radius)
      cfg.xor_face(f);
}

// independent oracle: winding via angle accumulation
int winding_oracle(const std::vector<Cplx>& loop, Cplx z) {
  double total = 0.0;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Cplx a = loop[i] - z;
    const Cplx b = loop[(i + 1) % n] - z;
    total += std::arg(b / a);
  }
  return int(std::lround(total / (2.0 * kPi)));
}

std::vector<Cplx> hexagon_loop(Cplx center, double r) {
  std::vector<Cplx> v;
  for (int k = 0; k < 6; ++k) v.push_back(center + std::polar(r, kPi * k / 3));
  return v;
}

}  // namespace

TEST_CASE("winding number: hexagon fixtures and point-on-curve error") {
  const auto hex = hexagon_loop(Cplx{1.0, 2.0}, 1.0);
  CHECK(std::abs(winding_number(hex, Cplx{1.0, 2.0})) == 1);
  CHECK(winding_number(hex, Cplx{10.0, -3.0}) == 0);
  CHECK_THROWS_AS(winding_number(hex, hex.front()), std::domain_error);
  CHECK_THROWS_AS(winding_number(hex, 0.5 * (hex[0] + hex[1])),
                  std::domain_error);
  // reversed orientation flips the sign
  auto rev = hex;
  std::reverse(rev.begin(), rev.end());
  CHECK(winding_number(rev, Cplx{1.0, 2.0}) ==
        -winding_number(hex, Cplx{1.0, 2.0}));
}

TEST_CASE("winding number agrees with the angle-sum oracle on 1000 points") {
  // an irregular star-shaped polygon
  std::vector<Cplx> poly;
  for (int k = 0; k < 14; ++k) {
    const double r = (k % 2 == 0) ? 2.0 : 0.9;
    poly.push_back(std::polar(r, 2.0 * kPi * k / 14));
  }
  int checked = 0;
  while (checked < 1000) {
    const Cplx z = random_cplx(3.0);
    int got;
    try {
      got = winding_number(poly, z);
    } catch (const std::domain_error&) {
      continue;
    }
    CHECK(got == winding_oracle(poly, z));
    ++checked;
  }
}

TEST_CASE("annulus spec validates geometry") {
  CHECK_NOTHROW(AnnulusSpec(ClosedCurve::circle(0.0, 5.0),
                            ClosedCurve::circle(0.0, 3.0)));
  // inner not inside outer
  CHECK_THROWS_AS(AnnulusSpec(ClosedCurve::circle(0.0, 2.0),
                              ClosedCurve::circle(Cplx{5.0, 0.0}, 1.0)),
                  std::invalid_argument);
  // overlapping closures
  CHECK_THROWS_AS(AnnulusSpec(ClosedCurve::circle(0.0, 2.0),
                              ClosedCurve::circle(Cplx{1.5, 0.0}, 1.0)),
                  std::invalid_argument);
  const AnnulusSpec a(ClosedCurve::circle(0.0, 5.0),
                      ClosedCurve::circle(0.0, 3.0));
  CHECK(a.min_width() == doctest::Approx(2.0).epsilon(0.01));
  CHECK(a.in_open_annulus(Cplx{4.0, 0.0}));
  CHECK(!a.in_open_annulus(Cplx{0.0, 0.0}));
  CHECK(!a.in_open_annulus(Cplx{6.0, 0.0}));
  CHECK(a.in_closed_annulus(Cplx{3.0, 0.0}));
  CHECK(!a.in_open_annulus(Cplx{3.0, 0.0}));
}

TEST_CASE("winding-loop-in detects a lattice loop quenched in an annulus") {
  const HexLattice lat = build_lattice(RegionSpec::disk(Cplx{0, 0}, 9.0), 1.0);
  LoopConfig cfg(lat);
  flip_disk(cfg, lat, Cplx{0, 0}, 3.9);
  REQUIRE(cfg.is_valid());
  REQUIRE(cfg.loop_count() == 1);

  const EventSpec ev = EventSpec::winding_loop_in(AnnulusSpec(
      ClosedCurve::circle(0.0, 5.0), ClosedCurve::circle(0.0, 3.0)));
  CHECK(eval_event(ev, LoopsView::from(cfg)));

  // empty config: no loop
  LoopConfig empty(lat);
  CHECK(!eval_event(ev, LoopsView::from(empty)));

  // a loop outside the annulus does not count
  LoopConfig off(lat);
  flip_disk(off, lat, Cplx{0, 0}, 1.9);
  CHECK(!eval_event(ev, LoopsView::from(off)));

  // a loop crossing the annulus boundary does not count either
  LoopConfig wide(lat);
  flip_disk(wide, lat, Cplx{2.5, 0}, 3.9);
  REQUIRE(wide.loop_count() == 1);
  CHECK(!eval_event(ev, LoopsView::from(wide)));
}

TEST_CASE("separation and surround-pair fixtures") {
  const HexLattice lat = build_lattice(RegionSpec::disk(Cplx{0, 0}, 9.0), 1.0);
  const Cplx x1{0.1, 0.2}, x2{6.1, 0.3};

  const EventSpec sep = EventSpec::separation({x1}, {x2});
  LoopConfig empty(lat);
  CHECK(!eval_event(sep, LoopsView::from(empty)));

  // one loop around x1 only
  LoopConfig cfg(lat);
  flip_disk(cfg, lat, Cplx{0, 0}, 2.5);
  CHECK(eval_event(sep, LoopsView::from(cfg)));
  // symmetric: a loop around x2 only also separates
  LoopConfig cfg2(lat);
  flip_disk(cfg2, lat, Cplx{6.0, 0.0}, 1.9);
  CHECK(eval_event(sep, LoopsView::from(cfg2)));
  // a loop around both does not separate
  LoopConfig cfg3(lat);
  flip_disk(cfg3, lat, Cplx{3.0, 0.0}, 5.2);
  bool around_both = false;
  for (const auto& loop : LoopsView::from(cfg3).curves)
    around_both |= std::abs(winding_number(loop, x1)) == 1 &&
                   std::abs(winding_number(loop, x2)) == 1;
  REQUIRE(around_both);
  CHECK(!eval_event(sep, LoopsView::from(cfg3)));

  // nested loops around a close pair: count = 3
  const Cplx z1{-0.3, 0.1}, z2{0.4, -0.2};
  LoopConfig nest(lat);
  flip_disk(nest, lat, Cplx{0, 0}, 2.0);
  flip_disk(nest, lat, Cplx{0, 0}, 3.7);
  flip_disk(nest, lat, Cplx{0, 0}, 5.4);
  REQUIRE(nest.loop_count() == 3);
  const LoopsView nv = LoopsView::from(nest);
  CHECK(eval_count(EventSpec::surround_pair(z1, z2), nv) == 3.0);
  CHECK(eval_event(EventSpec::surround_pair(z1, z2, 3), nv));
  CHECK(!eval_event(EventSpec::surround_pair(z1, z2, 4), nv));
  CHECK(pair_loop_count(nv, z1, z2, 2.0) == 6.0);
  // a far point breaks the pair count
  CHECK(pair_loop_count(nv, z1, Cplx{7.5, 0.0}, 2.0) == 0.0);
  CHECK(pair_loop_count(LoopsView::from(empty), z1, z2, 2.0) == 0.0);
}

TEST_CASE("regularized ellipse event follows the partner rule") {
  const EventSpec ev = regularized_ellipse_event(Cplx{0, 0}, 1.0, 0.0, 2.0, 0.25);
  CHECK(ev.kind() == EventSpec::Kind::WindingLoopIn);
  CHECK(ev.annulus().outer.as_ellipse().b == doctest::Approx(2.0));
  CHECK(ev.annulus().inner.as_ellipse().b == doctest::Approx(1.5));
  CHECK_THROWS_AS(regularized_ellipse_event(Cplx{0, 0}, 1.0, 0.0, 2.0, 0.6),
                  std::invalid_argument);
}

TEST_CASE("event support tracking") {
  // loops disjoint from the closed annulus never touch the support
  const EventSpec ev = EventSpec::winding_loop_in(AnnulusSpec(
      ClosedCurve::circle(0.0, 5.0), ClosedCurve::circle(0.0, 3.0)));
  CHECK(ev.loop_touches_support(hexagon_loop(Cplx{4.0, 0.0}, 0.5), 50.0));
  CHECK(!ev.loop_touches_support(hexagon_loop(Cplx{0.0, 0.0}, 1.0), 50.0));
  CHECK(!ev.loop_touches_support(hexagon_loop(Cplx{9.0, 0.0}, 1.0), 50.0));
  // a big loop enclosing the whole annulus misses its support too
  CHECK(!ev.loop_touches_support(hexagon_loop(Cplx{0.0, 0.0}, 9.0), 50.0));

  const EventSpec sep = EventSpec::separation({Cplx{0.0, 0.0}}, {Cplx{6.0, 0.0}});
  CHECK(sep.loop_touches_support(hexagon_loop(Cplx{3.0, 0.0}, 1.0), 50.0));
  CHECK(!sep.loop_touches_support(hexagon_loop(Cplx{3.0, 5.0}, 1.0), 50.0));

  const EventSpec sp = EventSpec::surround_pair(Cplx{0.0, 0.0}, Cplx{1.0, 0.0});
  CHECK(sp.loop_touches_support(hexagon_loop(Cplx{0.0, 0.0}, 2.0), 50.0));
  CHECK(!sp.loop_touches_support(hexagon_loop(Cplx{-4.0, 0.0}, 1.0), 50.0));

  CHECK(!EventSpec::sure().loop_touches_support(hexagon_loop(0.0, 1.0), 50.0));
}

TEST_CASE("support locality: mutations away from the support leave events fixed") {
  const HexLattice lat = build_lattice(RegionSpec::disk(Cplx{0, 0}, 12.0), 1.0);
  const EventSpec ev = EventSpec::winding_loop_in(AnnulusSpec(
      ClosedCurve::circle(0.0, 5.0), ClosedCurve::circle(0.0, 3.0)));
  const double far_radius = 12.0;

  // faces far enough that flipping them cannot alter any support-touching
  // loop (hexagon plus its neighborhood stays clear of the closed annulus)
  std::vector<int> far_faces;
  for (int f = 0; f < lat.n_faces(); ++f) {
    const double d = std::abs(lat.faces()[std::size_t(f)].center);
    if (d > 7.5) far_faces.push_back(f);
  }
  REQUIRE(!far_faces.empty());

  std::uniform_int_distribution<std::size_t> pick(0, far_faces.size() - 1);
  for (int trial = 0; trial < 30; ++trial) {
    LoopConfig cfg(lat);
    flip_disk(cfg, lat, Cplx{0, 0}, 3.9);  // support-touching loop
    if (trial % 2 == 0) flip_disk(cfg, lat, Cplx{0, 0}, 9.2);
    REQUIRE(cfg.is_valid());

    auto support_loops = [&](const LoopConfig& c) {
      std::set<std::vector<int>> keyset;
      const auto curves = extract_loops(c);
      const auto& cycles = c.loops();
      for (std::size_t i = 0; i < curves.size(); ++i)
        if (ev.loop_touches_support(curves[i], far_radius)) {
          auto key = cycles[i];
          std::sort(key.begin(), key.end());
          keyset.insert(key);
        }
      return keyset;
    };

    const bool before = eval_event(ev, LoopsView::from(cfg));
    const auto loops_before = support_loops(cfg);
    LoopConfig mut(lat);
    mut.set_occupancy(cfg.occupancy());
    for (int m = 0; m < 10; ++m) mut.xor_face(far_faces[pick(rng)]);
    REQUIRE(mut.is_valid());
    // premise of the support definition: same support-touching loops
    REQUIRE(support_loops(mut) == loops_before);
    CHECK(eval_event(ev, LoopsView::from(mut)) == before);
  }
}

TEST_CASE("regularized events are monotone in eta") {
  const HexLattice lat = build_lattice(RegionSpec::disk(Cplx{0, 0}, 14.0), 1.0);
  const double eps = 3.2, b = 2.0;
  const EventSpec thick = regularized_ellipse_event(Cplx{0, 0}, eps, 0.3, b, 0.45);
  const EventSpec thin = regularized_ellipse_event(Cplx{0, 0}, eps, 0.3, b, 0.30);

  // sample configurations from a short chain at criticality
  const ModelParams p = ModelParams::critical(1.0);
  ChainState st(lat, 2024, 0);
  int implications = 0;
  for (int s = 0; s < 400; ++s) {
    run_sweeps(st, p, 1, false);
    const LoopsView v = LoopsView::from(st.config());
    const bool thin_hit = eval_event(thin, v);
    const bool thick_hit = eval_event(thick, v);
    if (thin_hit) {
      CHECK(thick_hit);  // thinner annulus is the stricter constraint
      ++implications;
    }
  }
  INFO("thin-event occurrences: ", implications);
}

TEST_CASE("rotating config and geometry together leaves events invariant") {
  const HexLattice lat = build_lattice(RegionSpec::disk(Cplx{0, 0}, 10.0), 1.0);
  const auto perm = lat.rotation60_edge_permutation();
  const Cplx rot = std::polar(1.0, kPi / 3.0);

  const EventSpec ev = regularized_ellipse_event(Cplx{1.0, 0.5}, 2.5, 0.4, 2.0, 0.4);
  const EventSpec ev_rot = regularized_ellipse_event(rot * Cplx{1.0, 0.5}, 2.5,
                                                     0.4 + kPi / 3.0, 2.0, 0.4);

  const ModelParams p = ModelParams::critical(1.0);
  ChainState st(lat, 7, 0);
  int hits = 0;
  for (int s = 0; s < 300; ++s) {
    run_sweeps(st, p, 1, false);
    const LoopConfig& cfg = st.config();
    std::vector<std::uint8_t> rotated(std::size_t(lat.n_edges()), 0);
    for (int e = 0; e < lat.n_edges(); ++e)
      rotated[std::size_t(perm[std::size_t(e)])] =
          cfg.occupancy()[std::size_t(e)];
    LoopConfig rcfg(lat);
    rcfg.set_occupancy(rotated);
    const bool a = eval_event(ev, LoopsView::from(cfg));
    const bool b = eval_event(ev_rot, LoopsView::from(rcfg));
    CHECK(a == b);
    hits += a ? 1 : 0;
  }
  INFO("event occurrences: ", hits);
}

TEST_CASE("event preconditions against the lattice") {
  const HexLattice lat = build_lattice(RegionSpec::disk(Cplx{0, 0}, 8.0), 1.0);
  // fits
  CHECK_NOTHROW(check_event_fits(
      EventSpec::winding_loop_in(AnnulusSpec(ClosedCurve::circle(0.0, 5.0),
                                             ClosedCurve::circle(0.0, 1.5))),
      lat));
  // geometry outside the region
  CHECK_THROWS_AS(
      check_event_fits(EventSpec::separation({Cplx{0.0, 0.0}}, {Cplx{9.5, 0.0}}),
                       lat),
      std::invalid_argument);
  // annulus thinner than 3 spacings: the message names the required spacing
  try {
    check_event_fits(
        EventSpec::winding_loop_in(AnnulusSpec(ClosedCurve::circle(0.0, 5.0),
                                               ClosedCurve::circle(0.0, 3.5))),
        lat);
    FAIL("expected a detectability error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("spacing") != std::string::npos);
  }
  // margin violation near the rim
  CHECK_THROWS_AS(
      check_event_fits(EventSpec::surround_pair(Cplx{7.5, 0.0}, Cplx{0.0, 0.0}),
                       lat),
      std::invalid_argument);
  CHECK_NOTHROW(event_observable(EventSpec::sure(), lat));
}
