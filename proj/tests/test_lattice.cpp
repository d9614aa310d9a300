#include <cmath>
#include <map>
#include <random>
#include <set>

#include "clelab/enumerate.hpp"
#include "doctest.h"

using namespace clelab;

namespace {

// circumradius of one face = spacing; a disk barely larger holds one face
HexLattice single_face_lattice() {
  return build_lattice(RegionSpec::disk(Cplx{0.0, 0.0}, 0.4), 1.0);
}

HexLattice two_face_lattice() {
  // face (0,0) center (0,0); face (0,1) center (sqrt(3)/2, 1.5)
  return build_lattice(RegionSpec::polygon({Cplx{-0.4, -0.4}, Cplx{1.3, -0.4},
                                            Cplx{1.3, 1.9}, Cplx{-0.4, 1.9}}),
                       1.0);
}

}  // namespace

TEST_CASE("minimal disk lattice: one face, six edges, six vertices") {
  const HexLattice lat = single_face_lattice();
  CHECK(lat.n_faces() == 1);
  CHECK(lat.n_edges() == 6);
  CHECK(lat.n_vertices() == 6);
  CHECK(lat.homology_rank() == 0);
  for (const auto& v : lat.vertices()) CHECK(v.degree == 2);
}

TEST_CASE("two adjacent faces share exactly one edge") {
  const HexLattice lat = two_face_lattice();
  REQUIRE(lat.n_faces() == 2);
  CHECK(lat.n_edges() == 11);
  CHECK(lat.n_vertices() == 10);
  int shared = 0;
  for (const auto& e : lat.edges())
    if (e.f1 != -1) ++shared;
  CHECK(shared == 1);
}

TEST_CASE("determinism: identical inputs give hash-equal lattices") {
  const HexLattice a = build_lattice(RegionSpec::disk(Cplx{0.3, -0.2}, 4.0), 0.7);
  const HexLattice b = build_lattice(RegionSpec::disk(Cplx{0.3, -0.2}, 4.0), 0.7);
  CHECK(a.hash() == b.hash());
  CHECK(a.n_faces() == b.n_faces());
  const HexLattice c = build_lattice(RegionSpec::disk(Cplx{0.3, -0.2}, 4.1), 0.7);
  CHECK(a.hash() != c.hash());
}

TEST_CASE("annulus lattice has first homology rank 1 and a generator") {
  const HexLattice lat =
      build_lattice(RegionSpec::annulus(Cplx{0.0, 0.0}, 0.5, 4.0), 1.0);
  CHECK(lat.homology_rank() == 1);
  const auto& gen = lat.hole_generator();
  CHECK(gen.size() >= 6);
  // the generator is a closed cycle: every vertex it visits has even count
  std::map<int, int> touch;
  for (const int e : gen) {
    ++touch[lat.edges()[std::size_t(e)].v0];
    ++touch[lat.edges()[std::size_t(e)].v1];
  }
  for (const auto& [v, cnt] : touch) CHECK(cnt % 2 == 0);

  const HexLattice disk = build_lattice(RegionSpec::disk(Cplx{0.0, 0.0}, 4.0), 1.0);
  CHECK(disk.homology_rank() == 0);
  // Euler check: cycle dim == faces on a disk
  CHECK(disk.n_edges() - disk.n_vertices() + 1 == disk.n_faces());
}

TEST_CASE("interior vertices have degree 3") {
  const HexLattice lat = build_lattice(RegionSpec::disk(Cplx{0.0, 0.0}, 5.0), 1.0);
  int deg3 = 0;
  for (const auto& v : lat.vertices()) {
    CHECK(v.degree >= 2);
    CHECK(v.degree <= 3);
    if (v.degree == 3) ++deg3;
  }
  CHECK(deg3 > 0);
  for (const auto& e : lat.edges()) CHECK(e.f0 >= 0);
}

TEST_CASE("critical point closed form") {
  CHECK(critical_x(1.0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(critical_x(2.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(critical_x(1e-12) ==
        doctest::Approx(1.0 / std::sqrt(2.0 + std::sqrt(2.0))).epsilon(1e-9));
  CHECK_THROWS_AS(critical_x(0.0), std::invalid_argument);
  CHECK_THROWS_AS(critical_x(2.5), std::invalid_argument);
}

TEST_CASE("config weights: empty, single hexagon, two-face symmetric difference") {
  const HexLattice lat = two_face_lattice();
  const ModelParams p = ModelParams::critical(1.0);
  LoopConfig cfg(lat);
  CHECK(config_log_weight(cfg, p) == 0.0);

  cfg.xor_face(0);
  CHECK(cfg.occupied_edges() == 6);
  CHECK(cfg.loop_count() == 1);
  CHECK(config_log_weight(cfg, p) ==
        doctest::Approx(std::log(1.0 / 27.0)).epsilon(1e-12));

  cfg.xor_face(1);  // symmetric difference: 10 edges, 1 loop
  CHECK(cfg.occupied_edges() == 10);
  CHECK(cfg.loop_count() == 1);
  const ModelParams p2(1.3, 0.52);
  CHECK(config_log_weight(cfg, p2) ==
        doctest::Approx(10 * std::log(0.52) + std::log(1.3)).epsilon(1e-12));
}

TEST_CASE("loop extraction partitions occupied edges") {
  const HexLattice lat = build_lattice(RegionSpec::disk(Cplx{0.0, 0.0}, 2.2), 1.0);
  REQUIRE(lat.n_faces() >= 7);
  LoopConfig cfg(lat);
  for (const int f : {0, 2, 3, 6}) cfg.xor_face(f);
  REQUIRE(cfg.is_valid());
  std::set<int> covered;
  std::size_t total = 0;
  for (const auto& cycle : cfg.loops()) {
    for (const int e : cycle) {
      CHECK(cfg.edge(e));
      CHECK(covered.insert(e).second);  // no edge in two loops
    }
    total += cycle.size();
  }
  CHECK(int(total) == cfg.occupied_edges());

  const auto curves = extract_loops(cfg);
  CHECK(curves.size() == cfg.loops().size());
  for (std::size_t i = 0; i < curves.size(); ++i)
    CHECK(curves[i].size() == cfg.loops()[i].size());

  LoopConfig empty(lat);
  CHECK(extract_loops(empty).empty());
}

TEST_CASE("even-subgraph closure under face and generator flips") {
  const HexLattice lat =
      build_lattice(RegionSpec::annulus(Cplx{0.0, 0.0}, 0.5, 3.2), 1.0);
  LoopConfig cfg(lat);
  std::mt19937_64 rng(7);
  for (int step = 0; step < 200; ++step) {
    if (rng() % 5 == 0)
      cfg.xor_edges(lat.hole_generator());
    else
      cfg.xor_face(int(rng() % std::uint64_t(lat.n_faces())));
    REQUIRE(cfg.is_valid());
  }
}

TEST_CASE("exact enumeration: single face gives P(loop) = 1/28") {
  const HexLattice lat = single_face_lattice();
  const ModelParams p = ModelParams::critical(1.0);
  const ExactDistribution dist = enumerate_configs(lat, p);
  REQUIRE(dist.states().size() == 2);
  double total = 0.0;
  for (const auto& s : dist.states()) total += s.prob;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  const double p_loop = dist.probability_of(
      [](const LoopConfig& c) { return c.occupied_edges() > 0; });
  CHECK(p_loop == doctest::Approx(1.0 / 28.0).epsilon(1e-12));

  // x -> 0 kills the loop
  const ExactDistribution dist0 = enumerate_configs(lat, ModelParams(1.0, 1e-6));
  CHECK(dist0.probability_of([](const LoopConfig& c) {
    return c.occupied_edges() > 0;
  }) < 1e-30);
}

TEST_CASE("exact enumeration: two adjacent faces carry weights 1, x^6 n, x^6 n, x^10 n") {
  const HexLattice lat = two_face_lattice();
  const ModelParams p(1.7, 0.43);
  const ExactDistribution dist = enumerate_configs(lat, p);
  REQUIRE(dist.states().size() == 4);
  std::multiset<double> got;
  for (const auto& s : dist.states()) got.insert(s.log_weight);
  const double lx = std::log(0.43), ln = std::log(1.7);
  std::multiset<double> want{0.0, 6 * lx + ln, 6 * lx + ln, 10 * lx + ln};
  auto it = want.begin();
  for (const double g : got) {
    CHECK(g == doctest::Approx(*it).epsilon(1e-12));
    ++it;
  }
}

TEST_CASE("enumeration size bound is enforced with the bound in the message") {
  const HexLattice lat = build_lattice(RegionSpec::disk(Cplx{0.0, 0.0}, 5.0), 1.0);
  REQUIRE(lat.n_faces() > 14);
  try {
    enumerate_configs(lat, ModelParams::critical(1.0));
    FAIL("expected a size-bound error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("14") != std::string::npos);
  }
}

TEST_CASE("enumeration on an annulus includes both winding classes") {
  const HexLattice lat =
      build_lattice(RegionSpec::annulus(Cplx{0.0, 0.0}, 0.5, 2.8), 1.0);
  REQUIRE(lat.homology_rank() == 1);
  const ExactDistribution dist = enumerate_configs(lat, ModelParams::critical(1.0));
  CHECK(dist.states().size() == (std::size_t(1) << (lat.n_faces() + 1)));
  // winding parity = parity of occupied cut edges; both classes present
  const auto& cut = lat.cut_edges();
  int classes[2] = {0, 0};
  for (const auto& s : dist.states()) {
    int parity = 0;
    for (const int e : cut) parity ^= s.occ[std::size_t(e)];
    ++classes[parity];
  }
  CHECK(classes[0] > 0);
  CHECK(classes[1] > 0);
}

TEST_CASE("60-degree rotation symmetry of centered disk lattices") {
  const HexLattice lat = build_lattice(RegionSpec::disk(Cplx{0.0, 0.0}, 3.0), 1.0);
  const auto perm = lat.rotation60_edge_permutation();
  std::vector<char> hit(perm.size(), 0);
  for (const int e : perm) {
    CHECK(!hit[std::size_t(e)]);
    hit[std::size_t(e)] = 1;
  }
  // weight invariance under relabeling of a random valid config
  LoopConfig cfg(lat);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 40; ++i)
    cfg.xor_face(int(rng() % std::uint64_t(lat.n_faces())));
  REQUIRE(cfg.is_valid());
  std::vector<std::uint8_t> rotated(std::size_t(lat.n_edges()), 0);
  for (int e = 0; e < lat.n_edges(); ++e)
    rotated[std::size_t(perm[std::size_t(e)])] = cfg.occupancy()[std::size_t(e)];
  LoopConfig rcfg(lat);
  rcfg.set_occupancy(rotated);
  REQUIRE(rcfg.is_valid());
  const ModelParams p = ModelParams::critical(1.5);
  CHECK(config_log_weight(rcfg, p) ==
        doctest::Approx(config_log_weight(cfg, p)).epsilon(1e-12));

  // an off-center disk is not symmetric
  const HexLattice off = build_lattice(RegionSpec::disk(Cplx{0.9, 0.4}, 3.0), 1.0);
  CHECK_THROWS_AS(off.rotation60_edge_permutation(), std::invalid_argument);
}

TEST_CASE("empty lattice is rejected") {
  CHECK_THROWS_AS(build_lattice(RegionSpec::disk(Cplx{0.37, 0.41}, 0.05), 1.0),
                  std::invalid_argument);
}
