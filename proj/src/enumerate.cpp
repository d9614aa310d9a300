#include "clelab/enumerate.hpp"

#include <bit>
#include <cmath>

namespace clelab {

namespace {

std::string occ_key(const std::vector<std::uint8_t>& occ) {
  return std::string(reinterpret_cast<const char*>(occ.data()), occ.size());
}

}  // namespace

int ExactDistribution::index_of(const std::vector<std::uint8_t>& occ) const {
  auto it = index_.find(occ_key(occ));
  return it == index_.end() ? -1 : it->second;
}

double ExactDistribution::probability_of(
    const std::function<bool(const LoopConfig&)>& pred) const {
  LoopConfig cfg(*lat_);
  double p = 0.0;
  for (const State& s : states_) {
    cfg.set_occupancy(s.occ);
    if (pred(cfg)) p += s.prob;
  }
  return p;
}

double ExactDistribution::expectation_of(
    const std::function<double(const LoopConfig&)>& f) const {
  LoopConfig cfg(*lat_);
  double e = 0.0;
  for (const State& s : states_) {
    cfg.set_occupancy(s.occ);
    e += s.prob * f(cfg);
  }
  return e;
}

ExactDistribution enumerate_configs(const HexLattice& lat,
                                    const ModelParams& p, int max_faces) {
  if (lat.n_faces() > max_faces)
    throw std::invalid_argument(
        "enumerate_configs: " + std::to_string(lat.n_faces()) +
        " active faces exceed the exact-enumeration bound of " +
        std::to_string(max_faces));

  std::vector<std::vector<int>> basis;
  for (const auto& f : lat.faces())
    basis.emplace_back(f.edge.begin(), f.edge.end());
  if (lat.homology_rank() == 1) basis.push_back(lat.hole_generator());
  const int dim = int(basis.size());

  ExactDistribution dist;
  dist.lat_ = &lat;
  dist.states_.reserve(std::size_t(1) << dim);

  LoopConfig cfg(lat);
  const double logx = std::log(p.x), logn = std::log(p.n);
  double max_logw = -std::numeric_limits<double>::infinity();

  const std::uint64_t total = std::uint64_t(1) << dim;
  for (std::uint64_t k = 0;; ++k) {
    if (!cfg.is_valid())
      throw std::logic_error("enumerate_configs: cycle basis left the even set");
    ExactDistribution::State s;
    s.occ = cfg.occupancy();
    s.occupied = cfg.occupied_edges();
    s.loops = cfg.loop_count();
    s.log_weight = s.occupied * logx + s.loops * logn;
    s.prob = 0.0;
    max_logw = std::max(max_logw, s.log_weight);
    dist.index_.emplace(occ_key(s.occ), int(dist.states_.size()));
    dist.states_.push_back(std::move(s));
    if (k + 1 == total) break;
    cfg.xor_edges(basis[std::size_t(std::countr_zero(k + 1))]);  // Gray code
  }

  double z = 0.0;
  for (auto& s : dist.states_) z += std::exp(s.log_weight - max_logw);
  for (auto& s : dist.states_)
    s.prob = std::exp(s.log_weight - max_logw) / z;
  return dist;
}

}  // namespace clelab
