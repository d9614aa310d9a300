#include "clelab/loop_config.hpp"

#include <cmath>

namespace clelab {

double critical_x(double n) {
  if (!(n > 0.0 && n <= 2.0))
    throw std::invalid_argument("critical_x: n must lie in (0, 2]");
  return 1.0 / std::sqrt(2.0 + std::sqrt(2.0 - n));
}

ModelParams::ModelParams(double n_, double x_, std::optional<double> kappa_)
    : n(n_), x(x_), kappa(kappa_) {
  if (!(n > 0.0 && n <= 2.0))
    throw std::invalid_argument("ModelParams: n must lie in (0, 2]");
  if (!(x > 0.0)) throw std::invalid_argument("ModelParams: x must be positive");
}

ModelParams ModelParams::critical(double n_, std::optional<double> kappa_) {
  return ModelParams(n_, critical_x(n_), kappa_);
}

LoopConfig::LoopConfig(const HexLattice& lat)
    : lat_(&lat), occ_(std::size_t(lat.n_edges()), 0) {}

void LoopConfig::clear() {
  std::fill(occ_.begin(), occ_.end(), std::uint8_t(0));
  occupied_ = 0;
  loops_valid_ = false;
}

void LoopConfig::xor_face(int face) {
  const auto& f = lat_->faces()[std::size_t(face)];
  for (const int e : f.edge) {
    occ_[std::size_t(e)] ^= 1;
    occupied_ += occ_[std::size_t(e)] ? 1 : -1;
  }
  loops_valid_ = false;
}

void LoopConfig::xor_edges(std::span<const int> edge_cycle) {
  for (const int e : edge_cycle) {
    occ_[std::size_t(e)] ^= 1;
    occupied_ += occ_[std::size_t(e)] ? 1 : -1;
  }
  loops_valid_ = false;
}

void LoopConfig::set_occupancy(std::vector<std::uint8_t> occ) {
  if (occ.size() != occ_.size())
    throw std::invalid_argument("LoopConfig: occupancy size mismatch");
  occ_ = std::move(occ);
  occupied_ = 0;
  for (const std::uint8_t b : occ_) occupied_ += b ? 1 : 0;
  loops_valid_ = false;
}

int LoopConfig::occupied_degree(int vertex) const {
  const auto& v = lat_->vertices()[std::size_t(vertex)];
  int d = 0;
  for (int k = 0; k < v.degree; ++k) d += occ_[std::size_t(v.edge[std::size_t(k)])];
  return d;
}

bool LoopConfig::is_valid() const {
  for (int v = 0; v < lat_->n_vertices(); ++v) {
    const int d = occupied_degree(v);
    if (d != 0 && d != 2) return false;
  }
  return true;
}

const std::vector<std::vector<int>>& LoopConfig::loops() const {
  if (loops_valid_) return loops_;
  loops_.clear();
  std::vector<char> seen(occ_.size(), 0);
  const auto& edges = lat_->edges();
  const auto& verts = lat_->vertices();
  for (int e0 = 0; e0 < lat_->n_edges(); ++e0) {
    if (!occ_[std::size_t(e0)] || seen[std::size_t(e0)]) continue;
    std::vector<int> cycle;
    int e = e0;
    int v = edges[std::size_t(e0)].v1;  // walk away from v0
    for (;;) {
      seen[std::size_t(e)] = 1;
      cycle.push_back(e);
      // pick the occupied continuation at v other than e
      const auto& vv = verts[std::size_t(v)];
      int next = -1;
      for (int k = 0; k < vv.degree; ++k) {
        const int ce = vv.edge[std::size_t(k)];
        if (ce != e && occ_[std::size_t(ce)]) {
          next = ce;
          break;
        }
      }
      if (next == -1)
        throw std::logic_error(
            "LoopConfig: dangling occupied edge (invalid even subgraph)");
      e = next;
      v = edges[std::size_t(e)].v0 == v ? edges[std::size_t(e)].v1
                                        : edges[std::size_t(e)].v0;
      if (e == e0) break;
    }
    loops_.push_back(std::move(cycle));
  }
  loops_valid_ = true;
  return loops_;
}

std::vector<std::vector<Cplx>> extract_loops(const LoopConfig& cfg) {
  const HexLattice& lat = cfg.lattice();
  const auto& edges = lat.edges();
  const auto& verts = lat.vertices();
  std::vector<std::vector<Cplx>> out;
  for (const auto& cycle : cfg.loops()) {
    std::vector<Cplx> poly;
    poly.reserve(cycle.size());
    // vertices in walk order: start from the shared endpoint convention of
    // LoopConfig::loops (walk leaves v0 of the first edge toward v1)
    int v = edges[std::size_t(cycle.front())].v0;
    for (const int e : cycle) {
      poly.push_back(verts[std::size_t(v)].pos);
      v = edges[std::size_t(e)].v0 == v ? edges[std::size_t(e)].v1
                                        : edges[std::size_t(e)].v0;
    }
    out.push_back(std::move(poly));
  }
  return out;
}

double config_log_weight(const LoopConfig& cfg, const ModelParams& p) {
  if (!cfg.is_valid())
    throw std::invalid_argument("config_log_weight: invalid even subgraph");
  return cfg.occupied_edges() * std::log(p.x) + cfg.loop_count() * std::log(p.n);
}

}  // namespace clelab
