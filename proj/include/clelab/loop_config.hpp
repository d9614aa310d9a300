#pragma once

#include <optional>
#include <span>

#include "clelab/hex_lattice.hpp"

namespace clelab {

double critical_x(double n);  // 1 / sqrt(2 + sqrt(2 - n)), 0 < n <= 2

// O(n) loop-model parameters. kappa is a user-declared label, recorded but
// not enforced against n.
struct ModelParams {
  double n;
  double x;
  std::optional<double> kappa;

  ModelParams(double n_, double x_, std::optional<double> kappa_ = {});
  static ModelParams critical(double n_, std::optional<double> kappa_ = {});
};

// Edge-occupation state on a lattice. Valid states are even subgraphs:
// every vertex touches 0 or 2 occupied edges, so occupied edges decompose
// uniquely into disjoint simple loops.
class LoopConfig {
 public:
  explicit LoopConfig(const HexLattice& lat);

  const HexLattice& lattice() const { return *lat_; }
  bool edge(int e) const { return occ_[std::size_t(e)] != 0; }
  int occupied_edges() const { return occupied_; }
  const std::vector<std::uint8_t>& occupancy() const { return occ_; }

  void clear();
  void xor_face(int face);
  void xor_edges(std::span<const int> edge_cycle);
  void set_occupancy(std::vector<std::uint8_t> occ);

  bool is_valid() const;  // even-subgraph condition

  // Loop decomposition as edge cycles (cached; recomputed after mutation).
  const std::vector<std::vector<int>>& loops() const;
  int loop_count() const { return int(loops().size()); }

  // Occupied degree at a vertex (0, 1, 2 or 3; valid configs have 0/2).
  int occupied_degree(int vertex) const;

 private:
  const HexLattice* lat_;
  std::vector<std::uint8_t> occ_;
  int occupied_ = 0;
  mutable bool loops_valid_ = false;
  mutable std::vector<std::vector<int>> loops_;
};

// Closed polygonal curves of the loop decomposition, in continuum
// coordinates (vertex positions in walk order, first vertex not repeated).
std::vector<std::vector<Cplx>> extract_loops(const LoopConfig& cfg);

// log of x^{edges} n^{loops}; throws on an invalid configuration.
double config_log_weight(const LoopConfig& cfg, const ModelParams& p);

}  // namespace clelab
