#pragma once

#include <functional>
#include <span>
#include <string>
#include <unordered_map>

#include "clelab/loop_config.hpp"
#include "clelab/rng.hpp"
#include "clelab/stats.hpp"

namespace clelab {

struct MCParams {
  std::uint64_t seed = 1;
  int thermalization_sweeps = 1000;
  int measurement_sweeps = 10000;
  int measure_every = 1;
  bool enable_topological_move = false;
  int chains = 1;

  void validate() const;
};

// Markov-chain state: configuration, per-chain RNG stream, sweep counter
// and incrementally maintained edge/loop counts. Single-owner mutable;
// confine one state to one thread.
class ChainState {
 public:
  ChainState(const HexLattice& lat, std::uint64_t seed,
             std::uint64_t chain_index);

  const HexLattice& lattice() const { return *lat_; }
  const LoopConfig& config() const { return cfg_; }
  PhiloxRng& rng() { return rng_; }
  const PhiloxRng& rng() const { return rng_; }
  long sweep_count() const { return sweeps_; }
  std::uint64_t chain_index() const { return chain_index_; }

  int occupied_edges() const { return occupied_; }
  int loop_count() const;
  double log_weight(const ModelParams& p) const;

  // Number of distinct loops passing through any of the given vertices.
  int loops_through(std::span<const int> verts);

  // Full-recount audit of the incremental counters; throws on mismatch.
  void audit() const;

  void add_sweeps(long n) { sweeps_ += n; }

  // restore support
  void restore(std::vector<std::uint8_t> occ, PhiloxRng rng, long sweeps);

 private:
  friend bool face_flip_step(ChainState&, const ModelParams&, int);
  friend bool topological_flip_step(ChainState&, const ModelParams&);
  friend double face_flip_acceptance(ChainState&, const ModelParams&, int);
  friend double topological_flip_acceptance(ChainState&, const ModelParams&);

  const HexLattice* lat_;
  LoopConfig cfg_;
  PhiloxRng rng_;
  std::uint64_t chain_index_;
  long sweeps_ = 0;
  int occupied_ = 0;
  mutable int loops_ = 0;
  // at n = 1 the weight ratio is loop-free, so flips skip the tracing and
  // the counter is refreshed lazily
  mutable bool loops_dirty_ = false;

  // scratch for loop tracing
  std::vector<std::uint32_t> mark_;
  std::uint32_t stamp_ = 0;

  // cached acceptance-ratio tables for the current (n, x)
  double tab_n_ = -1.0, tab_x_ = -1.0;
  std::array<double, 13> xpow_{}, npow_{};
  void ensure_tables(const ModelParams& p);
  double ratio_from_deltas(int d_edges, int d_loops) const;
  // XORs the cycle and returns (d_edges, d_loops); caller keeps or reverts.
  std::pair<int, int> apply_cycle(std::span<const int> edges,
                                  std::span<const int> verts);
};

// Metropolis proposal: XOR the face boundary, accept with
// min(1, x^{d edges} n^{d loops}). Returns whether the move was accepted.
bool face_flip_step(ChainState& st, const ModelParams& p, int face);
// XOR with the fixed non-contractible generator (annulus regions only).
bool topological_flip_step(ChainState& st, const ModelParams& p);

// Acceptance probability of the proposal from the current state (no RNG
// draw, state unchanged on return).
double face_flip_acceptance(ChainState& st, const ModelParams& p, int face);
double topological_flip_acceptance(ChainState& st, const ModelParams& p);

// One sweep proposes one flip per active face in random order, then one
// topological proposal when enabled.
void run_sweeps(ChainState& st, const ModelParams& p, int n_sweeps,
                bool topological);

// Loop decomposition of one measured configuration, in continuum
// coordinates, shared by all observables of that measurement.
struct LoopsView {
  const HexLattice* lat = nullptr;
  std::vector<std::vector<Cplx>> curves;
  static LoopsView from(const LoopConfig& cfg);
};

struct Observable {
  std::string name;
  std::function<double(const LoopConfig&, const LoopsView&)> eval;
};

struct ChainRunResult {
  std::vector<BinnedEstimate> estimates;  // one per observable
  std::vector<std::vector<double>> series;
  double acceptance_rate = 0.0;
  long proposals = 0;
};

// Thermalize (when the state is fresh) and measure. Deterministic for a
// fixed seed. The incremental loop counter is audited every 10^4 sweeps.
ChainRunResult run_chain(ChainState& st, const ModelParams& p,
                         const MCParams& mc,
                         const std::vector<Observable>& observables,
                         bool already_thermalized = false);

// Independent chains (seed, 0..chains-1) on a worker pool, merged in chain
// order; n_threads <= 0 picks the hardware count.
ChainRunResult run_chains(const HexLattice& lat, const ModelParams& p,
                          const MCParams& mc,
                          const std::vector<Observable>& observables,
                          int n_threads = 0);

// Visited-state census for small lattices (exact-distribution audits).
std::unordered_map<std::string, long> run_state_census(ChainState& st,
                                                       const ModelParams& p,
                                                       const MCParams& mc);

// Winding-class parity of a configuration on an annulus lattice.
int winding_parity(const LoopConfig& cfg);

}  // namespace clelab
