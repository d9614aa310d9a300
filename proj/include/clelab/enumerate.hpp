#pragma once

#include <functional>
#include <string>
#include <unordered_map>

#include "clelab/loop_config.hpp"

namespace clelab {

// Exact distribution over all even subgraphs of a small lattice, by
// Gray-code enumeration of the cycle space (face boundaries plus, on an
// annulus, the non-contractible generator). The brute-force oracle every
// Markov-chain result is audited against.
class ExactDistribution {
 public:
  struct State {
    std::vector<std::uint8_t> occ;
    int occupied;
    int loops;
    double log_weight;
    double prob;
  };

  const HexLattice& lattice() const { return *lat_; }
  const std::vector<State>& states() const { return states_; }

  int index_of(const std::vector<std::uint8_t>& occ) const;  // -1 if absent

  double probability_of(
      const std::function<bool(const LoopConfig&)>& pred) const;
  double expectation_of(
      const std::function<double(const LoopConfig&)>& f) const;

 private:
  friend ExactDistribution enumerate_configs(const HexLattice&,
                                             const ModelParams&, int);
  const HexLattice* lat_ = nullptr;
  std::vector<State> states_;
  std::unordered_map<std::string, int> index_;
};

// Throws when the active face count exceeds max_faces (default 14: the
// enumeration walks 2^(faces + holes) states).
ExactDistribution enumerate_configs(const HexLattice& lat,
                                    const ModelParams& p, int max_faces = 14);

}  // namespace clelab
