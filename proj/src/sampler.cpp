#include "clelab/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace clelab {

void MCParams::validate() const {
  if (thermalization_sweeps < 0 || measurement_sweeps <= 0)
    throw std::invalid_argument("MCParams: sweep counts must be positive");
  if (measure_every < 1)
    throw std::invalid_argument("MCParams: measure_every must be >= 1");
  if (chains < 1) throw std::invalid_argument("MCParams: need >= 1 chain");
}

ChainState::ChainState(const HexLattice& lat, std::uint64_t seed,
                       std::uint64_t chain_index)
    : lat_(&lat),
      cfg_(lat),
      rng_(seed, chain_index),
      chain_index_(chain_index),
      mark_(std::size_t(lat.n_vertices()), 0) {}

int ChainState::loop_count() const {
  if (loops_dirty_) {
    loops_ = cfg_.loop_count();
    loops_dirty_ = false;
  }
  return loops_;
}

double ChainState::log_weight(const ModelParams& p) const {
  return occupied_ * std::log(p.x) + loop_count() * std::log(p.n);
}

void ChainState::ensure_tables(const ModelParams& p) {
  if (p.n == tab_n_ && p.x == tab_x_) return;
  for (int k = -6; k <= 6; ++k) {
    xpow_[std::size_t(k + 6)] = std::pow(p.x, k);
    npow_[std::size_t(k + 6)] = std::pow(p.n, k);
  }
  tab_n_ = p.n;
  tab_x_ = p.x;
}

double ChainState::ratio_from_deltas(int d_edges, int d_loops) const {
  if (d_edges >= -6 && d_edges <= 6 && d_loops >= -6 && d_loops <= 6)
    return xpow_[std::size_t(d_edges + 6)] * npow_[std::size_t(d_loops + 6)];
  return std::pow(tab_x_, d_edges) * std::pow(tab_n_, d_loops);
}

int ChainState::loops_through(std::span<const int> verts) {
  ++stamp_;
  int count = 0;
  const auto& edges = lat_->edges();
  const auto& vertices = lat_->vertices();
  for (const int v0 : verts) {
    if (mark_[std::size_t(v0)] == stamp_) continue;
    mark_[std::size_t(v0)] = stamp_;
    // find an occupied edge at v0
    const auto& vv = vertices[std::size_t(v0)];
    int e0 = -1;
    for (int k = 0; k < vv.degree; ++k)
      if (cfg_.edge(vv.edge[std::size_t(k)])) {
        e0 = vv.edge[std::size_t(k)];
        break;
      }
    if (e0 == -1) continue;  // no loop through this vertex
    ++count;
    // walk the loop, marking every visited vertex
    int e = e0;
    int v = edges[std::size_t(e)].v0 == v0 ? edges[std::size_t(e)].v1
                                           : edges[std::size_t(e)].v0;
    while (v != v0) {
      mark_[std::size_t(v)] = stamp_;
      const auto& vw = vertices[std::size_t(v)];
      int next = -1;
      for (int k = 0; k < vw.degree; ++k) {
        const int ce = vw.edge[std::size_t(k)];
        if (ce != e && cfg_.edge(ce)) {
          next = ce;
          break;
        }
      }
      e = next;
      v = edges[std::size_t(e)].v0 == v ? edges[std::size_t(e)].v1
                                        : edges[std::size_t(e)].v0;
    }
  }
  return count;
}

std::pair<int, int> ChainState::apply_cycle(std::span<const int> edges,
                                            std::span<const int> verts) {
  int occupied_before = 0;
  for (const int e : edges) occupied_before += cfg_.edge(e) ? 1 : 0;
  const int loops_before = loops_through(verts);
  cfg_.xor_edges(edges);
  const int loops_after = loops_through(verts);
  const int d_edges = int(edges.size()) - 2 * occupied_before;
  return {d_edges, loops_after - loops_before};
}

void ChainState::audit() const {
  if (cfg_.occupied_edges() != occupied_)
    throw std::logic_error("ChainState: edge-count audit failed");
  LoopConfig copy(*lat_);
  copy.set_occupancy(cfg_.occupancy());
  if (loops_dirty_) {
    loops_ = copy.loop_count();
    loops_dirty_ = false;
  } else if (copy.loop_count() != loops_) {
    throw std::logic_error("ChainState: loop-count audit failed");
  }
}

void ChainState::restore(std::vector<std::uint8_t> occ, PhiloxRng rng,
                         long sweeps) {
  cfg_.set_occupancy(std::move(occ));
  if (!cfg_.is_valid())
    throw std::invalid_argument("ChainState: restored occupancy is invalid");
  occupied_ = cfg_.occupied_edges();
  loops_ = cfg_.loop_count();
  loops_dirty_ = false;
  rng_ = rng;
  sweeps_ = sweeps;
}

namespace {

std::array<int, 6> face_vertices(const HexLattice& lat, int face) {
  return lat.faces()[std::size_t(face)].vert;
}

std::vector<int> cycle_vertices(const HexLattice& lat,
                                const std::vector<int>& cycle) {
  std::vector<int> verts;
  verts.reserve(cycle.size());
  for (const int e : cycle) verts.push_back(lat.edges()[std::size_t(e)].v0);
  return verts;
}

}  // namespace

bool face_flip_step(ChainState& st, const ModelParams& p, int face) {
  st.ensure_tables(p);
  const auto& f = st.lat_->faces()[std::size_t(face)];
  if (p.n == 1.0) {
    // loop-free weight: decide before touching the configuration
    int occ = 0;
    for (const int e : f.edge) occ += st.cfg_.edge(e) ? 1 : 0;
    const int d_edges = 6 - 2 * occ;
    const double ratio = st.xpow_[std::size_t(d_edges + 6)];
    if (ratio >= 1.0 || st.rng_.uniform() < ratio) {
      st.cfg_.xor_edges(std::span<const int>(f.edge));
      st.occupied_ += d_edges;
      st.loops_dirty_ = true;
      return true;
    }
    return false;
  }
  if (st.loops_dirty_) st.loop_count();  // refresh before incremental updates
  const auto [d_edges, d_loops] =
      st.apply_cycle(std::span<const int>(f.edge), std::span<const int>(f.vert));
  const double ratio = st.ratio_from_deltas(d_edges, d_loops);
  if (ratio >= 1.0 || st.rng_.uniform() < ratio) {
    st.occupied_ += d_edges;
    st.loops_ += d_loops;
    return true;
  }
  st.cfg_.xor_edges(std::span<const int>(f.edge));  // revert
  return false;
}

double face_flip_acceptance(ChainState& st, const ModelParams& p, int face) {
  st.ensure_tables(p);
  const auto& f = st.lat_->faces()[std::size_t(face)];
  const auto [d_edges, d_loops] =
      st.apply_cycle(std::span<const int>(f.edge), std::span<const int>(f.vert));
  st.cfg_.xor_edges(std::span<const int>(f.edge));  // revert
  return std::min(1.0, st.ratio_from_deltas(d_edges, d_loops));
}

bool topological_flip_step(ChainState& st, const ModelParams& p) {
  st.ensure_tables(p);
  const auto& cycle = st.lat_->hole_generator();  // throws on disks
  if (p.n == 1.0) {
    int occ = 0;
    for (const int e : cycle) occ += st.cfg_.edge(e) ? 1 : 0;
    const int d_edges = int(cycle.size()) - 2 * occ;
    const double ratio = st.ratio_from_deltas(d_edges, 0);
    if (ratio >= 1.0 || st.rng_.uniform() < ratio) {
      st.cfg_.xor_edges(cycle);
      st.occupied_ += d_edges;
      st.loops_dirty_ = true;
      return true;
    }
    return false;
  }
  if (st.loops_dirty_) st.loop_count();
  const auto verts = cycle_vertices(*st.lat_, cycle);
  const auto [d_edges, d_loops] = st.apply_cycle(cycle, verts);
  const double ratio = st.ratio_from_deltas(d_edges, d_loops);
  if (ratio >= 1.0 || st.rng_.uniform() < ratio) {
    st.occupied_ += d_edges;
    st.loops_ += d_loops;
    return true;
  }
  st.cfg_.xor_edges(cycle);
  return false;
}

double topological_flip_acceptance(ChainState& st, const ModelParams& p) {
  st.ensure_tables(p);
  const auto& cycle = st.lat_->hole_generator();
  const auto verts = cycle_vertices(*st.lat_, cycle);
  const auto [d_edges, d_loops] = st.apply_cycle(cycle, verts);
  st.cfg_.xor_edges(cycle);
  return std::min(1.0, st.ratio_from_deltas(d_edges, d_loops));
}

namespace {

constexpr long kAuditEvery = 10000;

struct SweepDriver {
  std::vector<int> order;
  long accepted = 0;
  long proposed = 0;

  explicit SweepDriver(int n_faces) : order(std::size_t(n_faces)) {
    for (int i = 0; i < n_faces; ++i) order[std::size_t(i)] = i;
  }

  void sweep(ChainState& st, const ModelParams& p, bool topological) {
    // Identity-reset Fisher-Yates: the schedule is a pure function of the
    // rng stream, so checkpointed chains continue exactly.
    for (int i = 0; i < int(order.size()); ++i) order[std::size_t(i)] = i;
    auto& rng = st.rng();
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = rng.uniform_below(std::uint32_t(i));
      std::swap(order[i - 1], order[j]);
    }
    for (const int f : order) {
      accepted += face_flip_step(st, p, f) ? 1 : 0;
      ++proposed;
    }
    if (topological) {
      accepted += topological_flip_step(st, p) ? 1 : 0;
      ++proposed;
    }
  }
};

}  // namespace

void run_sweeps(ChainState& st, const ModelParams& p, int n_sweeps,
                bool topological) {
  SweepDriver driver(st.lattice().n_faces());
  for (int s = 0; s < n_sweeps; ++s) {
    driver.sweep(st, p, topological);
    st.add_sweeps(1);
    if (st.sweep_count() % kAuditEvery == 0) st.audit();
  }
}

LoopsView LoopsView::from(const LoopConfig& cfg) {
  LoopsView v;
  v.lat = &cfg.lattice();
  v.curves = extract_loops(cfg);
  return v;
}

ChainRunResult run_chain(ChainState& st, const ModelParams& p,
                         const MCParams& mc,
                         const std::vector<Observable>& observables,
                         bool already_thermalized) {
  mc.validate();
  if (mc.enable_topological_move && st.lattice().homology_rank() != 1)
    throw std::invalid_argument(
        "run_chain: topological moves need a region with a hole");

  SweepDriver driver(st.lattice().n_faces());
  ChainRunResult out;
  out.series.resize(observables.size());

  auto advance = [&]() {
    driver.sweep(st, p, mc.enable_topological_move);
    st.add_sweeps(1);
    if (st.sweep_count() % kAuditEvery == 0) st.audit();
  };

  if (!already_thermalized)
    for (int s = 0; s < mc.thermalization_sweeps; ++s) advance();

  for (int s = 0; s < mc.measurement_sweeps; ++s) {
    advance();
    if ((s + 1) % mc.measure_every != 0) continue;
    const LoopsView view = LoopsView::from(st.config());
    for (std::size_t i = 0; i < observables.size(); ++i)
      out.series[i].push_back(observables[i].eval(st.config(), view));
  }

  for (const auto& s : out.series)
    out.estimates.push_back(BinnedEstimate::from_series(s));
  out.proposals = driver.proposed;
  out.acceptance_rate =
      driver.proposed > 0 ? double(driver.accepted) / double(driver.proposed)
                          : 0.0;
  return out;
}

ChainRunResult run_chains(const HexLattice& lat, const ModelParams& p,
                          const MCParams& mc,
                          const std::vector<Observable>& observables,
                          int n_threads) {
  mc.validate();
  if (n_threads <= 0)
    n_threads = std::max(1u, std::thread::hardware_concurrency());

  std::vector<ChainRunResult> results(std::size_t(mc.chains));
  std::vector<std::string> errors(std::size_t(mc.chains));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int c = next.fetch_add(1);
      if (c >= mc.chains) return;
      try {
        ChainState st(lat, mc.seed, std::uint64_t(c));
        results[std::size_t(c)] = run_chain(st, p, mc, observables);
      } catch (const std::exception& e) {
        errors[std::size_t(c)] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const int nw = std::min(n_threads, mc.chains);
  pool.reserve(std::size_t(nw));
  for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error("run_chains: " + e);

  // deterministic merge in chain-index order
  ChainRunResult merged;
  merged.series.resize(observables.size());
  long acc = 0, prop = 0;
  for (const auto& r : results) {
    prop += r.proposals;
    acc += long(std::round(r.acceptance_rate * double(r.proposals)));
    for (std::size_t i = 0; i < observables.size(); ++i)
      merged.series[i].insert(merged.series[i].end(), r.series[i].begin(),
                              r.series[i].end());
  }
  for (std::size_t i = 0; i < observables.size(); ++i) {
    std::vector<BinnedEstimate> parts;
    parts.reserve(results.size());
    for (const auto& r : results) parts.push_back(r.estimates[i]);
    merged.estimates.push_back(BinnedEstimate::from_chains(parts));
  }
  merged.proposals = prop;
  merged.acceptance_rate = prop > 0 ? double(acc) / double(prop) : 0.0;
  return merged;
}

std::unordered_map<std::string, long> run_state_census(ChainState& st,
                                                       const ModelParams& p,
                                                       const MCParams& mc) {
  mc.validate();
  std::unordered_map<std::string, long> census;
  SweepDriver driver(st.lattice().n_faces());
  for (int s = 0; s < mc.thermalization_sweeps; ++s)
    driver.sweep(st, p, mc.enable_topological_move);
  for (int s = 0; s < mc.measurement_sweeps; ++s) {
    driver.sweep(st, p, mc.enable_topological_move);
    if ((s + 1) % mc.measure_every != 0) continue;
    const auto& occ = st.config().occupancy();
    ++census[std::string(reinterpret_cast<const char*>(occ.data()), occ.size())];
  }
  return census;
}

int winding_parity(const LoopConfig& cfg) {
  const auto& cut = cfg.lattice().cut_edges();
  int parity = 0;
  for (const int e : cut) parity ^= cfg.edge(e) ? 1 : 0;
  return parity;
}

}  // namespace clelab
