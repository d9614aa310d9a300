#include "clelab/hex_lattice.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace clelab {

namespace {

constexpr double kSqrt3 = 1.7320508075688772935;

// corner offsets on the (A,B) integer grid, counterclockwise from 30 degrees
constexpr int kCornerA[6] = {1, 0, -1, -1, 0, 1};
constexpr int kCornerB[6] = {1, 2, 1, -1, -2, -1};

std::uint64_t pack_key(std::int64_t a, std::int64_t b) {
  const std::uint64_t ua = std::uint64_t(a + (std::int64_t(1) << 30));
  const std::uint64_t ub = std::uint64_t(b + (std::int64_t(1) << 30));
  return (ua << 32) | (ub & 0xffffffffULL);
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

HexLattice::HexLattice(const RegionSpec& region, double spacing)
    : region_(region), spacing_(spacing) {
  if (!(spacing > 0.0))
    throw std::invalid_argument("HexLattice: spacing must be positive");

  Cplx bc;
  double br;
  region.bounding_disk(&bc, &br);
  const double ux = kSqrt3 * spacing / 2.0;  // x unit of the integer grid
  const double uy = spacing / 2.0;           // y unit

  // face centers: (ux * (2q + r), uy * 3r)
  const int r_lo = int(std::floor((bc.imag() - br - 2 * spacing) / (3 * uy)));
  const int r_hi = int(std::ceil((bc.imag() + br + 2 * spacing) / (3 * uy)));

  for (int r = r_lo; r <= r_hi; ++r) {
    const int a_lo = int(std::floor((bc.real() - br - 2 * spacing) / ux));
    const int a_hi = int(std::ceil((bc.real() + br + 2 * spacing) / ux));
    for (int A = a_lo; A <= a_hi; ++A) {
      if ((A - r) % 2 != 0) continue;  // A = 2q + r has the parity of r
      const int q = (A - r) / 2;
      const Cplx center{ux * A, uy * 3.0 * r};
      if (!region.contains(center)) continue;

      Face f;
      f.q = q;
      f.r = r;
      f.center = center;
      const std::int64_t Ac = 2 * std::int64_t(q) + r;
      const std::int64_t Bc = 3 * std::int64_t(r);
      std::array<int, 6> vid;
      for (int k = 0; k < 6; ++k) {
        const std::int64_t va = Ac + kCornerA[k];
        const std::int64_t vb = Bc + kCornerB[k];
        const std::uint64_t key = pack_key(va, vb);
        auto it = vertex_by_key_.find(key);
        if (it == vertex_by_key_.end()) {
          Vertex v;
          v.A = va;
          v.B = vb;
          v.pos = Cplx{ux * double(va), uy * double(vb)};
          it = vertex_by_key_.emplace(key, int(vertices_.size())).first;
          vertices_.push_back(v);
        }
        vid[k] = it->second;
      }
      const int fi = int(faces_.size());
      f.vert = vid;
      for (int k = 0; k < 6; ++k) {
        const int a = vid[k], b = vid[(k + 1) % 6];
        const std::uint64_t ekey =
            (std::uint64_t(std::uint32_t(std::min(a, b))) << 32) |
            std::uint64_t(std::uint32_t(std::max(a, b)));
        auto it = edge_by_key_.find(ekey);
        if (it == edge_by_key_.end()) {
          Edge e;
          e.v0 = a;
          e.v1 = b;
          e.f0 = fi;
          e.f1 = -1;
          e.midpoint = 0.5 * (vertices_[std::size_t(a)].pos +
                              vertices_[std::size_t(b)].pos);
          it = edge_by_key_.emplace(ekey, int(edges_.size())).first;
          edges_.push_back(e);
        } else {
          Edge& e = edges_[std::size_t(it->second)];
          if (e.f1 != -1)
            throw std::logic_error("HexLattice: edge with three faces");
          e.f1 = fi;
        }
        f.edge[k] = it->second;
      }
      face_by_key_.emplace(pack_key(q, r), fi);
      faces_.push_back(f);
    }
  }

  if (faces_.empty())
    throw std::invalid_argument(
        "HexLattice: empty lattice (no face center falls in the region); "
        "decrease the spacing or enlarge the region");

  for (int ei = 0; ei < int(edges_.size()); ++ei) {
    for (const int v : {edges_[std::size_t(ei)].v0, edges_[std::size_t(ei)].v1}) {
      Vertex& vv = vertices_[std::size_t(v)];
      if (vv.degree >= 3) throw std::logic_error("HexLattice: vertex degree > 3");
      vv.edge[std::size_t(vv.degree++)] = ei;
    }
  }

  UnionFind uf(n_vertices());
  for (const Edge& e : edges_) uf.unite(e.v0, e.v1);
  int components = 0;
  for (int v = 0; v < n_vertices(); ++v)
    if (uf.find(v) == v) ++components;

  const int cycle_dim = n_edges() - n_vertices() + components;
  homology_rank_ = cycle_dim - n_faces();
  if (homology_rank_ < 0)
    throw std::logic_error("HexLattice: inconsistent cycle-space dimension");
  if (homology_rank_ > 1)
    throw std::invalid_argument(
        "HexLattice: regions with more than one hole are not supported");
  if (homology_rank_ == 1) find_hole_generator();

  std::uint64_t h = 1469598103934665603ULL;
  const std::string rc = region.canonical();
  h = fnv1a(h, rc.data(), rc.size());
  h = fnv1a(h, &spacing_, sizeof spacing_);
  for (const Face& f : faces_) {
    h = fnv1a(h, &f.q, sizeof f.q);
    h = fnv1a(h, &f.r, sizeof f.r);
  }
  for (const Edge& e : edges_) {
    h = fnv1a(h, &e.v0, sizeof e.v0);
    h = fnv1a(h, &e.v1, sizeof e.v1);
  }
  hash_ = h;
}

int HexLattice::face_index(int q, int r) const {
  auto it = face_by_key_.find(pack_key(q, r));
  return it == face_by_key_.end() ? -1 : it->second;
}

const std::vector<int>& HexLattice::hole_generator() const {
  if (homology_rank_ != 1)
    throw std::logic_error("HexLattice: region has no hole generator");
  return hole_generator_;
}

const std::vector<int>& HexLattice::cut_edges() const {
  if (homology_rank_ != 1)
    throw std::logic_error("HexLattice: region has no hole cut");
  return cut_edges_;
}

void HexLattice::find_hole_generator() {
  // Horizontal cut from the hole rightwards, offset so it misses vertices.
  const Cplx anchor = region_.hole_anchor();
  const double y_cut = anchor.imag() + 0.2371 * spacing_;
  const double x_min = anchor.real();

  std::vector<char> crosses(edges_.size(), 0);
  for (std::size_t ei = 0; ei < edges_.size(); ++ei) {
    const Cplx p0 = vertices_[std::size_t(edges_[ei].v0)].pos;
    const Cplx p1 = vertices_[std::size_t(edges_[ei].v1)].pos;
    const double d0 = p0.imag() - y_cut, d1 = p1.imag() - y_cut;
    if ((d0 > 0) == (d1 > 0)) continue;
    const double t = d0 / (d0 - d1);
    const double x = p0.real() + t * (p1.real() - p0.real());
    if (x > x_min) crosses[ei] = 1;
  }
  cut_edges_.clear();
  for (std::size_t ei = 0; ei < edges_.size(); ++ei)
    if (crosses[ei]) cut_edges_.push_back(int(ei));
  if (cut_edges_.empty())
    throw std::logic_error("HexLattice: hole cut found no crossing edges");

  // Shortest cycle through exactly one cut edge: BFS between its endpoints
  // in the graph with all cut edges removed.
  std::vector<int> best;
  for (const int ce : cut_edges_) {
    const int s = edges_[std::size_t(ce)].v0;
    const int t = edges_[std::size_t(ce)].v1;
    std::vector<int> prev_edge(vertices_.size(), -2);
    std::deque<int> queue;
    prev_edge[std::size_t(s)] = -1;
    queue.push_back(s);
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      if (v == t) break;
      const Vertex& vv = vertices_[std::size_t(v)];
      for (int k = 0; k < vv.degree; ++k) {
        const int e = vv.edge[std::size_t(k)];
        if (crosses[std::size_t(e)]) continue;
        const int u = edges_[std::size_t(e)].v0 == v ? edges_[std::size_t(e)].v1
                                                     : edges_[std::size_t(e)].v0;
        if (prev_edge[std::size_t(u)] != -2) continue;
        prev_edge[std::size_t(u)] = e;
        queue.push_back(u);
      }
    }
    if (prev_edge[std::size_t(t)] == -2) continue;
    std::vector<int> cycle{ce};
    int v = t;
    while (v != s) {
      const int e = prev_edge[std::size_t(v)];
      cycle.push_back(e);
      v = edges_[std::size_t(e)].v0 == v ? edges_[std::size_t(e)].v1
                                         : edges_[std::size_t(e)].v0;
    }
    if (best.empty() || cycle.size() < best.size()) best = std::move(cycle);
  }
  if (best.empty())
    throw std::logic_error("HexLattice: no non-contractible cycle found");
  hole_generator_ = std::move(best);
}

std::vector<int> HexLattice::rotation60_edge_permutation() const {
  // (A,B) -> ((A-B)/2, (3A+B)/2) rotates the integer grid by 60 degrees
  // counterclockwise about the origin.
  std::vector<int> perm(edges_.size(), -1);
  auto rotate_vertex = [&](int v) -> int {
    const Vertex& vv = vertices_[std::size_t(v)];
    const std::int64_t a2 = vv.A - vv.B;
    const std::int64_t b2 = 3 * vv.A + vv.B;
    if (a2 % 2 != 0 || b2 % 2 != 0)
      throw std::logic_error("HexLattice: rotation leaves the grid");
    auto it = vertex_by_key_.find(pack_key(a2 / 2, b2 / 2));
    if (it == vertex_by_key_.end())
      throw std::invalid_argument(
          "HexLattice: active set is not symmetric under 60-degree rotation");
    return it->second;
  };
  for (std::size_t ei = 0; ei < edges_.size(); ++ei) {
    const int a = rotate_vertex(edges_[ei].v0);
    const int b = rotate_vertex(edges_[ei].v1);
    const std::uint64_t ekey =
        (std::uint64_t(std::uint32_t(std::min(a, b))) << 32) |
        std::uint64_t(std::uint32_t(std::max(a, b)));
    auto it = edge_by_key_.find(ekey);
    if (it == edge_by_key_.end())
      throw std::invalid_argument(
          "HexLattice: active set is not symmetric under 60-degree rotation");
    perm[ei] = it->second;
  }
  return perm;
}

HexLattice build_lattice(const RegionSpec& region, double spacing) {
  return HexLattice(region, spacing);
}

}  // namespace clelab
