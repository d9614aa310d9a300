#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "clelab/region.hpp"

namespace clelab {

// Embedded honeycomb graph over a region mask. A face is active iff its
// center lies in the region; an edge is active iff it borders an active
// face. Pointy-top hexagons; all vertex positions are exact on the integer
// grid (A * sqrt(3)/2, B / 2) in units of the spacing.
//
// Immutable after construction; shared freely across chains/threads.
class HexLattice {
 public:
  struct Face {
    int q, r;  // axial coordinates
    Cplx center;
    std::array<int, 6> edge;
    std::array<int, 6> vert;
  };
  struct Edge {
    int v0, v1;
    int f0, f1;  // incident faces, f1 = -1 on the rim
    Cplx midpoint;
  };
  struct Vertex {
    std::int64_t A, B;  // integer grid coordinates
    Cplx pos;
    std::array<int, 3> edge{-1, -1, -1};
    int degree = 0;
  };

  HexLattice(const RegionSpec& region, double spacing);

  const RegionSpec& region() const { return region_; }
  double spacing() const { return spacing_; }

  int n_faces() const { return int(faces_.size()); }
  int n_edges() const { return int(edges_.size()); }
  int n_vertices() const { return int(vertices_.size()); }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Vertex>& vertices() const { return vertices_; }

  int face_index(int q, int r) const;  // -1 if absent

  // Rank of the cycle space in excess of the face boundaries: the number of
  // independent non-contractible cycles (0 for disks, 1 for annuli).
  int homology_rank() const { return homology_rank_; }
  // Shortest non-contractible cycle as an edge list (annulus regions).
  const std::vector<int>& hole_generator() const;
  // Edges crossed by the fixed hole-to-rim cut; the parity of the occupied
  // ones is the winding class of a configuration.
  const std::vector<int>& cut_edges() const;

  std::uint64_t hash() const { return hash_; }

  // Edge permutation induced by the rotation by 60 degrees about the
  // origin; throws unless the active set is symmetric under it.
  std::vector<int> rotation60_edge_permutation() const;

 private:
  RegionSpec region_;
  double spacing_;
  std::vector<Face> faces_;
  std::vector<Edge> edges_;
  std::vector<Vertex> vertices_;
  std::unordered_map<std::uint64_t, int> vertex_by_key_;
  std::unordered_map<std::uint64_t, int> edge_by_key_;
  std::unordered_map<std::uint64_t, int> face_by_key_;
  int homology_rank_ = 0;
  std::vector<int> hole_generator_;
  std::vector<int> cut_edges_;
  std::uint64_t hash_ = 0;

  void find_hole_generator();
};

HexLattice build_lattice(const RegionSpec& region, double spacing);

}  // namespace clelab
