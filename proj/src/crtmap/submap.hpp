#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "crtmap/map.hpp"

namespace crtmap {

// Boundary-arc classes of an induced cell range: past/future crossed with
// the left/right tree.
enum ArcClass { kPL = 0, kPR = 1, kFL = 2, kFR = 3 };

struct InducedCellSubmap {
  std::int32_t a = 0, b = 0;           // inclusive vertex range
  std::vector<std::int32_t> internal_edges;   // edge ids of the parent map
  std::vector<std::int32_t> internal_faces;   // face ids of the parent map
  std::vector<std::int32_t> ext_degree;       // per vertex in [a..b]
  std::vector<std::int32_t> boundary_vertices;  // ext_degree > 0
  std::vector<std::int32_t> boundary_walk;      // closed outer walk, vertices
  std::int64_t perim = 0;              // walk length with multiplicity
  bool simple_boundary = false;

  // exterior adjacency counts per vertex per arc class
  std::array<std::vector<std::int32_t>, 4> arc_ext;
  // vertex sets per arc class (corner vertices assigned to past arcs)
  std::array<std::vector<std::int32_t>, 4> arc_vertices;

  std::int32_t n_vertices() const { return b - a + 1; }
  std::size_t vi(std::int32_t v) const { return static_cast<std::size_t>(v - a); }
};

// Induces the submap on vertex range [a..b]; the range must lie strictly
// inside the non-tainted window.
InducedCellSubmap induce_submap(const MatedMap& map, std::int32_t a, std::int32_t b);

struct EulerCheck {
  std::int64_t edges = 0;
  std::int64_t rhs_minus = 0;  // 3V - 3 - Perim
  std::int64_t rhs_plus = 0;   // 3V + 3 - Perim
  bool simple = false;
};
EulerCheck euler_check(const InducedCellSubmap& sub);

// Exact integer total curvature sum over the range, degrees from the full map.
std::int64_t total_curvature(const MatedMap& map, const InducedCellSubmap& sub);

struct GaussBonnetCheck {
  std::int64_t lhs = 0;        // sum of kappa over the range
  std::int64_t rhs_minus6 = 0; // 2 Perim - 6 - sum ext_degree
  std::int64_t rhs_plus6 = 0;  // 2 Perim + 6 - sum ext_degree
  std::int64_t ext_degree_sum = 0;
  bool simple = false;
};
GaussBonnetCheck gauss_bonnet_check(const MatedMap& map, const InducedCellSubmap& sub);

struct BoundaryArcReport {
  // per class: sum over vertices carrying the class of (2 - #ext edges of
  // that class at the vertex)
  std::array<std::int64_t, 4> arc_sums{};
  std::array<std::int64_t, 4> arc_edge_counts{};
  std::array<std::int64_t, 4> arc_vertex_counts{};
  std::int64_t double_counted_vertices = 0;  // carrying both past and future
};
BoundaryArcReport boundary_arcs(const InducedCellSubmap& sub);

}  // namespace crtmap
