#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crtmap/path.hpp"

namespace crtmap {

enum class Side : std::uint8_t { M = 0, L = 1, R = 2 };

inline const char* side_name(Side s) {
  switch (s) {
    case Side::M: return "M";
    case Side::L: return "L";
    default: return "R";
  }
}

struct Edge {
  std::int32_t lo, hi;
  Side side;
  bool operator==(const Edge&) const = default;
};

// Triangular face a < m < b; m is the chronological middle vertex.
struct Face {
  std::int32_t a, m, b;
  Side side;
  bool operator==(const Face&) const = default;
};

struct MatedMap {
  long long first_cell = 1;   // global cell index of vertex 0
  std::int32_t n = 0;         // vertex count
  std::vector<Edge> edges;    // canonical order: (lo, hi, side M<L<R)
  std::vector<Face> faces;    // canonical order: (a, m, b, side)
  std::vector<std::int32_t> degree;   // with edge multiplicity
  std::vector<std::uint8_t> tainted;  // window-boundary truncation flag

  // Rotation system: per-vertex incident slots in counterclockwise order.
  std::vector<std::int32_t> rot_start;  // size n+1 (CSR)
  std::vector<std::int32_t> rot_edge;   // edge id per slot
  std::vector<std::int32_t> rot_nbr;    // neighbor vertex per slot
  std::vector<std::int32_t> slot_at_lo; // per edge: global slot index at lo
  std::vector<std::int32_t> slot_at_hi; // per edge: global slot index at hi

  std::int32_t rot_degree(std::int32_t v) const { return rot_start[v + 1] - rot_start[v]; }
  std::vector<std::uint8_t> canonical_bytes() const;

  long long global_index(std::int32_t v) const { return first_cell + v; }
  std::int32_t vertex_of_global(long long g) const {
    return static_cast<std::int32_t>(g - first_cell);
  }
};

// Monotone-stack sweep construction, O(n + E).
MatedMap build_map(const CellSequence& cells);

// O(n^2) direct transcription of the adjacency condition plus face traversal
// from the rotation system; the oracle build_map is checked against.
MatedMap build_map_naive(const CellSequence& cells, std::size_t cap = 5000);

// Recomputes all bounded faces of the map from the rotation system and checks
// they are triangles matching map.faces. Throws on any structural defect.
void validate_faces(const MatedMap& map);

// Asserts no two same-side long edges interleave (a < c < b < d).
void check_non_crossing(const MatedMap& map);

std::string map_to_json(const MatedMap& map);
void save_map(const MatedMap& map, const std::string& path);  // magic "CRTM"
MatedMap load_map(const std::string& path);

// Directed-edge (dart) helpers shared with the face validator and submaps.
struct Dart {
  std::int32_t edge;
  bool from_lo;  // true: lo->hi
};

}  // namespace crtmap
