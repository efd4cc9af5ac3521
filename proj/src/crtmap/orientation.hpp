#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "crtmap/map.hpp"

namespace crtmap {

// Exact rational with 64-bit components; intermediates go through __int128
// and overflow past int64 throws.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n) : num(n), den(1) {}
  Rational(std::int64_t n, std::int64_t d);

  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  bool is_zero() const { return num == 0; }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Vertex-indexed exact function with explicit support. The support must stay
// on doubly-interior vertices: the vertex and its whole 1-neighborhood
// non-tainted.
class VertexFunction {
 public:
  explicit VertexFunction(std::int32_t n) : value_(n), in_support_(n, 0) {}

  void set(std::int32_t v, Rational val);
  const Rational& at(std::int32_t v) const { return value_[v]; }
  bool in_support(std::int32_t v) const { return in_support_[v] != 0; }
  const std::vector<std::int32_t>& support() const { return support_; }
  std::int32_t size() const { return static_cast<std::int32_t>(value_.size()); }

 private:
  std::vector<Rational> value_;
  std::vector<std::uint8_t> in_support_;
  std::vector<std::int32_t> support_;
};

// Orientation of every edge within each tree system it belongs to (M edges
// carry one orientation per side), plus the per-vertex four-leg assignment.
// end[e] is the endpoint the oriented edge points at, -1 when the relevant
// bounded face lies outside the window.
struct OrientationAssignment {
  std::vector<std::int32_t> end_L;  // per edge id; valid for L and M edges
  std::vector<std::int32_t> end_R;  // per edge id; valid for R and M edges
  // per vertex: edge ids of the four legs, -1 if absent
  std::vector<std::int32_t> pl, pr, fl, fr;

  bool complete(std::int32_t v) const {
    return pl[v] >= 0 && pr[v] >= 0 && fl[v] >= 0 && fr[v] >= 0;
  }
};

OrientationAssignment assign_orientations(const MatedMap& map);

// Integer curvature units kappa(v) = 6 - deg(v); K = (pi/3) kappa.
inline int curvature_units(const MatedMap& map, std::int32_t v) {
  return 6 - map.degree[v];
}

// Checks that f's support is doubly interior; throws otherwise.
void require_admissible_support(const MatedMap& map, const VertexFunction& f);

// Residual of  sum_v f(v) kappa(v)  -  sum over oriented (edge,side) Df,
// Df(e) = f(end) - f(start). Exactly zero by construction of the map.
Rational check_identity_goodorientation(const MatedMap& map,
                                        const OrientationAssignment& a,
                                        const VertexFunction& f);

// Same left side, right side grouped per vertex over the four legs.
Rational check_identity_rewritenabla(const MatedMap& map,
                                     const OrientationAssignment& a,
                                     const VertexFunction& f);

struct PartitionReport {
  bool ok = true;
  std::size_t collisions = 0;        // an (edge,side) claimed twice
  std::size_t orphans = 0;           // interior (edge,side) claimed never
  std::size_t claimed = 0;
  std::size_t interior_edge_sides = 0;
};

// Verifies {e_v^{F.}} disjoint-union {e_v^{P.}} covers each tree system over
// non-tainted vertices, and the injectivity of the four leg maps.
PartitionReport check_partition(const MatedMap& map, const OrientationAssignment& a);

// Frozen edge-id lookup on the canonical edge order.
std::int32_t find_edge(const MatedMap& map, std::int32_t lo, std::int32_t hi, Side side);

}  // namespace crtmap
