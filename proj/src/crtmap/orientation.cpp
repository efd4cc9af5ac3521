#include "crtmap/orientation.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace crtmap {

namespace {

std::int64_t checked_cast(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() ||
      v < std::numeric_limits<std::int64_t>::min())
    throw std::overflow_error("rational overflow");
  return static_cast<std::int64_t>(v);
}

Rational make_reduced(__int128 n, __int128 d) {
  if (d == 0) throw std::invalid_argument("zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  __int128 a = n < 0 ? -n : n, b = d;
  while (b) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  if (a == 0) a = 1;
  Rational r;
  r.num = checked_cast(n / a);
  r.den = checked_cast(d / a);
  return r;
}

}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) {
  *this = make_reduced(n, d);
}

Rational Rational::operator+(const Rational& o) const {
  return make_reduced(static_cast<__int128>(num) * o.den +
                          static_cast<__int128>(o.num) * den,
                      static_cast<__int128>(den) * o.den);
}

Rational Rational::operator-(const Rational& o) const {
  return make_reduced(static_cast<__int128>(num) * o.den -
                          static_cast<__int128>(o.num) * den,
                      static_cast<__int128>(den) * o.den);
}

Rational Rational::operator*(const Rational& o) const {
  return make_reduced(static_cast<__int128>(num) * o.num,
                      static_cast<__int128>(den) * o.den);
}

void VertexFunction::set(std::int32_t v, Rational val) {
  if (v < 0 || v >= size()) throw std::out_of_range("vertex out of range");
  if (!in_support_[v] && !val.is_zero()) {
    in_support_[v] = 1;
    support_.push_back(v);
  }
  value_[v] = val;
}

std::int32_t find_edge(const MatedMap& map, std::int32_t lo, std::int32_t hi,
                       Side side) {
  Edge probe{lo, hi, side};
  auto less = [](const Edge& a, const Edge& b) {
    if (a.lo != b.lo) return a.lo < b.lo;
    if (a.hi != b.hi) return a.hi < b.hi;
    return static_cast<int>(a.side) < static_cast<int>(b.side);
  };
  auto it = std::lower_bound(map.edges.begin(), map.edges.end(), probe, less);
  if (it == map.edges.end() || !(*it == probe)) return -1;
  return static_cast<std::int32_t>(it - map.edges.begin());
}

OrientationAssignment assign_orientations(const MatedMap& map) {
  OrientationAssignment a;
  std::size_t ne = map.edges.size();
  a.end_L.assign(ne, -1);
  a.end_R.assign(ne, -1);
  a.pl.assign(map.n, -1);
  a.pr.assign(map.n, -1);
  a.fl.assign(map.n, -1);
  a.fr.assign(map.n, -1);

  for (const Face& fc : map.faces) {
    // legs (a,m) and (m,b); the third vertex lies outside each leg's span,
    // so this face is the leg's outside face and the orientation ends at m.
    std::int32_t past = find_edge(map, fc.a, fc.m,
                                  fc.m - fc.a == 1 ? Side::M : fc.side);
    std::int32_t fut = find_edge(map, fc.m, fc.b,
                                 fc.b - fc.m == 1 ? Side::M : fc.side);
    if (past < 0 || fut < 0)
      throw std::runtime_error("face leg edge missing from edge list");
    std::vector<std::int32_t>& end = fc.side == Side::L ? a.end_L : a.end_R;
    if (end[past] != -1 || end[fut] != -1)
      throw std::runtime_error("edge oriented twice within one tree system");
    end[past] = fc.m;
    end[fut] = fc.m;
    if (fc.side == Side::L) {
      if (a.pl[fc.m] != -1 || a.fl[fc.m] != -1)
        throw std::runtime_error("vertex is the middle of two L faces");
      a.pl[fc.m] = past;
      a.fl[fc.m] = fut;
    } else {
      if (a.pr[fc.m] != -1 || a.fr[fc.m] != -1)
        throw std::runtime_error("vertex is the middle of two R faces");
      a.pr[fc.m] = past;
      a.fr[fc.m] = fut;
    }
  }

  for (std::int32_t v = 0; v < map.n; ++v) {
    if (!map.tainted[v] && !a.complete(v))
      throw std::runtime_error("non-tainted vertex missing one of its four legs");
  }
  return a;
}

void require_admissible_support(const MatedMap& map, const VertexFunction& f) {
  if (f.size() != map.n) throw std::invalid_argument("function size mismatch");
  for (std::int32_t v : f.support()) {
    if (f.at(v).is_zero()) continue;
    if (map.tainted[v])
      throw std::invalid_argument("support touches a tainted vertex");
    for (std::int32_t s = map.rot_start[v]; s < map.rot_start[v + 1]; ++s)
      if (map.tainted[map.rot_nbr[s]])
        throw std::invalid_argument("support neighbourhood touches taint");
  }
}

Rational check_identity_goodorientation(const MatedMap& map,
                                        const OrientationAssignment& a,
                                        const VertexFunction& f) {
  require_admissible_support(map, f);
  Rational lhs;
  for (std::int32_t v : f.support())
    lhs = lhs + f.at(v) * Rational(curvature_units(map, v));

  Rational rhs;
  for (std::size_t e = 0; e < map.edges.size(); ++e) {
    const Edge& ed = map.edges[e];
    bool lo_live = f.in_support(ed.lo);
    bool hi_live = f.in_support(ed.hi);
    if (!lo_live && !hi_live) continue;
    if (ed.side != Side::R) {  // L system: L and M edges
      std::int32_t end = a.end_L[e];
      if (end >= 0) {
        std::int32_t start = end == ed.lo ? ed.hi : ed.lo;
        rhs = rhs + (f.at(end) - f.at(start));
      }
    }
    if (ed.side != Side::L) {  // R system: R and M edges
      std::int32_t end = a.end_R[e];
      if (end >= 0) {
        std::int32_t start = end == ed.lo ? ed.hi : ed.lo;
        rhs = rhs + (f.at(end) - f.at(start));
      }
    }
  }
  return lhs - rhs;
}

Rational check_identity_rewritenabla(const MatedMap& map,
                                     const OrientationAssignment& a,
                                     const VertexFunction& f) {
  require_admissible_support(map, f);
  Rational lhs;
  for (std::int32_t v : f.support())
    lhs = lhs + f.at(v) * Rational(curvature_units(map, v));

  Rational rhs;
  auto add_leg = [&](std::int32_t v, std::int32_t eid) {
    if (eid < 0) return;
    const Edge& ed = map.edges[eid];
    std::int32_t other = ed.lo == v ? ed.hi : ed.lo;
    if (!f.in_support(v) && !f.in_support(other)) return;
    rhs = rhs + (f.at(v) - f.at(other));  // legs end at their owner
  };
  for (std::int32_t v = 0; v < map.n; ++v) {
    if (map.tainted[v]) continue;
    add_leg(v, a.pl[v]);
    add_leg(v, a.pr[v]);
    add_leg(v, a.fl[v]);
    add_leg(v, a.fr[v]);
  }
  return lhs - rhs;
}

PartitionReport check_partition(const MatedMap& map, const OrientationAssignment& a) {
  PartitionReport rep;
  std::size_t ne = map.edges.size();
  // claim counters per (edge, system)
  std::vector<std::uint8_t> claim_L(ne, 0), claim_R(ne, 0);
  for (std::int32_t v = 0; v < map.n; ++v) {
    if (map.tainted[v]) continue;
    for (std::int32_t eid : {a.pl[v], a.fl[v]}) {
      if (eid < 0) continue;
      if (claim_L[eid]++) ++rep.collisions;
      ++rep.claimed;
    }
    for (std::int32_t eid : {a.pr[v], a.fr[v]}) {
      if (eid < 0) continue;
      if (claim_R[eid]++) ++rep.collisions;
      ++rep.claimed;
    }
  }
  for (std::size_t e = 0; e < ne; ++e) {
    const Edge& ed = map.edges[e];
    if (map.tainted[ed.lo] || map.tainted[ed.hi]) continue;
    if (ed.side != Side::R) {
      ++rep.interior_edge_sides;
      if (!claim_L[e]) ++rep.orphans;
    }
    if (ed.side != Side::L) {
      ++rep.interior_edge_sides;
      if (!claim_R[e]) ++rep.orphans;
    }
  }
  rep.ok = rep.collisions == 0 && rep.orphans == 0;
  return rep;
}

}  // namespace crtmap
