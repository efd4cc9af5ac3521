#include "crtmap/submap.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace crtmap {

namespace {

struct LocalRotation {
  std::vector<std::int32_t> start;     // nv+1
  std::vector<std::int32_t> edge;      // local edge index per slot
  std::vector<std::int32_t> nbr;       // neighbor vertex (parent ids)
  std::vector<std::int32_t> slot_lo;   // per local edge
  std::vector<std::int32_t> slot_hi;
};

}  // namespace

InducedCellSubmap induce_submap(const MatedMap& map, std::int32_t a, std::int32_t b) {
  if (a > b || a < 0 || b >= map.n) throw std::invalid_argument("bad range");
  for (std::int32_t v = a; v <= b; ++v)
    if (map.tainted[v])
      throw std::invalid_argument("range touches the tainted region");

  InducedCellSubmap sub;
  sub.a = a;
  sub.b = b;
  std::int32_t nv = sub.n_vertices();
  sub.ext_degree.assign(nv, 0);
  for (auto& v : sub.arc_ext) v.assign(nv, 0);

  for (std::int32_t v = a; v <= b; ++v) {
    for (std::int32_t s = map.rot_start[v]; s < map.rot_start[v + 1]; ++s) {
      std::int32_t u = map.rot_nbr[s];
      std::int32_t eid = map.rot_edge[s];
      const Edge& e = map.edges[eid];
      if (u < a || u > b) {
        ++sub.ext_degree[sub.vi(v)];
        bool past = u < a;
        // M-type exterior adjacencies class with the right tree
        ArcClass c;
        if (e.side == Side::L)
          c = past ? kPL : kFL;
        else
          c = past ? kPR : kFR;
        ++sub.arc_ext[c][sub.vi(v)];
      } else if (e.lo == v) {
        sub.internal_edges.push_back(eid);
      }
    }
  }

  for (std::int32_t v = a; v <= b; ++v)
    if (sub.ext_degree[sub.vi(v)] > 0) sub.boundary_vertices.push_back(v);

  // vertex partition across arcs: past classes win at corners, left breaks
  // the remaining ties
  for (std::int32_t v : sub.boundary_vertices) {
    std::size_t i = sub.vi(v);
    for (ArcClass c : {kPL, kPR, kFL, kFR}) {
      if (sub.arc_ext[c][i] > 0) {
        sub.arc_vertices[c].push_back(v);
        break;
      }
    }
  }

  // inherited faces: canonical order sorts by the smallest vertex
  {
    Face probe{a, 0, 0, Side::M};
    auto less_a = [](const Face& f, const Face& g) { return f.a < g.a; };
    auto it = std::lower_bound(map.faces.begin(), map.faces.end(), probe, less_a);
    for (; it != map.faces.end() && it->a <= b - 2; ++it)
      if (it->b <= b)
        sub.internal_faces.push_back(
            static_cast<std::int32_t>(it - map.faces.begin()));
  }

  // ---- outer boundary walk over the induced rotation system ----
  if (nv == 1 || sub.internal_edges.empty()) {
    sub.perim = 0;
    sub.simple_boundary = false;
    return sub;
  }

  LocalRotation rot;
  std::int32_t ne = static_cast<std::int32_t>(sub.internal_edges.size());
  rot.start.assign(nv + 1, 0);
  rot.slot_lo.assign(ne, -1);
  rot.slot_hi.assign(ne, -1);
  // map parent edge id -> local edge index
  std::vector<std::pair<std::int32_t, std::int32_t>> eid_sorted(ne);
  for (std::int32_t i = 0; i < ne; ++i) eid_sorted[i] = {sub.internal_edges[i], i};
  std::sort(eid_sorted.begin(), eid_sorted.end());
  auto local_edge = [&](std::int32_t parent_eid) {
    auto it = std::lower_bound(eid_sorted.begin(), eid_sorted.end(),
                               std::make_pair(parent_eid, INT32_MIN));
    return it->second;
  };

  for (std::int32_t v = a; v <= b; ++v) {
    std::int32_t cnt = 0;
    for (std::int32_t s = map.rot_start[v]; s < map.rot_start[v + 1]; ++s) {
      std::int32_t u = map.rot_nbr[s];
      if (u >= a && u <= b) ++cnt;
    }
    rot.start[sub.vi(v) + 1] = rot.start[sub.vi(v)] + cnt;
  }
  rot.edge.assign(rot.start[nv], -1);
  rot.nbr.assign(rot.start[nv], -1);
  for (std::int32_t v = a; v <= b; ++v) {
    std::int32_t pos = rot.start[sub.vi(v)];
    for (std::int32_t s = map.rot_start[v]; s < map.rot_start[v + 1]; ++s) {
      std::int32_t u = map.rot_nbr[s];
      if (u < a || u > b) continue;
      std::int32_t le = local_edge(map.rot_edge[s]);
      rot.edge[pos] = le;
      rot.nbr[pos] = u;
      if (map.edges[sub.internal_edges[le]].lo == v)
        rot.slot_lo[le] = pos;
      else
        rot.slot_hi[le] = pos;
      ++pos;
    }
  }

  auto head_of = [&](std::int32_t le, bool from_lo) {
    const Edge& e = map.edges[sub.internal_edges[le]];
    return from_lo ? e.hi : e.lo;
  };
  auto next_dart = [&](std::pair<std::int32_t, bool> d) {
    std::int32_t v = head_of(d.first, d.second);
    std::int32_t slot = d.second ? rot.slot_hi[d.first] : rot.slot_lo[d.first];
    std::size_t lv = sub.vi(v);
    std::int32_t deg = rot.start[lv + 1] - rot.start[lv];
    std::int32_t loc = slot - rot.start[lv];
    std::int32_t ns = rot.start[lv] + (loc - 1 + deg) % deg;
    std::int32_t le = rot.edge[ns];
    bool from_lo = map.edges[sub.internal_edges[le]].lo == v;
    return std::make_pair(le, from_lo);
  };

  // outer face: at the leftmost vertex take the last slot before the lower
  // arcs; its orbit walks the unbounded region
  std::int32_t top_slot = rot.start[0];
  for (std::int32_t s = rot.start[0]; s < rot.start[1]; ++s) {
    const Edge& e = map.edges[sub.internal_edges[rot.edge[s]]];
    if (e.side == Side::L) break;
    top_slot = s;
  }
  std::pair<std::int32_t, bool> outer{
      rot.edge[top_slot],
      map.edges[sub.internal_edges[rot.edge[top_slot]]].lo == a};
  std::pair<std::int32_t, bool> d = outer;
  do {
    std::int32_t tail = d.second ? map.edges[sub.internal_edges[d.first]].lo
                                 : map.edges[sub.internal_edges[d.first]].hi;
    sub.boundary_walk.push_back(tail);
    d = next_dart(d);
  } while (d != outer);
  sub.perim = static_cast<std::int64_t>(sub.boundary_walk.size());

  sub.simple_boundary = sub.perim >= 3;
  if (sub.simple_boundary) {
    std::vector<std::int32_t> w(sub.boundary_walk);
    std::sort(w.begin(), w.end());
    for (std::size_t i = 1; i < w.size(); ++i)
      if (w[i] == w[i - 1]) {
        sub.simple_boundary = false;
        break;
      }
  }
  return sub;
}

EulerCheck euler_check(const InducedCellSubmap& sub) {
  EulerCheck c;
  c.edges = static_cast<std::int64_t>(sub.internal_edges.size());
  std::int64_t v = sub.n_vertices();
  c.rhs_minus = 3 * v - 3 - sub.perim;
  c.rhs_plus = 3 * v + 3 - sub.perim;
  c.simple = sub.simple_boundary;
  return c;
}

std::int64_t total_curvature(const MatedMap& map, const InducedCellSubmap& sub) {
  std::int64_t s = 0;
  for (std::int32_t v = sub.a; v <= sub.b; ++v) s += 6 - map.degree[v];
  return s;
}

GaussBonnetCheck gauss_bonnet_check(const MatedMap& map, const InducedCellSubmap& sub) {
  GaussBonnetCheck g;
  g.lhs = total_curvature(map, sub);
  for (std::int32_t e : sub.ext_degree) g.ext_degree_sum += e;
  g.rhs_minus6 = 2 * sub.perim - 6 - g.ext_degree_sum;
  g.rhs_plus6 = 2 * sub.perim + 6 - g.ext_degree_sum;
  g.simple = sub.simple_boundary;
  return g;
}

BoundaryArcReport boundary_arcs(const InducedCellSubmap& sub) {
  BoundaryArcReport rep;
  std::int32_t nv = sub.n_vertices();
  for (std::int32_t i = 0; i < nv; ++i) {
    int carried = 0;
    for (ArcClass c : {kPL, kPR, kFL, kFR}) {
      std::int32_t k = sub.arc_ext[c][i];
      if (k > 0) {
        ++carried;
        rep.arc_sums[c] += 2 - k;
        rep.arc_edge_counts[c] += k;
        ++rep.arc_vertex_counts[c];
      }
    }
    if (carried > 1) rep.double_counted_vertices += carried - 1;
  }
  return rep;
}

}  // namespace crtmap
