#include "crtmap/map.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace crtmap {

namespace {

void check_distinct(const std::vector<double>& x, const char* side) {
  std::vector<double> s(x);
  std::sort(s.begin(), s.end());
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] == s[i - 1])
      throw std::runtime_error(std::string("duplicate ") + side +
                               " infima; tie-break upstream");
}

// Emits long edges (span >= 2) and the bounded faces of one side.
void sweep_side(const std::vector<double>& x, Side side,
                std::vector<Edge>& edges, std::vector<Face>& faces,
                std::vector<std::uint8_t>& right_tainted) {
  std::int32_t n = static_cast<std::int32_t>(x.size());
  std::vector<std::int32_t> stack;
  stack.reserve(64);
  for (std::int32_t k = 0; k < n; ++k) {
    while (!stack.empty() && x[stack.back()] > x[k]) {
      std::int32_t m = stack.back();
      stack.pop_back();
      if (k - m >= 2) edges.push_back({m, k, side});
      if (!stack.empty()) faces.push_back({stack.back(), m, k, side});
    }
    if (!stack.empty()) {
      std::int32_t j = stack.back();
      if (k - j >= 2) edges.push_back({j, k, side});
    }
    stack.push_back(k);
  }
  for (std::int32_t v : stack) right_tainted[v] = 1;
}

void mark_left_taint(const std::vector<double>& x, std::vector<std::uint8_t>& t) {
  double run = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] < run) t[j] = 1;
    run = std::min(run, x[j]);
  }
}

bool edge_less(const Edge& a, const Edge& b) {
  if (a.lo != b.lo) return a.lo < b.lo;
  if (a.hi != b.hi) return a.hi < b.hi;
  return static_cast<int>(a.side) < static_cast<int>(b.side);
}

bool face_less(const Face& a, const Face& b) {
  if (a.a != b.a) return a.a < b.a;
  if (a.m != b.m) return a.m < b.m;
  if (a.b != b.b) return a.b < b.b;
  return static_cast<int>(a.side) < static_cast<int>(b.side);
}

// Sorts edges, computes degrees, and lays out the rotation system.
void finalize(MatedMap& map) {
  std::sort(map.edges.begin(), map.edges.end(), edge_less);

  std::int32_t n = map.n;
  map.degree.assign(n, 0);
  for (const Edge& e : map.edges) {
    ++map.degree[e.lo];
    ++map.degree[e.hi];
  }

  // CCW order at v: [M->v+1], right-going R by increasing span, left-going R
  // by decreasing span, [M->v-1], left-going L by increasing span,
  // right-going L by decreasing span (arc nesting determines the order).
  std::size_t ne = map.edges.size();
  std::vector<std::vector<std::pair<std::int64_t, std::int32_t>>> at(n);
  for (std::int32_t v = 0; v < n; ++v) at[v].reserve(map.degree[v]);
  auto push = [&](std::int32_t v, std::int64_t sector, std::int64_t rank,
                  std::int32_t eid) {
    at[v].push_back({sector * (1LL << 40) + rank, eid});
  };
  for (std::size_t ei = 0; ei < ne; ++ei) {
    const Edge& e = map.edges[ei];
    std::int64_t span = e.hi - e.lo;
    std::int32_t id = static_cast<std::int32_t>(ei);
    if (e.side == Side::M) {
      push(e.lo, 0, 0, id);
      push(e.hi, 3, 0, id);
    } else if (e.side == Side::R) {
      push(e.lo, 1, span, id);
      push(e.hi, 2, (1LL << 39) - span, id);
    } else {
      push(e.hi, 4, span, id);
      push(e.lo, 5, (1LL << 39) - span, id);
    }
  }
  map.rot_start.assign(n + 1, 0);
  for (std::int32_t v = 0; v < n; ++v)
    map.rot_start[v + 1] = map.rot_start[v] + static_cast<std::int32_t>(at[v].size());
  map.rot_edge.assign(map.rot_start[n], -1);
  map.rot_nbr.assign(map.rot_start[n], -1);
  map.slot_at_lo.assign(ne, -1);
  map.slot_at_hi.assign(ne, -1);
  for (std::int32_t v = 0; v < n; ++v) {
    std::sort(at[v].begin(), at[v].end());
    std::int32_t base = map.rot_start[v];
    for (std::size_t i = 0; i < at[v].size(); ++i) {
      std::int32_t eid = at[v][i].second;
      const Edge& e = map.edges[eid];
      std::int32_t slot = base + static_cast<std::int32_t>(i);
      map.rot_edge[slot] = eid;
      map.rot_nbr[slot] = (e.lo == v) ? e.hi : e.lo;
      if (e.lo == v)
        map.slot_at_lo[eid] = slot;
      else
        map.slot_at_hi[eid] = slot;
    }
  }
}

Dart next_dart(const MatedMap& map, Dart d) {
  const Edge& e = map.edges[d.edge];
  std::int32_t v = d.from_lo ? e.hi : e.lo;  // head vertex
  std::int32_t slot = d.from_lo ? map.slot_at_hi[d.edge] : map.slot_at_lo[d.edge];
  std::int32_t deg = map.rot_degree(v);
  std::int32_t loc = slot - map.rot_start[v];
  std::int32_t nslot = map.rot_start[v] + (loc - 1 + deg) % deg;
  std::int32_t ne2 = map.rot_edge[nslot];
  return Dart{ne2, map.edges[ne2].lo == v};
}

inline std::size_t dart_id(Dart d) {
  return 2 * static_cast<std::size_t>(d.edge) + (d.from_lo ? 0 : 1);
}

// Dart at the leftmost vertex whose face orbit is the unbounded region.
Dart outer_dart(const MatedMap& map) {
  std::int32_t top_slot = map.rot_start[0];
  for (std::int32_t s = map.rot_start[0]; s < map.rot_start[1]; ++s) {
    const Edge& e = map.edges[map.rot_edge[s]];
    if (e.side == Side::L) break;  // lower arcs come after the upper sector
    top_slot = s;
  }
  std::int32_t eid = map.rot_edge[top_slot];
  return Dart{eid, map.edges[eid].lo == 0};
}

// Walks every face orbit of the rotation system. Bounded orbits must be
// triangles; returns them sorted. outer_len receives the unbounded walk
// length.
std::vector<Face> faces_from_rotation(const MatedMap& map, std::size_t* outer_len) {
  std::size_t ne = map.edges.size();
  std::vector<std::uint8_t> seen(2 * ne, 0);
  Dart outer = outer_dart(map);
  std::size_t olen = 0;
  {
    Dart d = outer;
    do {
      seen[dart_id(d)] = 1;
      ++olen;
      d = next_dart(map, d);
    } while (dart_id(d) != dart_id(outer));
  }
  if (outer_len) *outer_len = olen;

  std::vector<Face> found;
  for (std::size_t ei = 0; ei < ne; ++ei) {
    for (int dir = 0; dir < 2; ++dir) {
      Dart d0{static_cast<std::int32_t>(ei), dir == 0};
      if (seen[dart_id(d0)]) continue;
      std::vector<std::int32_t> cyc;
      Side fside = Side::M;
      Dart d = d0;
      do {
        seen[dart_id(d)] = 1;
        const Edge& e = map.edges[d.edge];
        cyc.push_back(d.from_lo ? e.lo : e.hi);
        if (e.side != Side::M) {
          if (fside != Side::M && fside != e.side)
            throw std::runtime_error("face mixes L and R long edges");
          fside = e.side;
        }
        d = next_dart(map, d);
        if (cyc.size() > 3 + ne) throw std::runtime_error("runaway face orbit");
      } while (dart_id(d) != dart_id(d0));
      if (cyc.size() != 3) {
        std::ostringstream os;
        os << "non-triangular bounded face, length " << cyc.size() << ": [";
        for (std::size_t i = 0; i < std::min<std::size_t>(cyc.size(), 12); ++i)
          os << cyc[i] << (i + 1 < cyc.size() ? "," : "");
        os << "]";
        throw std::runtime_error(os.str());
      }
      if (fside == Side::M)
        throw std::runtime_error("bounded face with only M edges");
      std::sort(cyc.begin(), cyc.end());
      found.push_back({cyc[0], cyc[1], cyc[2], fside});
    }
  }
  std::sort(found.begin(), found.end(), face_less);
  return found;
}

}  // namespace

std::vector<std::uint8_t> MatedMap::canonical_bytes() const {
  std::vector<std::uint8_t> out;
  out.reserve(16 + edges.size() * 9 + faces.size() * 13);
  auto put32 = [&out](std::int32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  put32(n);
  put32(static_cast<std::int32_t>(first_cell));
  put32(static_cast<std::int32_t>(edges.size()));
  for (const Edge& e : edges) {
    put32(e.lo);
    put32(e.hi);
    out.push_back(static_cast<std::uint8_t>(e.side));
  }
  put32(static_cast<std::int32_t>(faces.size()));
  for (const Face& f : faces) {
    put32(f.a);
    put32(f.m);
    put32(f.b);
    out.push_back(static_cast<std::uint8_t>(f.side));
  }
  return out;
}

MatedMap build_map(const CellSequence& cells) {
  std::size_t n = cells.n_cells();
  if (n < 3) throw std::invalid_argument("build_map needs at least 3 cells");
  check_distinct(cells.inf_L, "L");
  check_distinct(cells.inf_R, "R");

  MatedMap map;
  map.n = static_cast<std::int32_t>(n);
  map.first_cell = cells.first_cell;
  map.edges.reserve(4 * n);
  for (std::int32_t j = 0; j + 1 < static_cast<std::int32_t>(n); ++j)
    map.edges.push_back({j, j + 1, Side::M});

  map.tainted.assign(n, 0);
  std::vector<std::uint8_t> right_taint(n, 0);
  sweep_side(cells.inf_L, Side::L, map.edges, map.faces, right_taint);
  sweep_side(cells.inf_R, Side::R, map.edges, map.faces, right_taint);
  mark_left_taint(cells.inf_L, map.tainted);
  mark_left_taint(cells.inf_R, map.tainted);
  for (std::size_t i = 0; i < n; ++i)
    if (right_taint[i]) map.tainted[i] = 1;

  std::sort(map.faces.begin(), map.faces.end(), face_less);
  finalize(map);
  return map;
}

MatedMap build_map_naive(const CellSequence& cells, std::size_t cap) {
  std::size_t n = cells.n_cells();
  if (n < 3) throw std::invalid_argument("build_map_naive needs at least 3 cells");
  if (n > cap) throw std::invalid_argument("build_map_naive cap exceeded");
  check_distinct(cells.inf_L, "L");
  check_distinct(cells.inf_R, "R");

  MatedMap map;
  map.n = static_cast<std::int32_t>(n);
  map.first_cell = cells.first_cell;
  for (std::int32_t j = 0; j + 1 < static_cast<std::int32_t>(n); ++j)
    map.edges.push_back({j, j + 1, Side::M});

  for (int side = 0; side < 2; ++side) {
    const std::vector<double>& x = side == 0 ? cells.inf_L : cells.inf_R;
    Side s = side == 0 ? Side::L : Side::R;
    for (std::int32_t j = 0; j < static_cast<std::int32_t>(n); ++j) {
      double between = std::numeric_limits<double>::infinity();
      for (std::int32_t k = j + 1; k < static_cast<std::int32_t>(n); ++k) {
        if (k - j >= 2 && std::max(x[j], x[k]) <= between)
          map.edges.push_back({j, k, s});
        between = std::min(between, x[k]);
      }
    }
  }

  map.tainted.assign(n, 0);
  for (int side = 0; side < 2; ++side) {
    const std::vector<double>& x = side == 0 ? cells.inf_L : cells.inf_R;
    mark_left_taint(x, map.tainted);
    double run = std::numeric_limits<double>::infinity();
    for (std::size_t j = n; j-- > 0;) {
      if (x[j] < run) map.tainted[j] = 1;
      run = std::min(run, x[j]);
    }
  }

  finalize(map);
  map.faces = faces_from_rotation(map, nullptr);
  return map;
}

void validate_faces(const MatedMap& map) {
  std::size_t outer_len = 0;
  std::vector<Face> found = faces_from_rotation(map, &outer_len);
  if (found.size() != map.faces.size())
    throw std::runtime_error("face count mismatch between sweep and traversal");
  for (std::size_t i = 0; i < found.size(); ++i)
    if (!(found[i] == map.faces[i]))
      throw std::runtime_error("face set mismatch between sweep and traversal");
  long long V = map.n, E = static_cast<long long>(map.edges.size()),
            F = static_cast<long long>(found.size()) + 1;
  if (V - E + F != 2)
    throw std::runtime_error("Euler characteristic violated in face traversal");
}

void check_non_crossing(const MatedMap& map) {
  for (Side s : {Side::L, Side::R}) {
    std::vector<std::pair<std::int32_t, std::int32_t>> arcs;
    for (const Edge& e : map.edges)
      if (e.side == s && e.hi - e.lo >= 2) arcs.push_back({e.lo, e.hi});
    std::sort(arcs.begin(), arcs.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return a.second > b.second;
    });
    std::vector<std::int32_t> open;
    for (const auto& [lo, hi] : arcs) {
      while (!open.empty() && open.back() <= lo) open.pop_back();
      if (!open.empty() && open.back() < hi)
        throw std::runtime_error("same-side edges interleave");
      open.push_back(hi);
    }
  }
}

std::string map_to_json(const MatedMap& map) {
  std::ostringstream os;
  os << "{\"schema\":1,\"vertices\":" << map.n
     << ",\"first_cell\":" << map.first_cell << ",\"edges\":[";
  for (std::size_t i = 0; i < map.edges.size(); ++i) {
    const Edge& e = map.edges[i];
    os << (i ? "," : "") << "[" << e.lo << "," << e.hi << ",\"" << side_name(e.side)
       << "\"]";
  }
  os << "],\"faces\":[";
  for (std::size_t i = 0; i < map.faces.size(); ++i) {
    const Face& f = map.faces[i];
    os << (i ? "," : "") << "[" << f.a << "," << f.m << "," << f.b << ",\""
       << side_name(f.side) << "\"]";
  }
  os << "],\"degree\":[";
  for (std::int32_t v = 0; v < map.n; ++v) os << (v ? "," : "") << map.degree[v];
  os << "],\"tainted\":[";
  for (std::int32_t v = 0; v < map.n; ++v)
    os << (v ? "," : "") << static_cast<int>(map.tainted[v]);
  os << "]}";
  return os.str();
}

void save_map(const MatedMap& map, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f.write("CRTM", 4);
  std::uint16_t version = 1;
  f.write(reinterpret_cast<const char*>(&version), 2);
  auto bytes = map.canonical_bytes();
  std::uint64_t sz = bytes.size();
  f.write(reinterpret_cast<const char*>(&sz), 8);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
}

MatedMap load_map(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for read: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "CRTM", 4) != 0)
    throw std::runtime_error("bad CRTM magic");
  std::uint16_t version;
  f.read(reinterpret_cast<char*>(&version), 2);
  if (version != 1) throw std::runtime_error("unsupported CRTM version");
  std::uint64_t sz;
  f.read(reinterpret_cast<char*>(&sz), 8);
  std::vector<std::uint8_t> bytes(sz);
  f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(sz));
  if (!f) throw std::runtime_error("truncated CRTM file");

  MatedMap map;
  std::size_t pos = 0;
  auto get32 = [&bytes, &pos]() {
    std::int32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::int32_t>(bytes.at(pos++)) << (8 * i);
    return v;
  };
  map.n = get32();
  map.first_cell = get32();
  std::int32_t ne = get32();
  map.edges.resize(ne);
  for (std::int32_t i = 0; i < ne; ++i) {
    map.edges[i].lo = get32();
    map.edges[i].hi = get32();
    map.edges[i].side = static_cast<Side>(bytes.at(pos++));
  }
  std::int32_t nf = get32();
  map.faces.resize(nf);
  for (std::int32_t i = 0; i < nf; ++i) {
    map.faces[i].a = get32();
    map.faces[i].m = get32();
    map.faces[i].b = get32();
    map.faces[i].side = static_cast<Side>(bytes.at(pos++));
  }
  map.degree.assign(map.n, 0);
  for (const Edge& e : map.edges) {
    ++map.degree[e.lo];
    ++map.degree[e.hi];
  }
  return map;
}

}  // namespace crtmap
