#include "crtmap/embed.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "crtmap/stats.hpp"

namespace crtmap {

namespace {
constexpr double kPi = 3.14159265358979323846;

struct LocalGraph {
  std::vector<std::vector<std::int32_t>> nbr;  // with multiplicity, local ids
};

LocalGraph local_graph(const MatedMap& map, const InducedCellSubmap& sub) {
  LocalGraph g;
  g.nbr.assign(sub.n_vertices(), {});
  for (std::int32_t eid : sub.internal_edges) {
    const Edge& e = map.edges[eid];
    g.nbr[e.lo - sub.a].push_back(e.hi - sub.a);
    g.nbr[e.hi - sub.a].push_back(e.lo - sub.a);
  }
  return g;
}

// Conjugate gradients on the interior block of the graph Laplacian.
int solve_interior(const LocalGraph& g, const std::vector<std::uint8_t>& pinned,
                   std::vector<double>& coord, double tol, int max_iter) {
  std::int32_t n = static_cast<std::int32_t>(g.nbr.size());
  std::vector<std::int32_t> free_ids;
  std::vector<std::int32_t> pos(n, -1);
  for (std::int32_t v = 0; v < n; ++v)
    if (!pinned[v]) {
      pos[v] = static_cast<std::int32_t>(free_ids.size());
      free_ids.push_back(v);
    }
  std::size_t m = free_ids.size();
  if (m == 0) return 0;

  std::vector<double> b(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::int32_t u : g.nbr[free_ids[i]])
      if (pinned[u]) b[i] += coord[u];
  }
  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    for (std::size_t i = 0; i < m; ++i) {
      std::int32_t v = free_ids[i];
      double acc = static_cast<double>(g.nbr[v].size()) * in[i];
      for (std::int32_t u : g.nbr[v])
        if (!pinned[u]) acc -= in[pos[u]];
      out[i] = acc;
    }
  };

  std::vector<double> xv(m, 0.0), r(b), p(b), ap(m);
  double rs = 0.0;
  for (double v : r) rs += v * v;
  double b2 = rs;
  if (b2 == 0.0) b2 = 1.0;
  int it = 0;
  while (it < max_iter && rs > tol * tol * b2) {
    apply(p, ap);
    double pap = 0.0;
    for (std::size_t i = 0; i < m; ++i) pap += p[i] * ap[i];
    if (pap <= 0.0) break;
    double alpha = rs / pap;
    for (std::size_t i = 0; i < m; ++i) {
      xv[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    double rs_new = 0.0;
    for (double v : r) rs_new += v * v;
    double beta = rs_new / rs;
    rs = rs_new;
    for (std::size_t i = 0; i < m; ++i) p[i] = r[i] + beta * p[i];
    ++it;
  }
  if (it >= max_iter) throw std::runtime_error("tutte_embed: no convergence");
  for (std::size_t i = 0; i < m; ++i) coord[free_ids[i]] = xv[i];
  return it;
}

}  // namespace

Embedding tutte_embed(const MatedMap& map, const InducedCellSubmap& sub,
                      double tol, int max_iter) {
  if (!sub.simple_boundary)
    throw std::invalid_argument("tutte_embed needs a simple boundary");
  std::int32_t n = sub.n_vertices();
  LocalGraph g = local_graph(map, sub);

  std::vector<std::uint8_t> pinned(n, 0);
  Embedding emb;
  emb.boundary_cycle = sub.boundary_walk;
  emb.x.assign(n, 0.0);
  emb.y.assign(n, 0.0);
  std::size_t p = sub.boundary_walk.size();
  for (std::size_t i = 0; i < p; ++i) {
    std::int32_t lv = sub.boundary_walk[i] - sub.a;
    double th = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(p);
    pinned[lv] = 1;
    emb.x[lv] = std::cos(th);
    emb.y[lv] = std::sin(th);
  }

  // interior connectivity (the M chain makes the submap connected; interior
  // pieces must each reach the boundary)
  {
    std::vector<std::uint8_t> seen(n, 0);
    std::vector<std::int32_t> stack;
    for (std::int32_t v = 0; v < n; ++v)
      if (pinned[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
    while (!stack.empty()) {
      std::int32_t v = stack.back();
      stack.pop_back();
      for (std::int32_t u : g.nbr[v])
        if (!seen[u]) {
          seen[u] = 1;
          stack.push_back(u);
        }
    }
    for (std::int32_t v = 0; v < n; ++v)
      if (!seen[v]) throw std::invalid_argument("disconnected interior");
  }

  int it1 = solve_interior(g, pinned, emb.x, tol, max_iter);
  int it2 = solve_interior(g, pinned, emb.y, tol, max_iter);
  emb.iterations = it1 + it2;

  double res = 0.0;
  for (std::int32_t v = 0; v < n; ++v) {
    if (pinned[v]) continue;
    double dx = 0.0, dy = 0.0;
    for (std::int32_t u : g.nbr[v]) {
      dx += emb.x[u] - emb.x[v];
      dy += emb.y[u] - emb.y[v];
    }
    res = std::max(res, std::max(std::fabs(dx), std::fabs(dy)));
  }
  emb.residual = res;
  for (double v : emb.x)
    if (!std::isfinite(v)) throw std::runtime_error("non-finite coordinate");
  for (double v : emb.y)
    if (!std::isfinite(v)) throw std::runtime_error("non-finite coordinate");
  return emb;
}

ScalarField make_field(const std::string& name) {
  if (name == "bump") {
    return [](double x, double y) {
      double r2 = 4.0 * (x * x + y * y);  // support radius 1/2
      if (r2 >= 1.0) return 0.0;
      return std::exp(1.0 - 1.0 / (1.0 - r2));
    };
  }
  if (name == "gaussian") {
    // truncated and shifted so it vanishes continuously at radius 1/2
    return [](double x, double y) {
      double r2 = x * x + y * y;
      if (r2 >= 0.25) return 0.0;
      double floor_val = std::exp(-0.25 * 20.0);
      return std::exp(-20.0 * r2) - floor_val;
    };
  }
  throw std::invalid_argument("unknown field (use gaussian|bump): " + name);
}

WeightedCurvatureResult weighted_curvature_sum(const MatedMap& map,
                                               const InducedCellSubmap& sub,
                                               const Embedding& emb,
                                               const OrientationAssignment& assign,
                                               const ScalarField& f) {
  WeightedCurvatureResult out;
  std::int32_t n = sub.n_vertices();

  std::vector<std::uint8_t> on_boundary(n, 0);
  for (std::int32_t v : sub.boundary_walk) on_boundary[v - sub.a] = 1;

  constexpr std::int64_t kQuant = 1LL << 30;
  VertexFunction vf(map.n);
  double sum = 0.0;
  for (std::int32_t lv = 0; lv < n; ++lv) {
    double val = f(emb.x[lv], emb.y[lv]);
    if (val == 0.0) continue;
    std::int32_t v = sub.a + lv;
    if (on_boundary[lv])
      throw std::invalid_argument("field support touches the boundary");
    for (std::int32_t s = map.rot_start[v]; s < map.rot_start[v + 1]; ++s) {
      std::int32_t u = map.rot_nbr[s];
      if (u < sub.a || u > sub.b || on_boundary[u - sub.a])
        throw std::invalid_argument(
            "field support touches a boundary-adjacent vertex");
    }
    std::int64_t q = static_cast<std::int64_t>(std::llround(val * kQuant));
    if (q == 0) continue;
    vf.set(v, Rational(q, kQuant));
    sum += static_cast<double>(q) / static_cast<double>(kQuant) *
           curvature_units(map, v);
    ++out.support_size;
  }
  out.sum = kPi / 3.0 * sum;
  out.residual = check_identity_rewritenabla(map, assign, vf);
  return out;
}

ScalingDiagnostic scaling_diagnostic(const SimConfig& config,
                                     const std::vector<double>& eps_list,
                                     const std::string& field_name, int replicas) {
  ScalingDiagnostic out;
  ScalarField f = make_field(field_name);
  for (double eps : eps_list) {
    SimConfig cfg = config;
    cfg.epsilon = eps;
    cfg.horizon = std::max(1.0, cfg.horizon);
    DiagnosticRow row;
    row.epsilon = eps;
    for (int r = 0; r < replicas; ++r) {
      CellSequence cells = sample_path(cfg, r);
      MatedMap map = build_map(cells);
      // widest centered non-tainted range with a simple boundary
      std::int32_t c = map.vertex_of_global(1);
      std::int32_t lo = c, hi = c;
      while (lo > 0 && !map.tainted[lo - 1]) --lo;
      while (hi + 1 < map.n && !map.tainted[hi + 1]) ++hi;
      if (hi - lo < 8) continue;
      bool done = false;
      for (int shrink = 0; shrink < 6 && !done; ++shrink) {
        InducedCellSubmap sub = induce_submap(map, lo, hi);
        if (sub.simple_boundary) {
          Embedding emb = tutte_embed(map, sub);
          OrientationAssignment assign = assign_orientations(map);
          WeightedCurvatureResult w =
              weighted_curvature_sum(map, sub, emb, assign, f);
          row.values.push_back(std::fabs(w.sum));
          done = true;
        } else {
          std::int32_t width = hi - lo;
          lo += std::max(1, width / 10);
          hi -= std::max(1, width / 10);
          if (hi - lo < 8) break;
        }
      }
    }
    if (row.values.empty()) continue;
    std::vector<double> sorted(row.values);
    std::sort(sorted.begin(), sorted.end());
    auto q = [&](double p) {
      double pos = p * (sorted.size() - 1);
      std::size_t i = static_cast<std::size_t>(pos);
      std::size_t j = std::min(i + 1, sorted.size() - 1);
      return sorted[i] * (1 - (pos - i)) + sorted[j] * (pos - i);
    };
    row.replicas = row.values.size();
    row.median = q(0.5);
    row.q1 = q(0.25);
    row.q3 = q(0.75);
    out.rows.push_back(std::move(row));
  }

  if (out.rows.size() >= 3) {
    std::vector<double> xs, ys;
    for (const DiagnosticRow& r : out.rows) {
      if (r.median > 0.0) {
        xs.push_back(std::log(r.epsilon));
        ys.push_back(std::log(r.median));
      }
    }
    if (xs.size() >= 3) {
      out.slope = least_squares(xs, ys).slope;
      // bootstrap over replicate medians
      RngStream boot(config.seed, 0, 0xD1A6);
      std::vector<double> slopes;
      for (int b = 0; b < 200; ++b) {
        std::vector<double> bx, by;
        for (const DiagnosticRow& r : out.rows) {
          std::vector<double> pick;
          for (std::size_t i = 0; i < r.values.size(); ++i)
            pick.push_back(r.values[boot.next_u64() % r.values.size()]);
          std::nth_element(pick.begin(), pick.begin() + pick.size() / 2,
                           pick.end());
          double med = pick[pick.size() / 2];
          if (med > 0.0) {
            bx.push_back(std::log(r.epsilon));
            by.push_back(std::log(med));
          }
        }
        if (bx.size() >= 3) slopes.push_back(least_squares(bx, by).slope);
      }
      if (!slopes.empty()) {
        std::sort(slopes.begin(), slopes.end());
        out.slope_lo = slopes[static_cast<std::size_t>(0.025 * (slopes.size() - 1))];
        out.slope_hi = slopes[static_cast<std::size_t>(0.975 * (slopes.size() - 1))];
      }
    }
  }
  return out;
}

std::string embedding_to_svg(const MatedMap& map, const InducedCellSubmap& sub,
                             const Embedding& emb) {
  const double size = 800.0, margin = 20.0;
  auto px = [&](double v) { return margin + (v + 1.0) * 0.5 * (size - 2 * margin); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size
     << "\" height=\"" << size << "\" viewBox=\"0 0 " << size << " " << size
     << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::int32_t eid : sub.internal_edges) {
    const Edge& e = map.edges[eid];
    const char* color = e.side == Side::M ? "#444444"
                        : e.side == Side::L ? "#c03030"
                                            : "#3060c0";
    os << "<line x1=\"" << px(emb.x[e.lo - sub.a]) << "\" y1=\""
       << px(emb.y[e.lo - sub.a]) << "\" x2=\"" << px(emb.x[e.hi - sub.a])
       << "\" y2=\"" << px(emb.y[e.hi - sub.a]) << "\" stroke=\"" << color
       << "\" stroke-width=\"0.6\"/>\n";
  }
  for (std::int32_t lv = 0; lv < sub.n_vertices(); ++lv)
    os << "<circle cx=\"" << px(emb.x[lv]) << "\" cy=\"" << px(emb.y[lv])
       << "\" r=\"1.2\" fill=\"black\"/>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace crtmap
