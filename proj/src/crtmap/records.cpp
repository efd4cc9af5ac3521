#include "crtmap/records.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crtmap {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

// stream ids for record-chain and experiment draws
enum : std::uint64_t {
  kStreamChainPlus = 16,
  kStreamChainMinus = 17,
  kStreamMixtureZ = 18,
};

struct SideScan {
  std::vector<long long> records;
  std::vector<double> values;
  std::vector<long long> tau;
  std::vector<std::int32_t> n_bands;
  double run_min = kInf;
  int next_level = 1;
  std::int32_t pending = 0;

  // One cell of the walk; index is the global cell index.
  void feed(long long index, double inf) {
    if (inf < run_min) {
      run_min = inf;
      records.push_back(index);
      values.push_back(inf);
      ++pending;
      if (inf <= -static_cast<double>(next_level)) {
        tau.push_back(index);
        n_bands.push_back(pending);
        pending = 0;
        ++next_level;
      }
    }
  }

  void rebin_by_value() {
    // records binned by the previous record's value bucket; bucket k covers
    // (-k, -(k-1)]
    int complete = static_cast<int>(std::floor(-run_min));
    n_bands.assign(std::max(complete, 0), 0);
    double prev = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      int bucket = static_cast<int>(std::floor(-prev)) + 1;
      if (bucket <= complete) ++n_bands[bucket - 1];
      prev = values[i];
    }
  }
};

}  // namespace

RecordBands extract_records(const CellSequence& cells, Side side, int min_bands,
                            BandRule rule) {
  if (side == Side::M) throw std::invalid_argument("side must be L or R");
  const std::vector<double>& inf = side == Side::L ? cells.inf_L : cells.inf_R;
  long long lo = cells.first_cell;
  long long hi = cells.first_cell + static_cast<long long>(cells.n_cells()) - 1;
  if (lo > 0 || hi < 1)
    throw std::invalid_argument("window does not straddle time zero");

  SideScan fwd, bwd;
  for (long long j = 1; j <= hi; ++j) fwd.feed(j, inf[cells.sidx(j)]);
  for (long long j = 0; j >= lo; --j) bwd.feed(j, inf[cells.sidx(j)]);
  if (rule == BandRule::kValueBucket) {
    fwd.rebin_by_value();
    bwd.rebin_by_value();
  }

  RecordBands rb;
  rb.side = side;
  rb.forward_records = std::move(fwd.records);
  rb.forward_values = std::move(fwd.values);
  rb.backward_records = std::move(bwd.records);
  rb.backward_values = std::move(bwd.values);
  rb.tau_plus = std::move(fwd.tau);
  rb.tau_minus = std::move(bwd.tau);
  rb.n_plus = std::move(fwd.n_bands);
  rb.n_minus = std::move(bwd.n_bands);
  int achieved = std::min(rb.completed_plus(), rb.completed_minus());
  if (achieved < min_bands)
    throw BandsIncompleteError(
        "bands incomplete: achieved " + std::to_string(achieved) + " of " +
            std::to_string(min_bands),
        achieved);
  return rb;
}

RecordChainSampler::RecordChainSampler(double epsilon, std::uint64_t seed,
                                       std::uint64_t replica,
                                       std::uint64_t stream_id, double start_value)
    : rng_(seed, replica, stream_id), eps_(epsilon), start_(start_value) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
}

double RecordChainSampler::next_record() {
  double rem = rng_.exponential(eps_);
  double end = std::sqrt(rem) * rng_.normal();
  if (first_) {
    // the first cell of the stream, entered at start_value
    min_ = bridge_min_sample(start_, start_ + end, rem, rng_.uniform_pos());
    first_ = false;
  } else {
    // record cell entered at the passage level: the dip below the running
    // minimum is an iid bridge minimum
    min_ += bridge_min_sample(0.0, end, rem, rng_.uniform_pos());
  }
  ++count_;
  return min_;
}

int BandCounter::next_band() {
  while (true) {
    double m = chain_.next_record();
    ++pending_;
    if (m <= -static_cast<double>(next_level_)) {
      int out = pending_;
      pending_ = 0;
      ++next_level_;
      return out;
    }
  }
}

IidDiagnostics iid_diagnostics(const std::vector<std::int32_t>& n_bands) {
  if (n_bands.size() < 1000)
    throw std::invalid_argument("need at least 1000 bands");
  IidDiagnostics d;
  std::vector<double> v(n_bands.begin(), n_bands.end());
  d.se = 1.0 / std::sqrt(static_cast<double>(v.size()));
  for (int lag = 1; lag <= 5; ++lag) d.autocorr.push_back(autocorrelation(v, lag));
  std::vector<double> first(v.begin(), v.begin() + v.size() / 2);
  std::vector<double> second(v.begin() + v.size() / 2, v.end());
  d.halves = ks_two_sample(first, second);
  d.ok = d.halves.p_value > 0.01;
  for (double a : d.autocorr)
    if (std::fabs(a) >= 3.0 * d.se) d.ok = false;
  return d;
}

AlphaEstimate estimate_alpha(const std::vector<std::int32_t>& diffs,
                             const std::vector<std::int32_t>& n_samples,
                             std::uint64_t seed) {
  if (diffs.size() < 100) throw std::invalid_argument("too few band pairs");
  AlphaEstimate est;
  est.n = diffs.size();
  std::vector<double> d(diffs.begin(), diffs.end());
  VarCI v = var_ci(d, 200, seed);
  est.sigma2 = v.variance;
  est.alpha = kPi / 3.0 * std::sqrt(v.variance);
  est.alpha_lo = kPi / 3.0 * std::sqrt(std::max(0.0, v.lo));
  est.alpha_hi = kPi / 3.0 * std::sqrt(v.hi);

  // tail diagnostic: log P(N > n) against sqrt(n)
  if (!n_samples.empty()) {
    std::int32_t maxn = *std::max_element(n_samples.begin(), n_samples.end());
    std::vector<std::int64_t> count(maxn + 1, 0);
    for (std::int32_t x : n_samples) ++count[x];
    std::vector<double> xs, ys;
    double total = static_cast<double>(n_samples.size());
    std::int64_t above = static_cast<std::int64_t>(n_samples.size());
    for (std::int32_t n = 0; n <= maxn; ++n) {
      above -= count[n];
      if (above >= 5 && n >= 1) {
        xs.push_back(std::sqrt(static_cast<double>(n)));
        ys.push_back(std::log(above / total));
      }
    }
    if (xs.size() >= 3) {
      LinFit f = least_squares(xs, ys);
      est.tail_c = -f.slope;
      est.tail_r2 = f.r2;
    }
    double ss = 0.0, mx = 0.0, mean = 0.0;
    for (std::int32_t x : diffs) mean += x;
    mean /= diffs.size();
    for (std::int32_t x : diffs) {
      double dev = (x - mean) * (x - mean);
      ss += dev;
      mx = std::max(mx, dev);
    }
    est.heavy_tail_flag = ss > 0.0 && mx > 0.5 * ss;
  }
  return est;
}

// ---------------------------------------------------------------------------
// crossing identity
// ---------------------------------------------------------------------------

namespace {

// Number of right-tree adjacencies between a forward record (value f, previous
// record value f_prev) and the backward records bv[0] > bv[1] > ...; the pair
// (s, r) is adjacent iff bv[s] < f_prev and f < bv[s-1] (sentinels +inf). A
// span-1 pair is the M edge between cells 0 and 1.
struct CrossCounter {
  const std::vector<double>& bv;
  std::size_t s_lo = 0;  // first s with bv[s] < f_prev
  std::size_t count_for(double f, double f_prev) {
    while (s_lo < bv.size() && bv[s_lo] >= f_prev) ++s_lo;
    std::size_t s = s_lo;
    std::size_t c = 0;
    while (s < bv.size()) {
      double prev = s == 0 ? kInf : bv[s - 1];
      if (!(f < prev)) break;
      ++c;
      ++s;
    }
    return c;
  }
};

}  // namespace

XtReport xt_process(const MatedMap& map, const CellSequence& cells, int t) {
  if (map.n != static_cast<std::int32_t>(cells.n_cells()) ||
      map.first_cell != cells.first_cell)
    throw std::invalid_argument("band/map mismatch");
  XtReport rep;
  if (t == 0) return rep;
  if (t < 0) throw std::invalid_argument("t must be >= 0");

  RecordBands rb = extract_records(cells, Side::R);
  // first-crossing truncation on both sides
  std::size_t F = 0;
  while (F < rb.forward_values.size() && rb.forward_values[F] > -double(t)) ++F;
  if (F == rb.forward_values.size())
    throw BandsIncompleteError("forward bands incomplete", rb.completed_plus());
  double m_plus = rb.forward_values[F];
  std::size_t B = 0;
  while (B < rb.backward_values.size() && rb.backward_values[B] > -double(t)) ++B;
  if (B == rb.backward_values.size())
    throw BandsIncompleteError("backward bands incomplete", rb.completed_minus());
  // all cross partners of the window records must be inside the window
  if (rb.backward_values.back() >= m_plus)
    throw std::invalid_argument("backward window too short for cross edges");

  long long x = 0;
  for (std::size_t r = 0; r <= F; ++r) {
    std::int32_t v = map.vertex_of_global(rb.forward_records[r]);
    std::int32_t ext = 0;
    for (std::int32_t s = map.rot_start[v]; s < map.rot_start[v + 1]; ++s) {
      if (map.global_index(map.rot_nbr[s]) <= 0 &&
          map.edges[map.rot_edge[s]].side != Side::L)
        ++ext;
    }
    x += 2 - ext;
  }
  rep.x_t = x;
  rep.partial_sum = static_cast<long long>(F + 1) - static_cast<long long>(B + 1);
  rep.crossing_cell = rb.forward_records[F];
  std::int32_t vbar = map.vertex_of_global(rep.crossing_cell);
  rep.crossing_degree = map.degree[vbar];
  rep.degree_complete = !map.tainted[vbar];
  rep.bound = rep.crossing_degree + 2;
  rep.gap = std::llabs(rep.x_t - rep.partial_sum);
  rep.ok = rep.gap <= rep.bound;
  return rep;
}

XtReport xt_process_streaming(const SimConfig& config, int replica_id, int t) {
  XtReport rep;
  if (t == 0) return rep;
  if (t < 0) throw std::invalid_argument("t must be >= 0");
  config.validate();

  // Backward side first: one piece belongs to the merged cell 1, then cells
  // 0, -1, ... Record values per tree collected until the mins pass the
  // levels discovered on the forward side.
  SideCellStream bwd(config, replica_id, true);
  SideCellStream::Cell b0 = bwd.next();
  std::vector<double> bvR, bvL;  // backward record values per tree
  double bminR = kInf, bminL = kInf;
  auto bwd_feed = [&]() {
    SideCellStream::Cell c = bwd.next();
    if (c.inf_R < bminR) {
      bminR = c.inf_R;
      bvR.push_back(c.inf_R);
    }
    if (c.inf_L < bminL) {
      bminL = c.inf_L;
      bvL.push_back(c.inf_L);
    }
  };
  for (int i = 0; i < 4 || bminR > -double(t) - 1.0; ++i) bwd_feed();

  // Forward sweep with monotone stacks on both trees; cell 1 merges the
  // backward piece.
  SideCellStream fwd(config, replica_id, false);
  struct StackEntry {
    long long idx;
    double val;
  };
  std::vector<StackEntry> stL, stR;
  std::vector<double> fvR;          // forward R record values
  std::vector<long long> fidxR;     // their cell indices
  double fminR = kInf, fminL = kInf;
  long long vbar = -1;
  double m_plus = 0.0, f_prev = kInf;
  double infL_vbar = 0.0, fwdLmin_before = kInf;
  long long vbar_long_edges = 0;  // span>=2 window edges incident to vbar
  bool vbar_in_L = false, vbar_in_R = false;
  long long margin_left = -1;

  auto sweep = [&](std::vector<StackEntry>& st, long long k, double x,
                   bool count_for_vbar) {
    while (!st.empty() && st.back().val > x) {
      StackEntry m = st.back();
      st.pop_back();
      if (count_for_vbar && (m.idx == vbar || k == vbar) && k - m.idx >= 2)
        ++vbar_long_edges;
      if (m.idx == vbar) {
        if (&st == &stL)
          vbar_in_L = false;
        else
          vbar_in_R = false;
      }
    }
    if (!st.empty()) {
      StackEntry j = st.back();
      if (count_for_vbar && (j.idx == vbar || k == vbar) && k - j.idx >= 2)
        ++vbar_long_edges;
    }
    st.push_back({k, x});
  };

  long long k = 0;
  while (true) {
    ++k;
    double infL, infR;
    if (k == 1) {
      SideCellStream::Cell c = fwd.next();
      infL = std::min(c.inf_L, b0.inf_L);
      infR = std::min(c.inf_R, b0.inf_R);
    } else {
      SideCellStream::Cell c = fwd.next();
      infL = c.inf_L;
      infR = c.inf_R;
    }

    if (vbar < 0 && infR < fminR && infR <= -double(t)) {
      // band t closes here (first crossing)
      vbar = k;
      f_prev = fminR;
      m_plus = infR;
      infL_vbar = infL;
      fwdLmin_before = fminL;
      vbar_in_L = true;  // becomes true when pushed below
      vbar_in_R = true;
      margin_left = 20000;
    }
    if (infR < fminR) {
      fminR = infR;
      if (vbar < 0 || k == vbar) {
        fvR.push_back(infR);
        fidxR.push_back(k);
      }
    }
    fminL = std::min(fminL, infL);

    bool counting = vbar >= 0;
    sweep(stL, k, infL, counting);
    sweep(stR, k, infR, counting);

    if (vbar >= 0) {
      if (k > vbar) --margin_left;
      bool done = (!vbar_in_L && !vbar_in_R) || margin_left <= 0;
      if (done) break;
    }
    if (k > static_cast<long long>(config.max_cells))
      throw std::runtime_error("cell budget exceeded in streaming sweep");
  }
  rep.degree_complete = !vbar_in_L && !vbar_in_R;

  // extend the backward side until every cross partner is visible
  while (bminR >= m_plus || bminL >= std::min(infL_vbar, fwdLmin_before))
    bwd_feed();

  // backward first-crossing count
  std::size_t B = 0;
  while (B < bvR.size() && bvR[B] > -double(t)) ++B;
  // bminR < m_plus <= -t so the crossing exists
  long long b_count = static_cast<long long>(B + 1);

  // X_t and the crossing cell's past-R adjacency count
  CrossCounter crossR{bvR};
  long long x = 0;
  long long vbar_cross_R = 0;
  double fp = kInf;
  for (std::size_t r = 0; r < fvR.size(); ++r) {
    std::size_t c = crossR.count_for(fvR[r], fp);
    x += 2 - static_cast<long long>(c);
    if (fidxR[r] == vbar) vbar_cross_R = static_cast<long long>(c);
    fp = fvR[r];
  }
  rep.x_t = x;
  rep.partial_sum = static_cast<long long>(fvR.size()) - b_count;
  rep.crossing_cell = vbar;

  // crossing cell degree: M edges + window long edges + cross adjacencies
  long long vbar_cross_L = 0;
  if (infL_vbar < fwdLmin_before) {
    for (std::size_t s = 0; s < bvL.size(); ++s) {
      double prev = s == 0 ? kInf : bvL[s - 1];
      if (bvL[s] < fwdLmin_before && infL_vbar < prev)
        ++vbar_cross_L;
      if (prev <= infL_vbar) break;
    }
    if (vbar == 1 && vbar_cross_L > 0) --vbar_cross_L;  // M edge counted in R
  }
  long long deg = (vbar > 1 ? 2 : 1) + vbar_long_edges + vbar_cross_R + vbar_cross_L;
  rep.crossing_degree = static_cast<std::int32_t>(deg);
  rep.bound = deg + 2;
  rep.gap = std::llabs(rep.x_t - rep.partial_sum);
  rep.ok = rep.gap <= rep.bound;
  return rep;
}

// ---------------------------------------------------------------------------
// experiments
// ---------------------------------------------------------------------------

CLTReport clt_experiment(const SimConfig& config, int n_bands, int replicas) {
  if (n_bands < 1 || replicas < 8)
    throw std::invalid_argument("need n_bands >= 1 and replicas >= 8");
  CLTReport rep;
  rep.n_bands = n_bands;
  rep.replicas = replicas;

  std::vector<double> rep_sum(replicas), rep_sumsq(replicas);
  double pool_sum = 0.0, pool_sumsq = 0.0;
  rep.s_scaled.resize(replicas);
  for (int r = 0; r < replicas; ++r) {
    BandCounter plus(RecordChainSampler(config.epsilon, config.seed, r,
                                        kStreamChainPlus));
    BandCounter minus(RecordChainSampler(config.epsilon, config.seed, r,
                                         kStreamChainMinus));
    long long s = 0;
    double su = 0.0, sq = 0.0;
    for (int kb = 0; kb < n_bands; ++kb) {
      int d = plus.next_band() - minus.next_band();
      s += d;
      su += d;
      sq += static_cast<double>(d) * d;
    }
    rep_sum[r] = su;
    rep_sumsq[r] = sq;
    pool_sum += su;
    pool_sumsq += sq;
    rep.s_scaled[r] = static_cast<double>(s) / std::sqrt(double(n_bands));
  }

  double n_total = static_cast<double>(n_bands) * replicas;
  rep.sigma2 = (pool_sumsq - pool_sum * pool_sum / n_total) / (n_total - 1);
  rep.alpha = kPi / 3.0 * std::sqrt(std::max(0.0, rep.sigma2));

  // bootstrap over replicas (clustered resampling)
  {
    RngStream boot(config.seed, 0, 0xB007C17);
    std::vector<double> sig(400);
    for (std::size_t b = 0; b < sig.size(); ++b) {
      double bs = 0.0, bq = 0.0;
      for (int r = 0; r < replicas; ++r) {
        std::size_t pick = boot.next_u64() % replicas;
        bs += rep_sum[pick];
        bq += rep_sumsq[pick];
      }
      sig[b] = (bq - bs * bs / n_total) / (n_total - 1);
    }
    std::sort(sig.begin(), sig.end());
    rep.sigma2_lo = sig[static_cast<std::size_t>(0.025 * (sig.size() - 1))];
    rep.sigma2_hi = sig[static_cast<std::size_t>(0.975 * (sig.size() - 1))];
    rep.alpha_lo = kPi / 3.0 * std::sqrt(std::max(0.0, rep.sigma2_lo));
    rep.alpha_hi = kPi / 3.0 * std::sqrt(std::max(0.0, rep.sigma2_hi));
  }

  double sigma = std::sqrt(std::max(rep.sigma2, 1e-300));
  rep.ks = ks_one_sample(rep.s_scaled,
                         [sigma](double v) { return normal_cdf(v / sigma); });
  rep.pass = rep.ks.p_value > 0.01;
  return rep;
}

namespace {

enum : std::uint64_t {
  kStreamExtFwdL = 24,
  kStreamExtFwdR = 25,
  kStreamExtBwdL = 26,
  kStreamExtBwdR = 27,
};

// Edges gained by window cells from the unsimulated region beyond one end of
// the materialized path. Only cells on the visibility staircase toward that
// end can gain edges, and only cells achieving new running minima of the
// continuation touch the staircase, so the continuation is driven by a
// RecordChainSampler: each of its records pops the staircase entries above
// its value and lands one edge on the first entry below. The staircase is
// ordered with values increasing toward the back.
void extend_with_chain(std::vector<std::pair<std::int32_t, double>> staircase,
                       std::int32_t w_lo, std::int32_t w_hi,
                       RecordChainSampler chain,
                       std::vector<std::int32_t>& extra_deg) {
  auto in_window = [&](std::int32_t v) { return v >= w_lo && v <= w_hi; };
  std::size_t window_left = 0;
  for (const auto& [v, val] : staircase)
    if (in_window(v)) ++window_left;
  while (window_left > 0) {
    double m = chain.next_record();
    while (!staircase.empty() && staircase.back().second > m) {
      auto [v, val] = staircase.back();
      staircase.pop_back();
      if (in_window(v)) {
        ++extra_deg[v];
        --window_left;
      }
    }
    if (!staircase.empty()) {
      std::int32_t v = staircase.back().first;
      if (in_window(v)) ++extra_deg[v];
    }
  }
}

}  // namespace

ScalingReport cell_scaling_experiment(const SimConfig& config,
                                      const std::vector<double>& eps_list,
                                      int replicas, double alpha_hat) {
  ScalingReport out;
  if (eps_list.empty()) return out;

  for (double eps : eps_list) {
    SimConfig cfg = config;
    cfg.epsilon = eps;
    cfg.horizon = std::max(2.0, cfg.horizon);
    ScalingPoint pt;
    pt.epsilon = eps;

    RngStream zstream(config.seed, 0, kStreamMixtureZ);
    std::vector<double> mixture;
    for (int r = 0; r < replicas; ++r) {
      TwoSidedPathSampler sampler(cfg, r);
      sampler.extend_backward(4.0 * eps);
      sampler.extend_forward(1.0 + 4.0 * eps);
      while (sampler.bwd_piece_inf_L().size() < 2)
        sampler.extend_backward(sampler.backward_time() + eps);

      // cells meeting [0,1]: global 1 .. 1+jstar
      std::size_t jstar = 0;
      {
        const std::vector<double>& fb = sampler.fwd_boundaries();
        while (jstar < fb.size() && fb[jstar] < 1.0) ++jstar;
        if (jstar >= fb.size())
          throw std::runtime_error("incomplete window: does not reach time 1");
      }
      while (sampler.fwd_boundaries().size() < jstar + 2)
        sampler.extend_forward(sampler.forward_time() + eps);

      CellSequence cells = sampler.take();
      MatedMap map = build_map(cells);
      std::int32_t w_lo = map.vertex_of_global(1);
      std::int32_t w_hi = map.vertex_of_global(1 + static_cast<long long>(jstar));

      // degrees inside the materialized region, then the continuation edges
      std::vector<std::int32_t> extra(map.n, 0);
      for (int side = 0; side < 2; ++side) {
        const std::vector<double>& x = side == 0 ? cells.inf_L : cells.inf_R;
        // forward staircase: suffix minima, bottom = lowest value
        std::vector<std::pair<std::int32_t, double>> stair;
        double run = kInf;
        for (std::int32_t v = map.n; v-- > 0;) {
          if (x[v] < run) {
            run = x[v];
            stair.push_back({v, x[v]});
          }
        }
        std::reverse(stair.begin(), stair.end());
        extend_with_chain(
            stair, w_lo, w_hi,
            RecordChainSampler(eps, cfg.seed, r,
                               side == 0 ? kStreamExtFwdL : kStreamExtFwdR,
                               side == 0 ? cells.end_L.back() : cells.end_R.back()),
            extra);
        // backward staircase: prefix minima, popped from the window's far side
        std::vector<std::pair<std::int32_t, double>> stair_b;
        run = kInf;
        for (std::int32_t v = 0; v < map.n; ++v) {
          if (x[v] < run) {
            run = x[v];
            stair_b.push_back({v, x[v]});
          }
        }
        std::reverse(stair_b.begin(), stair_b.end());
        extend_with_chain(
            stair_b, w_lo, w_hi,
            RecordChainSampler(eps, cfg.seed, r,
                               side == 0 ? kStreamExtBwdL : kStreamExtBwdR,
                               side == 0 ? cells.end_L.front() : cells.end_R.front()),
            extra);
      }

      long long kappa = 0;
      for (std::int32_t v = w_lo; v <= w_hi; ++v)
        kappa += 6 - (map.degree[v] + extra[v]);
      double stat = std::pow(eps, 0.25) * (kPi / 3.0) * static_cast<double>(kappa);
      pt.stats.push_back(stat);

      // boundary-length oracle on [0,1]
      std::size_t i1 = cells.sidx(1) + jstar;  // storage cell containing 1
      double L1 = cells.end_L[i1], R1 = cells.end_R[i1];
      double iL = kInf, iR = kInf;
      for (std::int32_t v = w_lo; v <= w_hi; ++v) {
        iL = std::min(iL, cells.inf_L[v]);
        iR = std::min(iR, cells.inf_R[v]);
      }
      double lhat = (L1 - 2.0 * iL) + (R1 - 2.0 * iR);
      pt.lhat.push_back(lhat);
      mixture.push_back(alpha_hat * std::sqrt(std::max(0.0, lhat)) *
                        zstream.normal());
    }

    pt.replicas = pt.stats.size();
    MeanSE m = mean_se(pt.stats);
    pt.mean = m.mean;
    pt.mean_se = m.se;
    pt.variance = sample_variance(pt.stats);
    pt.mixture_ks_p = ks_two_sample(pt.stats, mixture).p_value;
    out.points.push_back(std::move(pt));
  }

  for (std::size_t i = 0; i + 1 < out.points.size(); ++i) {
    double ratio = out.points[i].variance / out.points[i + 1].variance;
    out.variance_ratios.push_back(ratio);
    if (!(ratio >= 0.8 && ratio <= 1.25)) out.ratio_ok = false;
  }
  for (const ScalingPoint& p : out.points)
    if (std::fabs(p.mean) > 3.0 * p.mean_se) out.mean_ok = false;
  return out;
}

std::vector<double> central_degree_samples(const SimConfig& base, double epsilon,
                                           std::size_t n_cells_target,
                                           int replicas) {
  SimConfig cfg = base;
  cfg.epsilon = epsilon;
  cfg.horizon = std::max(1.0, 0.5 * static_cast<double>(n_cells_target) * epsilon);
  std::vector<double> out;
  out.reserve(replicas);
  for (int r = 0; r < replicas; ++r) {
    CellSequence cells = sample_path(cfg, r);
    MatedMap map = build_map(cells);
    std::int32_t v = map.vertex_of_global(1);
    // walk to the nearest non-tainted vertex, preferring the window center
    std::int32_t best = -1;
    for (std::int32_t d = 0; d < map.n; ++d) {
      if (v + d < map.n && !map.tainted[v + d]) {
        best = v + d;
        break;
      }
      if (v - d >= 0 && !map.tainted[v - d]) {
        best = v - d;
        break;
      }
    }
    if (best < 0) throw std::runtime_error("window fully tainted");
    out.push_back(static_cast<double>(map.degree[best]));
  }
  return out;
}

DegreeTailReport degree_tail_report(const MatedMap& map, double epsilon) {
  DegreeTailReport rep;
  double lg = std::log(1.0 / epsilon);
  rep.threshold = lg * lg * lg;
  std::int32_t maxdeg = 0;
  for (std::int32_t v = 0; v < map.n; ++v)
    if (!map.tainted[v]) maxdeg = std::max(maxdeg, map.degree[v]);
  rep.histogram.assign(maxdeg + 1, 0);
  std::size_t n = 0, above = 0;
  for (std::int32_t v = 0; v < map.n; ++v) {
    if (map.tainted[v]) continue;
    ++rep.histogram[map.degree[v]];
    ++n;
    if (static_cast<double>(map.degree[v]) > rep.threshold) ++above;
  }
  rep.n_vertices = n;
  rep.frac_above = n ? static_cast<double>(above) / n : 0.0;

  std::vector<double> xs, ys;
  std::int64_t tail = static_cast<std::int64_t>(n);
  for (std::int32_t d = 0; d <= maxdeg; ++d) {
    tail -= rep.histogram[d];
    if (d >= 1 && tail >= 5) {
      xs.push_back(std::sqrt(static_cast<double>(d)));
      ys.push_back(std::log(static_cast<double>(tail) / n));
    }
  }
  if (xs.size() >= 3) {
    LinFit f = least_squares(xs, ys);
    rep.fit_slope = f.slope;
    rep.fit_r2 = f.r2;
  }
  return rep;
}

}  // namespace crtmap
