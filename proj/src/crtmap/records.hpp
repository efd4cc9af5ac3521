#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "crtmap/map.hpp"
#include "crtmap/path.hpp"
#include "crtmap/rng.hpp"
#include "crtmap/stats.hpp"

namespace crtmap {

class BandsIncompleteError : public std::runtime_error {
 public:
  BandsIncompleteError(const std::string& what, int achieved)
      : std::runtime_error(what), achieved_bands(achieved) {}
  int achieved_bands;
};

enum class BandRule {
  kCrossingCell,  // bands close at record cells reaching each integer level
  kValueBucket,   // records binned by the previous record's value bucket
};

// Record cells and level-crossing bands of one encoding motion.
struct RecordBands {
  Side side = Side::R;
  std::vector<long long> forward_records;   // global cell indices, >= 1
  std::vector<double> forward_values;       // the new running minima
  std::vector<long long> backward_records;  // global indices <= 0, toward -inf
  std::vector<double> backward_values;
  std::vector<long long> tau_plus;   // band-k crossing cells, strictly increasing
  std::vector<long long> tau_minus;  // strictly decreasing global indices
  std::vector<std::int32_t> n_plus;  // record counts per completed band
  std::vector<std::int32_t> n_minus;

  int completed_plus() const { return static_cast<int>(n_plus.size()); }
  int completed_minus() const { return static_cast<int>(n_minus.size()); }
};

RecordBands extract_records(const CellSequence& cells, Side side,
                            int min_bands = 0,
                            BandRule rule = BandRule::kCrossingCell);

// Streams the record cells of one side of a one-dimensional path without
// visiting the cells between records. Between records the path never beats
// the running minimum, so the next record cell is the one containing the
// first passage back to the minimum; by the strong Markov property and the
// memorylessness of the Poisson gaps, its remaining length is exp(epsilon)
// and its overshoot below the minimum is a Brownian-bridge minimum from the
// passage level. Exact in law for the bridge-exact infimum mode, O(1) work
// per record regardless of the waiting times.
class RecordChainSampler {
 public:
  // start_value is the path value at the boundary the stream begins from;
  // the first record is the first cell itself (the running minimum starts
  // at +infinity).
  RecordChainSampler(double epsilon, std::uint64_t seed, std::uint64_t replica,
                     std::uint64_t stream_id, double start_value = 0.0);

  // Advances to the next record cell; returns the new minimum value.
  double next_record();
  double current_min() const { return min_; }
  long long records_emitted() const { return count_; }

 private:
  RngStream rng_;
  double eps_;
  double start_;
  double min_ = 0.0;
  bool first_ = true;
  long long count_ = 0;
};

// Per-band record counts driven by a RecordChainSampler (crossing-cell rule).
class BandCounter {
 public:
  explicit BandCounter(RecordChainSampler sampler) : chain_(std::move(sampler)) {}
  // Count of record cells in the next completed band.
  int next_band();
  RecordChainSampler& chain() { return chain_; }

 private:
  RecordChainSampler chain_;
  int next_level_ = 1;
  int pending_ = 0;
};

struct IidDiagnostics {
  std::vector<double> autocorr;  // lags 1..5
  double se = 0.0;               // 1/sqrt(n)
  KSResult halves;
  bool ok = true;  // all |lag| < 3 se and halves p > 0.01
};
IidDiagnostics iid_diagnostics(const std::vector<std::int32_t>& n_bands);

struct AlphaEstimate {
  double alpha = 0.0;
  double sigma2 = 0.0;
  double alpha_lo = 0.0, alpha_hi = 0.0;  // bootstrap 95% CI
  double tail_c = 0.0;                    // log P(N>n) ~ -c sqrt(n)
  double tail_r2 = 0.0;
  bool heavy_tail_flag = false;
  std::size_t n = 0;
};
// diffs holds N+_k - N-_k samples; n_samples the raw N+ counts for the tail
// diagnostic.
AlphaEstimate estimate_alpha(const std::vector<std::int32_t>& diffs,
                             const std::vector<std::int32_t>& n_samples,
                             std::uint64_t seed);

struct XtReport {
  long long x_t = 0;          // boundary curvature in pi/3 units
  long long partial_sum = 0;  // sum of N+ - N- up to the crossing
  long long gap = 0;
  long long bound = 0;        // deg(crossing cell) + 2
  long long crossing_cell = 0;
  std::int32_t crossing_degree = 0;
  bool degree_complete = true;
  bool ok = true;
};

// Map-based exact evaluation on a materialized window (testing oracle).
XtReport xt_process(const MatedMap& map, const CellSequence& cells, int t);

// Streaming evaluation of the same identity at epsilon from fresh paths;
// memory stays O(records) regardless of the hitting-time tail.
XtReport xt_process_streaming(const SimConfig& config, int replica_id, int t);

struct CLTReport {
  int n_bands = 0;
  int replicas = 0;
  double sigma2 = 0.0;
  double sigma2_lo = 0.0, sigma2_hi = 0.0;
  double alpha = 0.0;
  double alpha_lo = 0.0, alpha_hi = 0.0;
  KSResult ks;                   // S_n/sqrt(n) against Normal(0, sigma2)
  std::vector<double> s_scaled;  // per replica S_n/sqrt(n)
  bool pass = false;             // ks p > 0.01
};
CLTReport clt_experiment(const SimConfig& config, int n_bands, int replicas);

struct ScalingPoint {
  double epsilon = 0.0;
  std::size_t replicas = 0;
  double mean = 0.0;
  double mean_se = 0.0;
  double variance = 0.0;
  double mixture_ks_p = 1.0;  // exploratory oracle comparison
  std::vector<double> stats;  // eps^{1/4} (pi/3) sum kappa per replica
  std::vector<double> lhat;   // boundary-length oracle per replica
};

struct ScalingReport {
  std::vector<ScalingPoint> points;
  std::vector<double> variance_ratios;  // Var(eps_i) / Var(eps_{i+1})
  bool mean_ok = true;                  // every mean within 3 SE of 0
  bool ratio_ok = true;                 // ratios within [0.8, 1.25]
};

ScalingReport cell_scaling_experiment(const SimConfig& config,
                                      const std::vector<double>& eps_list,
                                      int replicas, double alpha_hat);

// Degree of the cell containing time 0 over independent replicas; used by the
// law-invariance check with matched vertex counts.
std::vector<double> central_degree_samples(const SimConfig& base, double epsilon,
                                           std::size_t n_cells_target,
                                           int replicas);

struct DegreeTailReport {
  double threshold = 0.0;       // (log eps^-1)^3
  double frac_above = 0.0;
  double fit_slope = 0.0;       // log survival vs sqrt(n)
  double fit_r2 = 0.0;
  std::size_t n_vertices = 0;
  std::vector<std::int64_t> histogram;  // degree counts
};
DegreeTailReport degree_tail_report(const MatedMap& map, double epsilon);

}  // namespace crtmap
