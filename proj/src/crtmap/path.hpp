#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "crtmap/rng.hpp"

namespace crtmap {

enum class InfimumMode { kSubgrid, kBridgeExact };

struct SimConfig {
  double gamma = 1.0;       // in (0,2)
  double epsilon = 1.0;     // Poisson intensity 1/epsilon
  double horizon = 10.0;    // simulate on [-horizon, horizon]
  int subgrid = 4;          // expected refinement points per cell
  std::uint64_t seed = 0;
  int replicas = 1;
  InfimumMode inf_mode = InfimumMode::kSubgrid;
  std::size_t max_cells = 20'000'000;  // memory budget guard

  double rho() const;  // -cos(pi*gamma^2/4)
  void validate() const;
};

// Two-sided discretized path summarized per Poisson cell. Cell i (0-based
// storage) spans [boundary[i], boundary[i+1]]; its global index is
// first_cell + i. Global cell 1 contains time 0, cells <= 0 lie before it.
struct CellSequence {
  double epsilon = 0.0;
  long long first_cell = 0;          // global index of stored cell 0
  std::vector<double> boundary;      // n+1 cell boundaries, increasing
  std::vector<double> end_L;         // L at boundary[i], size n+1
  std::vector<double> end_R;
  std::vector<double> inf_L;         // per-cell infima (jitter applied), size n
  std::vector<double> inf_R;
  std::uint64_t jitter_ties_L = 0;   // raw ties broken by jitter
  std::uint64_t jitter_ties_R = 0;
  double jitter_scale = 0.0;

  std::size_t n_cells() const { return inf_L.size(); }
  long long cell_of_time_zero() const { return 1; }
  // storage index of a global cell index
  std::size_t sidx(long long global) const {
    return static_cast<std::size_t>(global - first_cell);
  }
};

// Minimum of a Brownian bridge from a to b over `duration`, sampled by CDF
// inversion at the uniform variate u in (0,1].
double bridge_min_sample(double a, double b, double duration, double u);

// Deterministic two-sided sample; bit-identical across calls with the same
// (config, replica_id).
CellSequence sample_path(const SimConfig& config, int replica_id);

// One side of the correlated pair, emitted cell by cell. Forward and backward
// sides of a replica use disjoint stream ids, so either can be generated
// independently of the other and of how far it runs.
class SideCellStream {
 public:
  struct Cell {
    double gap, end_L, end_R, inf_L, inf_R;
  };

  SideCellStream(const SimConfig& config, int replica_id, bool backward);
  Cell next();
  double time() const { return t_; }

 private:
  SimConfig cfg_;
  RngStream gaps_, path_, bridge_u_, jitter_;
  double t_ = 0.0;
  double L_ = 0.0, R_ = 0.0;
  double next_grid_;
  double grid_step_;
};

// Extends `cells` in place with `extra_horizon` more simulated time on the
// requested side (direction=+1 forward, -1 backward). Drawing continues the
// same streams, so the result equals a single longer run.
class TwoSidedPathSampler {
 public:
  TwoSidedPathSampler(const SimConfig& config, int replica_id);

  // Appends complete cells until the forward boundary passes `target_time`.
  void extend_forward(double target_time);
  // Appends complete cells until the backward boundary passes -|target_time|.
  void extend_backward(double target_time);

  const CellSequence& cells() const { return cells_; }
  CellSequence take();

  double forward_time() const { return fwd_time_; }
  double backward_time() const { return bwd_time_; }
  // Running minima of the path over completed cells on each side.
  double fwd_min_L() const { return fwd_min_L_; }
  double fwd_min_R() const { return fwd_min_R_; }
  double bwd_min_L() const { return bwd_min_L_; }
  double bwd_min_R() const { return bwd_min_R_; }

  // Piece-level views for adaptive drivers. Forward piece i covers
  // (boundary[i-1], boundary[i]]; piece 0 merges with backward piece 0 into
  // the cell containing 0 at assembly.
  const std::vector<double>& fwd_boundaries() const { return fwd_boundary_; }
  const std::vector<double>& fwd_piece_inf_L() const { return fwd_inf_L_; }
  const std::vector<double>& fwd_piece_inf_R() const { return fwd_inf_R_; }
  const std::vector<double>& bwd_piece_inf_L() const { return bwd_inf_L_; }
  const std::vector<double>& bwd_piece_inf_R() const { return bwd_inf_R_; }

 private:
  SimConfig cfg_;
  SideCellStream fwd_;
  SideCellStream bwd_;
  CellSequence cells_;
  // deque-like storage: backward cells prepended via reversal on take()
  std::vector<double> bwd_boundary_, bwd_end_L_, bwd_end_R_, bwd_inf_L_, bwd_inf_R_;
  std::vector<double> fwd_boundary_, fwd_end_L_, fwd_end_R_, fwd_inf_L_, fwd_inf_R_;
  double fwd_time_ = 0.0, bwd_time_ = 0.0;
  double fwd_min_L_ = 0.0, fwd_min_R_ = 0.0, bwd_min_L_ = 0.0, bwd_min_R_ = 0.0;
  double grid_step_;
  bool taken_ = false;

  void assemble();
};

struct GapCheckReport {
  double ks_statistic = 0.0;
  double p_value = 1.0;
  bool flagged = false;
  std::size_t n = 0;
};

// KS test of the Poisson gaps against Exponential(mean = epsilon).
GapCheckReport poisson_gap_check(const CellSequence& cells);

// Columnar binary cache, magic "CRTC".
void save_cells(const CellSequence& cells, const std::string& path);
CellSequence load_cells(const std::string& path);

}  // namespace crtmap
