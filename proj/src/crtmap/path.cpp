#include "crtmap/path.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "crtmap/stats.hpp"

namespace crtmap {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kJitterScale = 1e-13;

// stream ids per (seed, replica)
enum : std::uint64_t {
  kStreamFwdGaps = 0,
  kStreamFwdPath = 1,
  kStreamFwdBridge = 2,
  kStreamFwdJitter = 3,
  kStreamBwdGaps = 4,
  kStreamBwdPath = 5,
  kStreamBwdBridge = 6,
  kStreamBwdJitter = 7,
};
}  // namespace

double SimConfig::rho() const { return -std::cos(kPi * gamma * gamma / 4.0); }

void SimConfig::validate() const {
  if (!std::isfinite(gamma) || gamma <= 0.0 || gamma >= 2.0)
    throw std::invalid_argument("gamma must lie strictly in (0,2)");
  if (!std::isfinite(epsilon) || epsilon <= 0.0)
    throw std::invalid_argument("epsilon must be positive");
  if (!std::isfinite(horizon) || horizon < 1.0)
    throw std::invalid_argument("horizon must be >= 1");
  if (subgrid < 1) throw std::invalid_argument("subgrid must be >= 1");
  if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
  double expect_cells = 2.0 * horizon / epsilon;
  if (expect_cells > static_cast<double>(max_cells))
    throw std::invalid_argument("horizon/epsilon exceeds the cell budget");
}

double bridge_min_sample(double a, double b, double duration, double u) {
  if (!(duration > 0.0)) throw std::invalid_argument("bridge duration must be > 0");
  if (!(u > 0.0) || u > 1.0) throw std::invalid_argument("u must lie in (0,1]");
  double d = a - b;
  return 0.5 * (a + b - std::sqrt(d * d - 2.0 * duration * std::log(u)));
}

SideCellStream::SideCellStream(const SimConfig& config, int replica_id,
                               bool backward)
    : cfg_(config),
      gaps_(config.seed, replica_id, backward ? kStreamBwdGaps : kStreamFwdGaps),
      path_(config.seed, replica_id, backward ? kStreamBwdPath : kStreamFwdPath),
      bridge_u_(config.seed, replica_id,
                backward ? kStreamBwdBridge : kStreamFwdBridge),
      jitter_(config.seed, replica_id,
              backward ? kStreamBwdJitter : kStreamFwdJitter) {
  grid_step_ = cfg_.epsilon / cfg_.subgrid;
  next_grid_ = grid_step_;
}

SideCellStream::Cell SideCellStream::next() {
  const double rho = cfg_.rho();
  double gap = gaps_.exponential(cfg_.epsilon);
  double cell_end = t_ + gap;
  double min_l = L_, min_r = R_;
  double prev_l = L_, prev_r = R_;

  if (cfg_.inf_mode == InfimumMode::kSubgrid) {
    while (next_grid_ < cell_end) {
      double dt = next_grid_ - t_;
      if (dt > 0.0) {
        double z1, z2;
        path_.correlated_normals(rho, z1, z2);
        double sq = std::sqrt(dt);
        L_ += sq * z1;
        R_ += sq * z2;
        t_ = next_grid_;
        min_l = std::min(min_l, L_);
        min_r = std::min(min_r, R_);
      }
      next_grid_ += grid_step_;
    }
    double dt = cell_end - t_;
    if (dt > 0.0) {
      double z1, z2;
      path_.correlated_normals(rho, z1, z2);
      double sq = std::sqrt(dt);
      L_ += sq * z1;
      R_ += sq * z2;
    }
    t_ = cell_end;
    min_l = std::min(min_l, L_);
    min_r = std::min(min_r, R_);
  } else {
    // One increment across the cell, then marginal-exact bridge minima.
    double z1, z2;
    path_.correlated_normals(rho, z1, z2);
    double sq = std::sqrt(gap);
    L_ += sq * z1;
    R_ += sq * z2;
    t_ = cell_end;
    while (next_grid_ < cell_end) next_grid_ += grid_step_;
    min_l = bridge_min_sample(prev_l, L_, gap, bridge_u_.uniform_pos());
    min_r = bridge_min_sample(prev_r, R_, gap, bridge_u_.uniform_pos());
  }
  // Negative jitter keeps the infimum below both endpoint values while
  // breaking grid-resolution ties.
  min_l -= kJitterScale * jitter_.uniform_pos();
  min_r -= kJitterScale * jitter_.uniform_pos();
  return {gap, L_, R_, min_l, min_r};
}

TwoSidedPathSampler::TwoSidedPathSampler(const SimConfig& config, int replica_id)
    : cfg_(config),
      fwd_(config, replica_id, false),
      bwd_(config, replica_id, true) {
  cfg_.validate();
}

void TwoSidedPathSampler::extend_forward(double target_time) {
  if (taken_) throw std::logic_error("sampler already taken");
  while (fwd_time_ < target_time) {
    if (fwd_inf_L_.size() + bwd_inf_L_.size() >= cfg_.max_cells)
      throw std::runtime_error("cell budget exceeded while extending forward");
    SideCellStream::Cell c = fwd_.next();
    fwd_time_ += c.gap;
    fwd_boundary_.push_back(fwd_time_);
    fwd_end_L_.push_back(c.end_L);
    fwd_end_R_.push_back(c.end_R);
    fwd_inf_L_.push_back(c.inf_L);
    fwd_inf_R_.push_back(c.inf_R);
    fwd_min_L_ = std::min(fwd_min_L_, c.inf_L);
    fwd_min_R_ = std::min(fwd_min_R_, c.inf_R);
  }
}

void TwoSidedPathSampler::extend_backward(double target_time) {
  if (taken_) throw std::logic_error("sampler already taken");
  double target = std::fabs(target_time);
  while (bwd_time_ < target) {
    if (fwd_inf_L_.size() + bwd_inf_L_.size() >= cfg_.max_cells)
      throw std::runtime_error("cell budget exceeded while extending backward");
    SideCellStream::Cell c = bwd_.next();
    bwd_time_ += c.gap;
    bwd_boundary_.push_back(bwd_time_);
    bwd_end_L_.push_back(c.end_L);
    bwd_end_R_.push_back(c.end_R);
    bwd_inf_L_.push_back(c.inf_L);
    bwd_inf_R_.push_back(c.inf_R);
    bwd_min_L_ = std::min(bwd_min_L_, c.inf_L);
    bwd_min_R_ = std::min(bwd_min_R_, c.inf_R);
  }
}

void TwoSidedPathSampler::assemble() {
  // Backward piece 0 ([y_0, 0]) and forward piece 0 ([0, y_1]) merge into the
  // cell containing time 0 (global index 1); remaining backward pieces become
  // cells 0, -1, -2, ...
  std::size_t nf = fwd_inf_L_.size();
  std::size_t nb = bwd_inf_L_.size();
  if (nf < 1 || nb < 1)
    throw std::logic_error("assemble requires at least one cell per side");

  std::size_t n = nf + nb - 1;
  CellSequence& cs = cells_;
  cs.epsilon = cfg_.epsilon;
  cs.first_cell = 1 - static_cast<long long>(nb - 1);
  cs.boundary.resize(n + 1);
  cs.end_L.resize(n + 1);
  cs.end_R.resize(n + 1);
  cs.inf_L.resize(n);
  cs.inf_R.resize(n);

  // boundaries: -bwd_boundary reversed (excluding none), then fwd boundaries
  for (std::size_t j = 0; j < nb; ++j) {
    std::size_t pos = nb - 1 - j;
    cs.boundary[pos] = -bwd_boundary_[j];
    cs.end_L[pos] = bwd_end_L_[j];
    cs.end_R[pos] = bwd_end_R_[j];
  }
  for (std::size_t i = 0; i < nf; ++i) {
    cs.boundary[nb + i] = fwd_boundary_[i];
    cs.end_L[nb + i] = fwd_end_L_[i];
    cs.end_R[nb + i] = fwd_end_R_[i];
  }
  // cells with global index <= 0 come from backward pieces 1..nb-1
  for (std::size_t j = 1; j < nb; ++j) {
    std::size_t pos = nb - 1 - j;  // storage index of global cell 1-j
    cs.inf_L[pos] = bwd_inf_L_[j];
    cs.inf_R[pos] = bwd_inf_R_[j];
  }
  // merged cell 1 at storage nb-1
  cs.inf_L[nb - 1] = std::min(bwd_inf_L_[0], fwd_inf_L_[0]);
  cs.inf_R[nb - 1] = std::min(bwd_inf_R_[0], fwd_inf_R_[0]);
  for (std::size_t i = 1; i < nf; ++i) {
    cs.inf_L[nb - 1 + i] = fwd_inf_L_[i];
    cs.inf_R[nb - 1 + i] = fwd_inf_R_[i];
  }
  cs.jitter_scale = kJitterScale;
}

CellSequence TwoSidedPathSampler::take() {
  assemble();
  taken_ = true;
  return std::move(cells_);
}

CellSequence sample_path(const SimConfig& config, int replica_id) {
  TwoSidedPathSampler s(config, replica_id);
  s.extend_forward(config.horizon);
  s.extend_backward(config.horizon);
  return s.take();
}

GapCheckReport poisson_gap_check(const CellSequence& cells) {
  std::size_t n = cells.n_cells();
  if (n < 1000) throw std::invalid_argument("need at least 1000 cells");
  std::vector<double> gaps;
  gaps.reserve(n);
  std::size_t merged = cells.sidx(1);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == merged) continue;  // the cell containing 0 is length-biased
    gaps.push_back(cells.boundary[i + 1] - cells.boundary[i]);
  }
  double mean = cells.epsilon;
  KSResult ks = ks_one_sample(gaps, [mean](double g) {
    return g <= 0.0 ? 0.0 : 1.0 - std::exp(-g / mean);
  });
  GapCheckReport rep;
  rep.ks_statistic = ks.statistic;
  rep.p_value = ks.p_value;
  rep.flagged = ks.p_value < 1e-4;
  rep.n = gaps.size();
  return rep;
}

namespace {
void write_raw(std::ofstream& f, const void* p, std::size_t bytes) {
  f.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(bytes));
}
void read_raw(std::ifstream& f, void* p, std::size_t bytes) {
  f.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(bytes));
  if (!f) throw std::runtime_error("truncated CRTC file");
}
}  // namespace

void save_cells(const CellSequence& cells, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f.write("CRTC", 4);
  std::uint16_t version = 1;
  write_raw(f, &version, 2);
  std::uint64_t n = cells.n_cells();
  write_raw(f, &n, 8);
  write_raw(f, &cells.epsilon, 8);
  long long fc = cells.first_cell;
  write_raw(f, &fc, 8);
  write_raw(f, cells.boundary.data(), (n + 1) * 8);
  write_raw(f, cells.end_L.data(), (n + 1) * 8);
  write_raw(f, cells.end_R.data(), (n + 1) * 8);
  write_raw(f, cells.inf_L.data(), n * 8);
  write_raw(f, cells.inf_R.data(), n * 8);
}

CellSequence load_cells(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for read: " + path);
  char magic[4];
  read_raw(f, magic, 4);
  if (std::memcmp(magic, "CRTC", 4) != 0) throw std::runtime_error("bad CRTC magic");
  std::uint16_t version;
  read_raw(f, &version, 2);
  if (version != 1) throw std::runtime_error("unsupported CRTC version");
  std::uint64_t n;
  read_raw(f, &n, 8);
  CellSequence cs;
  read_raw(f, &cs.epsilon, 8);
  read_raw(f, &cs.first_cell, 8);
  cs.boundary.resize(n + 1);
  cs.end_L.resize(n + 1);
  cs.end_R.resize(n + 1);
  cs.inf_L.resize(n);
  cs.inf_R.resize(n);
  read_raw(f, cs.boundary.data(), (n + 1) * 8);
  read_raw(f, cs.end_L.data(), (n + 1) * 8);
  read_raw(f, cs.end_R.data(), (n + 1) * 8);
  read_raw(f, cs.inf_L.data(), n * 8);
  read_raw(f, cs.inf_R.data(), n * 8);
  return cs;
}

}  // namespace crtmap
