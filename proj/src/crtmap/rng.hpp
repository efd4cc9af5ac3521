#pragma once

#include <cstdint>
#include <cmath>

namespace crtmap {

// Counter-based generator (Philox4x64-10). Every stream is addressed by
// (seed, replica, stream_id); draws depend only on that address and the
// within-stream counter, so replicas can run in any order, on any thread,
// and still produce identical results.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t replica, std::uint64_t stream_id);

  std::uint64_t next_u64();

  // Uniform on (0,1]; never returns 0 so -log is always finite.
  double uniform_pos();
  // Uniform on (0,1).
  double uniform_open();

  double normal();
  double exponential(double mean);

  // Pair with correlation rho, both standard normal marginals.
  void correlated_normals(double rho, double& a, double& b);

 private:
  void refill();

  std::uint64_t key_[2];
  std::uint64_t counter_;
  std::uint64_t buf_[4];
  int buf_pos_;
  bool have_spare_;
  double spare_;
};

// SplitMix64 step, used for key derivation and small hashes.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b);

}  // namespace crtmap
