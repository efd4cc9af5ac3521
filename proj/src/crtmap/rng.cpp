#include "crtmap/rng.hpp"

namespace crtmap {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  return splitmix64(s);
}

namespace {

constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline std::uint64_t mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi) {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  return static_cast<std::uint64_t>(p);
}

inline void philox_round(std::uint64_t c[4], const std::uint64_t k[2]) {
  std::uint64_t hi0, hi1;
  std::uint64_t lo0 = mulhilo(kPhiloxM0, c[0], hi0);
  std::uint64_t lo1 = mulhilo(kPhiloxM1, c[2], hi1);
  std::uint64_t n0 = hi1 ^ c[1] ^ k[0];
  std::uint64_t n1 = lo1;
  std::uint64_t n2 = hi0 ^ c[3] ^ k[1];
  std::uint64_t n3 = lo0;
  c[0] = n0; c[1] = n1; c[2] = n2; c[3] = n3;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t replica, std::uint64_t stream_id)
    : counter_(0), buf_pos_(4), have_spare_(false), spare_(0.0) {
  std::uint64_t s = seed;
  std::uint64_t k0 = splitmix64(s);
  s = seed ^ (0x517CC1B727220A95ULL + replica * 0x2545F4914F6CDD1DULL);
  std::uint64_t k1 = splitmix64(s);
  key_[0] = k0 ^ hash_combine(replica, stream_id);
  key_[1] = k1 ^ hash_combine(stream_id, replica ^ 0xA5A5A5A5A5A5A5A5ULL);
}

void RngStream::refill() {
  std::uint64_t c[4] = {counter_, 0, 0x243F6A8885A308D3ULL, 0x13198A2E03707344ULL};
  std::uint64_t k[2] = {key_[0], key_[1]};
  for (int r = 0; r < 10; ++r) {
    philox_round(c, k);
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  buf_[0] = c[0]; buf_[1] = c[1]; buf_[2] = c[2]; buf_[3] = c[3];
  ++counter_;
  buf_pos_ = 0;
}

std::uint64_t RngStream::next_u64() {
  if (buf_pos_ >= 4) refill();
  return buf_[buf_pos_++];
}

double RngStream::uniform_pos() {
  // 53 random bits mapped to ((0,1]: (x+1) * 2^-53 with x in [0, 2^53).
  std::uint64_t x = next_u64() >> 11;
  return static_cast<double>(x + 1) * 0x1.0p-53;
}

double RngStream::uniform_open() {
  std::uint64_t x = next_u64() >> 11;
  return (static_cast<double>(x) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Marsaglia polar method.
  double u, v, s;
  do {
    u = 2.0 * uniform_open() - 1.0;
    v = 2.0 * uniform_open() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  have_spare_ = true;
  return u * f;
}

double RngStream::exponential(double mean) {
  return -mean * std::log(uniform_pos());
}

void RngStream::correlated_normals(double rho, double& a, double& b) {
  double z1 = normal();
  double z2 = normal();
  a = z1;
  b = rho * z1 + std::sqrt(1.0 - rho * rho) * z2;
}

}  // namespace crtmap
