#include "crtmap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crtmap/rng.hpp"

namespace crtmap {

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 101; ++j) {
    double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-16) break;
  }
  double q = 2.0 * sum;
  if (q < 0.0) q = 0.0;
  if (q > 1.0) q = 1.0;
  return q;
}

namespace {
double ks_pvalue(double d, double n_eff) {
  double sq = std::sqrt(n_eff);
  return kolmogorov_q((sq + 0.12 + 0.11 / sq) * d);
}
}  // namespace

KSResult ks_one_sample(std::vector<double> samples,
                       const std::function<double(double)>& cdf) {
  std::size_t n = samples.size();
  if (n < 8) throw std::invalid_argument("ks_one_sample needs n >= 8");
  for (double v : samples)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite sample");
  std::sort(samples.begin(), samples.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double f = cdf(samples[i]);
    double hi = (static_cast<double>(i) + 1.0) / n - f;
    double lo = f - static_cast<double>(i) / n;
    d = std::max(d, std::max(hi, lo));
  }
  KSResult r;
  r.statistic = d;
  r.p_value = ks_pvalue(d, static_cast<double>(n));
  r.n1 = n;
  return r;
}

KSResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::size_t n1 = a.size(), n2 = b.size();
  if (n1 < 8 || n2 < 8) throw std::invalid_argument("ks_two_sample needs n >= 8");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < n1 && j < n2) {
    double x = std::min(a[i], b[j]);
    while (i < n1 && a[i] <= x) ++i;
    while (j < n2 && b[j] <= x) ++j;
    double fa = static_cast<double>(i) / n1;
    double fb = static_cast<double>(j) / n2;
    d = std::max(d, std::fabs(fa - fb));
  }
  KSResult r;
  r.statistic = d;
  double n_eff = static_cast<double>(n1) * n2 / (static_cast<double>(n1) + n2);
  r.p_value = ks_pvalue(d, n_eff);
  r.n1 = n1;
  r.n2 = n2;
  return r;
}

double sample_variance(const std::vector<double>& v) {
  std::size_t n = v.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / (n - 1);
}

MeanSE mean_se(const std::vector<double>& v) {
  MeanSE m;
  if (v.empty()) return m;
  double sum = 0.0;
  for (double x : v) sum += x;
  m.mean = sum / v.size();
  if (v.size() > 1) m.se = std::sqrt(sample_variance(v) / v.size());
  return m;
}

VarCI var_ci(const std::vector<double>& samples, int bootstrap_rounds,
             std::uint64_t seed) {
  if (samples.size() < 30) throw std::invalid_argument("var_ci needs n >= 30");
  VarCI out;
  out.variance = sample_variance(samples);
  std::vector<double> boots(bootstrap_rounds);
  RngStream rng(seed, 0, 0xB007);
  std::vector<double> resample(samples.size());
  for (int r = 0; r < bootstrap_rounds; ++r) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      std::size_t k = static_cast<std::size_t>(rng.next_u64() % samples.size());
      resample[i] = samples[k];
    }
    boots[r] = sample_variance(resample);
  }
  std::sort(boots.begin(), boots.end());
  auto pick = [&](double q) {
    double pos = q * (boots.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, boots.size() - 1);
    double frac = pos - lo;
    return boots[lo] * (1 - frac) + boots[hi] * frac;
  };
  out.lo = pick(0.025);
  out.hi = pick(0.975);
  return out;
}

double autocorrelation(const std::vector<double>& v, int lag) {
  std::size_t n = v.size();
  if (lag <= 0 || static_cast<std::size_t>(lag) >= n)
    throw std::invalid_argument("bad lag");
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double denom = 0.0;
  for (double x : v) denom += (x - mean) * (x - mean);
  if (denom == 0.0) return 0.0;
  double num = 0.0;
  for (std::size_t i = 0; i + lag < n; ++i)
    num += (v[i] - mean) * (v[i + lag] - mean);
  return num / denom;
}

LinFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw std::invalid_argument("least_squares needs matched n >= 3");
  std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  double den = n * sxx - sx * sx;
  LinFit f;
  if (den == 0.0) return f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_tot = syy - sy * sy / n;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += e * e;
  }
  f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {
// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain");
  if (x == 0.0) return 1.0;
  double gln = std::lgamma(a);
  if (x < a + 1.0) {
    // series for P, return 1-P
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    double p = sum * std::exp(-x + a * std::log(x) - gln);
    return 1.0 - p;
  }
  // continued fraction for Q
  double b = x + 1.0 - a, c = 1e308, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}
}  // namespace

double chi2_sf(double x, int k) {
  if (k <= 0) throw std::invalid_argument("chi2_sf dof");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * k, 0.5 * x);
}

}  // namespace crtmap
