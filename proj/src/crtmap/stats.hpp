#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace crtmap {

struct KSResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;  // 0 for one-sample
};

// Survival function of the Kolmogorov distribution, Q(lambda) = P(K > lambda).
double kolmogorov_q(double lambda);

// Exact D against a continuous cdf; p via the asymptotic series with the
// standard finite-n effective-size correction. Input is sorted internally.
KSResult ks_one_sample(std::vector<double> samples,
                       const std::function<double(double)>& cdf);

KSResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct VarCI {
  double variance = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Unbiased variance with a seeded percentile-bootstrap 95% CI.
VarCI var_ci(const std::vector<double>& samples, int bootstrap_rounds,
             std::uint64_t seed);

struct MeanSE {
  double mean = 0.0;
  double se = 0.0;
};
MeanSE mean_se(const std::vector<double>& v);

double sample_variance(const std::vector<double>& v);

// Lag-k autocorrelation estimate.
double autocorrelation(const std::vector<double>& v, int lag);

struct LinFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LinFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

double normal_cdf(double x);

// Upper tail of the chi-square distribution with k degrees of freedom.
double chi2_sf(double x, int k);

}  // namespace crtmap
