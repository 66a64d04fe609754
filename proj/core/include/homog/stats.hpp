#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace homog {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;      // standard error of the mean
  double stddev = 0.0;  // sample standard deviation
  std::size_t n = 0;
};

MeanSe mean_se(std::span<const double> xs);

/// Two-sample Kolmogorov-Smirnov distance. Inputs need not be sorted.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// One-sample KS distance of samples against a CDF given as callable.
double ks_against_cdf(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Critical value for the two-sample KS test at significance level `alpha`
/// (asymptotic): c(alpha) * sqrt((n+m)/(n*m)).
double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha);

/// Asymptotic Kolmogorov distribution tail Q(lambda) = P(K > lambda).
double kolmogorov_tail(double lambda);

}  // namespace homog
