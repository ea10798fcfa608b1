#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace tiltwalk {

struct EmpiricalDistribution {
  explicit EmpiricalDistribution(std::vector<double> samples);

  const std::vector<double>& sorted() const { return sorted_; }
  std::size_t size() const { return sorted_.size(); }
  double ecdf(double x) const;  // right-continuous

 private:
  std::vector<double> sorted_;
};

// One-sample Kolmogorov-Smirnov distance against a reference CDF.
double ks_distance(const EmpiricalDistribution& emp, const std::function<double(double)>& cdf);
double ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b);
// Asymptotic two-sample critical value c(alpha) sqrt((n+m)/(n m)).
double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha);

// L1 distance between the empirical CDF and a reference CDF on [lo, hi].
double wasserstein1(const EmpiricalDistribution& emp, const std::function<double(double)>& cdf,
                    double lo, double hi, int grid = 4001);

// Total variation between two sample sets binned on [lo, lo + nbins*width).
double binned_tv(const std::vector<double>& a, const std::vector<double>& b, double lo,
                 double width, int nbins);
double binned_tv2(const std::vector<std::pair<double, double>>& a,
                  const std::vector<std::pair<double, double>>& b, double lo, double width,
                  int nbins);

// P(N > alpha E[N]) >= (1-alpha)^2 E[N]^2 / E[N^2].
double paley_zygmund_floor(double mean, double second_moment, double alpha);

double sample_mean(const std::vector<double>& v);
// Standard error of the mean of a correlated series, from nblocks block means.
double block_standard_error(const std::vector<double>& v, int nblocks);

}  // namespace tiltwalk
