#include "tiltwalk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tiltwalk {

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples)
    : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw std::invalid_argument("EmpiricalDistribution: no samples");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalDistribution::ecdf(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double ks_distance(const EmpiricalDistribution& emp, const std::function<double(double)>& cdf) {
  const auto& xs = emp.sorted();
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    d = std::max(d, std::abs(static_cast<double>(i) / n - f));
  }
  return d;
}

double ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  const auto& xa = a.sorted();
  const auto& xb = b.sorted();
  const double na = static_cast<double>(xa.size());
  const double nb = static_cast<double>(xb.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xa.size() && j < xb.size()) {
    const double x = std::min(xa[i], xb[j]);
    while (i < xa.size() && xa[i] <= x) ++i;
    while (j < xb.size() && xb[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c * std::sqrt(static_cast<double>(n + m) /
                       (static_cast<double>(n) * static_cast<double>(m)));
}

double wasserstein1(const EmpiricalDistribution& emp, const std::function<double(double)>& cdf,
                    double lo, double hi, int grid) {
  if (grid < 3 || !(hi > lo)) throw std::invalid_argument("wasserstein1: bad grid");
  const double dx = (hi - lo) / static_cast<double>(grid - 1);
  double acc = 0.0;
  double prev = std::abs(emp.ecdf(lo) - cdf(lo));
  for (int i = 1; i < grid; ++i) {
    const double x = lo + dx * static_cast<double>(i);
    const double cur = std::abs(emp.ecdf(x) - cdf(x));
    acc += 0.5 * (prev + cur) * dx;
    prev = cur;
  }
  return acc;
}

namespace {

std::vector<double> bin_counts(const std::vector<double>& xs, double lo, double width,
                               int nbins) {
  std::vector<double> c(static_cast<std::size_t>(nbins), 0.0);
  for (double x : xs) {
    int b = static_cast<int>(std::floor((x - lo) / width));
    b = std::clamp(b, 0, nbins - 1);
    c[static_cast<std::size_t>(b)] += 1.0;
  }
  const double n = static_cast<double>(xs.size());
  for (double& v : c) v /= n;
  return c;
}

}  // namespace

double binned_tv(const std::vector<double>& a, const std::vector<double>& b, double lo,
                 double width, int nbins) {
  if (a.empty() || b.empty()) throw std::invalid_argument("binned_tv: empty samples");
  const std::vector<double> pa = bin_counts(a, lo, width, nbins);
  const std::vector<double> pb = bin_counts(b, lo, width, nbins);
  double tv = 0.0;
  for (int i = 0; i < nbins; ++i)
    tv += std::abs(pa[static_cast<std::size_t>(i)] - pb[static_cast<std::size_t>(i)]);
  return 0.5 * tv;
}

double binned_tv2(const std::vector<std::pair<double, double>>& a,
                  const std::vector<std::pair<double, double>>& b, double lo, double width,
                  int nbins) {
  if (a.empty() || b.empty()) throw std::invalid_argument("binned_tv2: empty samples");
  const auto index = [&](const std::pair<double, double>& xy) {
    int bx = static_cast<int>(std::floor((xy.first - lo) / width));
    int by = static_cast<int>(std::floor((xy.second - lo) / width));
    bx = std::clamp(bx, 0, nbins - 1);
    by = std::clamp(by, 0, nbins - 1);
    return static_cast<std::size_t>(bx) * static_cast<std::size_t>(nbins) +
           static_cast<std::size_t>(by);
  };
  std::vector<double> pa(static_cast<std::size_t>(nbins) * nbins, 0.0), pb = pa;
  for (const auto& xy : a) pa[index(xy)] += 1.0 / static_cast<double>(a.size());
  for (const auto& xy : b) pb[index(xy)] += 1.0 / static_cast<double>(b.size());
  double tv = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) tv += std::abs(pa[i] - pb[i]);
  return 0.5 * tv;
}

double paley_zygmund_floor(double mean, double second_moment, double alpha) {
  if (!(second_moment > 0.0)) return 0.0;
  return (1.0 - alpha) * (1.0 - alpha) * mean * mean / second_moment;
}

double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double block_standard_error(const std::vector<double>& v, int nblocks) {
  if (nblocks < 2 || v.size() < static_cast<std::size_t>(nblocks))
    throw std::invalid_argument("block_standard_error: not enough data");
  const std::size_t block = v.size() / static_cast<std::size_t>(nblocks);
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(nblocks));
  for (int b = 0; b < nblocks; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < block; ++i) s += v[static_cast<std::size_t>(b) * block + i];
    means.push_back(s / static_cast<double>(block));
  }
  const double m = sample_mean(means);
  double var = 0.0;
  for (double x : means) var += (x - m) * (x - m);
  var /= static_cast<double>(nblocks - 1);
  return std::sqrt(var / static_cast<double>(nblocks));
}

}  // namespace tiltwalk
