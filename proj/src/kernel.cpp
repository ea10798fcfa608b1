#include "tiltwalk/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tiltwalk {

namespace {

// Pairs +z with -z so that symmetric weights cancel exactly in floating point.
double paired_mean(const std::vector<int>& support, const std::vector<double>& probs) {
  std::map<int, double> p;
  for (std::size_t i = 0; i < support.size(); ++i) p[support[i]] = probs[i];
  std::map<int, std::pair<double, double>> by_abs;  // |z| -> (p(z), p(-z))
  for (const auto& [z, w] : p) {
    if (z > 0)
      by_abs[z].first = w;
    else if (z < 0)
      by_abs[-z].second = w;
  }
  double m = 0.0;
  for (const auto& [z, pair] : by_abs)
    m += static_cast<double>(z) * (pair.first - pair.second);
  return m;
}

WalkKernel finalize(std::vector<std::pair<int, double>> entries, std::string name) {
  std::sort(entries.begin(), entries.end());
  WalkKernel k;
  k.name = std::move(name);
  double total = 0.0;
  for (const auto& [z, w] : entries) {
    if (w < 0.0)
      throw std::invalid_argument("kernel '" + k.name + "': negative weight at offset " +
                                  std::to_string(z));
    if (w == 0.0) continue;
    if (!k.support.empty() && k.support.back() == z)
      throw std::invalid_argument("kernel '" + k.name + "': duplicate offset " + std::to_string(z));
    k.support.push_back(z);
    k.probs.push_back(w);
    total += w;
  }
  if (k.support.empty() || total <= 0.0)
    throw std::invalid_argument("kernel '" + k.name + "': no positive weights");
  for (double& p : k.probs) p /= total;

  int g = 0;
  bool has_pos = false, has_neg = false;
  for (int z : k.support) {
    if (z > 0) has_pos = true;
    if (z < 0) has_neg = true;
    g = std::gcd(g, std::abs(z));
  }
  if (!has_pos || !has_neg)
    throw std::invalid_argument("kernel '" + k.name + "': support must contain both signs");
  if (g != 1)
    throw std::invalid_argument("kernel '" + k.name + "': reducible support, gcd = " +
                                std::to_string(g));

  const double m = paired_mean(k.support, k.probs);
  if (std::abs(m) > 1e-12) {
    std::ostringstream os;
    os << "kernel '" << k.name << "': nonzero mean " << m;
    throw std::invalid_argument(os.str());
  }
  double s = 0.0;
  for (double p : k.probs) s += p;
  if (std::abs(s - 1.0) > 1e-12)
    throw std::invalid_argument("kernel '" + k.name + "': probabilities do not sum to 1");

  k.sigma2 = k.variance();
  return k;
}

}  // namespace

double WalkKernel::prob(int z) const {
  const auto it = std::lower_bound(support.begin(), support.end(), z);
  if (it == support.end() || *it != z) return 0.0;
  return probs[static_cast<std::size_t>(it - support.begin())];
}

double WalkKernel::mean() const { return paired_mean(support, probs); }

double WalkKernel::variance() const {
  double v = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i)
    v += static_cast<double>(support[i]) * static_cast<double>(support[i]) * probs[i];
  return v;
}

WalkKernel make_lazy_nn(double a) {
  if (!(a > 0.0) || a > 0.5)
    throw std::invalid_argument("lazy-nn: a must lie in (0, 1/2]");
  std::ostringstream os;
  os << "lazy-nn(a=" << a << ")";
  return finalize({{-1, a}, {0, 1.0 - 2.0 * a}, {1, a}}, os.str());
}

WalkKernel make_weight_kernel(const std::vector<std::pair<int, double>>& weights) {
  return finalize(weights, "weights");
}

WalkKernel make_truncated_geometric(double rho, int R) {
  if (!(rho > 0.0) || rho >= 1.0)
    throw std::invalid_argument("truncated-geometric: rho must lie in (0, 1)");
  // Relative mass beyond R of the untruncated two-sided distribution:
  // 2 rho^{R+1} / ((1 - rho)(1 + 2 rho/(1 - rho))).
  const double norm_inf = 1.0 + 2.0 * rho / (1.0 - rho);
  const auto tail = [&](int r) {
    return 2.0 * std::pow(rho, r + 1) / ((1.0 - rho) * norm_inf);
  };
  if (R == 0) {
    R = 1;
    while (tail(R) >= 1e-14 && R < 100000) ++R;
  } else if (tail(R) >= 1e-14) {
    std::ostringstream os;
    os << "truncated-geometric: truncation mass " << tail(R) << " at R=" << R
       << " exceeds 1e-14";
    throw std::invalid_argument(os.str());
  }
  std::vector<std::pair<int, double>> w;
  for (int z = -R; z <= R; ++z) w.emplace_back(z, std::pow(rho, std::abs(z)));
  std::ostringstream os;
  os << "truncated-geometric(rho=" << rho << ",R=" << R << ")";
  return finalize(std::move(w), os.str());
}

}  // namespace tiltwalk
