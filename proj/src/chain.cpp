#include "tiltwalk/chain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tiltwalk {

double RescaledPath::operator()(double t) const {
  if (values.empty()) throw std::runtime_error("RescaledPath: empty");
  const double u = (t - t0) / dt;
  const double r = std::round(u);
  if (std::abs(u - r) < 1e-9 && r >= 0.0 && r < static_cast<double>(values.size()))
    return values[static_cast<std::size_t>(r)];
  if (u <= 0.0) return values.front();
  if (u >= static_cast<double>(values.size() - 1)) return values.back();
  const std::size_t i = static_cast<std::size_t>(u);
  const double w = u - static_cast<double>(i);
  return (1.0 - w) * values[i] + w * values[i + 1];
}

namespace {

BandedMatrix doob_kernel(const BandedMatrix& T, double E, const std::vector<double>& phi,
                         double& max_row_err) {
  const int n = T.size();
  BandedMatrix pi(n, T.lower(), T.upper());
  max_row_err = 0.0;
  for (int x = 0; x < n; ++x) {
    const int j0 = std::max(0, x - T.lower());
    const int j1 = std::min(n - 1, x + T.upper());
    double sum = 0.0;
    for (int y = j0; y <= j1; ++y) {
      const double v = T.at(x, y) * phi[static_cast<std::size_t>(y)] /
                       (E * phi[static_cast<std::size_t>(x)]);
      pi.at(x, y) = v;
      sum += v;
    }
    max_row_err = std::max(max_row_err, std::abs(sum - 1.0));
    if (std::abs(sum - 1.0) > 1e-8)
      throw std::runtime_error("doob_transform: row sum deviates by more than 1e-8 "
                               "(truncation leakage)");
    for (int y = j0; y <= j1; ++y) pi.at(x, y) /= sum;
  }
  return pi;
}

std::vector<double> cumulative_rows(const BandedMatrix& m) {
  const int n = m.size();
  std::vector<double> cum(static_cast<std::size_t>(n) * m.width(), 0.0);
  for (int x = 0; x < n; ++x) {
    double acc = 0.0;
    for (int k = 0; k < m.width(); ++k) {
      const int y = x - m.lower() + k;
      if (y >= 0 && y < n) acc += m.at(x, y);
      cum[static_cast<std::size_t>(x) * m.width() + k] = acc;
    }
  }
  return cum;
}

}  // namespace

GroundStateChain::GroundStateChain(TransferSpectrum spectrum) : spectrum_(std::move(spectrum)) {
  double err_star = 0.0;
  pi_ = doob_kernel(spectrum_.op, spectrum_.E, spectrum_.phi, row_sum_error_);
  const BandedMatrix Tt = spectrum_.op.transpose();
  pi_star_ = doob_kernel(Tt, spectrum_.E, spectrum_.phi_star, err_star);
  row_sum_error_ = std::max(row_sum_error_, err_star);

  mu_.resize(spectrum_.phi.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mu_.size(); ++i) {
    mu_[i] = spectrum_.phi[i] * spectrum_.phi_star[i];
    total += mu_[i];
  }
  for (double& m : mu_) m /= total;
  mu_cdf_.resize(mu_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < mu_.size(); ++i) {
    acc += mu_[i];
    mu_cdf_[i] = acc;
  }
  mu_cdf_.back() = 1.0;

  pi_cum_ = cumulative_rows(pi_);
  pi_star_cum_ = cumulative_rows(pi_star_);
}

int GroundStateChain::sample_mu(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(mu_cdf_.begin(), mu_cdf_.end(), u);
  return static_cast<int>(it - mu_cdf_.begin()) + 1;
}

int GroundStateChain::sample_row(const BandedMatrix& m, const std::vector<double>& cum, int x,
                                 Rng& rng) const {
  const int i = x - 1;
  const std::size_t base = static_cast<std::size_t>(i) * m.width();
  const double total = cum[base + m.width() - 1];
  const double u = rng.uniform() * total;
  for (int k = 0; k < m.width(); ++k) {
    if (u < cum[base + k]) {
      const int y = i - m.lower() + k;
      return y + 1;
    }
  }
  return std::min(m.size(), i - m.lower() + m.width() - 1 + 1);
}

int GroundStateChain::step(int x, Rng& rng) const { return sample_row(pi_, pi_cum_, x, rng); }

int GroundStateChain::step_star(int x, Rng& rng) const {
  return sample_row(pi_star_, pi_star_cum_, x, rng);
}

double GroundStateChain::stationarity_error() const {
  std::vector<double> out;
  pi_.matvec_transpose(mu_, out);
  double l1 = 0.0;
  for (std::size_t i = 0; i < mu_.size(); ++i) l1 += std::abs(out[i] - mu_[i]);
  return l1;
}

double GroundStateChain::detailed_balance_error() const {
  const int n = pi_.size();
  double worst = 0.0;
  for (int x = 0; x < n; ++x) {
    const int j0 = std::max(0, x - pi_.lower());
    const int j1 = std::min(n - 1, x + pi_.upper());
    for (int y = j0; y <= j1; ++y) {
      const double lhs = mu_[static_cast<std::size_t>(x)] * pi_.at(x, y);
      const double rhs = pi_star_.in_band(y, x)
                             ? mu_[static_cast<std::size_t>(y)] * pi_star_.at(y, x)
                             : 0.0;
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

double GroundStateChain::max_row_sum_error() const { return row_sum_error_; }

GroundStateChain doob_transform(TransferSpectrum spectrum) {
  return GroundStateChain(std::move(spectrum));
}

LatticePath sample_stationary(const GroundStateChain& chain, double T, std::uint64_t seed) {
  if (!(T > 0.0)) throw std::invalid_argument("sample_stationary: T must be positive");
  const double H = chain.spectrum().scale.H;
  const long half = static_cast<long>(std::ceil(T * H * H - 1e-9));
  LatticePath path;
  path.start_index = -half;
  path.values.resize(static_cast<std::size_t>(2 * half + 1));
  Rng rng(seed);
  int x = chain.sample_mu(rng);
  path.values[0] = x;
  for (std::size_t k = 1; k < path.values.size(); ++k) {
    x = chain.step(x, rng);
    path.values[k] = x;
  }
  return path;
}

RescaledPath rescale(const LatticePath& path, const ScaleInfo& scale) {
  RescaledPath r;
  r.dt = scale.h * scale.h;
  r.t0 = static_cast<double>(path.start_index) * r.dt;
  r.values.resize(path.values.size());
  for (std::size_t i = 0; i < path.values.size(); ++i)
    r.values[i] = scale.h * static_cast<double>(path.values[i]);
  return r;
}

void save_path(const LatticePath& path, const ScaleInfo& scale, std::uint64_t seed,
               const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("save_path: cannot open " + file);
  char buf[256];
  out << "# tiltwalk path v1\n";
  std::snprintf(buf, sizeof buf, "# lambda %.17g\n# H %.17g\n# seed %llu\n", scale.lambda,
                scale.H, static_cast<unsigned long long>(seed));
  out << buf << "# columns time_index value\n";
  for (std::size_t k = 0; k < path.values.size(); ++k)
    out << path.index(k) << ' ' << path.values[k] << '\n';
}

LatticePath load_path(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("load_path: cannot open " + file);
  std::string line;
  if (!std::getline(in, line) || line != "# tiltwalk path v1")
    throw std::runtime_error("load_path: unsupported format in " + file);
  while (in.peek() == '#') std::getline(in, line);
  LatticePath path;
  long idx = 0;
  int value = 0;
  bool first = true;
  while (in >> idx >> value) {
    if (first) {
      path.start_index = idx;
      first = false;
    }
    path.values.push_back(value);
  }
  return path;
}

}  // namespace tiltwalk
