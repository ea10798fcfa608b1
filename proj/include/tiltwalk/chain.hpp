#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tiltwalk/rng.hpp"
#include "tiltwalk/spectral.hpp"

namespace tiltwalk {

struct LatticePath {
  long start_index = 0;
  std::vector<int> values;  // states >= 1

  long index(std::size_t k) const { return start_index + static_cast<long>(k); }
  std::size_t size() const { return values.size(); }
};

// Uniform-time real-valued path, linear interpolation between grid points.
struct RescaledPath {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> values;

  double time(std::size_t k) const { return t0 + dt * static_cast<double>(k); }
  double operator()(double t) const;
};

// Doob transform of the transfer operator: transition kernel
// pi(x, y) = T(x, y) phi(y) / phi(x) with T = op / E, its reversal pi*, and
// the invariant measure mu = c phi phi*.
class GroundStateChain {
 public:
  explicit GroundStateChain(TransferSpectrum spectrum);

  const TransferSpectrum& spectrum() const { return spectrum_; }
  const BandedMatrix& pi() const { return pi_; }
  const BandedMatrix& pi_star() const { return pi_star_; }
  const std::vector<double>& mu() const { return mu_; }
  int M() const { return spectrum_.M; }

  int sample_mu(Rng& rng) const;
  int step(int x, Rng& rng) const;
  int step_star(int x, Rng& rng) const;

  double stationarity_error() const;     // l1 norm of mu pi - mu
  double detailed_balance_error() const; // max |mu(x)pi(x,y) - mu(y)pi*(y,x)|
  double max_row_sum_error() const;      // before renormalization

 private:
  TransferSpectrum spectrum_;
  BandedMatrix pi_, pi_star_;
  std::vector<double> mu_, mu_cdf_;
  std::vector<double> pi_cum_, pi_star_cum_;  // per-row cumulative weights
  double row_sum_error_ = 0.0;

  int sample_row(const BandedMatrix& m, const std::vector<double>& cum, int x, Rng& rng) const;
};

GroundStateChain doob_transform(TransferSpectrum spectrum);

// Stationary window covering integer times [-ceil(T H^2), ceil(T H^2)]; the
// initial state is drawn from mu, subsequent steps from pi.
LatticePath sample_stationary(const GroundStateChain& chain, double T, std::uint64_t seed);

// x(t) = h X_{H^2 t}: dt = h^2 per lattice step, values scaled by h.
RescaledPath rescale(const LatticePath& path, const ScaleInfo& scale);

void save_path(const LatticePath& path, const ScaleInfo& scale, std::uint64_t seed,
               const std::string& file);
LatticePath load_path(const std::string& file);

}  // namespace tiltwalk
