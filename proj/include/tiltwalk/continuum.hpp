#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tiltwalk/airy.hpp"
#include "tiltwalk/chain.hpp"
#include "tiltwalk/rng.hpp"

namespace tiltwalk {

// Lowest eigenpairs of -(sigma^2/2) d^2/dr^2 + q(r) on (0, R) with Dirichlet
// conditions at both ends, on a uniform grid.
struct SturmLiouvilleSpectrum {
  double sigma2 = 0.0;
  std::string q_tag;
  double R = 0.0;
  int n = 0;  // grid intervals; interior nodes r_i = i R / n, i = 1..n-1
  int k = 0;
  double dr = 0.0;
  std::vector<double> eigenvalues;  // e_0 < e_1 < ...; operator eigenvalues -e_j
  std::vector<std::vector<double>> eigenfunctions;  // interior values, ||.||_2 = 1
  std::vector<double> richardson_delta;         // |e_j(n) - e_j(2n)|
  std::vector<double> richardson_extrapolated;  // (4 e(2n) - e(n)) / 3

  double grid_r(int i) const { return dr * static_cast<double>(i + 1); }
  double phi(int j, double r) const;  // linear interpolation, 0 outside (0, R)
  int sign_changes(int j) const;
};

struct SlOptions {
  bool richardson = true;
};

SturmLiouvilleSpectrum sl_solve(double sigma2, const std::function<double(double)>& q,
                                const std::string& q_tag, double R, int n, int k,
                                const SlOptions& opts = {});

// Drift b = sigma^2 phi0'/phi0 from centered differences, stationary density
// phi0^2, and the spectral data needed for mixing diagnostics.
struct FSDiffusionModel {
  double sigma2 = 0.0;
  double R = 0.0;
  int n = 0;
  double dr = 0.0;
  std::vector<double> grid;      // r_i = i dr, i = 0..n
  std::vector<double> phi0;      // phi0(r_i), zero at both ends for SL input
  std::vector<double> density;   // phi0^2 renormalized to unit integral
  std::vector<double> cdf;       // trapezoidal CDF of density at grid nodes
  std::vector<double> drift;     // b(r_i), valid on the safe range
  std::vector<double> eigenvalues;
  double density_integral = 0.0;  // before renormalization
  int i_drift_lo = 1, i_drift_hi = 0;  // safe drift node range

  double r_drift_lo() const { return grid[static_cast<std::size_t>(i_drift_lo)]; }
  double r_drift_hi() const { return grid[static_cast<std::size_t>(i_drift_hi)]; }
  double drift_at(double r, bool* clamped = nullptr) const;
  double density_at(double r) const;
  double cdf_at(double r) const;
  double quantile(double u) const;
  double gap() const { return eigenvalues.at(1) - eigenvalues.at(0); }
  double char_time() const { return 1.0 / gap(); }
};

FSDiffusionModel make_fs_model(const SturmLiouvilleSpectrum& sl);
FSDiffusionModel make_fs_model(const AiryGroundState& gs, double R, int n, int k = 4);

// Spec-level accessor with clamped evaluation outside the safe range.
double fs_drift(const FSDiffusionModel& model, double r);

struct FsSimResult {
  RescaledPath path;
  long reflections = 0;
  long clamped_drift_evals = 0;
};

// Euler-Maruyama on [-T, T] with reflection at 0 (and at R); the start point
// is drawn from the stationary density by inverse CDF. Requires
// dt <= 1e-4 / (e_1 - e_0).
FsSimResult simulate_fs(const FSDiffusionModel& model, double T, double dt, std::uint64_t seed);

// Coefficient action of the semigroup: a_i -> exp(-(e_i - e_0) t) a_i.
std::vector<double> semigroup_apply(const SturmLiouvilleSpectrum& sl,
                                    const std::vector<double>& coeffs, double t);

// Expansion of a grid function (interior nodes) in the computed eigenbasis.
std::vector<double> expand(const SturmLiouvilleSpectrum& sl, const std::vector<double>& values);
std::vector<double> reconstruct(const SturmLiouvilleSpectrum& sl,
                                const std::vector<double>& coeffs);

// S^t psi = phi0^{-1} T^t (psi phi0), realized through the k-mode expansion.
std::vector<double> fs_semigroup_apply(const SturmLiouvilleSpectrum& sl,
                                       const std::vector<double>& psi, double t);

void save_sl_spectrum(const SturmLiouvilleSpectrum& sl, const std::string& path);

}  // namespace tiltwalk
