#pragma once

#include <string>
#include <vector>

#include "tiltwalk/banded.hpp"
#include "tiltwalk/kernel.hpp"
#include "tiltwalk/potential.hpp"

namespace tiltwalk {

// Tilted transfer operator restricted to states {1..M}; transitions leaving
// the window are dropped (absorbing wall at 0 and at M+1).
struct TransferOperator {
  BandedMatrix matrix;  // (x, y) entry: p_{y-x} exp(-(V(x) + V(y))/2)
  WalkKernel kernel;
  std::string potential_name;
  double lambda = 0.0;
  ScaleInfo scale;
  std::vector<double> site_potential;  // V_lambda(x) for x = 1..M
  int M = 0;
};

TransferOperator build_operator(const WalkKernel& kernel, const PotentialFamily& pot,
                                double lambda, int M);

// Truncation rule M = ceil(max(20 H, K* H)) with q0(K*) = 40.
int default_truncation(const PotentialFamily& pot, const ScaleInfo& scale);

struct EigenPair {
  double value = 0.0;
  std::vector<double> right, left;
  double residual_right = 0.0, residual_left = 0.0;
  long iterations = 0;
};

// Leading (Perron) eigenpair of a nonnegative irreducible banded matrix.
// Deterministic: power iteration on (I+A)/2 from the all-ones vector,
// followed by shift-invert refinement with the shift placed above the
// Collatz-Wielandt upper bound.
EigenPair leading_eigenpair(const BandedMatrix& A, double tol = 1e-12,
                            long max_iter = 1000000);

struct TransferSpectrum {
  ScaleInfo scale;
  int M = 0;
  BandedMatrix op;
  double E = 0.0;  // leading eigenvalue, in (0, 1)
  double e = 0.0;  // -H^2 log E
  double c = 0.0;  // 1 / sum_x phi(x) phi*(x)
  std::vector<double> phi, phi_star;  // normalized: h * sum phi^2 = 1
  double residual = 0.0, residual_star = 0.0;
  std::string kernel_name, potential_name;
  double sigma2 = 0.0;

  double norm2_lambda(const std::vector<double>& u) const;
};

TransferSpectrum finalize_spectrum(TransferOperator op, EigenPair pair);
TransferSpectrum compute_spectrum(const WalkKernel& kernel, const PotentialFamily& pot,
                                  double lambda, int M = 0, double tol = 1e-12);

// h * sum of phi over rescaled sites r = x h with r > K.
double tail_mass(const TransferSpectrum& s, double K);

// sum_x mu(x) ((1 - T) u / u)(x) with T = op / E.
double dv_inner(const TransferSpectrum& s, const std::vector<double>& mu,
                const std::vector<double>& u);

// Columnar text format (x, phi, phi*) with a versioned header. Loaded
// spectra carry the eigen-data but not the operator itself.
void save_spectrum(const TransferSpectrum& s, const std::string& path);
TransferSpectrum load_spectrum(const std::string& path);

}  // namespace tiltwalk
