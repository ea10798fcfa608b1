#pragma once

#include <string>
#include <utility>
#include <vector>

namespace tiltwalk {

// Mean-zero jump distribution on the integers with finite support and, hence,
// finite exponential moments.
struct WalkKernel {
  std::vector<int> support;   // sorted offsets carrying positive probability
  std::vector<double> probs;  // aligned with support, sums to 1
  double sigma2 = 0.0;        // cached variance
  std::string name;

  int min_offset() const { return support.front(); }
  int max_offset() const { return support.back(); }
  int diameter() const { return support.back() - support.front(); }
  double prob(int z) const;
  double mean() const;      // recomputed from support/probs
  double variance() const;  // recomputed from support/probs
};

// p0 = 1 - 2a, p(+-1) = a, with a in (0, 1/2].
WalkKernel make_lazy_nn(double a);

// Arbitrary offset -> weight table; weights are normalized. The result must
// be mean-zero and irreducible on the integers.
WalkKernel make_weight_kernel(const std::vector<std::pair<int, double>>& weights);

// Two-sided geometric weights rho^|z| truncated at |z| <= R. The discarded
// tail mass (relative to the untruncated distribution) must be below 1e-14;
// R == 0 selects the smallest admissible R.
WalkKernel make_truncated_geometric(double rho, int R = 0);

}  // namespace tiltwalk
