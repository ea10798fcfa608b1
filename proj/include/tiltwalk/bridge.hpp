#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tiltwalk/chain.hpp"
#include "tiltwalk/kernel.hpp"
#include "tiltwalk/potential.hpp"
#include "tiltwalk/rng.hpp"
#include "tiltwalk/spectral.hpp"

namespace tiltwalk {

// Allowed state window at one time index (inclusive, intersected with [1, M]).
struct StateMask {
  int lo = 1;
  int hi = 1 << 30;
};

// Exact dynamic program for tilted positive bridges on states {1..M} over L
// steps. Backward vectors g_t(x), proportional to the weight of completing
// the bridge from (t, x), are renormalized per step with an accumulated log
// scale. The path weight is exp(-sum_t V(X_t)) prod_t p_{X_{t+1}-X_t}.
class BridgeDp {
 public:
  BridgeDp(const WalkKernel& kernel, std::vector<double> site_potential, int M, int L, int u,
           int v, std::vector<StateMask> masks = {});

  bool empty() const { return empty_; }
  double log_partition() const;          // -inf when empty
  double forward_backward_gap() const;   // |logZ forward - logZ backward|
  std::vector<double> marginal(int t) const;  // exact time-t law, size M
  LatticePath sample(Rng& rng, long start_index = 0) const;

  int M() const { return M_; }
  int L() const { return L_; }

 private:
  WalkKernel kernel_;
  std::vector<double> V_;
  int M_ = 0, L_ = 0, u_ = 0, v_ = 0;
  std::vector<StateMask> masks_;
  bool empty_ = false;
  std::vector<std::vector<double>> g_;  // normalized backward vectors, g_[t]
  std::vector<double> g_scale_;         // accumulated log scales
  std::vector<std::vector<double>> f_;  // normalized forward vectors
  std::vector<double> f_scale_;
  double log_z_backward_ = 0.0, log_z_forward_ = 0.0;

  double tilde_t(int x, int y) const;  // transfer entry, 0 outside masks/window
  bool allowed(int t, int x) const;
};

// Tilted bridge over the window {-N..N} (2N steps) with both endpoints and
// the full area tilt included in the weight.
struct BridgeEnsemble {
  int u = 1, v = 1;
  long N = 1;
  double lambda = 0.0;
  ScaleInfo scale;
  int M = 0;
  WalkKernel kernel;
  BridgeDp dp;
};

BridgeEnsemble make_bridge(const WalkKernel& kernel, const PotentialFamily& pot, double lambda,
                           int u, int v, long N, int M = 0);

double log_partition_function(const BridgeEnsemble& bridge);
// Memory-light variant: no sampling table, one streaming pass.
double log_partition_function(const WalkKernel& kernel, const PotentialFamily& pot,
                              double lambda, int u, int v, long N, int M = 0);
LatticePath sample_bridge(const BridgeEnsemble& bridge, Rng& rng);
LatticePath sample_bridge(const WalkKernel& kernel, const PotentialFamily& pot, double lambda,
                          int u, int v, long N, std::uint64_t seed, int M = 0);

struct RestrictedPartition {
  double log_z = 0.0;
  bool empty = false;  // constraint emptied the state space; log_z is -inf
};

// Same DP with per-time interval masks; masks index the window {-N..N}
// from the left (size 2N+1).
RestrictedPartition restricted_partition(const WalkKernel& kernel, const PotentialFamily& pot,
                                         double lambda, int u, int v, long N,
                                         const std::vector<StateMask>& masks, int M = 0);

// Untilted (V = 0) bridge over L steps on states {1..cap}; used for
// plain random-walk estimates.
BridgeDp make_free_bridge(const WalkKernel& kernel, int cap, int u, int v, int L,
                          std::vector<StateMask> masks = {});

struct FreeLogZ {
  double log_z = 0.0;
  bool empty = false;
};

// Streaming log partition of the untilted bridge on states {1..cap}; no
// sampling table, so the cap can be large.
FreeLogZ free_bridge_log_partition(const WalkKernel& kernel, int cap, int u, int v, long L);

}  // namespace tiltwalk
