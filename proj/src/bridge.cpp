#include "tiltwalk/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tiltwalk {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> site_potential_for(const PotentialFamily& pot, double lambda, int M) {
  std::vector<double> V(static_cast<std::size_t>(M));
  for (int x = 1; x <= M; ++x) V[static_cast<std::size_t>(x - 1)] = pot.V(lambda, x);
  return V;
}

struct StreamResult {
  double log_z = kNegInf;
  bool empty = false;
};

// One backward sweep of masked transfer products without storing the table.
StreamResult streaming_log_partition(const WalkKernel& kernel, const std::vector<double>& V,
                                     int M, long L, int u, int v,
                                     const std::vector<StateMask>& masks) {
  const auto allowed = [&](long t, int x) {
    if (x < 1 || x > M) return false;
    if (masks.empty()) return true;
    const StateMask& m = masks[static_cast<std::size_t>(t)];
    return x >= m.lo && x <= m.hi;
  };
  StreamResult out;
  if (!allowed(L, v) || !allowed(0, u)) {
    out.empty = true;
    return out;
  }
  std::vector<double> g(static_cast<std::size_t>(M), 0.0), next(static_cast<std::size_t>(M));
  g[static_cast<std::size_t>(v - 1)] = 1.0;
  double acc = 0.0;
  for (long t = L - 1; t >= 0; --t) {
    std::fill(next.begin(), next.end(), 0.0);
    double mx = 0.0;
    for (int x = 1; x <= M; ++x) {
      if (!allowed(t, x)) continue;
      const double vx = V[static_cast<std::size_t>(x - 1)];
      double s = 0.0;
      for (std::size_t zi = 0; zi < kernel.support.size(); ++zi) {
        const int y = x + kernel.support[zi];
        if (y < 1 || y > M) continue;
        const double gy = g[static_cast<std::size_t>(y - 1)];
        if (gy == 0.0) continue;
        s += kernel.probs[zi] * std::exp(-0.5 * (vx + V[static_cast<std::size_t>(y - 1)])) * gy;
      }
      next[static_cast<std::size_t>(x - 1)] = s;
      mx = std::max(mx, s);
    }
    if (mx == 0.0) {
      out.empty = true;
      return out;
    }
    for (double& x : next) x /= mx;
    acc += std::log(mx);
    g.swap(next);
  }
  const double gu = g[static_cast<std::size_t>(u - 1)];
  if (gu == 0.0) {
    out.empty = true;
    return out;
  }
  out.log_z = std::log(gu) + acc -
              0.5 * (V[static_cast<std::size_t>(u - 1)] + V[static_cast<std::size_t>(v - 1)]);
  if (!std::isfinite(out.log_z))
    throw std::runtime_error("log_partition: underflow despite log-space accumulation");
  return out;
}

}  // namespace

BridgeDp::BridgeDp(const WalkKernel& kernel, std::vector<double> site_potential, int M, int L,
                   int u, int v, std::vector<StateMask> masks)
    : kernel_(kernel), V_(std::move(site_potential)), M_(M), L_(L), u_(u), v_(v),
      masks_(std::move(masks)) {
  if (M_ <= kernel_.diameter())
    throw std::invalid_argument("BridgeDp: M must exceed the kernel diameter");
  if (L_ < 1) throw std::invalid_argument("BridgeDp: L must be at least 1");
  if (u_ < 1 || u_ > M_ || v_ < 1 || v_ > M_)
    throw std::invalid_argument("BridgeDp: endpoints must lie in [1, M]");
  if (static_cast<int>(V_.size()) != M_)
    throw std::invalid_argument("BridgeDp: site potential size mismatch");
  if (!masks_.empty() && static_cast<int>(masks_.size()) != L_ + 1)
    throw std::invalid_argument("BridgeDp: masks must cover all L+1 time indices");

  g_.assign(static_cast<std::size_t>(L_ + 1), std::vector<double>(static_cast<std::size_t>(M_), 0.0));
  g_scale_.assign(static_cast<std::size_t>(L_ + 1), 0.0);
  f_.assign(static_cast<std::size_t>(L_ + 1), std::vector<double>(static_cast<std::size_t>(M_), 0.0));
  f_scale_.assign(static_cast<std::size_t>(L_ + 1), 0.0);

  if (!allowed(L_, v_) || !allowed(0, u_)) {
    empty_ = true;
    return;
  }
  g_[static_cast<std::size_t>(L_)][static_cast<std::size_t>(v_ - 1)] = 1.0;
  for (int t = L_ - 1; t >= 0; --t) {
    const auto& nxt = g_[static_cast<std::size_t>(t + 1)];
    auto& cur = g_[static_cast<std::size_t>(t)];
    double mx = 0.0;
    for (int x = 1; x <= M_; ++x) {
      if (!allowed(t, x)) continue;
      double s = 0.0;
      for (std::size_t zi = 0; zi < kernel_.support.size(); ++zi) {
        const int y = x + kernel_.support[zi];
        if (y < 1 || y > M_) continue;
        const double gy = nxt[static_cast<std::size_t>(y - 1)];
        if (gy == 0.0) continue;
        s += kernel_.probs[zi] *
             std::exp(-0.5 * (V_[static_cast<std::size_t>(x - 1)] +
                              V_[static_cast<std::size_t>(y - 1)])) *
             gy;
      }
      cur[static_cast<std::size_t>(x - 1)] = s;
      mx = std::max(mx, s);
    }
    if (mx == 0.0) {
      empty_ = true;
      return;
    }
    for (double& x : cur) x /= mx;
    g_scale_[static_cast<std::size_t>(t)] = g_scale_[static_cast<std::size_t>(t + 1)] + std::log(mx);
  }
  if (g_[0][static_cast<std::size_t>(u_ - 1)] == 0.0) {
    empty_ = true;
    return;
  }
  log_z_backward_ = std::log(g_[0][static_cast<std::size_t>(u_ - 1)]) + g_scale_[0] -
                    0.5 * (V_[static_cast<std::size_t>(u_ - 1)] +
                           V_[static_cast<std::size_t>(v_ - 1)]);

  f_[0][static_cast<std::size_t>(u_ - 1)] = 1.0;
  for (int t = 1; t <= L_; ++t) {
    const auto& prv = f_[static_cast<std::size_t>(t - 1)];
    auto& cur = f_[static_cast<std::size_t>(t)];
    double mx = 0.0;
    for (int y = 1; y <= M_; ++y) {
      if (!allowed(t, y)) continue;
      double s = 0.0;
      for (std::size_t zi = 0; zi < kernel_.support.size(); ++zi) {
        const int x = y - kernel_.support[zi];
        if (x < 1 || x > M_) continue;
        const double fx = prv[static_cast<std::size_t>(x - 1)];
        if (fx == 0.0) continue;
        s += kernel_.probs[zi] *
             std::exp(-0.5 * (V_[static_cast<std::size_t>(x - 1)] +
                              V_[static_cast<std::size_t>(y - 1)])) *
             fx;
      }
      cur[static_cast<std::size_t>(y - 1)] = s;
      mx = std::max(mx, s);
    }
    if (mx == 0.0) {
      empty_ = true;
      return;
    }
    for (double& x : cur) x /= mx;
    f_scale_[static_cast<std::size_t>(t)] = f_scale_[static_cast<std::size_t>(t - 1)] + std::log(mx);
  }
  log_z_forward_ = std::log(f_[static_cast<std::size_t>(L_)][static_cast<std::size_t>(v_ - 1)]) +
                   f_scale_[static_cast<std::size_t>(L_)] -
                   0.5 * (V_[static_cast<std::size_t>(u_ - 1)] +
                          V_[static_cast<std::size_t>(v_ - 1)]);
}

bool BridgeDp::allowed(int t, int x) const {
  if (x < 1 || x > M_) return false;
  if (masks_.empty()) return true;
  const StateMask& m = masks_[static_cast<std::size_t>(t)];
  return x >= m.lo && x <= m.hi;
}

double BridgeDp::tilde_t(int x, int y) const {
  const double p = kernel_.prob(y - x);
  if (p == 0.0 || x < 1 || x > M_ || y < 1 || y > M_) return 0.0;
  return p * std::exp(-0.5 * (V_[static_cast<std::size_t>(x - 1)] +
                              V_[static_cast<std::size_t>(y - 1)]));
}

double BridgeDp::log_partition() const { return empty_ ? kNegInf : log_z_backward_; }

double BridgeDp::forward_backward_gap() const {
  if (empty_) return 0.0;
  return std::abs(log_z_backward_ - log_z_forward_);
}

std::vector<double> BridgeDp::marginal(int t) const {
  if (empty_) throw std::runtime_error("BridgeDp::marginal: empty bridge");
  if (t < 0 || t > L_) throw std::invalid_argument("BridgeDp::marginal: t out of range");
  const auto& f = f_[static_cast<std::size_t>(t)];
  const auto& g = g_[static_cast<std::size_t>(t)];
  std::vector<double> m(static_cast<std::size_t>(M_));
  double total = 0.0;
  for (int x = 0; x < M_; ++x) {
    m[static_cast<std::size_t>(x)] = f[static_cast<std::size_t>(x)] * g[static_cast<std::size_t>(x)];
    total += m[static_cast<std::size_t>(x)];
  }
  for (double& x : m) x /= total;
  return m;
}

LatticePath BridgeDp::sample(Rng& rng, long start_index) const {
  if (empty_) throw std::runtime_error("BridgeDp::sample: empty bridge");
  LatticePath path;
  path.start_index = start_index;
  path.values.resize(static_cast<std::size_t>(L_ + 1));
  int x = u_;
  path.values[0] = x;
  std::vector<double> w(kernel_.support.size());
  for (int t = 0; t < L_; ++t) {
    const auto& nxt = g_[static_cast<std::size_t>(t + 1)];
    double total = 0.0;
    for (std::size_t zi = 0; zi < kernel_.support.size(); ++zi) {
      const int y = x + kernel_.support[zi];
      double ww = 0.0;
      if (y >= 1 && y <= M_ && allowed(t + 1, y))
        ww = kernel_.probs[zi] *
             std::exp(-0.5 * (V_[static_cast<std::size_t>(x - 1)] +
                              V_[static_cast<std::size_t>(y - 1)])) *
             nxt[static_cast<std::size_t>(y - 1)];
      w[zi] = ww;
      total += ww;
    }
    if (!(total > 0.0)) throw std::runtime_error("BridgeDp::sample: dead-end state");
    const double target = rng.uniform() * total;
    double acc = 0.0;
    std::size_t pick = w.size() - 1;
    for (std::size_t zi = 0; zi < w.size(); ++zi) {
      acc += w[zi];
      if (target < acc) {
        pick = zi;
        break;
      }
    }
    x += kernel_.support[pick];
    path.values[static_cast<std::size_t>(t + 1)] = x;
  }
  return path;
}

BridgeEnsemble make_bridge(const WalkKernel& kernel, const PotentialFamily& pot, double lambda,
                           int u, int v, long N, int M) {
  if (u < 1 || v < 1) throw std::invalid_argument("make_bridge: endpoints must be >= 1");
  if (N < 1) throw std::invalid_argument("make_bridge: N must be >= 1");
  const ScaleInfo scale = solve_scale(pot, lambda);
  if (M == 0)
    M = std::max(default_truncation(pot, scale),
                 std::max(u, v) + static_cast<int>(std::ceil(20.0 * scale.H)));
  const long L = 2 * N;
  if (L > (1L << 26)) throw std::invalid_argument("make_bridge: N too large for a sampling table");
  BridgeEnsemble b{u, v, N, lambda, scale, M, kernel,
                   BridgeDp(kernel, site_potential_for(pot, lambda, M), M, static_cast<int>(L),
                            u, v)};
  return b;
}

double log_partition_function(const BridgeEnsemble& bridge) { return bridge.dp.log_partition(); }

double log_partition_function(const WalkKernel& kernel, const PotentialFamily& pot, double lambda,
                              int u, int v, long N, int M) {
  if (u < 1 || v < 1) throw std::invalid_argument("partition_function: endpoints must be >= 1");
  if (N < 1) throw std::invalid_argument("partition_function: N must be >= 1");
  const ScaleInfo scale = solve_scale(pot, lambda);
  if (M == 0)
    M = std::max(default_truncation(pot, scale),
                 std::max(u, v) + static_cast<int>(std::ceil(20.0 * scale.H)));
  const StreamResult r =
      streaming_log_partition(kernel, site_potential_for(pot, lambda, M), M, 2 * N, u, v, {});
  if (r.empty) throw std::runtime_error("partition_function: no admissible path");
  return r.log_z;
}

LatticePath sample_bridge(const BridgeEnsemble& bridge, Rng& rng) {
  return bridge.dp.sample(rng, -bridge.N);
}

LatticePath sample_bridge(const WalkKernel& kernel, const PotentialFamily& pot, double lambda,
                          int u, int v, long N, std::uint64_t seed, int M) {
  const BridgeEnsemble b = make_bridge(kernel, pot, lambda, u, v, N, M);
  Rng rng(seed);
  return sample_bridge(b, rng);
}

RestrictedPartition restricted_partition(const WalkKernel& kernel, const PotentialFamily& pot,
                                         double lambda, int u, int v, long N,
                                         const std::vector<StateMask>& masks, int M) {
  if (u < 1 || v < 1) throw std::invalid_argument("restricted_partition: endpoints must be >= 1");
  if (N < 1) throw std::invalid_argument("restricted_partition: N must be >= 1");
  if (!masks.empty() && static_cast<long>(masks.size()) != 2 * N + 1)
    throw std::invalid_argument("restricted_partition: masks must have size 2N+1");
  const ScaleInfo scale = solve_scale(pot, lambda);
  if (M == 0)
    M = std::max(default_truncation(pot, scale),
                 std::max(u, v) + static_cast<int>(std::ceil(20.0 * scale.H)));
  const StreamResult r =
      streaming_log_partition(kernel, site_potential_for(pot, lambda, M), M, 2 * N, u, v, masks);
  return {r.empty ? kNegInf : r.log_z, r.empty};
}

BridgeDp make_free_bridge(const WalkKernel& kernel, int cap, int u, int v, int L,
                          std::vector<StateMask> masks) {
  return BridgeDp(kernel, std::vector<double>(static_cast<std::size_t>(cap), 0.0), cap, L, u, v,
                  std::move(masks));
}

FreeLogZ free_bridge_log_partition(const WalkKernel& kernel, int cap, int u, int v, long L) {
  if (u < 1 || u > cap || v < 1 || v > cap)
    throw std::invalid_argument("free_bridge_log_partition: endpoints must lie in [1, cap]");
  const StreamResult r = streaming_log_partition(
      kernel, std::vector<double>(static_cast<std::size_t>(cap), 0.0), cap, L, u, v, {});
  return {r.log_z, r.empty};
}

}  // namespace tiltwalk
