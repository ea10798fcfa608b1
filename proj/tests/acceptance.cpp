// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerances in code; seeds are fixed.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tiltwalk/bridge.hpp"
#include "tiltwalk/chain.hpp"
#include "tiltwalk/continuum.hpp"
#include "tiltwalk/harness.hpp"
#include "tiltwalk/run.hpp"
#include "tiltwalk/stats.hpp"

using namespace tiltwalk;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> body;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

const WalkKernel& lazy4() {
  static const WalkKernel k = make_lazy_nn(0.25);
  return k;
}

const PotentialFamily& linear_pot() {
  static const PotentialFamily p = PotentialFamily::linear();
  return p;
}

const SturmLiouvilleSpectrum& sl_sigma_half() {
  static const SturmLiouvilleSpectrum sl =
      sl_solve(0.5, [](double r) { return r; }, "linear", 30.0, 8000, 4);
  return sl;
}

// --- criterion 1 ---------------------------------------------------------
Outcome airy_anchor() {
  const SturmLiouvilleSpectrum sl =
      sl_solve(2.0, [](double r) { return r; }, "linear", 30.0, 8000, 4);
  const double e0_err = std::abs(sl.eigenvalues[0] - 2.33811);
  const AiryGroundState g = airy_ground_state(2.0);
  double acc = 0.0;
  for (int i = 1; i < sl.n; ++i) {
    const double d = sl.eigenfunctions[0][static_cast<std::size_t>(i - 1)] - g(sl.dr * i);
    acc += d * d * sl.dr;
  }
  const double l2 = std::sqrt(acc);
  Outcome out;
  out.pass = e0_err < 1e-3 && l2 < 1e-3;
  out.detail = fmt("|e0 - 2.33811| = %.2e (tol 1e-3), L2(phi_sl, phi_airy) = %.2e (tol 1e-3)",
                   e0_err, l2);
  return out;
}

// --- criterion 2 ---------------------------------------------------------
Outcome scale_law() {
  double worst = 0.0;
  double lambda = 1e-2;
  for (int i = 0; i < 7; ++i) {
    const ScaleInfo s = solve_scale(linear_pot(), lambda);
    worst = std::max(worst,
                     std::abs(s.H - std::pow(lambda, -1.0 / 3.0)) / std::pow(lambda, -1.0 / 3.0));
    lambda *= 0.1;
  }
  Outcome out;
  out.pass = worst < 1e-9;
  out.detail = fmt("max relative deviation of H from lambda^{-1/3}: %.2e (tol 1e-9)", worst);
  return out;
}

// --- criteria 3 and 4 ----------------------------------------------------
Outcome eigen_value_convergence(std::vector<double>& e_errs, std::vector<double>& phi_errs,
                                std::vector<double>& c_devs) {
  const double e0 = sl_sigma_half().eigenvalues[0];
  const AiryGroundState g = airy_ground_state(0.5);
  e_errs.clear();
  phi_errs.clear();
  c_devs.clear();
  for (double lambda : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const TransferSpectrum s = compute_spectrum(lazy4(), linear_pot(), lambda);
    e_errs.push_back(std::abs(s.e - e0));
    const std::vector<double> rho =
        grid_project([&g](double r) { return g(r); }, s.scale, s.M);
    double acc = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      const double d = s.phi[i] - rho[i];
      acc += d * d;
    }
    phi_errs.push_back(std::sqrt(s.scale.h * acc));
    c_devs.push_back(std::abs(s.c / s.scale.h - 1.0));
  }
  Outcome out;
  bool mono = true;
  for (std::size_t i = 1; i < e_errs.size(); ++i) mono = mono && e_errs[i] < e_errs[i - 1];
  const double rel = e_errs.back() / e0;
  out.pass = mono && rel < 0.05;
  out.detail = fmt("e errors %.2e > %.2e > %.2e > %.2e, relative %.2e at 1e-5 (tol 0.05)",
                   e_errs[0], e_errs[1], e_errs[2], e_errs[3], rel);
  return out;
}

// --- criterion 5 ---------------------------------------------------------
struct Enumeration {
  double Z = 0.0;
  std::vector<std::map<int, double>> marginals;
};

Enumeration enumerate_bridge(const WalkKernel& kernel, double lambda, int u, int v, int L) {
  Enumeration out;
  out.marginals.assign(static_cast<std::size_t>(L + 1), {});
  std::vector<int> path{u};
  const std::function<void(double)> dfs = [&](double w) {
    const int t = static_cast<int>(path.size()) - 1;
    if (t == L) {
      if (path.back() != v) return;
      out.Z += w;
      for (int s = 0; s <= L; ++s)
        out.marginals[static_cast<std::size_t>(s)][path[static_cast<std::size_t>(s)]] += w;
      return;
    }
    for (std::size_t zi = 0; zi < kernel.support.size(); ++zi) {
      const int y = path.back() + kernel.support[zi];
      if (y < 1) continue;
      path.push_back(y);
      dfs(w * kernel.probs[zi] * std::exp(-lambda * y));
      path.pop_back();
    }
  };
  dfs(std::exp(-lambda * u));
  return out;
}

Outcome micro_oracle() {
  const double lambda = 0.5;
  const int N = 4;
  const Enumeration oracle = enumerate_bridge(lazy4(), lambda, 1, 1, 2 * N);
  const BridgeEnsemble bridge = make_bridge(lazy4(), linear_pot(), lambda, 1, 1, N);
  const double logz_err = std::abs(bridge.dp.log_partition() - std::log(oracle.Z));

  Rng rng(505);
  const long ns = 100000;
  std::vector<std::map<int, long>> counts(static_cast<std::size_t>(2 * N + 1));
  for (long i = 0; i < ns; ++i) {
    const LatticePath p = bridge.dp.sample(rng, -N);
    for (std::size_t t = 0; t < p.values.size(); ++t) ++counts[t][p.values[t]];
  }
  double tv_max = 0.0;
  for (int t = 0; t <= 2 * N; ++t) {
    double tv = 0.0;
    std::map<int, double> expect;
    for (const auto& [x, w] : oracle.marginals[static_cast<std::size_t>(t)])
      expect[x] = w / oracle.Z;
    for (const auto& [x, p] : expect) {
      const auto it = counts[static_cast<std::size_t>(t)].find(x);
      const double emp = it == counts[static_cast<std::size_t>(t)].end()
                             ? 0.0
                             : static_cast<double>(it->second) / ns;
      tv += std::abs(emp - p);
    }
    tv_max = std::max(tv_max, 0.5 * tv);
  }
  Outcome out;
  out.pass = logz_err < 1e-10 && tv_max < 0.01;
  out.detail = fmt("|log Z - enumeration| = %.2e (tol 1e-10), marginal TV = %.4f (tol 0.01)",
                   logz_err, tv_max);
  return out;
}

// --- criterion 6 ---------------------------------------------------------
Outcome chain_correctness() {
  const GroundStateChain chain =
      doob_transform(compute_spectrum(lazy4(), linear_pot(), 1e-4));
  const double stat = chain.stationarity_error();
  const double detail_err = chain.detailed_balance_error();

  const double h = chain.spectrum().scale.h;
  const double H = chain.spectrum().scale.H;
  Rng rng(606);
  int x = chain.sample_mu(rng);
  const long n = 1000000;
  std::vector<double> f1(static_cast<std::size_t>(n)), f2(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    x = chain.step(x, rng);
    f1[static_cast<std::size_t>(i)] = h * static_cast<double>(x);
    f2[static_cast<std::size_t>(i)] = x <= H ? 1.0 : 0.0;
  }
  double e1 = 0.0, e2 = 0.0;
  for (int s = 1; s <= chain.M(); ++s) {
    const double m = chain.mu()[static_cast<std::size_t>(s - 1)];
    e1 += m * h * static_cast<double>(s);
    e2 += m * (s <= H ? 1.0 : 0.0);
  }
  const double z1 = std::abs(sample_mean(f1) - e1) / block_standard_error(f1, 50);
  const double z2 = std::abs(sample_mean(f2) - e2) / block_standard_error(f2, 50);

  Outcome out;
  out.pass = stat <= 1e-10 && detail_err <= 1e-12 && z1 <= 3.0 && z2 <= 3.0;
  out.detail = fmt("|mu pi - mu|_1 = %.2e (tol 1e-10), detailed = %.2e (tol 1e-12), "
                   "ergodic z-scores %.2f, %.2f (tol 3)",
                   stat, detail_err, z1, z2);
  return out;
}

// --- criterion 7 ---------------------------------------------------------
Outcome fdd_convergence() {
  const auto run = [&](double lambda) {
    FddParams p;
    p.source = FddSource::Chain;
    p.lambda = lambda;
    p.times = {0.0, 0.5};
    p.n_samples = 100000;
    p.seed = 707;
    p.tol_ks = 1e9;
    p.tol_tv = 1e9;
    return fdd_compare(lazy4(), linear_pot(), p);
  };
  const ExperimentReport coarse = run(1e-3);
  const ExperimentReport fine = run(1e-5);
  const auto metric = [](const ExperimentReport& r, const std::string& name) {
    for (const auto& [k, v] : r.metrics)
      if (k == name) return v;
    return -1.0;
  };
  const double ks = metric(fine, "ks_max");
  const double tv = metric(fine, "tv_max");
  const double ks_c = metric(coarse, "ks_max");
  const double tv_c = metric(coarse, "tv_max");
  Outcome out;
  out.pass = ks < 0.02 && tv < 0.08 && ks < ks_c && tv < tv_c;
  out.detail = fmt("KS %.4f (tol 0.02), joint TV %.4f (tol 0.08); at 1e-3: %.4f, %.4f "
                   "(both must exceed the 1e-5 values)",
                   ks, tv, ks_c, tv_c);
  return out;
}

// --- criterion 8 ---------------------------------------------------------
Outcome tv_window_decay() {
  TvWindowParams p;
  p.lambda = 1e-3;
  p.T = 1.0;
  p.C = 2.0;
  p.n_multipliers = {4.0, 16.0};
  p.n_samples = 40000;
  p.seed = 808;
  p.tol_uniform = 0.05;
  const ExperimentReport rep = tv_window(lazy4(), linear_pot(), p);
  double tv_first = 0.0, tv_last = 0.0, tv_uniform = 0.0;
  for (const auto& [k, v] : rep.metrics) {
    if (k == "tv_first") tv_first = v;
    if (k == "tv_last") tv_last = v;
    if (k == "tv_uniform") tv_uniform = v;
  }
  Outcome out;
  out.pass = tv_last < tv_first && tv_uniform < 0.05;
  out.detail = fmt("window TV %.4f at N=4TH^2 vs %.4f at N=16TH^2 (must decay); "
                   "endpoint uniformity TV %.4f (tol 0.05)",
                   tv_first, tv_last, tv_uniform);
  return out;
}

// --- criterion 9 ---------------------------------------------------------
Outcome dv_sign_structure() {
  const GroundStateChain chain =
      doob_transform(compute_spectrum(lazy4(), linear_pot(), 1e-3));
  const TransferSpectrum& s = chain.spectrum();
  const std::vector<double>& mu = chain.mu();

  const double at_phi = std::abs(dv_inner(s, mu, s.phi));

  Rng rng(909);
  double worst_sign = -1e300;
  std::vector<double> u(mu.size());
  for (int rep = 0; rep < 100; ++rep) {
    for (std::size_t i = 0; i < u.size(); ++i)
      u[i] = s.phi[i] * std::exp(2.0 * (2.0 * rng.uniform() - 1.0));
    worst_sign = std::max(worst_sign, dv_inner(s, mu, u));
  }

  double worst_identity = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> g(mu.size()), meas(mu.size()), ug(mu.size());
    double norm = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] = 0.5 + rng.uniform();
      meas[i] = g[i] * g[i] * mu[i];
      norm += meas[i];
      ug[i] = g[i] * s.phi[i];
    }
    for (double& xx : meas) xx /= norm;
    const double lhs = dv_inner(s, meas, ug);
    const BandedMatrix& pi = chain.pi();
    const BandedMatrix& pis = chain.pi_star();
    double rhs = 0.0;
    const int n = pi.size();
    for (int x = 0; x < n; ++x) {
      const int j0 = std::max(0, x - pi.lower());
      const int j1 = std::min(n - 1, x + pi.upper());
      for (int y = j0; y <= j1; ++y) {
        const double hat = 0.5 * (pi.at(x, y) + (pis.in_band(x, y) ? pis.at(x, y) : 0.0));
        const double d = g[static_cast<std::size_t>(x)] - g[static_cast<std::size_t>(y)];
        rhs += 0.5 * hat * d * d * mu[static_cast<std::size_t>(x)];
      }
    }
    rhs /= norm;
    worst_identity = std::max(worst_identity, std::abs(lhs - rhs));
  }

  Outcome out;
  out.pass = at_phi <= 1e-12 && worst_sign <= 1e-12 && worst_identity <= 1e-10;
  out.detail = fmt("at phi: %.2e (tol 1e-12), max over 100 perturbed u: %.2e (tol 1e-12), "
                   "quadratic identity gap: %.2e (tol 1e-10)",
                   at_phi, worst_sign, worst_identity);
  return out;
}

// --- criterion 10 --------------------------------------------------------
Outcome appendix_scaling() {
  StayPositiveParams sp;
  sp.n_grid = {400, 1600, 6400};
  sp.x = sp.y = 1;
  sp.eta = 2.0;
  sp.band_factor = 2.0;
  const ExperimentReport stay = stay_positive_scaling(lazy4(), sp);

  MeetingParams mp;
  mp.n_grid = {400, 1600, 6400};
  mp.x = 1;
  mp.y = 1;
  mp.z = 2;
  mp.w = 2;
  mp.eta = 2.0;
  mp.n_samples = 4000;
  mp.seed = 1010;
  const ExperimentReport meet = meeting_probability(lazy4(), mp);

  const auto metric = [](const ExperimentReport& r, const std::string& name) {
    for (const auto& [k, v] : r.metrics)
      if (k == name) return v;
    return -1.0;
  };
  Outcome out;
  out.pass = stay.pass() && meet.pass();
  out.detail = fmt("stay-positive ratio band %.4f (tol 2), E[N]/sqrt(n) >= %.3f (floor 0.27), "
                   "E[N^2]/n <= %.3f (cap 0.44), meet - PZ floor >= %.3f (must be >= 0)",
                   metric(stay, "ratio_band"), metric(meet, "min_en_over_sqrt"),
                   metric(meet, "max_en2_over_n"), metric(meet, "min_meet_minus_floor"));
  return out;
}

// --- criterion 11 --------------------------------------------------------
Outcome determinism() {
  const char* cfg_text =
      "experiment = eigen-convergence\n"
      "seed = 1111\n"
      "output = out\n"
      "[kernel]\n"
      "type = lazy-nn\n"
      "a = 0.25\n"
      "[potential]\n"
      "type = linear\n"
      "[eigen-convergence]\n"
      "lambdas = 1e-2, 1e-3\n"
      "n = 4000\n"
      "tol_phi = 0.2\n";
  const Config cfg = Config::parse_string(cfg_text, "acceptance");
  run_from_config(cfg, "acceptance_out/a");
  run_from_config(cfg, "acceptance_out/b");
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  bool same = true;
  for (const char* f : {"metrics.csv", "e_lambda.csv", "phi_convergence.csv", "manifest.json"})
    same = same && slurp(fs::path("acceptance_out/a") / f) ==
                       slurp(fs::path("acceptance_out/b") / f);
  fs::remove_all("acceptance_out");
  Outcome out;
  out.pass = same;
  out.detail = same ? "reruns byte-identical across metrics.csv and all tables"
                    : "rerun outputs differ";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<double> e_errs, phi_errs, c_devs;

  const std::vector<Criterion> criteria = {
      {1, "Airy anchor: discrete ground state matches the closed form", airy_anchor},
      {2, "linear-potential scale law H = lambda^{-1/3}", scale_law},
      {3, "rescaled eigenvalue converges to the ground-state energy",
       [&] { return eigen_value_convergence(e_errs, phi_errs, c_devs); }},
      {4, "eigenfunction and normalization convergence",
       [&]() -> Outcome {
         if (phi_errs.empty()) eigen_value_convergence(e_errs, phi_errs, c_devs);
         bool mono = true;
         for (std::size_t i = 1; i < phi_errs.size(); ++i)
           mono = mono && phi_errs[i] < phi_errs[i - 1];
         Outcome out;
         out.pass = mono && phi_errs.back() < 0.05 && c_devs.back() < 0.05;
         out.detail = fmt("phi errors %.3f > %.3f > %.3f > %.3f (tol 0.05 at 1e-5), "
                          "|c/h - 1| = %.2e (tol 0.05)",
                          phi_errs[0], phi_errs[1], phi_errs[2], phi_errs[3], c_devs.back());
         return out;
       }},
      {5, "micro-scale bridge equals brute-force enumeration", micro_oracle},
      {6, "ground-state chain invariance, reversal and ergodic averages", chain_correctness},
      {7, "finite-dimensional distributions approach the diffusion", fdd_convergence},
      {8, "bridge window law approaches the stationary chain in N", tv_window_decay},
      {9, "Donsker-Varadhan sign structure and quadratic identity", dv_sign_structure},
      {10, "stay-positive scaling, intersection moments, Paley-Zygmund floor",
       appendix_scaling},
      {11, "experiment reruns are byte-identical", determinism},
  };

  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.body();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %2d [%6.1fs] %s: %s\n", out.pass ? "PASS" : "FAIL", c.id, dt,
                c.name.c_str(), out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  if (only == 0)
    std::printf("%s: %d of %zu criteria failed\n", failures == 0 ? "PASS" : "FAIL", failures,
                criteria.size());
  return failures == 0 ? 0 : 1;
}
