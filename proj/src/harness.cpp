#include "tiltwalk/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tiltwalk {

bool ExperimentReport::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

void ExperimentReport::add_param(const std::string& k, const std::string& v) {
  params.emplace_back(k, v);
}

void ExperimentReport::add_metric(const std::string& k, double v) { metrics.emplace_back(k, v); }

void ExperimentReport::check_lt(const std::string& name, double value, double threshold) {
  checks.push_back({name, value, threshold, "<", value < threshold});
}

void ExperimentReport::check_le(const std::string& name, double value, double threshold) {
  checks.push_back({name, value, threshold, "<=", value <= threshold});
}

void ExperimentReport::check_ge(const std::string& name, double value, double threshold) {
  checks.push_back({name, value, threshold, ">=", value >= threshold});
}

const std::vector<ExperimentInfo>& experiment_catalog() {
  static const std::vector<ExperimentInfo> cat = {
      {"eigen-convergence",
       {"grid_project", "eigen_convergence"},
       "Leading eigenvalue and eigenfunctions of the tilted transfer operator against the "
       "ground state of the limiting Sturm-Liouville problem, across a lambda grid; the "
       "rescaled eigenvalue e = -H^2 log E converges to the ground-state energy e0 and "
       "the normalization ratio c/h converges to 1.",
       {"relative eigenvalue error at the smallest lambda < tol_e",
        "eigenvalue error decreases along the lambda grid",
        "L2 eigenfunction distance to the projected ground state < tol_phi, decreasing",
        "|c/h - 1| < tol_c at the smallest lambda"},
       {"e_rel_err", "e_err_monotone", "phi_err", "phi_err_monotone", "c_over_h_dev"}},
      {"fdd",
       {"fdd_compare"},
       "Finite-dimensional distributions of a rescaled source (stationary ground-state "
       "chain, bridge mid-window, or simulated diffusion) against the stationary law of "
       "the limiting diffusion: one-time marginals against the squared ground state by "
       "Kolmogorov-Smirnov and Wasserstein-1 distance, two-time joints against the "
       "simulated diffusion by binned total variation on a square grid.",
       {"largest marginal KS distance < tol_ks", "largest pair TV < tol_tv"},
       {"ks_max", "w1_max", "tv_max"}},
      {"tightness",
       {"tightness_probe"},
       "Modulus-of-continuity probabilities P(max_{t <= delta} |x(t) - x(0)| > eps) of the "
       "rescaled stationary chain: estimates shrink with delta, and estimate/delta stays "
       "bounded uniformly over the lambda grid.",
       {"estimates nondecreasing in delta (exact, nested events)",
        "estimate ratio across lambdas at the reference delta <= uniformity_factor",
        "max over the grid of estimate/delta <= est_over_delta_bound"},
       {"lambda_ratio", "max_est_over_delta", "monotone_violation"}},
      {"tv-window",
       {"tv_window"},
       "Distance between the centered window law of the tilted bridge and the stationary "
       "ground-state chain, measured as the largest per-time binned total variation over "
       "five window times; the distance decays as N grows at fixed lambda and is uniform "
       "over boundary heights below C H.",
       {"TV at the largest N below TV at the smallest N",
        "TV between bridge window laws for different admissible endpoints < tol_uniform",
        "coarser binning does not exceed the finer binning by more than 0.01"},
       {"tv_first", "tv_last", "tv_uniform", "coarse_fine_gap"}},
      {"stay-positive",
       {"stay_positive_scaling"},
       "Exact dynamic-programming probabilities that a random-walk bridge stays positive "
       "inside a tube of height 2 eta sqrt(n): the ratio p n^{3/2} / (x y) is bounded "
       "above and below by constants across the n grid, and removing the tube cap changes "
       "the probability by a bounded factor.",
       {"max/min of the scaled ratio across the n grid <= band_factor",
        "uncapped/capped probability ratio <= cap_factor_bound"},
       {"ratio_band", "max_cap_factor"}},
      {"meeting",
       {"meeting_probability"},
       "Two independent confined bridges sampled exactly: the number of intersections in "
       "the middle third below eta sqrt(n) has mean >= c sqrt(n) and second moment <= C n, "
       "and the meeting probability dominates the Paley-Zygmund floor computed from those "
       "moments.",
       {"min over n of E[N]/sqrt(n) >= en_over_sqrt_lower",
        "max over n of E[N^2]/n <= en2_over_n_upper",
        "meeting probability >= Paley-Zygmund floor at every n"},
       {"min_en_over_sqrt", "max_en2_over_n", "min_meet_minus_floor"}},
      {"eta-good",
       {"eta_good_census"},
       "Classification of length-H^2 time blocks for two independently sampled bridges: "
       "an interval is eta-good when both paths stay below 2 eta H and sit below eta H at "
       "its endpoints; a positive fraction of every third interval is eta-good, stably "
       "across seeds.",
       {"min over replicas of the eta-good fraction >= min_fraction"},
       {"min_fraction"}},
  };
  return cat;
}

const ExperimentInfo* find_experiment(const std::string& tag) {
  for (const auto& e : experiment_catalog())
    if (e.tag == tag) return &e;
  return nullptr;
}

void validate_report(const ExperimentReport& report) {
  const ExperimentInfo* info = find_experiment(report.tag);
  if (!info) throw std::runtime_error("validate_report: unknown experiment tag " + report.tag);
  std::map<std::string, int> counts;
  for (const auto& [k, v] : report.metrics) ++counts[k];
  for (const auto& name : info->metrics) {
    const auto it = counts.find(name);
    if (it == counts.end() || it->second != 1)
      throw std::runtime_error("validate_report: declared metric '" + name +
                               "' must appear exactly once in " + report.tag);
    counts.erase(it);
  }
  if (!counts.empty())
    throw std::runtime_error("validate_report: undeclared metric '" + counts.begin()->first +
                             "' in " + report.tag);
}

double ContinuumRef::phi0_at(double r) const {
  if (r <= 0.0 || r >= fs.R) return 0.0;
  const double u = r / fs.dr;
  const std::size_t i = static_cast<std::size_t>(u);
  const double w = u - static_cast<double>(i);
  return (1.0 - w) * fs.phi0[i] + w * fs.phi0[i + 1];
}

ContinuumRef continuum_reference(double sigma2, const PotentialFamily& pot, double R, int n,
                                 int k, bool prefer_airy) {
  ContinuumRef ref;
  ref.sigma2 = sigma2;
  if (prefer_airy && pot.kind == PotentialFamily::Kind::Linear) {
    const AiryGroundState gs = airy_ground_state(sigma2);
    ref.fs = make_fs_model(gs, R, n, k);
    ref.e0 = gs.e0;
    ref.source = "airy";
  } else {
    const SturmLiouvilleSpectrum sl = sl_solve(sigma2, pot.q, pot.name, R, n, k);
    ref.fs = make_fs_model(sl);
    ref.e0 = sl.eigenvalues[0];
    ref.source = "sl";
  }
  ref.eigenvalues = ref.fs.eigenvalues;
  return ref;
}

std::vector<double> grid_project(const std::function<double(double)>& f, const ScaleInfo& scale,
                                 int M) {
  static const double nodes[5] = {0.0, 0.5384693101056831, -0.5384693101056831,
                                  0.9061798459386640, -0.9061798459386640};
  static const double weights[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                    0.2369268850561891, 0.2369268850561891};
  std::vector<double> out(static_cast<std::size_t>(M));
  const double h = scale.h;
  for (int x = 1; x <= M; ++x) {
    const double c = (static_cast<double>(x) - 0.5) * h;
    double acc = 0.0;
    for (int i = 0; i < 5; ++i) acc += weights[i] * f(c + 0.5 * h * nodes[i]);
    out[static_cast<std::size_t>(x - 1)] = 0.5 * acc;
  }
  return out;
}

ExperimentReport eigen_convergence(const WalkKernel& kernel, const PotentialFamily& pot,
                                   const EigenConvergenceParams& p) {
  if (p.lambdas.size() < 2)
    throw std::invalid_argument("eigen_convergence: need at least two lambdas");
  for (std::size_t i = 1; i < p.lambdas.size(); ++i)
    if (!(p.lambdas[i] < p.lambdas[i - 1]))
      throw std::invalid_argument("eigen_convergence: lambdas must decrease");

  const ContinuumRef ref =
      continuum_reference(kernel.sigma2, pot, p.R, p.n, p.k, p.prefer_airy);

  ExperimentReport rep;
  rep.tag = "eigen-convergence";
  rep.add_param("kernel", kernel.name);
  rep.add_param("potential", pot.name);
  rep.add_param("continuum_source", ref.source);

  Table te{"e_lambda", {"lambda", "H", "E", "e", "err_vs_continuum"}, {}};
  Table tp{"phi_convergence", {"lambda", "phi_err", "c_over_h"}, {}};
  std::vector<double> e_errs, phi_errs;
  double c_dev_last = 0.0;
  for (std::size_t li = 0; li < p.lambdas.size(); ++li) {
    const double lambda = p.lambdas[li];
    const TransferSpectrum spec = compute_spectrum(kernel, pot, lambda);
    const std::vector<double> rho =
        grid_project([&ref](double r) { return ref.phi0_at(r); }, spec.scale, spec.M);
    double acc = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      const double d = spec.phi[i] - rho[i];
      acc += d * d;
    }
    const double phi_err = std::sqrt(spec.scale.h * acc);
    const double e_err = std::abs(spec.e - ref.e0);
    const double c_over_h = spec.c / spec.scale.h;
    e_errs.push_back(e_err);
    phi_errs.push_back(phi_err);
    c_dev_last = std::abs(c_over_h - 1.0);
    te.rows.push_back({lambda, spec.scale.H, spec.E, spec.e, e_err});
    tp.rows.push_back({lambda, phi_err, c_over_h});
    if (p.dump_spectra)
      save_spectrum(spec, p.dump_dir + "/spectrum_" + std::to_string(li) + ".txt");
  }
  rep.tables.push_back(std::move(te));
  rep.tables.push_back(std::move(tp));

  const auto monotone = [](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (!(v[i] < v[i - 1])) return 0.0;
    return 1.0;
  };
  rep.add_metric("e_rel_err", e_errs.back() / ref.e0);
  rep.add_metric("e_err_monotone", monotone(e_errs));
  rep.add_metric("phi_err", phi_errs.back());
  rep.add_metric("phi_err_monotone", monotone(phi_errs));
  rep.add_metric("c_over_h_dev", c_dev_last);
  rep.check_lt("e_rel_err", e_errs.back() / ref.e0, p.tol_e);
  rep.check_ge("e_err_monotone", monotone(e_errs), 1.0);
  rep.check_lt("phi_err", phi_errs.back(), p.tol_phi);
  rep.check_ge("phi_err_monotone", monotone(phi_errs), 1.0);
  rep.check_lt("c_over_h_dev", c_dev_last, p.tol_c);
  validate_report(rep);
  return rep;
}

namespace {

double evolve_fs_state(const FSDiffusionModel& m, double x, double time, double dt, Rng& rng) {
  const long steps = std::lround(time / dt);
  const double noise = std::sqrt(m.sigma2 * dt);
  for (long s = 0; s < steps; ++s) {
    x += m.drift_at(x) * dt + noise * rng.gaussian();
    if (x < 0.0) x = -x;
    if (x > m.R) x = 2.0 * m.R - x;
    if (x < 0.0 || x > m.R) x = std::clamp(x, 0.0, m.R);
  }
  return x;
}

}  // namespace

ExperimentReport fdd_compare(const WalkKernel& kernel, const PotentialFamily& pot,
                             const FddParams& p) {
  if (p.n_samples < 1000)
    throw std::invalid_argument("fdd_compare: fewer than 1000 samples requested");
  if (p.times.empty()) throw std::invalid_argument("fdd_compare: no times given");
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    if (p.times[i] < 0.0) throw std::invalid_argument("fdd_compare: times must be nonnegative");
    if (i > 0 && !(p.times[i] > p.times[i - 1]))
      throw std::invalid_argument("fdd_compare: times must increase");
  }

  const ScaleInfo scale = solve_scale(pot, p.lambda);
  const ContinuumRef ref = continuum_reference(kernel.sigma2, pot, p.R, p.n, p.k,
                                               pot.kind == PotentialFamily::Kind::Linear);
  const double dt = 1e-4 * ref.fs.char_time();

  const std::size_t nt = p.times.size();
  const std::size_t ns = static_cast<std::size_t>(p.n_samples);
  std::vector<std::vector<double>> source_vals(nt, std::vector<double>(ns));
  long resolved_bridge_N = 0;
  double bridge_log_z = 0.0;

  if (p.source == FddSource::Chain || p.source == FddSource::Bridge) {
    std::vector<long> idx(nt);
    for (std::size_t j = 0; j < nt; ++j)
      idx[j] = std::lround(p.times[j] * scale.H * scale.H);
    if (p.source == FddSource::Chain) {
      GroundStateChain chain(compute_spectrum(kernel, pot, p.lambda));
      Rng rng(p.seed, 1);
      for (std::size_t s = 0; s < ns; ++s) {
        int x = chain.sample_mu(rng);
        long pos = 0;
        for (std::size_t j = 0; j < nt; ++j) {
          while (pos < idx[j]) {
            x = chain.step(x, rng);
            ++pos;
          }
          source_vals[j][s] = scale.h * static_cast<double>(x);
        }
      }
    } else {
      long N = p.bridge_N;
      if (N == 0) N = std::lround(8.0 * (1.0 + p.times.back()) * scale.H * scale.H);
      if (static_cast<double>(N) <= (p.times.back() + 1.0) * scale.H * scale.H)
        throw std::invalid_argument("fdd_compare: bridge_N too small for the requested times");
      const BridgeEnsemble bridge =
          make_bridge(kernel, pot, p.lambda, p.bridge_u, p.bridge_v, N);
      resolved_bridge_N = N;
      bridge_log_z = bridge.dp.log_partition();
      Rng rng(p.seed, 1);
      for (std::size_t s = 0; s < ns; ++s) {
        const LatticePath path = bridge.dp.sample(rng, -N);
        for (std::size_t j = 0; j < nt; ++j)
          source_vals[j][s] =
              scale.h * static_cast<double>(path.values[static_cast<std::size_t>(N + idx[j])]);
      }
    }
  } else {
    Rng rng(p.seed, 1);
    for (std::size_t s = 0; s < ns; ++s) {
      double x = ref.fs.quantile(rng.uniform());
      double t_prev = 0.0;
      for (std::size_t j = 0; j < nt; ++j) {
        x = evolve_fs_state(ref.fs, x, p.times[j] - t_prev, dt, rng);
        t_prev = p.times[j];
        source_vals[j][s] = x;
      }
    }
  }

  // Independent diffusion reference for the pair comparison.
  std::vector<std::vector<double>> fs_vals(nt, std::vector<double>(ns));
  {
    Rng rng(p.seed, 1000);
    for (std::size_t s = 0; s < ns; ++s) {
      double x = ref.fs.quantile(rng.uniform());
      double t_prev = 0.0;
      for (std::size_t j = 0; j < nt; ++j) {
        x = evolve_fs_state(ref.fs, x, p.times[j] - t_prev, dt, rng);
        t_prev = p.times[j];
        fs_vals[j][s] = x;
      }
    }
  }

  ExperimentReport rep;
  rep.tag = "fdd";
  rep.add_param("kernel", kernel.name);
  rep.add_param("potential", pot.name);
  rep.add_param("source", p.source == FddSource::Chain
                              ? "chain"
                              : (p.source == FddSource::Bridge ? "bridge" : "fs"));
  rep.add_param("continuum_source", ref.source);
  if (p.source == FddSource::Bridge) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%ld", resolved_bridge_N);
    rep.add_param("bridge_N", buf);
    std::snprintf(buf, sizeof buf, "%.17g", bridge_log_z);
    rep.add_param("bridge_log_z", buf);
  }
  if (p.dump_samples > 0) {
    for (std::size_t j = 0; j < nt; ++j) {
      std::ofstream out(p.dump_dir + "/samples_t" + std::to_string(j) + ".txt");
      const std::size_t limit = std::min<std::size_t>(ns, static_cast<std::size_t>(p.dump_samples));
      for (std::size_t i = 0; i < limit; ++i) out << source_vals[j][i] << '\n';
    }
  }

  const double r_hi = ref.fs.quantile(1.0 - 1e-4);
  // Lattice-aligned bins avoid aliasing between atoms and bin edges.
  const double bin_w =
      std::max(1.0, std::ceil(r_hi / (static_cast<double>(p.tv_bins) * scale.h))) * scale.h;

  Table tm{"marginals", {"time", "ks", "w1"}, {}};
  double ks_max = 0.0, w1_max = 0.0;
  for (std::size_t j = 0; j < nt; ++j) {
    const EmpiricalDistribution emp(source_vals[j]);
    const double ks = ks_distance(emp, [&ref](double r) { return ref.cdf_at(r); });
    const double w1 =
        wasserstein1(emp, [&ref](double r) { return ref.cdf_at(r); }, 0.0, ref.fs.R);
    ks_max = std::max(ks_max, ks);
    w1_max = std::max(w1_max, w1);
    tm.rows.push_back({p.times[j], ks, w1});
  }
  rep.tables.push_back(std::move(tm));

  Table tj{"pair_tv", {"t1", "t2", "tv"}, {}};
  double tv_max = 0.0;
  for (std::size_t j = 0; j + 1 < nt; ++j) {
    std::vector<std::pair<double, double>> a(ns), b(ns);
    for (std::size_t s = 0; s < ns; ++s) {
      a[s] = {source_vals[j][s], source_vals[j + 1][s]};
      b[s] = {fs_vals[j][s], fs_vals[j + 1][s]};
    }
    const double tv = binned_tv2(a, b, 0.0, bin_w, p.tv_bins);
    tv_max = std::max(tv_max, tv);
    tj.rows.push_back({p.times[j], p.times[j + 1], tv});
  }
  if (nt < 2) tj.rows.push_back({0.0, 0.0, 0.0});
  rep.tables.push_back(std::move(tj));

  rep.add_metric("ks_max", ks_max);
  rep.add_metric("w1_max", w1_max);
  rep.add_metric("tv_max", tv_max);
  rep.check_lt("ks_max", ks_max, p.tol_ks);
  rep.check_lt("tv_max", tv_max, p.tol_tv);
  validate_report(rep);
  return rep;
}

ExperimentReport tightness_probe(const WalkKernel& kernel, const PotentialFamily& pot,
                                 const TightnessParams& p) {
  if (p.lambdas.empty() || p.deltas.empty())
    throw std::invalid_argument("tightness_probe: empty grids");
  if (p.n_samples < 100) throw std::invalid_argument("tightness_probe: too few samples");

  std::vector<double> deltas = p.deltas;
  std::sort(deltas.begin(), deltas.end());

  ExperimentReport rep;
  rep.tag = "tightness";
  rep.add_param("kernel", kernel.name);
  rep.add_param("potential", pot.name);

  Table t{"tightness", {"lambda", "delta", "estimate", "estimate_over_delta"}, {}};
  double max_ratio = 0.0;
  double monotone_violation = 0.0;
  std::vector<double> ref_estimates;
  for (std::size_t li = 0; li < p.lambdas.size(); ++li) {
    const double lambda = p.lambdas[li];
    GroundStateChain chain(compute_spectrum(kernel, pot, lambda));
    const double H = chain.spectrum().scale.H;
    std::vector<long> steps(deltas.size());
    for (std::size_t d = 0; d < deltas.size(); ++d)
      steps[d] = static_cast<long>(std::ceil(deltas[d] * H * H));
    const long max_steps = steps.back();
    const double bar = p.epsilon * H;

    std::vector<long> exceed(deltas.size(), 0);
    Rng rng(p.seed, li);
    for (long s = 0; s < p.n_samples; ++s) {
      const int x0 = chain.sample_mu(rng);
      int x = x0;
      double runmax = 0.0;
      std::size_t d = 0;
      for (long k = 1; k <= max_steps && d < deltas.size(); ++k) {
        x = chain.step(x, rng);
        runmax = std::max(runmax, std::abs(static_cast<double>(x - x0)));
        while (d < deltas.size() && k == steps[d]) {
          if (runmax > bar) ++exceed[d];
          ++d;
        }
      }
      for (; d < deltas.size(); ++d)
        if (runmax > bar) ++exceed[d];
    }
    double prev = -1.0;
    double ref_est = 0.0;
    for (std::size_t d = 0; d < deltas.size(); ++d) {
      const double est = static_cast<double>(exceed[d]) / static_cast<double>(p.n_samples);
      t.rows.push_back({lambda, deltas[d], est, est / deltas[d]});
      max_ratio = std::max(max_ratio, est / deltas[d]);
      if (prev >= 0.0) monotone_violation = std::max(monotone_violation, prev - est);
      prev = est;
      if (std::abs(deltas[d] - p.delta_ref) < 1e-12) ref_est = est;
    }
    ref_estimates.push_back(ref_est);
  }
  rep.tables.push_back(std::move(t));

  double lo = 1e300, hi = 0.0;
  for (double e : ref_estimates) {
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  const double lambda_ratio = (hi == 0.0) ? 1.0 : (lo == 0.0 ? 1e300 : hi / lo);
  rep.add_metric("lambda_ratio", lambda_ratio);
  rep.add_metric("max_est_over_delta", max_ratio);
  rep.add_metric("monotone_violation", monotone_violation);
  rep.check_le("monotone_violation", monotone_violation, 0.0);
  rep.check_le("lambda_ratio", lambda_ratio, p.uniformity_factor);
  rep.check_le("max_est_over_delta", max_ratio, p.est_over_delta_bound);
  validate_report(rep);
  return rep;
}

namespace {

// Max over window times of the binned TV between two per-time sample sets of
// lattice states.
double lattice_window_tv(const std::vector<std::vector<int>>& a,
                         const std::vector<std::vector<int>>& b, int sites_per_bin, int bins) {
  double worst = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    std::vector<double> pa(static_cast<std::size_t>(bins), 0.0), pb = pa;
    for (int x : a[t]) {
      const int k = std::min(bins - 1, (x - 1) / sites_per_bin);
      pa[static_cast<std::size_t>(k)] += 1.0 / static_cast<double>(a[t].size());
    }
    for (int x : b[t]) {
      const int k = std::min(bins - 1, (x - 1) / sites_per_bin);
      pb[static_cast<std::size_t>(k)] += 1.0 / static_cast<double>(b[t].size());
    }
    double tv = 0.0;
    for (int k = 0; k < bins; ++k)
      tv += std::abs(pa[static_cast<std::size_t>(k)] - pb[static_cast<std::size_t>(k)]);
    worst = std::max(worst, 0.5 * tv);
  }
  return worst;
}

}  // namespace

ExperimentReport tv_window(const WalkKernel& kernel, const PotentialFamily& pot,
                           const TvWindowParams& p) {
  if (p.n_samples < 100) throw std::invalid_argument("tv_window: too few samples");
  if (p.n_multipliers.size() < 2)
    throw std::invalid_argument("tv_window: need at least two N multipliers");
  const ScaleInfo scale = solve_scale(pot, p.lambda);
  const double H2 = scale.H * scale.H;
  const int u2 = p.u2 > 0 ? p.u2 : static_cast<int>(scale.H);
  const int v2 = p.v2 > 0 ? p.v2 : static_cast<int>(scale.H);
  for (int b : {p.u, p.v, u2, v2})
    if (b < 1 || static_cast<double>(b) > p.C * scale.H)
      throw std::invalid_argument("tv_window: boundary heights must lie in [1, C H]");

  const long half = static_cast<long>(std::ceil(p.T * H2));
  const std::vector<long> offsets = {-half, -half / 2, 0, half / 2, half};

  // Stationary chain window samples.
  GroundStateChain chain(compute_spectrum(kernel, pot, p.lambda));
  std::vector<std::vector<int>> chain_vals(offsets.size());
  {
    Rng rng(p.seed, 7);
    for (long s = 0; s < p.n_samples; ++s) {
      int x = chain.sample_mu(rng);
      std::size_t oi = 0;
      for (long k = 0; k <= 2 * half; ++k) {
        if (k > 0) x = chain.step(x, rng);
        if (oi < offsets.size() && k == offsets[oi] + half) {
          chain_vals[oi].push_back(x);
          ++oi;
        }
      }
    }
  }

  const int cover = static_cast<int>(std::ceil(4.0 * scale.H));
  const int sites_per_bin = std::max(1, (cover + p.bins - 1) / p.bins);
  const int coarse_bins = std::max(2, p.bins / 2);
  const int coarse_sites = std::max(1, (cover + coarse_bins - 1) / coarse_bins);

  const auto sample_bridge_window = [&](int bu, int bv, long N, std::uint64_t stream,
                                        double* log_z, int dump) {
    const BridgeEnsemble bridge = make_bridge(kernel, pot, p.lambda, bu, bv, N);
    if (log_z) *log_z = bridge.dp.log_partition();
    std::vector<std::vector<int>> vals(offsets.size());
    Rng rng(p.seed, stream);
    for (long s = 0; s < p.n_samples; ++s) {
      const LatticePath path = bridge.dp.sample(rng, -N);
      if (s < dump)
        save_path(path, scale, p.seed,
                  p.dump_dir + "/bridge_path_" + std::to_string(s) + ".txt");
      for (std::size_t oi = 0; oi < offsets.size(); ++oi)
        vals[oi].push_back(path.values[static_cast<std::size_t>(N + offsets[oi])]);
    }
    return vals;
  };

  ExperimentReport rep;
  rep.tag = "tv-window";
  rep.add_param("kernel", kernel.name);
  rep.add_param("potential", pot.name);

  Table t{"tv", {"N", "log_z", "tv", "tv_coarse"}, {}};
  std::vector<double> tvs;
  double coarse_fine_gap = -1.0;
  std::vector<std::vector<int>> last_bridge_vals;
  long last_N = 0;
  for (std::size_t mi = 0; mi < p.n_multipliers.size(); ++mi) {
    const long N = std::lround(p.n_multipliers[mi] * p.T * H2);
    if (N < 2 * half)
      throw std::invalid_argument("tv_window: N too small relative to T H^2");
    double log_z = 0.0;
    const bool last = mi + 1 == p.n_multipliers.size();
    const auto vals =
        sample_bridge_window(p.u, p.v, N, 10 + mi, &log_z, last ? p.dump_paths : 0);
    const double tv = lattice_window_tv(vals, chain_vals, sites_per_bin, p.bins);
    const double tvc = lattice_window_tv(vals, chain_vals, coarse_sites, coarse_bins);
    tvs.push_back(tv);
    coarse_fine_gap = std::max(coarse_fine_gap, tvc - tv);
    t.rows.push_back({static_cast<double>(N), log_z, tv, tvc});
    if (last) {
      last_bridge_vals = vals;
      last_N = N;
    }
  }
  rep.tables.push_back(std::move(t));

  const auto vals2 = sample_bridge_window(u2, v2, last_N, 99, nullptr, 0);
  const double tv_uniform = lattice_window_tv(last_bridge_vals, vals2, sites_per_bin, p.bins);

  rep.add_metric("tv_first", tvs.front());
  rep.add_metric("tv_last", tvs.back());
  rep.add_metric("tv_uniform", tv_uniform);
  rep.add_metric("coarse_fine_gap", coarse_fine_gap);
  rep.check_lt("tv_last_below_first", tvs.back(), tvs.front());
  rep.check_lt("tv_uniform", tv_uniform, p.tol_uniform);
  rep.check_le("coarse_fine_gap", coarse_fine_gap, 0.01);
  validate_report(rep);
  return rep;
}

ExperimentReport stay_positive_scaling(const WalkKernel& kernel, const StayPositiveParams& p) {
  if (p.n_grid.empty()) throw std::invalid_argument("stay_positive_scaling: empty n grid");

  ExperimentReport rep;
  rep.tag = "stay-positive";
  rep.add_param("kernel", kernel.name);

  Table t{"stay_positive", {"n", "m", "cap", "log_p", "ratio", "cap_factor"}, {}};
  double rmin = 1e300, rmax = 0.0, max_cap_factor = 0.0;
  for (long n : p.n_grid) {
    const double sq = std::sqrt(static_cast<double>(n));
    if (p.x < 1 || p.y < 1 || static_cast<double>(p.x) > p.eta * sq ||
        static_cast<double>(p.y) > p.eta * sq)
      throw std::invalid_argument("stay_positive_scaling: endpoints must lie in [1, eta sqrt n]");
    long m = std::lround(p.m_over_n * static_cast<double>(n));
    m = std::clamp(m, (n + 2) / 3, n);
    if (std::abs(p.m_over_n * static_cast<double>(n) - static_cast<double>(m)) > 1.0)
      throw std::invalid_argument("stay_positive_scaling: m must lie in [n/3, n]");
    const int cap = static_cast<int>(std::ceil(2.0 * p.eta * sq)) - 1;
    const long L = m - 1;
    const FreeLogZ base = free_bridge_log_partition(kernel, cap, p.x, p.y, L);
    if (base.empty)
      throw std::runtime_error("stay_positive_scaling: no admissible path at n=" +
                               std::to_string(n));
    const double ratio =
        std::exp(base.log_z + 1.5 * std::log(static_cast<double>(n)) -
                 std::log(static_cast<double>(p.x) * static_cast<double>(p.y)));
    // Lift the tube cap until the partition function stabilizes.
    double uncapped = base.log_z;
    int capk = cap;
    for (int rep_i = 0; rep_i < 6; ++rep_i) {
      capk *= 2;
      const FreeLogZ wide = free_bridge_log_partition(kernel, capk, p.x, p.y, L);
      if (std::abs(wide.log_z - uncapped) < 1e-10) {
        uncapped = wide.log_z;
        break;
      }
      uncapped = wide.log_z;
    }
    const double cap_factor = std::exp(uncapped - base.log_z);
    rmin = std::min(rmin, ratio);
    rmax = std::max(rmax, ratio);
    max_cap_factor = std::max(max_cap_factor, cap_factor);
    t.rows.push_back({static_cast<double>(n), static_cast<double>(m), static_cast<double>(cap),
                      base.log_z, ratio, cap_factor});
  }
  rep.tables.push_back(std::move(t));

  const double band = rmax / rmin;
  rep.add_metric("ratio_band", band);
  rep.add_metric("max_cap_factor", max_cap_factor);
  rep.check_le("ratio_band", band, p.band_factor);
  rep.check_le("max_cap_factor", max_cap_factor, p.cap_factor_bound);
  validate_report(rep);
  return rep;
}

ExperimentReport meeting_probability(const WalkKernel& kernel, const MeetingParams& p) {
  if (p.n_grid.empty()) throw std::invalid_argument("meeting_probability: empty n grid");
  if (p.n_samples < 100) throw std::invalid_argument("meeting_probability: too few samples");

  ExperimentReport rep;
  rep.tag = "meeting";
  rep.add_param("kernel", kernel.name);

  Table t{"meeting",
          {"n", "p_meet", "en_exact", "en_mc", "en2_mc", "en_over_sqrt", "en2_over_n", "pz_floor"},
          {}};
  double min_en = 1e300, max_en2 = 0.0, min_gap = 1e300;
  for (std::size_t ni = 0; ni < p.n_grid.size(); ++ni) {
    const long n = p.n_grid[ni];
    const double sq = std::sqrt(static_cast<double>(n));
    const int cap = static_cast<int>(std::ceil(2.0 * p.eta * sq)) - 1;
    const int thresh = static_cast<int>(p.eta * sq);
    for (int b : {p.x, p.y, p.z, p.w})
      if (b < 1 || b > thresh)
        throw std::invalid_argument("meeting_probability: endpoints must lie in [1, eta sqrt n]");
    const int L = static_cast<int>(n - 1);
    const BridgeDp dp1 = make_free_bridge(kernel, cap, p.x, p.y, L);
    const BridgeDp dp2 = make_free_bridge(kernel, cap, p.z, p.w, L);

    const long ell_lo = (n + 2) / 3, ell_hi = (2 * n) / 3;
    double en_exact = 0.0;
    for (long ell = ell_lo; ell <= ell_hi; ++ell) {
      const std::vector<double> m1 = dp1.marginal(static_cast<int>(ell - 1));
      const std::vector<double> m2 = dp2.marginal(static_cast<int>(ell - 1));
      for (int s = 1; s <= thresh && s <= cap; ++s)
        en_exact += m1[static_cast<std::size_t>(s - 1)] * m2[static_cast<std::size_t>(s - 1)];
    }

    Rng rng(p.seed, ni);
    long meets = 0;
    double en_mc = 0.0, en2_mc = 0.0;
    for (long s = 0; s < p.n_samples; ++s) {
      const LatticePath pa = dp1.sample(rng, 1);
      const LatticePath pb = dp2.sample(rng, 1);
      bool meet = false;
      long count = 0;
      for (std::size_t i = 0; i < pa.values.size(); ++i) {
        if (pa.values[i] == pb.values[i]) {
          meet = true;
          const long ell = 1 + static_cast<long>(i);
          if (ell >= ell_lo && ell <= ell_hi && pa.values[i] <= thresh) ++count;
        }
      }
      if (meet) ++meets;
      en_mc += static_cast<double>(count);
      en2_mc += static_cast<double>(count) * static_cast<double>(count);
    }
    const double nsd = static_cast<double>(p.n_samples);
    const double p_meet = static_cast<double>(meets) / nsd;
    en_mc /= nsd;
    en2_mc /= nsd;
    const double pz = paley_zygmund_floor(en_mc, en2_mc, 0.5);
    min_en = std::min(min_en, en_mc / sq);
    max_en2 = std::max(max_en2, en2_mc / static_cast<double>(n));
    min_gap = std::min(min_gap, p_meet - pz);
    t.rows.push_back({static_cast<double>(n), p_meet, en_exact, en_mc, en2_mc, en_mc / sq,
                      en2_mc / static_cast<double>(n), pz});
  }
  rep.tables.push_back(std::move(t));

  rep.add_metric("min_en_over_sqrt", min_en);
  rep.add_metric("max_en2_over_n", max_en2);
  rep.add_metric("min_meet_minus_floor", min_gap);
  rep.check_ge("min_en_over_sqrt", min_en, p.en_over_sqrt_lower);
  rep.check_le("max_en2_over_n", max_en2, p.en2_over_n_upper);
  rep.check_ge("min_meet_minus_floor", min_gap, 0.0);
  validate_report(rep);
  return rep;
}

EtaGoodCounts eta_good_census(const LatticePath& p1, const LatticePath& p2, double eta,
                              double H) {
  if (p1.start_index != p2.start_index || p1.values.size() != p2.values.size())
    throw std::invalid_argument("eta_good_census: paths must share the time window");
  const long len = std::max<long>(1, std::lround(H * H));
  const long m = static_cast<long>(p1.values.size()) / len;
  if (m < 3) throw std::invalid_argument("eta_good_census: window shorter than 3 intervals");

  EtaGoodCounts out;
  out.intervals = static_cast<int>(m);
  const double hi_bar = 2.0 * eta * H;
  const double end_bar = eta * H;
  std::vector<char> good(static_cast<std::size_t>(m), 0);
  std::vector<char> dip1(static_cast<std::size_t>(m), 0), dip2(static_cast<std::size_t>(m), 0);
  for (long k = 0; k < m; ++k) {
    const std::size_t a = static_cast<std::size_t>(k * len);
    const std::size_t b = static_cast<std::size_t>((k + 1) * len - 1);
    int max1 = 0, max2 = 0;
    int min1 = 1 << 30, min2 = 1 << 30;
    for (std::size_t i = a; i <= b; ++i) {
      max1 = std::max(max1, p1.values[i]);
      max2 = std::max(max2, p2.values[i]);
      min1 = std::min(min1, p1.values[i]);
      min2 = std::min(min2, p2.values[i]);
    }
    const bool ends_ok = p1.values[a] < end_bar && p1.values[b] < end_bar &&
                         p2.values[a] < end_bar && p2.values[b] < end_bar;
    const bool g = max1 < hi_bar && max2 < hi_bar && ends_ok;
    good[static_cast<std::size_t>(k)] = g ? 1 : 0;
    if (g) ++out.good;
    if (min1 > end_bar) ++out.far1;
    if (min2 > end_bar) ++out.far2;
    dip1[static_cast<std::size_t>(k)] = min1 < end_bar ? 1 : 0;
    dip2[static_cast<std::size_t>(k)] = min2 < end_bar ? 1 : 0;
    if (k % 3 == 1) {
      ++out.pattern_total;
      if (g) ++out.good_pattern;
    }
  }
  for (long j = 0; 3 * j + 2 < m; ++j) {
    const std::size_t a = static_cast<std::size_t>(3 * j);
    const std::size_t c = static_cast<std::size_t>(3 * j + 2);
    if (dip1[a] && dip2[a] && dip1[c] && dip2[c]) ++out.potentially_good;
  }
  return out;
}

ExperimentReport eta_good_experiment(const WalkKernel& kernel, const PotentialFamily& pot,
                                     const EtaGoodParams& p) {
  if (p.replicas < 1) throw std::invalid_argument("eta_good_experiment: need replicas");
  const ScaleInfo scale = solve_scale(pot, p.lambda);
  const long N = std::lround(p.N_over_H2 * scale.H * scale.H);
  const int u2 = p.u2 > 0 ? p.u2 : static_cast<int>(scale.H);
  const int v2 = p.v2 > 0 ? p.v2 : static_cast<int>(scale.H);
  const BridgeEnsemble b1 = make_bridge(kernel, pot, p.lambda, p.u, p.v, N);
  const BridgeEnsemble b2 = make_bridge(kernel, pot, p.lambda, u2, v2, N);

  ExperimentReport rep;
  rep.tag = "eta-good";
  rep.add_param("kernel", kernel.name);
  rep.add_param("potential", pot.name);

  Table t{"eta_good",
          {"replica", "intervals", "good", "good_pattern", "fraction", "far1", "far2",
           "potentially_good"},
          {}};
  double min_fraction = 1e300;
  for (int r = 0; r < p.replicas; ++r) {
    Rng rng(p.seed, static_cast<std::uint64_t>(r));
    const LatticePath pa = b1.dp.sample(rng, -N);
    const LatticePath pb = b2.dp.sample(rng, -N);
    const EtaGoodCounts c = eta_good_census(pa, pb, p.eta, scale.H);
    const double fraction =
        static_cast<double>(c.good_pattern) / static_cast<double>(std::max(1, c.pattern_total));
    min_fraction = std::min(min_fraction, fraction);
    t.rows.push_back({static_cast<double>(r), static_cast<double>(c.intervals),
                      static_cast<double>(c.good), static_cast<double>(c.good_pattern), fraction,
                      static_cast<double>(c.far1), static_cast<double>(c.far2),
                      static_cast<double>(c.potentially_good)});
  }
  rep.tables.push_back(std::move(t));

  rep.add_metric("min_fraction", min_fraction);
  rep.check_ge("min_fraction", min_fraction, p.min_fraction);
  validate_report(rep);
  return rep;
}

}  // namespace tiltwalk
