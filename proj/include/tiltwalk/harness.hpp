#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "tiltwalk/bridge.hpp"
#include "tiltwalk/chain.hpp"
#include "tiltwalk/continuum.hpp"
#include "tiltwalk/kernel.hpp"
#include "tiltwalk/potential.hpp"
#include "tiltwalk/stats.hpp"

namespace tiltwalk {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string cmp;  // "<", "<=", ">="
  bool pass = false;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
  std::string tag;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<CheckResult> checks;
  std::vector<Table> tables;

  bool pass() const;
  void add_param(const std::string& k, const std::string& v);
  void add_metric(const std::string& k, double v);
  void check_lt(const std::string& name, double value, double threshold);
  void check_le(const std::string& name, double value, double threshold);
  void check_ge(const std::string& name, double value, double threshold);
};

struct ExperimentInfo {
  std::string tag;
  std::vector<std::string> ops;      // harness operations reachable from this tag
  std::string summary;               // what the experiment verifies
  std::vector<std::string> criteria; // human-readable pass criteria
  std::vector<std::string> metrics;  // declared metric names
};

const std::vector<ExperimentInfo>& experiment_catalog();
const ExperimentInfo* find_experiment(const std::string& tag);
// Throws unless every declared metric appears exactly once (and no others).
void validate_report(const ExperimentReport& report);

// Continuum data for (sigma2, q): ground state, spectrum, diffusion model.
struct ContinuumRef {
  double sigma2 = 0.0;
  double e0 = 0.0;
  std::vector<double> eigenvalues;
  FSDiffusionModel fs;
  std::string source;  // "airy" or "sl"

  double phi0_at(double r) const;
  double cdf_at(double r) const { return fs.cdf_at(r); }
};

ContinuumRef continuum_reference(double sigma2, const PotentialFamily& pot, double R, int n,
                                 int k, bool prefer_airy = true);

// Cell averages (1/h) int_{r-h}^{r} f over the rescaled lattice cells,
// r = x h for x = 1..M. A contraction from L2(0, inf) into the lattice space.
std::vector<double> grid_project(const std::function<double(double)>& f, const ScaleInfo& scale,
                                 int M);

struct EigenConvergenceParams {
  std::vector<double> lambdas;  // ordered from largest to smallest
  double R = 30.0;
  int n = 8000;
  int k = 4;
  bool prefer_airy = true;
  double tol_e = 0.05;
  double tol_phi = 0.05;
  double tol_c = 0.05;
  bool dump_spectra = false;
  std::string dump_dir;
};
ExperimentReport eigen_convergence(const WalkKernel& kernel, const PotentialFamily& pot,
                                   const EigenConvergenceParams& p);

enum class FddSource { Chain, Bridge, Fs };

struct FddParams {
  FddSource source = FddSource::Chain;
  double lambda = 1e-4;
  std::vector<double> times = {0.0, 0.5};
  long n_samples = 0;
  std::uint64_t seed = 0;
  double R = 30.0;
  int n = 8000;
  int k = 4;
  long bridge_N = 0;  // 0: 8 * (1 + max time) * H^2
  int bridge_u = 1, bridge_v = 1;
  int tv_bins = 30;
  double tol_ks = 0.02;
  double tol_tv = 0.08;
  long dump_samples = 0;  // marginal sample values written per time
  std::string dump_dir;
};
ExperimentReport fdd_compare(const WalkKernel& kernel, const PotentialFamily& pot,
                             const FddParams& p);

struct TightnessParams {
  std::vector<double> lambdas;
  double epsilon = 0.5;
  std::vector<double> deltas;  // ordered decreasing
  long n_samples = 0;
  std::uint64_t seed = 0;
  double delta_ref = 0.05;
  double uniformity_factor = 3.0;
  double est_over_delta_bound = 1.4;
};
ExperimentReport tightness_probe(const WalkKernel& kernel, const PotentialFamily& pot,
                                 const TightnessParams& p);

struct TvWindowParams {
  double lambda = 1e-3;
  double T = 1.0;
  int u = 1, v = 1;
  int u2 = 0, v2 = 0;  // 0: floor(H)
  std::vector<double> n_multipliers = {4.0, 16.0};
  long n_samples = 0;
  std::uint64_t seed = 0;
  int bins = 20;
  double C = 2.0;
  double tol_uniform = 0.05;
  int dump_paths = 0;  // sampled bridge paths written at the largest N
  std::string dump_dir;
};
ExperimentReport tv_window(const WalkKernel& kernel, const PotentialFamily& pot,
                           const TvWindowParams& p);

struct StayPositiveParams {
  std::vector<long> n_grid;
  int x = 1, y = 1;
  double m_over_n = 1.0;
  double eta = 2.0;
  double band_factor = 2.0;
  double cap_factor_bound = 1.01;
};
ExperimentReport stay_positive_scaling(const WalkKernel& kernel, const StayPositiveParams& p);

struct MeetingParams {
  std::vector<long> n_grid;
  int x = 1, y = 1, z = 1, w = 1;
  double eta = 2.0;
  long n_samples = 0;
  std::uint64_t seed = 0;
  double en_over_sqrt_lower = 0.27;
  double en2_over_n_upper = 0.44;
};
ExperimentReport meeting_probability(const WalkKernel& kernel, const MeetingParams& p);

struct EtaGoodCounts {
  int intervals = 0;        // full intervals in the window
  int good = 0;             // eta-good intervals
  int good_pattern = 0;     // eta-good among every third interval
  int pattern_total = 0;
  int far1 = 0, far2 = 0;   // intervals where a path stays above eta H
  int potentially_good = 0; // triples with both paths dipping below eta H
};

// Classification of length-H^2 time blocks for two paths over a shared window.
EtaGoodCounts eta_good_census(const LatticePath& p1, const LatticePath& p2, double eta, double H);

struct EtaGoodParams {
  double lambda = 1e-4;
  double N_over_H2 = 10.0;
  double eta = 3.0;
  int replicas = 5;
  std::uint64_t seed = 0;
  int u = 1, v = 1;
  int u2 = 0, v2 = 0;  // 0: floor(H)
  double min_fraction = 0.5;
};
ExperimentReport eta_good_experiment(const WalkKernel& kernel, const PotentialFamily& pot,
                                     const EtaGoodParams& p);

}  // namespace tiltwalk
