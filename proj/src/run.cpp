#include "tiltwalk/run.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace tiltwalk {

namespace {

namespace fs = std::filesystem;

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

WalkKernel kernel_from_config(const Config& cfg) {
  const std::string type = cfg.get_string("kernel.type");
  if (type == "lazy-nn") return make_lazy_nn(cfg.get_double("kernel.a"));
  if (type == "weights") return make_weight_kernel(cfg.get_weight_list("kernel.weights"));
  if (type == "truncated-geometric")
    return make_truncated_geometric(cfg.get_double("kernel.rho"),
                                    static_cast<int>(cfg.get_long("kernel.R", 0)));
  throw ConfigError(cfg.origin() + ": unknown kernel.type '" + type +
                    "' (expected lazy-nn | weights | truncated-geometric)");
}

PotentialFamily potential_from_config(const Config& cfg) {
  const std::string type = cfg.get_string("potential.type", "linear");
  if (type == "linear") return PotentialFamily::linear();
  if (type == "power") return PotentialFamily::power(cfg.get_double("potential.alpha"));
  throw ConfigError(cfg.origin() + ": unknown potential.type '" + type +
                    "' (expected linear | power)");
}

void atomic_write(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

void write_table_csv(const fs::path& dir, const Table& t) {
  std::ostringstream out;
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    out << (c ? "," : "") << t.columns[c];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << fmt_g(row[c]);
    out << '\n';
  }
  atomic_write(dir / (t.name + ".csv"), out.str());
}

void write_metrics_csv(const fs::path& dir, const ExperimentReport& rep) {
  std::ostringstream out;
  out << "metric,value\n";
  for (const auto& [k, v] : rep.metrics) out << k << ',' << fmt_g(v) << '\n';
  atomic_write(dir / "metrics.csv", out.str());
}

void write_manifest(const fs::path& dir, const ExperimentReport& rep, std::uint64_t seed) {
  nlohmann::json j;
  j["tool"] = "tiltwalk";
  j["version"] = kVersion;
  j["experiment"] = rep.tag;
  j["seed"] = seed;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : rep.params) params[k] = v;
  j["parameters"] = params;
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& [k, v] : rep.metrics) metrics[k] = v;
  j["metrics"] = metrics;
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : rep.checks) {
    nlohmann::json jc;
    jc["name"] = c.name;
    jc["value"] = c.value;
    jc["cmp"] = c.cmp;
    jc["threshold"] = c.threshold;
    jc["pass"] = c.pass;
    checks.push_back(jc);
  }
  j["checks"] = checks;
  j["pass"] = rep.pass();
  nlohmann::json outputs = nlohmann::json::array();
  outputs.push_back("metrics.csv");
  for (const auto& t : rep.tables) outputs.push_back(t.name + ".csv");
  j["outputs"] = outputs;
  atomic_write(dir / "manifest.json", j.dump(2) + "\n");
}

std::string known_tags() {
  std::string s;
  for (const auto& e : experiment_catalog()) {
    if (!s.empty()) s += ", ";
    s += e.tag;
  }
  return s;
}

}  // namespace

ExperimentReport run_from_config(const Config& cfg, const std::string& out_dir) {
  const std::string tag = cfg.get_string("experiment");
  const ExperimentInfo* info = find_experiment(tag);
  if (!info)
    throw ConfigError(cfg.origin() + ": unknown experiment '" + tag + "' (known: " +
                      known_tags() + ")");
  const std::uint64_t seed = cfg.get_seed("seed");
  fs::create_directories(out_dir);

  ExperimentReport rep;
  if (tag == "eigen-convergence") {
    EigenConvergenceParams p;
    p.lambdas = cfg.get_double_list("eigen-convergence.lambdas");
    p.R = cfg.get_double("eigen-convergence.R", 30.0);
    p.n = static_cast<int>(cfg.get_long("eigen-convergence.n", 8000));
    p.k = static_cast<int>(cfg.get_long("eigen-convergence.k", 4));
    p.prefer_airy = cfg.get_string("eigen-convergence.reference", "airy") == "airy";
    p.tol_e = cfg.get_double("eigen-convergence.tol_e", 0.05);
    p.tol_phi = cfg.get_double("eigen-convergence.tol_phi", 0.05);
    p.tol_c = cfg.get_double("eigen-convergence.tol_c", 0.05);
    p.dump_spectra = cfg.get_long("eigen-convergence.dump_spectra", 0) != 0;
    p.dump_dir = out_dir;
    rep = eigen_convergence(kernel_from_config(cfg), potential_from_config(cfg), p);
  } else if (tag == "fdd") {
    FddParams p;
    const std::string src = cfg.get_string("fdd.source", "chain");
    if (src == "chain") p.source = FddSource::Chain;
    else if (src == "bridge") p.source = FddSource::Bridge;
    else if (src == "fs") p.source = FddSource::Fs;
    else throw ConfigError(cfg.origin() + ": unknown fdd.source '" + src + "'");
    p.lambda = cfg.get_double("fdd.lambda");
    p.times = cfg.get_double_list("fdd.times");
    p.n_samples = cfg.get_long("fdd.n_samples");
    p.seed = seed;
    p.R = cfg.get_double("fdd.R", 30.0);
    p.n = static_cast<int>(cfg.get_long("fdd.n", 8000));
    p.k = static_cast<int>(cfg.get_long("fdd.k", 4));
    p.bridge_N = cfg.get_long("fdd.bridge_N", 0);
    p.bridge_u = static_cast<int>(cfg.get_long("fdd.bridge_u", 1));
    p.bridge_v = static_cast<int>(cfg.get_long("fdd.bridge_v", 1));
    p.tv_bins = static_cast<int>(cfg.get_long("fdd.tv_bins", 30));
    p.tol_ks = cfg.get_double("fdd.tol_ks", 0.02);
    p.tol_tv = cfg.get_double("fdd.tol_tv", 0.08);
    p.dump_samples = cfg.get_long("fdd.dump_samples", 0);
    p.dump_dir = out_dir;
    rep = fdd_compare(kernel_from_config(cfg), potential_from_config(cfg), p);
  } else if (tag == "tightness") {
    TightnessParams p;
    p.lambdas = cfg.get_double_list("tightness.lambdas");
    p.epsilon = cfg.get_double("tightness.epsilon", 0.5);
    p.deltas = cfg.get_double_list("tightness.deltas");
    p.n_samples = cfg.get_long("tightness.n_samples");
    p.seed = seed;
    p.delta_ref = cfg.get_double("tightness.delta_ref", 0.05);
    p.uniformity_factor = cfg.get_double("tightness.uniformity_factor", 3.0);
    p.est_over_delta_bound = cfg.get_double("tightness.est_over_delta_bound", 1.4);
    rep = tightness_probe(kernel_from_config(cfg), potential_from_config(cfg), p);
  } else if (tag == "tv-window") {
    TvWindowParams p;
    p.lambda = cfg.get_double("tv-window.lambda");
    p.T = cfg.get_double("tv-window.T", 1.0);
    p.u = static_cast<int>(cfg.get_long("tv-window.u", 1));
    p.v = static_cast<int>(cfg.get_long("tv-window.v", 1));
    p.u2 = static_cast<int>(cfg.get_long("tv-window.u2", 0));
    p.v2 = static_cast<int>(cfg.get_long("tv-window.v2", 0));
    p.n_multipliers = cfg.get_double_list("tv-window.n_multipliers");
    p.n_samples = cfg.get_long("tv-window.n_samples");
    p.seed = seed;
    p.bins = static_cast<int>(cfg.get_long("tv-window.bins", 20));
    p.C = cfg.get_double("tv-window.C", 2.0);
    p.tol_uniform = cfg.get_double("tv-window.tol_uniform", 0.05);
    p.dump_paths = static_cast<int>(cfg.get_long("tv-window.dump_paths", 0));
    p.dump_dir = out_dir;
    rep = tv_window(kernel_from_config(cfg), potential_from_config(cfg), p);
  } else if (tag == "stay-positive") {
    StayPositiveParams p;
    p.n_grid = cfg.get_long_list("stay-positive.n_grid");
    p.x = static_cast<int>(cfg.get_long("stay-positive.x", 1));
    p.y = static_cast<int>(cfg.get_long("stay-positive.y", 1));
    p.m_over_n = cfg.get_double("stay-positive.m_over_n", 1.0);
    p.eta = cfg.get_double("stay-positive.eta", 2.0);
    p.band_factor = cfg.get_double("stay-positive.band_factor", 2.0);
    p.cap_factor_bound = cfg.get_double("stay-positive.cap_factor_bound", 1.01);
    rep = stay_positive_scaling(kernel_from_config(cfg), p);
  } else if (tag == "meeting") {
    MeetingParams p;
    p.n_grid = cfg.get_long_list("meeting.n_grid");
    p.x = static_cast<int>(cfg.get_long("meeting.x", 1));
    p.y = static_cast<int>(cfg.get_long("meeting.y", 1));
    p.z = static_cast<int>(cfg.get_long("meeting.z", 1));
    p.w = static_cast<int>(cfg.get_long("meeting.w", 1));
    p.eta = cfg.get_double("meeting.eta", 2.0);
    p.n_samples = cfg.get_long("meeting.n_samples");
    p.seed = seed;
    p.en_over_sqrt_lower = cfg.get_double("meeting.en_over_sqrt_lower", 0.27);
    p.en2_over_n_upper = cfg.get_double("meeting.en2_over_n_upper", 0.44);
    rep = meeting_probability(kernel_from_config(cfg), p);
  } else if (tag == "eta-good") {
    EtaGoodParams p;
    p.lambda = cfg.get_double("eta-good.lambda");
    p.N_over_H2 = cfg.get_double("eta-good.N_over_H2", 10.0);
    p.eta = cfg.get_double("eta-good.eta", 3.0);
    p.replicas = static_cast<int>(cfg.get_long("eta-good.replicas"));
    p.seed = seed;
    p.u = static_cast<int>(cfg.get_long("eta-good.u", 1));
    p.v = static_cast<int>(cfg.get_long("eta-good.v", 1));
    p.u2 = static_cast<int>(cfg.get_long("eta-good.u2", 0));
    p.v2 = static_cast<int>(cfg.get_long("eta-good.v2", 0));
    p.min_fraction = cfg.get_double("eta-good.min_fraction", 0.5);
    rep = eta_good_experiment(kernel_from_config(cfg), potential_from_config(cfg), p);
  }

  write_metrics_csv(out_dir, rep);
  for (const auto& t : rep.tables) write_table_csv(out_dir, t);
  write_manifest(out_dir, rep, seed);
  return rep;
}

int run_experiment(const std::string& config_path, const std::string& output_root) {
  try {
    const Config cfg = Config::parse_file(config_path);
    const std::string out = cfg.get_string("output");
    const fs::path dir = fs::path(output_root) / out;
    const ExperimentReport rep = run_from_config(cfg, dir.string());
    for (const auto& c : rep.checks)
      std::cout << (c.pass ? "PASS " : "FAIL ") << rep.tag << ": " << c.name << " = "
                << fmt_g(c.value) << ' ' << c.cmp << ' ' << fmt_g(c.threshold) << '\n';
    std::cout << (rep.pass() ? "PASS" : "FAIL") << ' ' << rep.tag << " -> " << dir.string()
              << '\n';
    return rep.pass() ? kExitOk : kExitToleranceFailure;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCrash;
  }
}

int describe_experiment(const std::string& tag) {
  const ExperimentInfo* info = find_experiment(tag);
  if (!info) {
    std::cerr << "unknown experiment '" << tag << "'; known experiments: " << known_tags()
              << '\n';
    return kExitConfigError;
  }
  std::cout << info->tag << '\n';
  std::cout << "  operations:";
  for (const auto& op : info->ops) std::cout << ' ' << op;
  std::cout << "\n  " << info->summary << "\n  pass criteria:\n";
  for (const auto& c : info->criteria) std::cout << "    - " << c << '\n';
  return kExitOk;
}

int list_experiments() {
  for (const auto& e : experiment_catalog()) std::cout << e.tag << '\n';
  return kExitOk;
}

}  // namespace tiltwalk
