#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tiltwalk/config.hpp"
#include "tiltwalk/run.hpp"

using namespace tiltwalk;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kTinyEigenCfg =
    "experiment = eigen-convergence\n"
    "seed = 11\n"
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

}  // namespace

TEST_CASE("config parsing") {
  const Config cfg = Config::parse_string(
      "# comment\n"
      "experiment = fdd\n"
      "seed = 42\n"
      "[kernel]\n"
      "type = weights\n"
      "weights = -1:0.25, 0:0.5, 1:0.25\n"
      "[grid]\n"
      "lambdas = 1e-2, 1e-3\n",
      "inline");
  CHECK(cfg.get_string("experiment") == "fdd");
  CHECK(cfg.get_seed("seed") == 42);
  CHECK(cfg.get_string("kernel.type") == "weights");
  CHECK(cfg.get_weight_list("kernel.weights").size() == 3);
  CHECK(cfg.get_double_list("grid.lambdas") == std::vector<double>{1e-2, 1e-3});
  CHECK(cfg.get_double("grid.missing", 7.0) == 7.0);
  CHECK(!cfg.has("nope"));
}

TEST_CASE("config errors carry the line number") {
  try {
    Config::parse_string("a = 1\nbroken line\n", "f.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("f.cfg:2") != std::string::npos);
  }
  try {
    const Config c = Config::parse_string("x = notanumber\n", "g.cfg");
    c.get_double("x");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("g.cfg:1") != std::string::npos);
    CHECK(msg.find("'x'") != std::string::npos);
  }
  CHECK_THROWS_AS(Config::parse_string("[unterminated\n", "h.cfg"), ConfigError);
  CHECK_THROWS_AS(Config::parse_string("a = 1\na = 2\n", "dup.cfg"), ConfigError);
  CHECK_THROWS_AS(Config::parse_string("= 1\n", "key.cfg"), ConfigError);
}

TEST_CASE("missing seed is a config error, not a default") {
  const Config cfg = Config::parse_string(
      "experiment = stay-positive\noutput = o\n[kernel]\ntype = lazy-nn\na = 0.25\n"
      "[stay-positive]\nn_grid = 400\n",
      "noseed");
  CHECK_THROWS_AS(run_from_config(cfg, "cli_test_out/noseed"), ConfigError);
}

TEST_CASE("unknown experiment lists the catalogue") {
  const Config cfg = Config::parse_string("experiment = bogus\nseed = 1\noutput = o\n", "bad");
  try {
    run_from_config(cfg, "cli_test_out/bogus");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("bogus") != std::string::npos);
    CHECK(msg.find("eigen-convergence") != std::string::npos);
    CHECK(msg.find("tv-window") != std::string::npos);
  }
}

TEST_CASE("run writes manifest, metrics and tables") {
  const Config cfg = Config::parse_string(kTinyEigenCfg, "tiny");
  const ExperimentReport rep = run_from_config(cfg, "cli_test_out/run1");
  CHECK(rep.pass());
  CHECK(fs::exists("cli_test_out/run1/manifest.json"));
  CHECK(fs::exists("cli_test_out/run1/metrics.csv"));
  CHECK(fs::exists("cli_test_out/run1/e_lambda.csv"));
  CHECK(fs::exists("cli_test_out/run1/phi_convergence.csv"));

  const std::string csv = slurp("cli_test_out/run1/e_lambda.csv");
  CHECK(csv.rfind("lambda,H,E,e,err_vs_continuum\n", 0) == 0);
  const std::string manifest = slurp("cli_test_out/run1/manifest.json");
  CHECK(manifest.find("\"experiment\": \"eigen-convergence\"") != std::string::npos);
  CHECK(manifest.find("\"pass\": true") != std::string::npos);
}

TEST_CASE("identical configs produce byte-identical outputs") {
  const Config cfg = Config::parse_string(kTinyEigenCfg, "tiny");
  run_from_config(cfg, "cli_test_out/rep_a");
  run_from_config(cfg, "cli_test_out/rep_b");
  for (const char* f : {"metrics.csv", "e_lambda.csv", "phi_convergence.csv", "manifest.json"}) {
    CHECK(slurp(fs::path("cli_test_out/rep_a") / f) == slurp(fs::path("cli_test_out/rep_b") / f));
  }
}

TEST_CASE("tolerance failure is distinguished from success") {
  std::string cfg_text = kTinyEigenCfg;
  cfg_text += "tol_e = 1e-9\n";  // unreachable on this grid
  const Config cfg = Config::parse_string(cfg_text, "tight");
  const ExperimentReport rep = run_from_config(cfg, "cli_test_out/tight");
  CHECK(!rep.pass());
  const std::string manifest = slurp("cli_test_out/tight/manifest.json");
  CHECK(manifest.find("\"pass\": false") != std::string::npos);
}

TEST_CASE("cli verbs") {
  CHECK(list_experiments() == kExitOk);
  CHECK(describe_experiment("fdd") == kExitOk);
  CHECK(describe_experiment("tv-window") == kExitOk);
  CHECK(describe_experiment("bogus") == kExitConfigError);
  CHECK(run_experiment("does_not_exist.cfg", ".") == kExitConfigError);
}

TEST_CASE("run_experiment exit codes through the file interface") {
  fs::create_directories("cli_test_out");
  {
    std::ofstream out("cli_test_out/tiny.cfg");
    out << kTinyEigenCfg;
  }
  CHECK(run_experiment("cli_test_out/tiny.cfg", "cli_test_out/root1") == kExitOk);
  {
    std::ofstream out("cli_test_out/tight.cfg");
    out << kTinyEigenCfg << "tol_e = 1e-9\n";
  }
  CHECK(run_experiment("cli_test_out/tight.cfg", "cli_test_out/root2") ==
        kExitToleranceFailure);
  {
    std::ofstream out("cli_test_out/broken.cfg");
    out << "experiment eigen\n";
  }
  CHECK(run_experiment("cli_test_out/broken.cfg", "cli_test_out/root3") == kExitConfigError);
}

TEST_CASE("shipped example configs parse and name known experiments") {
  // repo-relative; tests run from the build tree, so probe both locations
  fs::path base = "../../configs";
  if (!fs::exists(base)) base = "configs";
  if (!fs::exists(base)) return;  // running from an unexpected directory
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(base)) {
    if (entry.path().extension() != ".cfg") continue;
    const Config cfg = Config::parse_file(entry.path().string());
    CHECK(find_experiment(cfg.get_string("experiment")) != nullptr);
    CHECK(cfg.has("seed"));
    CHECK(cfg.has("output"));
    ++seen;
  }
  CHECK(seen == 7);
}

TEST_CASE("gated dumps emit sample and path files") {
  const Config cfg = Config::parse_string(
      "experiment = tv-window\n"
      "seed = 77\n"
      "output = out\n"
      "[kernel]\n"
      "type = lazy-nn\n"
      "a = 0.25\n"
      "[potential]\n"
      "type = linear\n"
      "[tv-window]\n"
      "lambda = 1e-2\n"
      "n_multipliers = 4, 8\n"
      "n_samples = 500\n"
      "tol_uniform = 1.0\n"
      "dump_paths = 3\n",
      "dump");
  run_from_config(cfg, "cli_test_out/dump_tv");
  CHECK(fs::exists("cli_test_out/dump_tv/bridge_path_0.txt"));
  CHECK(fs::exists("cli_test_out/dump_tv/bridge_path_2.txt"));
  CHECK(!fs::exists("cli_test_out/dump_tv/bridge_path_3.txt"));

  const Config fddcfg = Config::parse_string(
      "experiment = fdd\n"
      "seed = 78\n"
      "output = out\n"
      "[kernel]\n"
      "type = lazy-nn\n"
      "a = 0.25\n"
      "[potential]\n"
      "type = linear\n"
      "[fdd]\n"
      "lambda = 1e-3\n"
      "times = 0, 0.25\n"
      "n_samples = 1500\n"
      "n = 4000\n"
      "tol_ks = 1.0\n"
      "tol_tv = 1.0\n"
      "dump_samples = 20\n",
      "dumpfdd");
  run_from_config(fddcfg, "cli_test_out/dump_fdd");
  CHECK(fs::exists("cli_test_out/dump_fdd/samples_t0.txt"));
  CHECK(fs::exists("cli_test_out/dump_fdd/samples_t1.txt"));
}
