#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "tiltwalk/continuum.hpp"
#include "tiltwalk/stats.hpp"

using namespace tiltwalk;

namespace {

// Airy zeros and oscillator levels, pinned from a high-accuracy offline
// computation before being asserted here.
constexpr double kOmega1 = 2.3381074104597674;
constexpr double kOmega2 = 4.0879494441309706;
constexpr double kOmega3 = 5.5205598280955150;
constexpr double kOmega4 = 6.7867080900719120;
constexpr double kAipOmega1 = 0.7012108227206915;

const SturmLiouvilleSpectrum& airy_sl() {
  static const SturmLiouvilleSpectrum sl =
      sl_solve(2.0, [](double r) { return r; }, "linear", 30.0, 8000, 4);
  return sl;
}

}  // namespace

TEST_CASE("airy evaluator zeros and anchors") {
  const auto ai = shared_airy();
  CHECK((*ai)(0.0) == doctest::Approx(0.35502805388781724).epsilon(1e-14));
  CHECK(ai->deriv(0.0) == doctest::Approx(-0.25881940379280680).epsilon(1e-14));
  CHECK(ai->zero(1) == doctest::Approx(kOmega1).epsilon(1e-10));
  CHECK(ai->zero(2) == doctest::Approx(kOmega2).epsilon(1e-10));
  CHECK(ai->zero(3) == doctest::Approx(kOmega3).epsilon(1e-10));
  CHECK(ai->zero(4) == doctest::Approx(kOmega4).epsilon(1e-10));
  // printed five-digit anchor
  CHECK(std::abs(ai->zero(1) - 2.33811) < 1e-5);
  CHECK(std::abs(ai->deriv(-ai->zero(1))) == doctest::Approx(kAipOmega1).epsilon(1e-9));
}

TEST_CASE("airy ground state") {
  SUBCASE("sigma2 = 2 is the unscaled Airy problem") {
    const AiryGroundState g = airy_ground_state(2.0);
    CHECK(g.chi == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g.e0 == doctest::Approx(kOmega1).epsilon(1e-10));
    CHECK(std::abs(g(0.0)) <= 1e-10);
  }

  SUBCASE("sigma2 = 1/2 rescales by chi = 4^{1/3}") {
    const AiryGroundState g = airy_ground_state(0.5);
    CHECK(g.chi == doctest::Approx(std::cbrt(4.0)).epsilon(1e-14));
    CHECK(g.e0 == doctest::Approx(kOmega1 / std::cbrt(4.0)).epsilon(1e-10));
    CHECK(std::abs(g.e0 - 1.4729) < 1e-4);
  }

  SUBCASE("unit L2 norm, identity against quadrature") {
    const AiryGroundState g = airy_ground_state(2.0);
    double acc = 0.0;
    const double dr = 1e-3;
    for (int i = 0; i <= 20000; ++i) {
      const double r = dr * i;
      const double w = (i == 0 || i == 20000) ? 0.5 : 1.0;
      acc += w * g(r) * g(r) * dr;
    }
    CHECK(acc == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("sturm-liouville solver on the linear profile") {
  const SturmLiouvilleSpectrum& sl = airy_sl();
  CHECK(std::abs(sl.eigenvalues[0] - 2.33811) < 1e-3);
  CHECK(std::abs(sl.eigenvalues[1] - 4.08795) < 1e-3);
  CHECK(std::abs(sl.eigenvalues[2] - kOmega3) < 2e-3);
  CHECK(std::abs(sl.eigenvalues[3] - kOmega4) < 2e-3);

  SUBCASE("eigenvalues strictly increasing") {
    for (int j = 1; j < sl.k; ++j)
      CHECK(sl.eigenvalues[static_cast<std::size_t>(j)] >
            sl.eigenvalues[static_cast<std::size_t>(j - 1)]);
  }

  SUBCASE("node counting") {
    for (int j = 0; j < sl.k; ++j) CHECK(sl.sign_changes(j) == j);
  }

  SUBCASE("orthonormality in the trapezoidal inner product") {
    for (int i = 0; i < sl.k; ++i)
      for (int j = 0; j <= i; ++j) {
        double dot = 0.0;
        const auto& a = sl.eigenfunctions[static_cast<std::size_t>(i)];
        const auto& b = sl.eigenfunctions[static_cast<std::size_t>(j)];
        for (std::size_t q = 0; q < a.size(); ++q) dot += a[q] * b[q];
        dot *= sl.dr;
        CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) < 1e-8);
      }
  }

  SUBCASE("ground state positive with Dirichlet ends") {
    const auto& phi0 = sl.eigenfunctions[0];
    for (double v : phi0) CHECK(v > -1e-12);
    CHECK(sl.phi(0, 0.0) == 0.0);
    CHECK(sl.phi(0, 30.0) == 0.0);
  }

  SUBCASE("richardson comparison is reported and small") {
    REQUIRE(sl.richardson_delta.size() == 4);
    for (double d : sl.richardson_delta) CHECK(d < 1e-5);
  }
}

TEST_CASE("cross-validation against the closed Airy form") {
  const SturmLiouvilleSpectrum& sl = airy_sl();
  const AiryGroundState g = airy_ground_state(2.0);
  for (int j = 0; j < 4; ++j)
    CHECK(std::abs(sl.eigenvalues[static_cast<std::size_t>(j)] - g.ai->zero(j + 1)) < 1e-3);
  // L2 distance between the discrete and closed-form ground states
  double acc = 0.0;
  for (int i = 1; i < sl.n; ++i) {
    const double r = sl.dr * i;
    const double d = sl.eigenfunctions[0][static_cast<std::size_t>(i - 1)] - g(r);
    acc += d * d * sl.dr;
  }
  CHECK(std::sqrt(acc) < 1e-3);
}

TEST_CASE("half-line oscillator against the odd-level closed form") {
  const SturmLiouvilleSpectrum sl =
      sl_solve(1.0, [](double r) { return r * r; }, "power-2", 12.0, 8000, 4);
  const double expected[4] = {2.1213203435596424, 4.9497474683058327, 7.7781745930520225,
                              10.6066017177982129};
  for (int j = 0; j < 4; ++j)
    CHECK(std::abs(sl.eigenvalues[static_cast<std::size_t>(j)] - expected[j]) < 1e-4);
  for (int j = 0; j < 4; ++j) CHECK(sl.sign_changes(j) == j);
}

TEST_CASE("solver rejections") {
  CHECK_THROWS_AS(sl_solve(2.0, [](double r) { return r; }, "linear", 8.0, 2000, 4),
                  std::runtime_error);  // q(R) too small for k levels
  CHECK_THROWS_AS(sl_solve(2.0, [](double r) { return r; }, "linear", 30.0, 100, 4),
                  std::invalid_argument);  // grid too coarse
}

TEST_CASE("diffusion model and drift") {
  const FSDiffusionModel model = make_fs_model(airy_sl());
  CHECK(std::abs(model.density_integral - 1.0) < 1e-8);
  CHECK(model.cdf_at(model.R) == doctest::Approx(1.0));

  SUBCASE("drift vanishes at the density maximum and flips sign") {
    // maximizer of Ai(r - omega1): at omega1 + first zero of Ai'
    const double rstar = kOmega1 - 1.0187929716474716;
    CHECK(std::abs(fs_drift(model, rstar)) < 2e-3);
    CHECK(fs_drift(model, rstar - 0.2) > 0.0);
    CHECK(fs_drift(model, rstar + 0.2) < 0.0);
  }

  SUBCASE("near the wall r drift(r) approaches sigma2") {
    for (double r : {0.05, 0.1, 0.2}) {
      const double v = r * fs_drift(model, r) / model.sigma2;
      CHECK(v > 0.95);
      CHECK(v < 1.05);
    }
  }

  SUBCASE("clamped evaluation is flagged") {
    bool clamped = false;
    model.drift_at(model.R + 1.0, &clamped);
    CHECK(clamped);
    model.drift_at(0.5, &clamped);
    CHECK(!clamped);
  }

  SUBCASE("inverse-CDF quantiles invert the CDF") {
    for (double u : {0.1, 0.5, 0.9}) {
      const double r = model.quantile(u);
      CHECK(model.cdf_at(r) == doctest::Approx(u).epsilon(1e-6));
    }
  }
}

TEST_CASE("airy-based diffusion model matches the sl-based one") {
  const FSDiffusionModel a = make_fs_model(airy_ground_state(2.0), 30.0, 8000);
  const FSDiffusionModel b = make_fs_model(airy_sl());
  for (double r : {0.5, 1.0, 2.0, 3.0})
    CHECK(a.density_at(r) == doctest::Approx(b.density_at(r)).epsilon(1e-3));
  CHECK(a.gap() == doctest::Approx(b.gap()).epsilon(1e-3));
}

TEST_CASE("euler-maruyama simulation") {
  const FSDiffusionModel model = make_fs_model(airy_sl());
  const double dt = 0.99e-4 * model.char_time();

  SUBCASE("dt guard") {
    CHECK_THROWS_AS(simulate_fs(model, 1.0, 10.0 * model.char_time(), 1), std::invalid_argument);
  }

  SUBCASE("reproducibility") {
    const FsSimResult a = simulate_fs(model, 2.0, dt, 5);
    const FsSimResult b = simulate_fs(model, 2.0, dt, 5);
    const FsSimResult c = simulate_fs(model, 2.0, dt, 6);
    CHECK(a.path.values == b.path.values);
    CHECK(a.path.values != c.path.values);
  }

  SUBCASE("stationary marginal by KS") {
    // one long path, samples picked at decorrelated spacing
    const double T = 5000.0;
    const FsSimResult sim = simulate_fs(model, T, dt, 12);
    const std::size_t stride = static_cast<std::size_t>(0.2 / dt);
    std::vector<double> samples;
    for (std::size_t i = 0; i < sim.path.values.size(); i += stride)
      samples.push_back(sim.path.values[i]);
    const EmpiricalDistribution emp(std::move(samples));
    const double ks = ks_distance(emp, [&](double r) { return model.cdf_at(r); });
    CHECK(ks < 0.02);
    CHECK(sim.reflections < 1000000);
  }
}

TEST_CASE("autocovariance decays at the spectral gap rate") {
  const FSDiffusionModel model = make_fs_model(airy_sl());
  const double dt = 0.99e-4 * model.char_time();
  const double T = 10000.0;
  const FsSimResult sim = simulate_fs(model, T, dt, 21);
  const auto& xs = sim.path.values;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  const auto autocov = [&](double lag) {
    const std::size_t k = static_cast<std::size_t>(lag / dt);
    double acc = 0.0;
    for (std::size_t i = 0; i + k < xs.size(); ++i)
      acc += (xs[i] - mean) * (xs[i + k] - mean);
    return acc / static_cast<double>(xs.size() - k);
  };
  const double t1 = 0.35, t2 = 1.0;
  const double rate = std::log(autocov(t1) / autocov(t2)) / (t2 - t1);
  CHECK(std::abs(rate - model.gap()) / model.gap() < 0.2);
}

TEST_CASE("reversibility of time-averaged two-point functions") {
  const FSDiffusionModel model = make_fs_model(airy_sl());
  const double dt = 0.99e-4 * model.char_time();
  const FsSimResult sim = simulate_fs(model, 4000.0, dt, 33);
  const auto f = [](double x) { return std::exp(-(x - 0.8) * (x - 0.8) / 0.1); };
  const auto g = [](double x) { return std::exp(-(x - 1.6) * (x - 1.6) / 0.2); };
  const std::size_t lag = static_cast<std::size_t>(0.5 / dt);
  const auto& xs = sim.path.values;
  std::vector<double> fg, gf;
  fg.reserve(xs.size());
  for (std::size_t i = 0; i + lag < xs.size(); ++i) {
    fg.push_back(f(xs[i]) * g(xs[i + lag]));
    gf.push_back(g(xs[i]) * f(xs[i + lag]));
  }
  const double d = sample_mean(fg) - sample_mean(gf);
  const double se = std::sqrt(std::pow(block_standard_error(fg, 40), 2) +
                              std::pow(block_standard_error(gf, 40), 2));
  CHECK(std::abs(d) <= 3.0 * se);
}

TEST_CASE("reflection abort when the domain is too tight") {
  // a model truncated far inside the bulk reflects on nearly every step
  const AiryGroundState g = airy_ground_state(2.0);
  const FSDiffusionModel tight = make_fs_model(g, 0.05, 2000);
  const double dt = 0.99e-4 * tight.char_time();
  CHECK_THROWS_AS(simulate_fs(tight, 40.0, dt, 3), std::runtime_error);
}

TEST_CASE("semigroup action on coefficients") {
  const SturmLiouvilleSpectrum& sl = airy_sl();
  const std::vector<double> a = {0.3, -0.5, 0.2, 0.1};

  SUBCASE("t = 0 is the identity") {
    CHECK(semigroup_apply(sl, a, 0.0) == a);
  }

  SUBCASE("negative time rejected") {
    CHECK_THROWS_AS(semigroup_apply(sl, a, -1.0), std::invalid_argument);
  }

  SUBCASE("pure ground-state component is invariant") {
    const std::vector<double> g0 = {1.0, 0.0, 0.0, 0.0};
    CHECK(semigroup_apply(sl, g0, 3.7) == g0);
  }

  SUBCASE("contraction") {
    const std::vector<double> out = semigroup_apply(sl, a, 1.0);
    double na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      na += a[i] * a[i];
      nb += out[i] * out[i];
    }
    CHECK(nb <= na);
  }

  SUBCASE("composition") {
    const std::vector<double> two = semigroup_apply(sl, semigroup_apply(sl, a, 0.7), 0.6);
    const std::vector<double> one = semigroup_apply(sl, a, 1.3);
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(two[i] == doctest::Approx(one[i]).epsilon(1e-13));
  }
}

TEST_CASE("continuum spectrum file carries header and columns") {
  save_sl_spectrum(airy_sl(), "sl_spectrum_test.txt");
  std::ifstream in("sl_spectrum_test.txt");
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# tiltwalk sl-spectrum v1");
  bool saw_eigenvalues = false, saw_columns = false;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.rfind("# eigenvalues", 0) == 0) saw_eigenvalues = true;
    if (line.rfind("# columns r phi0 phi1 phi2 phi3", 0) == 0) saw_columns = true;
    if (!line.empty() && line[0] != '#') ++rows;
  }
  CHECK(saw_eigenvalues);
  CHECK(saw_columns);
  CHECK(rows == airy_sl().n - 1);
  std::remove("sl_spectrum_test.txt");
}

TEST_CASE("induced semigroup fixes constants") {
  const SturmLiouvilleSpectrum& sl = airy_sl();
  const std::vector<double> ones(sl.eigenfunctions[0].size(), 1.0);
  const std::vector<double> out = fs_semigroup_apply(sl, ones, 2.0);
  // psi = 1 maps to psi phi0 = phi0, which is invariant; away from the far
  // tail the reconstruction divides back to 1
  const auto& phi0 = sl.eigenfunctions[0];
  double phimax = 0.0;
  for (double v : phi0) phimax = std::max(phimax, v);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (phi0[i] < 1e-3 * phimax) continue;
    CHECK(out[i] == doctest::Approx(1.0).epsilon(1e-6));
  }
}
