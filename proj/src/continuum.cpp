#include "tiltwalk/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tiltwalk {

namespace {

// Number of eigenvalues of the symmetric tridiagonal matrix below x
// (Sturm sequence on the LDL^T recurrence).
int sturm_count(const std::vector<double>& diag, double off, double x) {
  const double off2 = off * off;
  int count = 0;
  double d = diag[0] - x;
  if (d < 0.0) ++count;
  for (std::size_t i = 1; i < diag.size(); ++i) {
    if (d == 0.0) d = -1e-300;
    d = diag[i] - x - off2 / d;
    if (d < 0.0) ++count;
  }
  return count;
}

double bisect_eigenvalue(const std::vector<double>& diag, double off, int j, double lo,
                         double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sturm_count(diag, off, mid) >= j + 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// Solves (T - shift I) x = b in place for symmetric tridiagonal T with
// constant off-diagonal, by Gaussian elimination with partial pivoting.
// Pivoting introduces a second superdiagonal (f).
void tridiag_shifted_solve(const std::vector<double>& diag, double off, double shift,
                           std::vector<double>& b) {
  const std::size_t n = diag.size();
  std::vector<double> a(n, off), d(n), c(n, off), f(n, 0.0);
  a[0] = 0.0;
  c[n - 1] = 0.0;
  for (std::size_t i = 0; i < n; ++i) d[i] = diag[i] - shift;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (std::abs(a[k + 1]) > std::abs(d[k])) {
      std::swap(d[k], a[k + 1]);
      std::swap(c[k], d[k + 1]);
      std::swap(f[k], c[k + 1]);
      std::swap(b[k], b[k + 1]);
    }
    if (d[k] == 0.0) d[k] = 1e-300;
    const double m = a[k + 1] / d[k];
    d[k + 1] -= m * c[k];
    c[k + 1] -= m * f[k];
    b[k + 1] -= m * b[k];
  }
  if (d[n - 1] == 0.0) d[n - 1] = 1e-300;
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = b[ii];
    if (ii + 1 < n) acc -= c[ii] * b[ii + 1];
    if (ii + 2 < n) acc -= f[ii] * b[ii + 2];
    b[ii] = acc / d[ii];
  }
}

void normalize_weighted(std::vector<double>& v, double dr) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(dr * s);
  for (double& x : v) x /= s;
}

std::vector<double> lowest_eigenvalues(const std::vector<double>& diag, double off, int k) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double a : diag) {
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  lo -= 2.0 * std::abs(off) + 1.0;
  hi += 2.0 * std::abs(off) + 1.0;
  std::vector<double> ev(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) ev[static_cast<std::size_t>(j)] = bisect_eigenvalue(diag, off, j, lo, hi);
  return ev;
}

}  // namespace

double SturmLiouvilleSpectrum::phi(int j, double r) const {
  if (r <= 0.0 || r >= R) return 0.0;
  const auto& v = eigenfunctions[static_cast<std::size_t>(j)];
  const double u = r / dr;  // node i has r = (i+1) dr in v-index space
  const double iu = u - 1.0;
  if (iu <= 0.0) {
    const double w = u;  // between 0 boundary and first interior node
    return w * v.front();
  }
  const double last = static_cast<double>(v.size() - 1);
  if (iu >= last) {
    const double w = (R - r) / dr;
    return w * v.back();
  }
  const std::size_t i = static_cast<std::size_t>(iu);
  const double w = iu - static_cast<double>(i);
  return (1.0 - w) * v[i] + w * v[i + 1];
}

int SturmLiouvilleSpectrum::sign_changes(int j) const {
  const auto& v = eigenfunctions[static_cast<std::size_t>(j)];
  double vmax = 0.0;
  for (double x : v) vmax = std::max(vmax, std::abs(x));
  const double thresh = 1e-10 * vmax;
  int changes = 0;
  int last_sign = 0;
  for (double x : v) {
    if (std::abs(x) <= thresh) continue;
    const int s = x > 0.0 ? 1 : -1;
    if (last_sign != 0 && s != last_sign) ++changes;
    last_sign = s;
  }
  return changes;
}

SturmLiouvilleSpectrum sl_solve(double sigma2, const std::function<double(double)>& q,
                                const std::string& q_tag, double R, int n, int k,
                                const SlOptions& opts) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sl_solve: sigma2 must be positive");
  if (n < 2000) throw std::invalid_argument("sl_solve: n must be at least 2000");
  if (k < 1 || k > n / 8) throw std::invalid_argument("sl_solve: bad k");
  if (!(R > 0.0)) throw std::invalid_argument("sl_solve: R must be positive");

  SturmLiouvilleSpectrum out;
  out.sigma2 = sigma2;
  out.q_tag = q_tag;
  out.R = R;
  out.n = n;
  out.k = k;
  out.dr = R / static_cast<double>(n);

  const auto assemble = [&](int grid_n, std::vector<double>& diag, double& off) {
    const double h = R / static_cast<double>(grid_n);
    diag.resize(static_cast<std::size_t>(grid_n - 1));
    off = -sigma2 / (2.0 * h * h);
    for (int i = 1; i < grid_n; ++i)
      diag[static_cast<std::size_t>(i - 1)] = sigma2 / (h * h) + q(h * static_cast<double>(i));
  };

  std::vector<double> diag;
  double off = 0.0;
  assemble(n, diag, off);
  out.eigenvalues = lowest_eigenvalues(diag, off, k);

  // A posteriori confinement check for the domain cutoff.
  if (q(R) < out.eigenvalues.back() + 10.0) {
    std::ostringstream os;
    os << "sl_solve: q(R) = " << q(R) << " is below e_{k-1} + 10 = "
       << out.eigenvalues.back() + 10.0 << "; increase R";
    throw std::runtime_error(os.str());
  }

  // Eigenvectors by inverse iteration at the converged eigenvalues, then a
  // modified Gram-Schmidt pass against the lower modes.
  out.eigenfunctions.assign(static_cast<std::size_t>(k), {});
  for (int j = 0; j < k; ++j) {
    std::vector<double> v(diag.size());
    Rng rng(777, static_cast<std::uint64_t>(j));
    for (double& x : v) x = rng.uniform() - 0.5;
    for (int it = 0; it < 4; ++it) {
      tridiag_shifted_solve(diag, off, out.eigenvalues[static_cast<std::size_t>(j)], v);
      double nrm = 0.0;
      for (double x : v) nrm += x * x;
      nrm = std::sqrt(nrm);
      for (double& x : v) x /= nrm;
    }
    for (int jj = 0; jj < j; ++jj) {
      const auto& u = out.eigenfunctions[static_cast<std::size_t>(jj)];
      double proj = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) proj += v[i] * u[i];
      proj *= out.dr;
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * u[i];
    }
    normalize_weighted(v, out.dr);
    double vmax = 0.0;
    for (double x : v) vmax = std::max(vmax, std::abs(x));
    for (double x : v) {
      if (std::abs(x) > 1e-3 * vmax) {
        if (x < 0.0)
          for (double& y : v) y = -y;
        break;
      }
    }
    out.eigenfunctions[static_cast<std::size_t>(j)] = std::move(v);
  }

  if (opts.richardson) {
    std::vector<double> diag2;
    double off2 = 0.0;
    assemble(2 * n, diag2, off2);
    const std::vector<double> ev2 = lowest_eigenvalues(diag2, off2, k);
    out.richardson_delta.resize(static_cast<std::size_t>(k));
    out.richardson_extrapolated.resize(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      const std::size_t sj = static_cast<std::size_t>(j);
      out.richardson_delta[sj] = std::abs(out.eigenvalues[sj] - ev2[sj]);
      out.richardson_extrapolated[sj] = (4.0 * ev2[sj] - out.eigenvalues[sj]) / 3.0;
    }
  }
  return out;
}

namespace {

void finish_fs_model(FSDiffusionModel& m) {
  const std::size_t nn = m.phi0.size();
  m.density.resize(nn);
  for (std::size_t i = 0; i < nn; ++i) m.density[i] = m.phi0[i] * m.phi0[i];
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < nn; ++i)
    integral += 0.5 * (m.density[i] + m.density[i + 1]) * m.dr;
  m.density_integral = integral;
  for (double& d : m.density) d /= integral;
  m.cdf.assign(nn, 0.0);
  for (std::size_t i = 1; i < nn; ++i)
    m.cdf[i] = m.cdf[i - 1] + 0.5 * (m.density[i - 1] + m.density[i]) * m.dr;
  m.cdf.back() = 1.0;

  double phimax = 0.0;
  for (double x : m.phi0) phimax = std::max(phimax, std::abs(x));
  m.i_drift_lo = 1;
  m.i_drift_hi = m.n - 1;
  while (m.i_drift_hi > 1 && std::abs(m.phi0[static_cast<std::size_t>(m.i_drift_hi)]) <
                                 1e-9 * phimax)
    --m.i_drift_hi;
  m.drift.assign(nn, 0.0);
  for (int i = m.i_drift_lo; i <= m.i_drift_hi; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    const double num = m.phi0[si + 1] - m.phi0[si - 1];
    m.drift[si] = m.sigma2 * num / (2.0 * m.dr * m.phi0[si]);
  }
}

}  // namespace

FSDiffusionModel make_fs_model(const SturmLiouvilleSpectrum& sl) {
  FSDiffusionModel m;
  m.sigma2 = sl.sigma2;
  m.R = sl.R;
  m.n = sl.n;
  m.dr = sl.dr;
  m.eigenvalues = sl.eigenvalues;
  m.grid.resize(static_cast<std::size_t>(m.n + 1));
  m.phi0.assign(static_cast<std::size_t>(m.n + 1), 0.0);
  for (int i = 0; i <= m.n; ++i)
    m.grid[static_cast<std::size_t>(i)] = m.dr * static_cast<double>(i);
  for (int i = 1; i < m.n; ++i)
    m.phi0[static_cast<std::size_t>(i)] = sl.eigenfunctions[0][static_cast<std::size_t>(i - 1)];
  finish_fs_model(m);
  return m;
}

FSDiffusionModel make_fs_model(const AiryGroundState& gs, double R, int n, int k) {
  FSDiffusionModel m;
  m.sigma2 = gs.sigma2;
  m.R = R;
  m.n = n;
  m.dr = R / static_cast<double>(n);
  m.eigenvalues.resize(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j)
    m.eigenvalues[static_cast<std::size_t>(j)] = gs.ai->zero(j + 1) / gs.chi;
  m.grid.resize(static_cast<std::size_t>(n + 1));
  m.phi0.resize(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= n; ++i) {
    const double r = m.dr * static_cast<double>(i);
    m.grid[static_cast<std::size_t>(i)] = r;
    m.phi0[static_cast<std::size_t>(i)] = gs(r);
  }
  finish_fs_model(m);
  return m;
}

double FSDiffusionModel::drift_at(double r, bool* clamped) const {
  if (clamped) *clamped = false;
  double rr = r;
  if (rr < r_drift_lo() || rr > r_drift_hi()) {
    if (clamped) *clamped = true;
    rr = std::clamp(rr, r_drift_lo(), r_drift_hi());
  }
  const double u = rr / dr;
  std::size_t i = static_cast<std::size_t>(u);
  i = std::clamp<std::size_t>(i, static_cast<std::size_t>(i_drift_lo),
                              static_cast<std::size_t>(i_drift_hi - 1));
  const double w = u - static_cast<double>(i);
  return (1.0 - w) * drift[i] + w * drift[i + 1];
}

double FSDiffusionModel::density_at(double r) const {
  if (r <= 0.0 || r >= R) return 0.0;
  const double u = r / dr;
  const std::size_t i = static_cast<std::size_t>(u);
  const double w = u - static_cast<double>(i);
  return (1.0 - w) * density[i] + w * density[i + 1];
}

double FSDiffusionModel::cdf_at(double r) const {
  if (r <= 0.0) return 0.0;
  if (r >= R) return 1.0;
  const double u = r / dr;
  const std::size_t i = static_cast<std::size_t>(u);
  const double w = u - static_cast<double>(i);
  return (1.0 - w) * cdf[i] + w * cdf[i + 1];
}

double FSDiffusionModel::quantile(double u) const {
  const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.begin()) return 0.0;
  if (it == cdf.end()) return R;
  const std::size_t i = static_cast<std::size_t>(it - cdf.begin());
  const double c0 = cdf[i - 1], c1 = cdf[i];
  const double w = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.0;
  return grid[i - 1] + w * dr;
}

double fs_drift(const FSDiffusionModel& model, double r) { return model.drift_at(r); }

FsSimResult simulate_fs(const FSDiffusionModel& model, double T, double dt, std::uint64_t seed) {
  if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("simulate_fs: T, dt must be positive");
  if (dt > 1e-4 * model.char_time())
    throw std::invalid_argument("simulate_fs: dt exceeds 1e-4 of the relaxation time");
  const long steps = std::lround(2.0 * T / dt);
  FsSimResult out;
  out.path.t0 = -T;
  out.path.dt = dt;
  out.path.values.resize(static_cast<std::size_t>(steps + 1));
  Rng rng(seed);
  double x = model.quantile(rng.uniform());
  out.path.values[0] = x;
  const double noise = std::sqrt(model.sigma2 * dt);
  bool clamped = false;
  for (long s = 1; s <= steps; ++s) {
    const double b = model.drift_at(x, &clamped);
    if (clamped) ++out.clamped_drift_evals;
    x += b * dt + noise * rng.gaussian();
    if (x < 0.0) {
      x = -x;
      ++out.reflections;
    }
    if (x > model.R) {
      x = 2.0 * model.R - x;
      ++out.reflections;
    }
    if (x < 0.0 || x > model.R) x = std::clamp(x, 0.0, model.R);
    if (out.reflections > 1000000)
      throw std::runtime_error("simulate_fs: more than 1e6 boundary reflections, dt too coarse");
    out.path.values[static_cast<std::size_t>(s)] = x;
  }
  return out;
}

std::vector<double> semigroup_apply(const SturmLiouvilleSpectrum& sl,
                                    const std::vector<double>& coeffs, double t) {
  if (t < 0.0) throw std::invalid_argument("semigroup_apply: t must be nonnegative");
  if (coeffs.size() > sl.eigenvalues.size())
    throw std::invalid_argument("semigroup_apply: more coefficients than computed modes");
  std::vector<double> out(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    out[i] = coeffs[i] * std::exp(-(sl.eigenvalues[i] - sl.eigenvalues[0]) * t);
  return out;
}

std::vector<double> expand(const SturmLiouvilleSpectrum& sl, const std::vector<double>& values) {
  std::vector<double> coeffs(static_cast<std::size_t>(sl.k), 0.0);
  for (int j = 0; j < sl.k; ++j) {
    const auto& phi = sl.eigenfunctions[static_cast<std::size_t>(j)];
    double acc = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) acc += phi[i] * values[i];
    coeffs[static_cast<std::size_t>(j)] = sl.dr * acc;
  }
  return coeffs;
}

std::vector<double> reconstruct(const SturmLiouvilleSpectrum& sl,
                                const std::vector<double>& coeffs) {
  std::vector<double> out(sl.eigenfunctions[0].size(), 0.0);
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    const auto& phi = sl.eigenfunctions[j];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += coeffs[j] * phi[i];
  }
  return out;
}

std::vector<double> fs_semigroup_apply(const SturmLiouvilleSpectrum& sl,
                                       const std::vector<double>& psi, double t) {
  const auto& phi0 = sl.eigenfunctions[0];
  if (psi.size() != phi0.size())
    throw std::invalid_argument("fs_semigroup_apply: psi must live on the interior grid");
  double phimax = 0.0;
  for (double x : phi0) phimax = std::max(phimax, std::abs(x));
  std::vector<double> w(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) w[i] = psi[i] * phi0[i];
  const std::vector<double> decayed = semigroup_apply(sl, expand(sl, w), t);
  const std::vector<double> back = reconstruct(sl, decayed);
  std::vector<double> out(psi.size(), 0.0);
  for (std::size_t i = 0; i < psi.size(); ++i)
    out[i] = (std::abs(phi0[i]) > 1e-12 * phimax) ? back[i] / phi0[i] : 0.0;
  return out;
}

void save_sl_spectrum(const SturmLiouvilleSpectrum& sl, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_sl_spectrum: cannot open " + path);
  char buf[256];
  out << "# tiltwalk sl-spectrum v1\n";
  std::snprintf(buf, sizeof buf, "# sigma2 %.17g\n# R %.17g\n# n %d\n# k %d\n", sl.sigma2, sl.R,
                sl.n, sl.k);
  out << buf << "# q " << sl.q_tag << "\n# eigenvalues";
  for (double e : sl.eigenvalues) {
    std::snprintf(buf, sizeof buf, " %.17g", e);
    out << buf;
  }
  out << "\n# columns r";
  for (int j = 0; j < sl.k; ++j) out << " phi" << j;
  out << '\n';
  for (std::size_t i = 0; i < sl.eigenfunctions[0].size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", sl.grid_r(static_cast<int>(i)));
    out << buf;
    for (int j = 0; j < sl.k; ++j) {
      std::snprintf(buf, sizeof buf, " %.17g", sl.eigenfunctions[static_cast<std::size_t>(j)][i]);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace tiltwalk
