#include "tiltwalk/potential.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tiltwalk {

PotentialFamily PotentialFamily::linear() {
  PotentialFamily p;
  p.kind = Kind::Linear;
  p.name = "linear";
  p.V = [](double lambda, double x) { return lambda * x; };
  p.q = [](double r) { return r; };
  p.q0 = p.q;
  return p;
}

PotentialFamily PotentialFamily::power(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("power potential: alpha must be positive");
  PotentialFamily p;
  p.kind = Kind::Power;
  std::ostringstream os;
  os << "power-" << alpha;
  p.name = os.str();
  p.V = [alpha](double lambda, double x) { return lambda * std::pow(x, alpha); };
  p.q = [alpha](double r) { return std::pow(r, alpha); };
  p.q0 = p.q;
  return p;
}

PotentialFamily PotentialFamily::custom(std::string name,
                                        std::function<double(double, double)> V,
                                        std::function<double(double)> q,
                                        std::function<double(double)> q0) {
  PotentialFamily p;
  p.kind = Kind::Custom;
  p.name = std::move(name);
  p.V = std::move(V);
  p.q = std::move(q);
  p.q0 = std::move(q0);
  return p;
}

void PotentialFamily::validate(double lambda) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("potential: lambda must be positive");
  if (std::abs(V(lambda, 0.0)) > 1e-14)
    throw std::invalid_argument("potential '" + name + "': V(0) != 0");
  double prev = 0.0;
  double x = 1.0;
  for (int i = 0; i < 120; ++i) {
    const double v = V(lambda, x);
    if (v < prev - 1e-12 * std::max(1.0, prev))
      throw std::invalid_argument("potential '" + name + "': not nondecreasing");
    prev = v;
    x *= 1.5;
  }
  if (!(prev > 1.0))
    throw std::invalid_argument("potential '" + name + "': does not grow to infinity");
}

ScaleInfo solve_scale(const PotentialFamily& pot, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("solve_scale: lambda must be positive");
  const auto f = [&](double H) { return H * H * pot.V(lambda, H) - 1.0; };
  double lo = 1e-9, hi = 1e12;
  const double flo = f(lo), fhi = f(hi);
  if (!(flo < 0.0) || !(fhi > 0.0)) {
    std::ostringstream os;
    os << "solve_scale: no bracket for H in [1e-9, 1e12] at lambda=" << lambda
       << " (f(lo)=" << flo << ", f(hi)=" << fhi << ")";
    throw std::runtime_error(os.str());
  }
  for (int i = 0; i < 200 && (hi - lo) > 1e-13 * lo; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  ScaleInfo s;
  s.lambda = lambda;
  s.H = 0.5 * (lo + hi);
  s.h = 1.0 / s.H;
  if (std::abs(f(s.H)) > 1e-10)
    throw std::runtime_error("solve_scale: bisection did not meet tolerance");
  return s;
}

ProfileResult rescaled_profile(const PotentialFamily& pot, double lambda,
                               const std::vector<double>& grid) {
  const ScaleInfo s = solve_scale(pot, lambda);
  ProfileResult out;
  out.values.reserve(grid.size());
  for (double r : grid) {
    const double v = s.H * s.H * pot.V(lambda, r * s.H);
    out.values.push_back(v);
    out.sup_distance_to_q = std::max(out.sup_distance_to_q, std::abs(v - pot.q(r)));
  }
  return out;
}

}  // namespace tiltwalk
