#include "tiltwalk/airy.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

namespace tiltwalk {

namespace {

constexpr double kAi0 = 0.35502805388781723926;    // 3^{-2/3} / Gamma(2/3)
constexpr double kAip0 = -0.25881940379280679840;  // -3^{-1/3} / Gamma(1/3)

struct State {
  double y, d;
};

State rk4_step(double x, State s, double h) {
  const auto f = [](double xx, State u) { return State{u.d, xx * u.y}; };
  const State k1 = f(x, s);
  const State k2 = f(x + 0.5 * h, {s.y + 0.5 * h * k1.y, s.d + 0.5 * h * k1.d});
  const State k3 = f(x + 0.5 * h, {s.y + 0.5 * h * k2.y, s.d + 0.5 * h * k2.d});
  const State k4 = f(x + h, {s.y + h * k3.y, s.d + h * k3.d});
  return {s.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
          s.d + h / 6.0 * (k1.d + 2.0 * k2.d + 2.0 * k3.d + k4.d)};
}

}  // namespace

AiryEvaluator::AiryEvaluator(double x_min, double x_max, double step)
    : x_min_(x_min), x_max_(x_max), step_(step) {
  if (!(x_min < 0.0) || !(x_max > 0.0) || !(step > 0.0))
    throw std::invalid_argument("AiryEvaluator: bad range");
  const std::size_t n_lo = static_cast<std::size_t>(std::llround(-x_min / step));
  const std::size_t n_hi = static_cast<std::size_t>(std::llround(x_max / step));
  x_min_ = -static_cast<double>(n_lo) * step;
  x_max_ = static_cast<double>(n_hi) * step;
  val_.assign(n_lo + n_hi + 1, 0.0);
  der_.assign(n_lo + n_hi + 1, 0.0);

  // Oscillatory side, exact initial data at 0.
  State s{kAi0, kAip0};
  val_[n_lo] = s.y;
  der_[n_lo] = s.d;
  for (std::size_t i = 0; i < n_lo; ++i) {
    const double x = -static_cast<double>(i) * step;
    s = rk4_step(x, s, -step);
    val_[n_lo - i - 1] = s.y;
    der_[n_lo - i - 1] = s.d;
  }

  // Decaying side: integrate backward from beyond x_max with WKB-flavoured
  // seed data, then match the known value at 0.
  const double pad = 8.0;
  const std::size_t n_pad = static_cast<std::size_t>(std::llround(pad / step));
  const double x_top = x_max_ + static_cast<double>(n_pad) * step;
  s = State{1.0, -std::sqrt(x_top)};
  double x = x_top;
  for (std::size_t i = 0; i < n_pad; ++i) {
    s = rk4_step(x, s, -step);
    x -= step;
  }
  std::size_t idx = val_.size() - 1;
  val_[idx] = s.y;
  der_[idx] = s.d;
  while (idx > n_lo) {
    s = rk4_step(x, s, -step);
    x -= step;
    --idx;
    val_[idx] = s.y;
    der_[idx] = s.d;
  }
  const double scale = kAi0 / s.y;
  for (std::size_t i = n_lo; i < val_.size(); ++i) {
    val_[i] *= scale;
    der_[i] *= scale;
  }
  // Re-anchor the matched node to the exact values.
  val_[n_lo] = kAi0;
  der_[n_lo] = kAip0;
}

double AiryEvaluator::operator()(double x) const {
  if (x >= x_max_) return 0.0;
  if (x < x_min_) throw std::invalid_argument("AiryEvaluator: x below tabulated range");
  const double u = (x - x_min_) / step_;
  const std::size_t i = static_cast<std::size_t>(u);
  const double t = u - static_cast<double>(i);
  const double v0 = val_[i], v1 = val_[i + 1];
  const double d0 = der_[i], d1 = der_[i + 1];
  const double t2 = t * t, t3 = t2 * t;
  return (2.0 * t3 - 3.0 * t2 + 1.0) * v0 + (t3 - 2.0 * t2 + t) * step_ * d0 +
         (-2.0 * t3 + 3.0 * t2) * v1 + (t3 - t2) * step_ * d1;
}

double AiryEvaluator::deriv(double x) const {
  if (x >= x_max_) return 0.0;
  if (x < x_min_) throw std::invalid_argument("AiryEvaluator: x below tabulated range");
  const double u = (x - x_min_) / step_;
  const std::size_t i = static_cast<std::size_t>(u);
  const double t = u - static_cast<double>(i);
  const double v0 = val_[i], v1 = val_[i + 1];
  const double d0 = der_[i], d1 = der_[i + 1];
  const double t2 = t * t;
  return ((6.0 * t2 - 6.0 * t) * (v0 - v1) / step_ + (3.0 * t2 - 4.0 * t + 1.0) * d0 +
          (3.0 * t2 - 2.0 * t) * d1);
}

double AiryEvaluator::zero(int j) const {
  if (j < 1) throw std::invalid_argument("AiryEvaluator::zero: j must be >= 1");
  const std::size_t i0 = static_cast<std::size_t>(std::llround(-x_min_ / step_));
  int found = 0;
  for (std::size_t i = i0; i > 0; --i) {
    if ((val_[i] > 0.0) != (val_[i - 1] > 0.0)) {
      ++found;
      if (found == j) {
        double a = node(i - 1), b = node(i);
        double fa = (*this)(a);
        for (int it = 0; it < 200 && b - a > 1e-16 * std::abs(a); ++it) {
          const double m = 0.5 * (a + b);
          const double fm = (*this)(m);
          if ((fm > 0.0) == (fa > 0.0)) {
            a = m;
            fa = fm;
          } else {
            b = m;
          }
        }
        return -0.5 * (a + b);
      }
    }
  }
  throw std::runtime_error("AiryEvaluator::zero: zero not found in tabulated range");
}

std::shared_ptr<const AiryEvaluator> shared_airy() {
  static std::shared_ptr<const AiryEvaluator> instance = std::make_shared<AiryEvaluator>();
  return instance;
}

double AiryGroundState::operator()(double r) const {
  if (r < 0.0) return 0.0;
  return norm * (*ai)(chi * r - omega1);
}

double AiryGroundState::deriv(double r) const {
  if (r < 0.0) return 0.0;
  return norm * chi * ai->deriv(chi * r - omega1);
}

AiryGroundState airy_ground_state(double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("airy_ground_state: sigma2 must be positive");
  AiryGroundState g;
  g.sigma2 = sigma2;
  g.chi = std::cbrt(2.0 / sigma2);
  g.ai = shared_airy();
  g.omega1 = g.ai->zero(1);
  g.e0 = g.omega1 / g.chi;
  // Unit L2 norm on (0, inf): integral of Ai^2 from -omega1 equals Ai'(-omega1)^2.
  const double aip = g.ai->deriv(-g.omega1);
  g.norm = std::sqrt(g.chi) / std::abs(aip);
  return g;
}

}  // namespace tiltwalk
