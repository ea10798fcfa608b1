#pragma once

#include <memory>
#include <vector>

namespace tiltwalk {

// Tabulated Ai on [x_min, x_max] built by fixed-step RK4 integration of
// Ai'' = x Ai. The oscillatory side x <= 0 integrates directly from the
// exact values Ai(0), Ai'(0); the decaying side integrates backward from
// beyond x_max, where the growing companion solution dies out, and is then
// rescaled to match Ai(0). Values between nodes use cubic Hermite
// interpolation (the stored derivative makes it cheap and accurate).
class AiryEvaluator {
 public:
  AiryEvaluator(double x_min = -16.0, double x_max = 46.0, double step = 2.5e-4);

  double operator()(double x) const;
  double deriv(double x) const;
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }

  // Magnitude of the j-th zero of Ai (j >= 1): Ai(-zero(j)) = 0.
  double zero(int j) const;

 private:
  double x_min_, x_max_, step_;
  std::vector<double> val_, der_;

  double node(std::size_t i) const { return x_min_ + step_ * static_cast<double>(i); }
};

std::shared_ptr<const AiryEvaluator> shared_airy();

// Ground state for the linear profile q(r) = r: phi0(r) = Ai(chi r - omega1)
// normalized to unit L2 on (0, inf), chi = (2/sigma2)^{1/3}, e0 = omega1/chi.
struct AiryGroundState {
  double sigma2 = 0.0;
  double chi = 0.0;
  double omega1 = 0.0;
  double e0 = 0.0;
  double norm = 0.0;  // sqrt(chi)/|Ai'(-omega1)|
  std::shared_ptr<const AiryEvaluator> ai;

  double operator()(double r) const;
  double deriv(double r) const;
};

AiryGroundState airy_ground_state(double sigma2);

}  // namespace tiltwalk
