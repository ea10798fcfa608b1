#pragma once

#include <functional>
#include <string>
#include <vector>

namespace tiltwalk {

// Family of self-potentials V_lambda on [0, inf) together with its limit
// profile q and lower envelope q0, both on the rescaled axis.
struct PotentialFamily {
  enum class Kind { Linear, Power, Custom };

  Kind kind = Kind::Linear;
  std::string name = "linear";
  std::function<double(double, double)> V;  // (lambda, x) -> V_lambda(x)
  std::function<double(double)> q;
  std::function<double(double)> q0;

  static PotentialFamily linear();
  static PotentialFamily power(double alpha);
  static PotentialFamily custom(std::string name,
                                std::function<double(double, double)> V,
                                std::function<double(double)> q,
                                std::function<double(double)> q0);

  // Grid sanity check: V_lambda(0) = 0, nondecreasing, eventually large.
  void validate(double lambda) const;
};

// Characteristic scale: H is the unique solution of H^2 V_lambda(H) = 1,
// h = 1/H. H is the spatial and H^2 the temporal scale of the model.
struct ScaleInfo {
  double lambda = 0.0;
  double H = 0.0;
  double h = 0.0;
};

// Bracketed bisection for H on [1e-9, 1e12]; relative tolerance 1e-10 or
// better on the defining relation.
ScaleInfo solve_scale(const PotentialFamily& pot, double lambda);

struct ProfileResult {
  std::vector<double> values;  // H^2 V_lambda(r H) per grid point
  double sup_distance_to_q = 0.0;
};

ProfileResult rescaled_profile(const PotentialFamily& pot, double lambda,
                               const std::vector<double>& grid);

}  // namespace tiltwalk
