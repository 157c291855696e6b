#pragma once
// Parameter sets shared by the unit tests and the acceptance binary.

#include <vector>

#include "exlevy/calibration.hpp"
#include "exlevy/models.hpp"

namespace fixture {

using exlevy::models::Kind;
using exlevy::models::ModelSpec;

constexpr double kRate = 0.015;

// Two-asset setup used for the VG/VG++ pricing experiments: r = 0.01, rho = 0.8, alpha = 2.
inline ModelSpec pricing_setup(double a, double alpha = 2.0) {
  const Kind kind = a > 0.0 ? Kind::VGPP : Kind::VG;
  return exlevy::models::make_bivariate(kind, 0.01, {-0.2012, 0.2}, {-0.1712, 0.3}, 0.8,
                                        {a, alpha, alpha * (1.0 - a)});
}

inline ModelSpec bs_fit() {
  return exlevy::models::make_bivariate(Kind::BS, kRate, {0.0, 0.84}, {0.0, 0.91}, 0.96);
}

inline ModelSpec vg_fit() {
  return exlevy::models::make_bivariate(Kind::VG, kRate, {-0.27, 0.98}, {-0.24, 0.92}, 0.96, {0.0, 2.04, 2.04});
}

inline ModelSpec vgpp_fit() {
  return exlevy::models::make_bivariate(Kind::VGPP, kRate, {-0.28, 0.98}, {-0.26, 0.92}, 0.96,
                                        {0.04, 2.43, 2.43 * 0.96});
}

// Marginal shapes A_j + A from the unit-mean rule B / alpha_j = (1 - a)(A_j + A).
inline ModelSpec semeraro_fit(Kind kind, double rho = 0.99) {
  const double a = 0.01;
  const double B = 1224.83;
  std::vector<double> shapes;
  for (double al : {1.43, 1.64}) shapes.push_back(B / (al * (1.0 - a)));
  return exlevy::calibration::make_semeraro_from_marginals(kind, kRate, a, {{-0.47, 1.06}, {-0.35, 0.96}}, shapes,
                                                           1.43, B, kind == Kind::LS ? rho : 0.0);
}

inline ModelSpec bb_fit() {
  return exlevy::models::make_bb(kRate, 0.001, {0.141, 0.0001}, {12.20, 0.006}, {4.80, 4.74}, -3.15, 1.34, 1.4438,
                                 62.77);
}

}  // namespace fixture
