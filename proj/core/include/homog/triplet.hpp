#pragma once

#include <span>
#include <vector>

#include "homog/levy.hpp"

namespace homog {

/// Homogenized kernel kappa_bar(z) tabulated per direction. All the example
/// families produce direction-only limits; an optional per-direction radial
/// grid is kept in the data model for kernels whose kappa0 retains a radial
/// dependence.
struct KappaBarTable {
  int d = 1;
  // d = 1: values = {kappa_bar(+), kappa_bar(-)}
  // d = 2: values at midpoint angles theta_k = (k + 1/2) 2 pi / n
  std::vector<double> values;
  std::vector<double> log_radii;               // empty => constant in |z|
  std::vector<std::vector<double>> radial_values;  // per direction when used

  double eval_direction(std::span<const double> dir, double r = 1.0) const;
  double eval(std::span<const double> z) const;
  double min_value() const;
  double max_value() const;
};

/// Levy triplet (b_bar, 0, nu_bar) of the limit process, relative to the
/// unit-ball truncation. nu_bar(dz) = kappa_bar(z) J(z) dz.
struct HomogenizedTriplet {
  int d = 1;
  double alpha = 1.5;
  std::vector<double> b_bar;
  std::vector<double> c_bar;  // populated iff alpha in (1,2)
  KappaBarTable kappa_bar;
  LevyDensity J;
  double kappa1 = 0.0, kappa2 = 0.0;
  double tail_bound = 0.0;  // reported truncation error of the c_bar quadrature
};

}  // namespace homog
