#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "homog/quad.hpp"
#include "homog/rng.hpp"

namespace homog {

/// alpha-stable Levy density J(z) = |z|^{-(d+alpha)} * J(z/|z|), determined by
/// the stability index and a spherical density bounded between j1 and j2.
/// d = 1 uses the ray pair (j+, j-); d = 2 uses a table of values at uniform
/// angles with periodic linear interpolation.
class LevyDensity {
 public:
  LevyDensity() = default;

  static LevyDensity one_dim(double alpha, double jplus, double jminus);
  static LevyDensity isotropic(int dim, double alpha, double sphere_value = 1.0);
  /// d = 2: values[k] = J(angle 2*pi*k/values.size()).
  static LevyDensity angular_table(double alpha, std::vector<double> values);

  int dim() const { return dim_; }
  double alpha() const { return alpha_; }
  double jplus() const;
  double jminus() const;
  const std::vector<double>& table() const { return table_; }

  /// Spherical density at a unit vector.
  double sphere_value(std::span<const double> xi) const;
  /// Density at z != 0 via homogeneity of degree -(d+alpha).
  double density(std::span<const double> z) const;

  double j1() const { return j1_; }
  double j2() const { return j2_; }
  /// Total spherical mass omega_J = int_S J(xi) dxi.
  double sphere_mass() const { return sphere_mass_; }
  /// Mass of the annulus rmin <= |z| < rmax under J(z) dz.
  double annulus_mass(double rmin, double rmax = std::numeric_limits<double>::infinity()) const;

 private:
  int dim_ = 1;
  double alpha_ = 1.5;
  double jp_ = 1.0, jm_ = 1.0;  // d == 1
  std::vector<double> table_;   // d == 2
  double j1_ = 1.0, j2_ = 1.0, sphere_mass_ = 2.0;
  void finalize();
};

/// Quadrature node on the unit sphere with weight and cached J value:
/// int_S J(xi) f(xi) dxi ~ sum_k weight[k] * jval[k] * f(dir_k).
struct AngularNode {
  std::vector<double> dir;
  double weight = 0.0;
  double jval = 0.0;
};

/// d = 1: the exact two-point sphere; d = 2: n midpoint angles.
std::vector<AngularNode> angular_quadrature(const LevyDensity& J, int nodes_d2 = 32);

/// Draws from J(z) dz restricted to the annulus rmin <= |z| < rmax
/// (inverse-CDF radius, rejection against j2 for the direction).
class JumpSampler {
 public:
  JumpSampler(const LevyDensity& J, double rmin,
              double rmax = std::numeric_limits<double>::infinity());

  double total_mass() const { return mass_; }
  void sample(Rng& rng, std::span<double> z_out) const;
  /// Tail function of |Z|: P(|Z| > r).
  double radial_tail(double r) const;

 private:
  const LevyDensity* J_;
  double rmin_, rmax_, alpha_;
  double pow_min_, pow_max_;  // r^{-alpha} at the ends
  double mass_;
};

/// State-dependent kernel evaluation kappa(x, z, u) used by the quadrature
/// routines below; concrete kernels adapt themselves to this signature.
using KernelFn = std::function<double(std::span<const double>, std::span<const double>,
                                      std::span<const double>)>;

/// Vector integral int_{rmin <= |z| < rmax} z kappa(x, z, z/eps) J(z) dz.
/// rmin = 0 is admitted for alpha < 1 (absolutely convergent); for alpha >= 1
/// it requires a symmetric truncation (quadrature pairs +/- directions, so a
/// symmetric integrand cancels exactly node by node).
std::vector<double> compensator_integral(const LevyDensity& J, const KernelFn& kappa,
                                         std::span<const double> x, double eps, double rmin,
                                         double rmax, const RadialQuad& quad = {},
                                         int angular_nodes = 32);

/// Residual norm of the alpha = 1 spherical centering condition
/// int_S xi kappa(x, r1 xi, r2 xi) J(xi) dxi.
double check_sphere_centering(const LevyDensity& J, const KernelFn& kappa,
                              std::span<const double> x, double r1, double r2,
                              int angular_nodes = 64);

}  // namespace homog
