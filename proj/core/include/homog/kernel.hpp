#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homog/fields.hpp"
#include "homog/levy.hpp"

namespace homog {

enum class KernelFamily { Constant, Product, Diffeo, VariableOrder, OneDim };

std::string to_string(KernelFamily f);

/// Uniform bounds and Holder data for kappa (kappa1 <= kappa <= kappa2,
/// |kappa(x1,.) - kappa(x2,.)| <= kappa3 |x1-x2|^beta).
struct KernelBounds {
  double kappa1 = 1.0;
  double kappa2 = 1.0;
  double kappa3 = 0.0;
  double beta = 0.5;
};

/// Decaying oscillation added to the one-dimensional family profile so the
/// pointwise and Cesaro limits agree while kappa* is not eventually constant.
struct OneDimProfile {
  double step_scale = 1.0;     // tanh step width in v
  double transient_decay = 10.0;  // e^{-|v|/decay} envelope of the cos(v) term
};

/// State-dependent jump kernel kappa*(x, z, u, v), its diagonal
/// kappa(x,z,u) = kappa*(x,z,u,u) and the scaling limit kappa0(x,z,u)
/// of kappa*(x,z,u,z/eps) as eps -> 0+.
class JumpKernel {
 public:
  JumpKernel() = default;

  static JumpKernel constant(int dim, double value);

  /// kappa* = X(x) * U(u) * V(angle(v)); the v factor depends on the
  /// direction only, so its eps -> 0 limit is itself. The angle coordinate is
  /// one-dimensional: d=1 maps +/- to {0, 1/2}, d=2 maps theta/2pi.
  static JumpKernel product(int dim, PeriodicField x_factor, PeriodicField u_factor,
                            PeriodicField v_limit_factor, std::optional<KernelBounds> bounds = {});

  /// Kernel of the SDE family with sigma(x,y) = a(x) y: kappa = a(x)^alpha.
  static JumpKernel diffeo(int dim, double alpha, PeriodicField a_field,
                           std::optional<KernelBounds> bounds = {});

  /// Variable-order family: kappa*(x,v) = rho(x, v/|v|) / J0(v/|v|) *
  /// |v|^{alpha0 - alpha(x)} with alpha0 = min alpha. rho is separable into an
  /// x factor and an optional angular factor over the angle coordinate.
  static JumpKernel variable_order(PeriodicField alpha_field, PeriodicField rho_x,
                                   std::optional<PeriodicField> rho_angular, LevyDensity J0,
                                   std::optional<KernelBounds> bounds = {});

  /// One-dimensional family: kappa*(x,v) = k0p(x) s(v) + k0m(x) (1 - s(v))
  /// + m(x) cos(v) e^{-|v|/L}, s(v) = (1 + tanh(v / step_scale)) / 2.
  static JumpKernel one_dim(PeriodicField kappa0_plus, PeriodicField kappa0_minus,
                            std::optional<PeriodicField> transient_x, OneDimProfile profile,
                            std::optional<KernelBounds> bounds = {});

  KernelFamily family() const { return family_; }
  int dim() const { return dim_; }
  const KernelBounds& bounds() const { return bounds_; }
  double kappa1() const { return bounds_.kappa1; }
  double kappa2() const { return bounds_.kappa2; }

  /// kappa(x,z,u) with the band check; out-of-band values signal a
  /// misconfigured family.
  double kappa(std::span<const double> x, std::span<const double> z,
               std::span<const double> u) const;
  double kappa_unchecked(std::span<const double> x, std::span<const double> z,
                         std::span<const double> u) const;
  double kappa_star(std::span<const double> x, std::span<const double> z,
                    std::span<const double> u, std::span<const double> v) const;
  /// Analytic scaling limit kappa0(x,z,u).
  double kappa0(std::span<const double> x, std::span<const double> z,
                std::span<const double> u) const;
  /// Whether kappa0 genuinely depends on the torus variable u.
  bool kappa0_depends_on_u() const { return family_ == KernelFamily::Product; }
  /// Indicator-type limits (variable order) converge pointwise but not
  /// uniformly in x; their validation uses an L1 contraction criterion.
  bool kappa0_discontinuous() const { return family_ == KernelFamily::VariableOrder; }
  /// Constant kernels carry no x-dependence: derived fields collapse to a
  /// single tabulation node.
  bool x_independent() const { return family_ == KernelFamily::Constant; }

  /// Diffeo family accessors (sigma(x,y) = a(x) y and its inverse).
  double diffeo_a(std::span<const double> x) const;
  double diffeo_alpha() const { return alpha_; }

  /// Variable-order accessors.
  double alpha0() const { return alpha0_; }
  double order_alpha(std::span<const double> x) const;

  KernelFn as_fn() const;

 private:
  KernelFamily family_ = KernelFamily::Constant;
  int dim_ = 1;
  KernelBounds bounds_;
  double value_ = 1.0;  // constant family

  PeriodicField x_factor_, u_factor_, v_factor_;  // product
  PeriodicField a_field_;                         // diffeo
  double alpha_ = 1.5;                            // diffeo exponent
  PeriodicField alpha_field_, rho_x_;             // variable order
  std::optional<PeriodicField> rho_ang_;
  LevyDensity j0_;
  double alpha0_ = 0.0;
  PeriodicField k0p_, k0m_;  // one-dim
  std::optional<PeriodicField> transient_;
  OneDimProfile profile_;

  double eval_star(std::span<const double> x, std::span<const double> z,
                   std::span<const double> u, std::span<const double> v) const;
};

/// Maps a unit direction to the 1-d angle coordinate used by angular factors.
double angle_coordinate(std::span<const double> dir);

struct SequenceCheck {
  std::vector<double> eps;
  std::vector<double> residual;
  double tol = 0.0;
  bool decreasing = false;
  bool final_below_tol = false;
  bool applicable = true;
  bool pass() const { return !applicable || (decreasing && final_below_tol); }
};

struct AssumptionReport {
  double min_kappa = 0.0, max_kappa = 0.0;
  bool bounds_pass = false;
  double holder_ratio = 0.0;
  bool holder_pass = false;
  SequenceCheck ez;          // kappa(x, eps z, z) -> kappa(x, z, z)
  SequenceCheck ez1;         // eps^{1-alpha}-scaled version (alpha in (1,2))
  SequenceCheck kappa0_conv; // sup |kappa*(x,z,u,z/eps) - kappa0(x,z,u)|
  SequenceCheck kappa0_l1;   // mean residual (binding for indicator limits)
  double sphere_centering_residual = 0.0;  // alpha = 1 only
  bool sphere_applicable = false;
  bool sphere_pass = true;
  bool pass() const {
    return bounds_pass && holder_pass && ez.pass() && ez1.pass() && kappa0_conv.pass() &&
           kappa0_l1.pass() && sphere_pass;
  }
};

struct ValidationOptions {
  int sample_budget = 4000;
  std::vector<double> eps_sequence = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  double tol = 1e-6;
  bool drift_present = true;  // enables the (ez-1) check for alpha in (1,2)
  std::uint64_t seed = 20240801;
};

/// Numerical audit of the kernel assumptions: bounds, Holder ratio, the two
/// eps-continuity conditions and convergence to the analytic kappa0.
AssumptionReport validate_assumptions(const JumpKernel& kernel, const LevyDensity& J,
                                      const ValidationOptions& opts = {});

}  // namespace homog
