#pragma once

#include <cstdint>
#include <optional>

#include "homog/ergodic.hpp"
#include "homog/generator.hpp"
#include "homog/simulate.hpp"

namespace homog {

/// Solution of the corrector equation A~ b-hat + b = 0, grid-backed, with the
/// gradient table and the diagnostics the homogenizer consumes.
struct Corrector {
  PeriodicField values;    // arity d, grid backing
  PeriodicField gradient;  // arity d*d, entries (i,j) = d b-hat_i / d x_j
  /// Truncated-series form of the smoothed solution (one scalar field per
  /// component); the residual audit evaluates the generator on this exact
  /// representation instead of the chord interpolant.
  std::vector<PeriodicField> components_fourier;
  double residual_norm = 0.0;
  double residual_tolerance = 0.0;  // quadrature + Monte Carlo part of the residual
  std::vector<double> centering_residual;
  bool trivial = false;  // b == 0 shortcut
};

struct CorrectorOptions {
  int grid_n = 64;
  double horizon = 0.0;  // 0 = choose from the mixing estimate
  int n_paths = 20000;
  int fourier_modes = 6;  // low-pass of the node estimates; 0 disables
  double target_tol = 0.02;
  int residual_probes = 16;
  double centering_tol = 0.02;  // precondition |int b dmu| against an estimated mu
  bool throw_on_residual = true;
  GenQuad residual_quad;
};

/// Probabilistic corrector solve: b-hat_i(x) = int_0^T* E_x[b_i(X~_t)] dt by
/// Monte Carlo with common random numbers across grid nodes, low-pass
/// smoothing, mu-recentering and a generator-quadrature residual audit.
Corrector solve_corrector(const ModelSpec& model, const EmpiricalMeasure& mu,
                          const SimOptions& sim_opts, const CorrectorOptions& opts,
                          std::uint64_t seed_base,
                          const MixingEstimate* mixing = nullptr);

/// Monte Carlo resolvent u_lambda(x) = int_0^inf e^{-lambda t} T_t f(x) dt of
/// the ball-truncated operator L^{b,eta} (the cell dynamics at eps = 1), on a
/// grid. The horizon is chosen so e^{-lambda H} <= 1e-6.
PeriodicField resolvent(const ModelSpec& model, const PeriodicField& f, double lambda,
                        const SimOptions& sim_opts, int grid_n, int n_paths,
                        std::uint64_t seed_base);

/// Max over nodes of |lambda u(x) - L^{b,eta} u(x) - f(x)|.
double verify_poisson_identity(const ModelSpec& model, const PeriodicField& u,
                               const PeriodicField& f, double lambda,
                               const std::vector<std::vector<double>>& nodes,
                               const GenQuad& quad = {});

/// Cross-check route for the corrector: Richardson extrapolation of the
/// resolvent in lambda, u_0 ~ (l2 u_{l1} - l1 u_{l2}) / (l2 - l1), evaluated
/// with common random numbers so the extrapolation subtracts correlated
/// noise. Returns a grid field approximating the centered solution of
/// L u + f = 0.
PeriodicField resolvent_corrector_route(const ModelSpec& model, const PeriodicField& f,
                                        double lambda1, double lambda2,
                                        const SimOptions& sim_opts, int grid_n, int n_paths,
                                        std::uint64_t seed_base);

}  // namespace homog
