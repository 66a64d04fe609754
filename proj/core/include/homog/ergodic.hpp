#pragma once

#include <cstdint>
#include <vector>

#include "homog/simulate.hpp"
#include "homog/stats.hpp"

namespace homog {

struct InvariantOptions {
  int grid_n = 32;
  double t_burn = 1.0;
  double t_run = 8.0;
  int n_chains = 8;
};

/// Occupation-time estimate of the invariant measure of the cell process
/// (eps = 0 gives A~, eps > 0 the rescaled A~^eps used for the mu_eps -> mu
/// diagnostics), pooled over independent chains and normalized.
EmpiricalMeasure estimate_invariant_measure(const ModelSpec& model, const SimOptions& sim_opts,
                                            const InvariantOptions& opts, std::uint64_t seed_base,
                                            double eps = 0.0);

struct ErgodicAverageReport {
  MeanSe time_average;       // (1/T) int_0^T f(X_s/eps) ds over paths
  double reference = 0.0;    // supplied value of int f dmu
  MeanSe sup_deviation;      // sup_{t<=T} |int_0^t f - t ref| over paths
  double horizon = 0.0;
};

ErgodicAverageReport ergodic_average(const ModelSpec& model, const PeriodicField& f, double eps,
                                     const SimOptions& sim_opts, int n_paths, double reference,
                                     std::uint64_t seed_base);

struct MixingEstimate {
  double rate = 0.0;       // rho-hat, 1/time
  double prefactor = 0.0;  // C-hat
  std::vector<double> t_grid;
  std::vector<double> d_values;  // D(t) = max over probes of |E_x - E_y|
  std::vector<double> d_se;
  double fit_residual = 0.0;
  int fit_points = 0;
  bool decaying = false;
};

/// Contraction-rate estimate from two extreme starting points (0 and the
/// torus midpoint) probed with the lowest Fourier modes.
MixingEstimate mixing_rate_estimate(const ModelSpec& model, const SimOptions& sim_opts,
                                    std::vector<double> t_grid, int n_paths,
                                    std::uint64_t seed_base);

}  // namespace homog
