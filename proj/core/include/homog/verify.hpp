#pragma once

#include <complex>
#include <cstdint>

#include "homog/homogenize.hpp"
#include "homog/simulate.hpp"
#include "homog/stats.hpp"

namespace homog {

struct EcfPoint {
  std::vector<double> xi;
  std::complex<double> value;
  double se = 0.0;  // combined standard error of the complex estimate
};

struct EcfResult {
  std::vector<EcfPoint> points;
  std::size_t n_samples = 0;
};

/// phi-hat(xi) = mean of e^{i xi . X} with per-point standard errors.
EcfResult empirical_char_fn(const std::vector<std::vector<double>>& samples,
                            const std::vector<std::vector<double>>& xi_grid);

/// Tensor grid of points_per_axis values per axis, spanning [-max, max]^d.
std::vector<std::vector<double>> make_xi_grid(int d, int points_per_axis, double max_xi);

struct EcfDistance {
  double distance = 0.0;       // max_xi |phi-hat - phi_ref|
  double se_at_argmax = 0.0;   // SE at the maximizing xi
  double noise_floor = 0.0;    // max_xi SE
  double max_ratio = 0.0;      // max_xi deviation / SE
  bool at_floor = false;       // max_ratio <= 4
};

struct ConvergenceReport {
  std::vector<double> eps_list;
  std::vector<double> t_list;
  // ECF distances indexed [eps][t]
  std::vector<std::vector<EcfDistance>> ecf;
  bool monotone = true;        // no increase beyond 2x combined SE (per t)
  bool final_at_floor = false; // smallest eps sits at the noise floor
  bool pass = false;           // the homogenization verdict (ECF based)
  // drift characteristic: |mean B_T/T - b_bar| per eps, with SE and verdicts
  std::vector<double> bconv_stat, bconv_se;
  bool bconv_pass = false;
  // jump functional int f dnu^eps vs int f dnu_bar
  std::vector<double> nuconv_stat, nuconv_se;
  double nu_reference = 0.0;
  bool nuconv_pass = false;
  // companion table for CSV output: one row per (eps, t, xi)
  struct Row {
    double eps, t;
    std::vector<double> xi;
    double re, im, se, ref_re, ref_im;
  };
  std::vector<Row> table;
  std::uint64_t total_jumps = 0;  // deterministic runtime counters
  std::uint64_t total_paths = 0;
};

struct VerifyOptions {
  int n_paths = 10000;
  int xi_points_per_axis = 17;
  double xi_max = 5.0;
  ExponentQuad exponent_quad;
};

/// Statistical verification of the homogenization limit: ECF distances
/// D(eps) against exp(t psi_bar), plus direct convergence of the drift
/// characteristic and of a jump functional supported away from the origin.
ConvergenceReport convergence_report(const ModelSpec& model, const HomogenizedTriplet& triplet,
                                     std::vector<double> eps_list, std::vector<double> t_list,
                                     const SimOptions& sim_opts, const VerifyOptions& opts,
                                     std::uint64_t seed_base);

struct MartingaleReport {
  std::vector<double> times;
  std::vector<MeanSe> m_stats;   // sample stats of M_t per checkpoint
  std::vector<double> z_scores;  // mean / SE per checkpoint
  double generator_error_bound = 0.0;
  double max_abs_z = 0.0;
};

/// Ito / martingale consistency: M_T = f(X_T) - f(X_0) - int_0^T A^eps f(X_s) ds
/// must be centered. drift_scale != 1 corrupts the generator drift on purpose
/// (negative control).
MartingaleReport martingale_test(const ModelSpec& model, const PeriodicField& f, double eps,
                                 const SimOptions& sim_opts, int n_paths, double drift_scale,
                                 std::uint64_t seed_base, int table_n = 512);

/// Smooth bump supported on 1 <= |z| <= 2 (the nu-convergence test function).
double nu_test_function(std::span<const double> z);

}  // namespace homog
