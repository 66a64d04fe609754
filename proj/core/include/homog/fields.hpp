#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "homog/rng.hpp"

namespace homog {

/// One real Fourier term: cos_coeff*cos(2*pi*k.x) + sin_coeff*sin(2*pi*k.x).
/// Real cos/sin pairs enforce conjugate symmetry by construction.
struct FourierTerm {
  std::vector<int> freq;
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
};

/// Periodic function on the d-torus, scalar or d-vector valued. Backed either
/// by a truncated Fourier series (exact evaluation and gradients) or by a
/// uniform grid of samples with multilinear interpolation (solver outputs).
class PeriodicField {
 public:
  PeriodicField() = default;

  static PeriodicField fourier(int dim, std::vector<std::vector<FourierTerm>> components);
  static PeriodicField constant(int dim, std::vector<double> values);
  /// Grid backing: samples at nodes (j_1,...,j_d)/n, component-major layout
  /// values[c * n^d + flat_node_index].
  static PeriodicField grid(int dim, int n, int arity, std::vector<double> values);
  /// Sample an arbitrary callable onto an n-per-axis grid.
  static PeriodicField sample(int dim, int n, int arity,
                              const std::function<void(std::span<const double>, std::span<double>)>& fn);

  int dim() const { return dim_; }
  int arity() const { return arity_; }
  bool is_fourier() const { return backing_ == Backing::Fourier; }
  int grid_n() const { return grid_n_; }

  void evaluate(std::span<const double> x, std::span<double> out) const;
  double evaluate_scalar(std::span<const double> x) const;

  /// Jacobian, row-major arity x dim: out[c*dim + j] = d(f_c)/d(x_j).
  /// Exact for Fourier backing, central differences (h = 1/n) for grids.
  void gradient(std::span<const double> x, std::span<double> out) const;

  /// Second derivative matrix of component c, row-major dim x dim.
  /// Exact for Fourier backing, second differences for grids.
  void hessian(std::span<const double> x, int component, std::span<double> out) const;

  /// Upper bound on the sup norm (sum of |coefficients| for Fourier,
  /// max |sample| for grids).
  double sup_bound() const;
  /// Upper bound on max_c,j |d f_c / d x_j|.
  double grad_sup_bound() const;
  /// Upper bound on the second derivative magnitude along any direction.
  double second_deriv_bound() const;
  /// Upper bound on the third derivative magnitude along any direction
  /// (used for quadrature remainder control; Fourier backing only, grids
  /// fall back to a finite-difference estimate).
  double third_deriv_bound() const;

  const std::vector<std::vector<FourierTerm>>& fourier_terms() const { return terms_; }
  const std::vector<double>& grid_values() const { return values_; }

 private:
  enum class Backing { Fourier, Grid };
  Backing backing_ = Backing::Fourier;
  int dim_ = 0;
  int arity_ = 0;
  int grid_n_ = 0;
  std::vector<std::vector<FourierTerm>> terms_;  // per component
  std::vector<double> values_;                   // component-major grid samples
};

/// Cell-count measure on a uniform grid over the torus. Cell i covers
/// [i/n, (i+1)/n) per axis; weights are occupation masses.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  EmpiricalMeasure(int dim, int grid_n);

  static EmpiricalMeasure uniform(int dim, int grid_n);

  int dim() const { return dim_; }
  int grid_n() const { return grid_n_; }
  std::size_t cell_count() const { return weights_.size(); }
  bool normalized() const { return normalized_; }
  double total() const { return total_; }
  const std::vector<double>& weights() const { return weights_; }

  std::size_t cell_index(std::span<const double> x) const;
  void cell_center(std::size_t index, std::span<double> out) const;

  void add(std::span<const double> x, double weight);
  void add_cell(std::size_t index, double weight);
  void merge(const EmpiricalMeasure& other);
  void normalize();

  double tv_distance(const EmpiricalMeasure& other) const;

 private:
  int dim_ = 0;
  int grid_n_ = 0;
  std::vector<double> weights_;
  double total_ = 0.0;
  bool normalized_ = false;
};

/// Quadrature of a field against the uniform measure (tensor-product
/// midpoint rule with nodes_per_axis points per axis).
std::vector<double> integrate_uniform(const PeriodicField& f, int nodes_per_axis);

/// Quadrature against an empirical measure (cell-midpoint rule). The measure
/// must be normalized unless allow_unnormalized is set.
std::vector<double> integrate(const PeriodicField& f, const EmpiricalMeasure& mu,
                              bool allow_unnormalized = false);

struct CenteringReport {
  std::vector<double> residual;  // |int b_i dmu| per component
  double max_abs = 0.0;
  double tol = 0.0;
  bool pass = false;
};

/// Checks the centering condition int b dmu = 0 componentwise.
CenteringReport check_centering(const PeriodicField& b, const EmpiricalMeasure& mu, double tol);

/// Empirical Holder-constant estimate sup |g(x1)-g(x2)| / |x1-x2|^beta over
/// sampled pairs with separations in [min_dist, max_dist].
double estimate_holder_constant(const std::function<double(std::span<const double>)>& g, int dim,
                                double beta, int n_pairs, double min_dist, double max_dist,
                                Rng& rng);

/// Wraps a coordinate into [0, 1).
inline double wrap_unit(double x) {
  double w = x - std::floor(x);
  return w < 1.0 ? w : 0.0;
}

}  // namespace homog
