#pragma once

#include <span>

#include "homog/model.hpp"
#include "homog/simulate.hpp"

namespace homog {

/// Quadrature controls for the nonlocal generator. The inner region
/// |z| < r_inner is handled by a second-order Taylor expansion with the
/// remainder bound reported; beyond resolve_radius the kernel is replaced by
/// its radial average and the compensator continues analytically, with the
/// dropped oscillatory part reported as a tail bound.
struct GenQuad {
  double r_inner = 1e-3;
  double r_outer = 1e3;  // hard cap on the resolved range
  int nodes_per_decade = 256;
  int angular_nodes = 32;
  double resolve_radius = 300.0;
  /// Spatial oscillation period of f along rays; 0 = derive from the field.
  double period_hint = 0.0;
};

struct GeneratorValue {
  double value = 0.0;
  double tail_bound = 0.0;
  double inner_remainder = 0.0;
  double error_bound() const { return tail_bound + inner_remainder; }
};

/// Applies the generator of the selected process to a scalar periodic f at x:
///   A f(x) = int [f(x+z) - f(x) - z.grad f(x) 1_comp(z)] kappa(.) J(z) dz
///            + drift(x) . grad f(x)
/// with the kernel argument pattern, compensation region and drift of the
/// chosen kind. drift_scale multiplies the drift term (negative controls).
GeneratorValue apply_generator(const ModelSpec& model, ProcessKind kind, double eps,
                               const PeriodicField& f, std::span<const double> x,
                               const GenQuad& quad = {}, double drift_scale = 1.0);

/// Convenience: the cell generator A~ (diagonal kernel, full compensation
/// for alpha in (1,2), drift b).
inline GeneratorValue apply_cell_generator(const ModelSpec& model, const PeriodicField& f,
                                           std::span<const double> x, const GenQuad& quad = {}) {
  return apply_generator(model, ProcessKind::Cell, 0.0, f, x, quad);
}

/// Tabulation of x -> A f(x) on a uniform torus grid with multilinear
/// interpolation, for evaluation along trajectories. For the eps-process the
/// map is 1-periodic only when 1/eps is an integer; other eps are rejected.
class GeneratorTable {
 public:
  GeneratorTable(const ModelSpec& model, ProcessKind kind, double eps, const PeriodicField& f,
                 int grid_n, const GenQuad& quad = {}, double drift_scale = 1.0);

  double operator()(std::span<const double> x) const;
  double error_bound() const { return err_; }
  const PeriodicField& field() const { return table_; }

 private:
  PeriodicField table_;
  double err_ = 0.0;
};

}  // namespace homog
