#pragma once

#include <optional>

#include "homog/fields.hpp"
#include "homog/kernel.hpp"
#include "homog/levy.hpp"

namespace homog {

/// Full generator data: stability index, Levy density, state-dependent
/// kernel and the periodic drift fields. The drift pair (b, c) only enters
/// for alpha in (1,2); configs carrying drift outside that range are
/// rejected unless the override flag is set.
struct ModelSpec {
  int d = 1;
  double alpha = 1.5;
  LevyDensity J;
  JumpKernel kernel;
  std::optional<PeriodicField> b;
  std::optional<PeriodicField> c;
  bool allow_inactive_drift = false;

  bool drift_active() const { return alpha > 1.0 && alpha < 2.0; }

  /// Structural validation; alpha = 1 additionally requires the spherical
  /// centering identity to hold at construction time.
  void validate() const;
};

}  // namespace homog
