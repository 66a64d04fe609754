#include "homog/model.hpp"

#include <cmath>

#include "homog/errors.hpp"

namespace homog {

void ModelSpec::validate() const {
  if (d != J.dim()) throw ConfigError("ModelSpec: Levy density dimension mismatch");
  if (d != kernel.dim()) throw ConfigError("ModelSpec: kernel dimension mismatch");
  if (!(alpha > 0.0 && alpha < 2.0)) throw ConfigError("ModelSpec: alpha must lie in (0,2)");
  if (std::abs(alpha - J.alpha()) > 1e-12)
    throw ConfigError("ModelSpec: alpha disagrees with the Levy density index");
  for (const auto* f : {&b, &c}) {
    if (!f->has_value()) continue;
    if ((*f)->dim() != d || (*f)->arity() != d)
      throw ConfigError("ModelSpec: drift fields must be d-vector fields on T^d");
  }
  const bool has_drift = (b && b->sup_bound() > 0.0) || (c && c->sup_bound() > 0.0);
  if (has_drift && !drift_active() && !allow_inactive_drift)
    throw ConfigError(
        "ModelSpec: nonzero b/c with alpha outside (1,2) is inert (generator carries "
        "1_{(1,2)}(alpha)); set allow_inactive_drift to keep them");
  if (std::abs(alpha - 1.0) < 1e-12) {
    // the alpha = 1 well-posedness hinges on spherical centering
    auto fn = kernel.as_fn();
    std::vector<double> x(d, 0.25);
    double worst = 0.0;
    for (double r1 : {0.5, 1.0, 3.0})
      for (double r2 : {0.7, 2.0})
        worst = std::max(worst, check_sphere_centering(J, fn, x, r1, r2));
    if (worst > 1e-8)
      throw ValidationError("ModelSpec: alpha = 1 spherical centering fails (residual " +
                            std::to_string(worst) + ")");
  }
}

}  // namespace homog
