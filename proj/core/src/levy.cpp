#include "homog/levy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "homog/errors.hpp"

namespace homog {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

LevyDensity LevyDensity::one_dim(double alpha, double jplus, double jminus) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw ConfigError("LevyDensity: alpha must be in (0,2)");
  if (jplus < 0.0 || jminus < 0.0 || jplus + jminus <= 0.0)
    throw ConfigError("LevyDensity: invalid ray weights");
  LevyDensity J;
  J.dim_ = 1;
  J.alpha_ = alpha;
  J.jp_ = jplus;
  J.jm_ = jminus;
  J.finalize();
  return J;
}

LevyDensity LevyDensity::isotropic(int dim, double alpha, double sphere_value) {
  if (dim == 1) return one_dim(alpha, sphere_value, sphere_value);
  if (dim != 2) throw ConfigError("LevyDensity: only d in {1,2} supported");
  return angular_table(alpha, std::vector<double>(16, sphere_value));
}

LevyDensity LevyDensity::angular_table(double alpha, std::vector<double> values) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw ConfigError("LevyDensity: alpha must be in (0,2)");
  if (values.size() < 2) throw ConfigError("LevyDensity: angular table too small");
  for (double v : values)
    if (v < 0.0) throw ConfigError("LevyDensity: negative spherical density");
  LevyDensity J;
  J.dim_ = 2;
  J.alpha_ = alpha;
  J.table_ = std::move(values);
  J.finalize();
  return J;
}

void LevyDensity::finalize() {
  if (dim_ == 1) {
    j1_ = std::min(jp_, jm_);
    j2_ = std::max(jp_, jm_);
    sphere_mass_ = jp_ + jm_;
  } else {
    j1_ = *std::min_element(table_.begin(), table_.end());
    j2_ = *std::max_element(table_.begin(), table_.end());
    // periodic linear interpolant integrates exactly as the node mean
    double mean = 0.0;
    for (double v : table_) mean += v;
    mean /= static_cast<double>(table_.size());
    sphere_mass_ = kTwoPi * mean;
  }
}

double LevyDensity::jplus() const {
  if (dim_ != 1) throw ConfigError("LevyDensity: jplus only defined for d=1");
  return jp_;
}

double LevyDensity::jminus() const {
  if (dim_ != 1) throw ConfigError("LevyDensity: jminus only defined for d=1");
  return jm_;
}

double LevyDensity::sphere_value(std::span<const double> xi) const {
  if (dim_ == 1) return xi[0] > 0.0 ? jp_ : jm_;
  double theta = std::atan2(xi[1], xi[0]);
  if (theta < 0.0) theta += kTwoPi;
  double pos = theta / kTwoPi * static_cast<double>(table_.size());
  std::size_t i0 = static_cast<std::size_t>(pos) % table_.size();
  std::size_t i1 = (i0 + 1) % table_.size();
  double frac = pos - std::floor(pos);
  return table_[i0] * (1.0 - frac) + table_[i1] * frac;
}

double LevyDensity::density(std::span<const double> z) const {
  double r2 = 0.0;
  for (double v : z) r2 += v * v;
  if (r2 == 0.0) throw NumericsError("LevyDensity::density: z = 0");
  double r = std::sqrt(r2);
  if (dim_ == 1) {
    double sval = z[0] > 0.0 ? jp_ : jm_;
    return sval * std::pow(r, -(1.0 + alpha_));
  }
  double xi[2] = {z[0] / r, z[1] / r};
  return sphere_value(std::span<const double>(xi, 2)) * std::pow(r, -(dim_ + alpha_));
}

double LevyDensity::annulus_mass(double rmin, double rmax) const {
  if (rmin <= 0.0) throw NumericsError("LevyDensity::annulus_mass: rmin must be positive");
  if (rmax <= rmin) return 0.0;
  double outer = std::isinf(rmax) ? 0.0 : std::pow(rmax, -alpha_);
  return sphere_mass_ * (std::pow(rmin, -alpha_) - outer) / alpha_;
}

std::vector<AngularNode> angular_quadrature(const LevyDensity& J, int nodes_d2) {
  std::vector<AngularNode> nodes;
  if (J.dim() == 1) {
    nodes.push_back({{1.0}, 1.0, J.jplus()});
    nodes.push_back({{-1.0}, 1.0, J.jminus()});
    return nodes;
  }
  nodes.reserve(nodes_d2);
  for (int k = 0; k < nodes_d2; ++k) {
    double theta = (static_cast<double>(k) + 0.5) * kTwoPi / nodes_d2;
    AngularNode n;
    n.dir = {std::cos(theta), std::sin(theta)};
    n.weight = kTwoPi / nodes_d2;
    n.jval = J.sphere_value(n.dir);
    nodes.push_back(std::move(n));
  }
  return nodes;
}

JumpSampler::JumpSampler(const LevyDensity& J, double rmin, double rmax)
    : J_(&J), rmin_(rmin), rmax_(rmax), alpha_(J.alpha()) {
  if (rmin <= 0.0) throw NumericsError("JumpSampler: rmin must be positive");
  if (!(rmax > rmin)) throw NumericsError("JumpSampler: empty annulus");
  pow_min_ = std::pow(rmin_, -alpha_);
  pow_max_ = std::isinf(rmax_) ? 0.0 : std::pow(rmax_, -alpha_);
  mass_ = J.sphere_mass() * (pow_min_ - pow_max_) / alpha_;
}

double JumpSampler::radial_tail(double r) const {
  if (r <= rmin_) return 1.0;
  double pr = std::pow(r, -alpha_);
  if (pr <= pow_max_) return 0.0;
  return (pr - pow_max_) / (pow_min_ - pow_max_);
}

void JumpSampler::sample(Rng& rng, std::span<double> z_out) const {
  // radius by inverse CDF of r^{-1-alpha} dr on the annulus
  double u = rng.uniform();
  double p = pow_min_ - u * (pow_min_ - pow_max_);
  double r = std::pow(p, -1.0 / alpha_);
  if (J_->dim() == 1) {
    // rejection on the two-point sphere against the j2 envelope
    double j2 = J_->j2();
    for (;;) {
      double s = rng.uniform() < 0.5 ? 1.0 : -1.0;
      double jv = s > 0.0 ? J_->jplus() : J_->jminus();
      if (rng.uniform() * j2 < jv) {
        z_out[0] = s * r;
        return;
      }
    }
  }
  double j2 = J_->j2();
  double xi[2];
  for (;;) {
    double theta = rng.uniform() * kTwoPi;
    xi[0] = std::cos(theta);
    xi[1] = std::sin(theta);
    if (rng.uniform() * j2 < J_->sphere_value(std::span<const double>(xi, 2))) break;
  }
  z_out[0] = r * xi[0];
  z_out[1] = r * xi[1];
}

std::vector<double> compensator_integral(const LevyDensity& J, const KernelFn& kappa,
                                         std::span<const double> x, double eps, double rmin,
                                         double rmax, const RadialQuad& quad, int angular_nodes) {
  const int d = J.dim();
  std::vector<double> out(d, 0.0);
  if (rmax <= rmin) return out;
  if (rmin < 0.0) throw NumericsError("compensator_integral: negative rmin");
  const double alpha = J.alpha();
  if (rmin == 0.0 && alpha >= 1.0) {
    // alpha = 1 relies on the spherical centering identity; the symmetric
    // angular sum makes the cancellation exact, so a tiny floor is safe.
    if (alpha > 1.0)
      throw NumericsError("compensator_integral: rmin = 0 diverges for alpha > 1");
  }
  double r_cut = rmax;
  bool tail = false;
  if (std::isinf(rmax)) {
    if (alpha <= 1.0)
      throw NumericsError("compensator_integral: unbounded annulus diverges for alpha <= 1");
    r_cut = std::max(1e3, 10.0 * std::max(rmin, 1.0));
    tail = true;
  }
  const double r_floor = 1e-9;
  auto nodes = angular_quadrature(J, angular_nodes);
  std::vector<double> z(d), u(d);
  auto kap = [&](double r, const std::vector<double>& dir) {
    for (int j = 0; j < d; ++j) {
      z[j] = r * dir[j];
      u[j] = z[j] / eps;
    }
    return kappa(x, z, u);
  };
  for (const auto& node : nodes) {
    if (node.jval == 0.0) continue;
    auto g = [&](double r) { return r * kap(r, node.dir); };
    // int_rmin^r_cut r kappa r^{-1-alpha} dr per direction
    double lo = std::max(rmin, r_floor);
    double radial = radial_log_integral(lo, r_cut, alpha, quad.nodes_per_decade, g);
    if (rmin == 0.0 && alpha < 1.0) {
      // analytic inner piece with the kernel frozen at the floor radius;
      // for alpha = 1 the piece below the floor is the symmetric truncation.
      radial += kap(r_floor, node.dir) * std::pow(r_floor, 1.0 - alpha) / (1.0 - alpha);
    }
    if (tail) {
      // kernel frozen at the cutoff: int_R^inf r^{-alpha} dr = R^{1-alpha}/(alpha-1)
      radial += kap(r_cut, node.dir) * std::pow(r_cut, 1.0 - alpha) / (alpha - 1.0);
    }
    for (int j = 0; j < d; ++j) out[j] += node.weight * node.jval * node.dir[j] * radial;
  }
  return out;
}

double check_sphere_centering(const LevyDensity& J, const KernelFn& kappa,
                              std::span<const double> x, double r1, double r2,
                              int angular_nodes) {
  const int d = J.dim();
  auto nodes = angular_quadrature(J, angular_nodes);
  std::vector<double> acc(d, 0.0), z(d), u(d);
  for (const auto& node : nodes) {
    for (int j = 0; j < d; ++j) {
      z[j] = r1 * node.dir[j];
      u[j] = r2 * node.dir[j];
    }
    double k = kappa(x, z, u);
    for (int j = 0; j < d; ++j) acc[j] += node.weight * node.jval * node.dir[j] * k;
  }
  double norm2 = 0.0;
  for (double v : acc) norm2 += v * v;
  return std::sqrt(norm2);
}

}  // namespace homog
