#include "homog/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "homog/errors.hpp"
#include "homog/stats.hpp"
#include "homog/verify.hpp"

namespace homog {

namespace {

double wrap_coord(double x) { return wrap_unit(x); }

void wrap_point(std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = wrap_coord(x[i]);
}

/// Radial resolution needed to resolve kernel oscillation of spatial period
/// `period` out to radius `rmax` on a log grid.
int refine_per_decade(int base, double period, double rmax) {
  if (period <= 0.0) return base;
  // node spacing r * h must stay below period / 8 at the outer radius
  double h_needed = period / (8.0 * rmax);
  int per_decade = static_cast<int>(std::ceil(std::numbers::ln10 / h_needed));
  return std::clamp(per_decade, base, 1 << 14);
}

}  // namespace

int field_tabulation_n(const ModelSpec& model, const SimOptions& opts) {
  if (model.kernel.x_independent()) return 1;
  return model.d == 1 ? opts.comp_grid_n : std::min(opts.comp_grid_n, 48);
}

PeriodicField tabulate_compensator_field(const ModelSpec& model, ProcessKind kind, double eps,
               const SimOptions& opts) {
  const int d = model.d;
  const double alpha = model.alpha;
  const double delta = opts.delta;
  // compensation region per generator display
  double r_hi = 0.0;
  bool full_range = false;
  if (alpha > 1.0 && alpha < 2.0) {
    switch (kind) {
      case ProcessKind::Eps: r_hi = 1.0; break;
      case ProcessKind::CellEps: r_hi = 1.0 / eps; break;
      case ProcessKind::Cell: full_range = true; break;
      case ProcessKind::Limit: r_hi = 1.0; break;
    }
  } else if (std::abs(alpha - 1.0) < 1e-12) {
    r_hi = 1.0;
  } else {
    return PeriodicField::constant(d, std::vector<double>(d, 0.0));
  }

  const auto& kernel = model.kernel;
  auto nodes = angular_quadrature(model.J, opts.comp_angular_nodes);
  // kernel oscillation along the ray: the periodic torus argument advances
  // with rate 1 (Cell/CellEps, u = z) or 1/eps (Eps, u = z/eps)
  double osc_period = (kind == ProcessKind::Eps) ? eps : 1.0;
  double R1 = full_range ? opts.comp_numeric_cutoff : r_hi;
  int per_decade = refine_per_decade(opts.comp_radial_per_decade, osc_period, R1);

  std::vector<double> z(d), u(d);
  auto kappa_at = [&](std::span<const double> y, double r, const std::vector<double>& dir) {
    for (int j = 0; j < d; ++j) z[j] = r * dir[j];
    switch (kind) {
      case ProcessKind::Eps:
        for (int j = 0; j < d; ++j) u[j] = z[j] / eps;
        return kernel.kappa_unchecked(y, z, u);
      case ProcessKind::CellEps:
        for (int j = 0; j < d; ++j) u[j] = eps * z[j];
        return kernel.kappa_unchecked(y, u, z);
      case ProcessKind::Cell:
        return kernel.kappa_unchecked(y, z, z);
      case ProcessKind::Limit:
        break;
    }
    throw ConfigError("tabulate_compensator_field: limit kind has no model kernel");
  };

  auto comp_at = [&](std::span<const double> y, std::span<double> out) {
    for (int j = 0; j < d; ++j) out[j] = 0.0;
    for (const auto& node : nodes) {
      if (node.jval == 0.0) continue;
      auto g = [&](double r) { return r * kappa_at(y, r, node.dir); };
      double radial = radial_log_integral(delta, R1, alpha, per_decade, g);
      if (full_range) {
        // tail with kappa replaced by its radial average over [R1, R1+4]
        // (exact for period-1 oscillation in 1-d, Cesaro-accurate otherwise)
        double avg = 0.0;
        const int navg = 64;
        for (int i = 0; i < navg; ++i)
          avg += kappa_at(y, R1 + 4.0 * (i + 0.5) / navg, node.dir);
        avg /= navg;
        radial += avg * std::pow(R1, 1.0 - alpha) / (alpha - 1.0);
      }
      for (int j = 0; j < d; ++j) out[j] += node.weight * node.jval * node.dir[j] * radial;
    }
  };

  return PeriodicField::sample(d, field_tabulation_n(model, opts), d, comp_at);
}

Simulator Simulator::eps_process(const ModelSpec& model, double eps, const SimOptions& opts) {
  if (eps <= 0.0) throw ConfigError("Simulator: eps must be positive");
  Simulator s;
  s.kind_ = ProcessKind::Eps;
  s.model_ = &model;
  s.d_ = model.d;
  s.eps_ = eps;
  s.alpha_ = model.alpha;
  s.opts_ = opts;
  s.J_ = model.J;
  s.kappa2_ = model.kernel.kappa2();
  s.finalize_setup();
  return s;
}

Simulator Simulator::cell_process(const ModelSpec& model, const SimOptions& opts) {
  Simulator s;
  s.kind_ = ProcessKind::Cell;
  s.model_ = &model;
  s.d_ = model.d;
  s.eps_ = 0.0;
  s.alpha_ = model.alpha;
  s.opts_ = opts;
  s.J_ = model.J;
  s.kappa2_ = model.kernel.kappa2();
  s.finalize_setup();
  return s;
}

Simulator Simulator::cell_eps_process(const ModelSpec& model, double eps, const SimOptions& opts) {
  if (eps <= 0.0) throw ConfigError("Simulator: eps must be positive");
  Simulator s;
  s.kind_ = ProcessKind::CellEps;
  s.model_ = &model;
  s.d_ = model.d;
  s.eps_ = eps;
  s.alpha_ = model.alpha;
  s.opts_ = opts;
  s.J_ = model.J;
  s.kappa2_ = model.kernel.kappa2();
  s.finalize_setup();
  return s;
}

Simulator Simulator::limit_process(const HomogenizedTriplet& triplet, const SimOptions& opts) {
  Simulator s;
  s.kind_ = ProcessKind::Limit;
  s.triplet_ = &triplet;
  s.d_ = triplet.d;
  s.eps_ = 0.0;
  s.alpha_ = triplet.alpha;
  s.opts_ = opts;
  s.J_ = triplet.J;
  s.kappa2_ = triplet.kappa2 > 0.0 ? triplet.kappa2 : triplet.kappa_bar.max_value();
  s.finalize_setup();
  return s;
}

void Simulator::finalize_setup() {
  if (d_ < 1 || d_ > 4) throw ConfigError("Simulator: dimension must lie in [1,4]");
  if (!(opts_.delta > 0.0 && opts_.delta < 1.0))
    throw ConfigError("Simulator: delta must lie in (0,1)");
  if (opts_.T <= 0.0) throw ConfigError("Simulator: horizon must be positive");
  if (model_) model_->validate();

  sampler_ = std::make_unique<JumpSampler>(J_, opts_.delta);
  rate_ = kappa2_ * sampler_->total_mass();
  if (rate_ * opts_.T > opts_.jump_cap)
    throw NumericsError("Simulator: expected proposal count " +
                        std::to_string(rate_ * opts_.T) + " exceeds the configured jump cap");

  if (kind_ == ProcessKind::Limit) {
    // triplet drift relative to 1_B minus the compensator of simulated jumps
    // in [delta, 1): the pair reproduces the truncation convention exactly
    limit_drift_.assign(d_, 0.0);
    const auto& t = *triplet_;
    if (!t.b_bar.empty()) limit_drift_ = t.b_bar;
    auto nodes = angular_quadrature(J_, opts_.comp_angular_nodes);
    for (const auto& node : nodes) {
      if (node.jval == 0.0) continue;
      auto g = [&](double r) {
        std::vector<double> z(d_);
        for (int j = 0; j < d_; ++j) z[j] = r * node.dir[j];
        return r * t.kappa_bar.eval(z);
      };
      double radial = radial_log_integral(opts_.delta, 1.0, alpha_, 512, g);
      for (int j = 0; j < d_; ++j)
        limit_drift_[j] -= node.weight * node.jval * node.dir[j] * radial;
    }
    double v2 = 0.0;
    for (double v : limit_drift_) v2 += v * v;
    velocity_bound_ = std::sqrt(v2);
    has_drift_ = velocity_bound_ > 1e-14;
    substep_cap_ = opts_.T;  // constant velocity integrates exactly
    return;
  }

  comp_field_ = tabulate_compensator_field(*model_, kind_, eps_, opts_);
  comp_active_ = comp_field_.sup_bound() > 1e-14;

  if (opts_.small_jump_diffusion) {
    if (kind_ == ProcessKind::Eps)
      throw ConfigError("Simulator: the Gaussian small-jump surrogate is a cell-side device");
    // covariance of the dropped jumps: Sigma(x) = int_{|z|<delta} z z^T kappa J dz,
    // packed upper-triangular row-wise
    const int d = d_;
    const double delta = opts_.delta;
    auto nodes = angular_quadrature(J_, opts_.comp_angular_nodes);
    const double alpha = alpha_;
    std::vector<double> z(d), zz(d);
    const auto& kernel = model_->kernel;
    double eps = eps_;
    ProcessKind kind = kind_;
    auto kappa_at = [&, eps, kind](std::span<const double> y, double r,
                                   const std::vector<double>& dir) {
      for (int j = 0; j < d; ++j) z[j] = r * dir[j];
      if (kind == ProcessKind::CellEps) {
        for (int j = 0; j < d; ++j) zz[j] = eps * z[j];
        return kernel.kappa_unchecked(y, zz, z);
      }
      return kernel.kappa_unchecked(y, z, z);
    };
    const int entries = d * (d + 1) / 2;
    diffusion_field_ = PeriodicField::sample(
        d, field_tabulation_n(*model_, opts_), entries,
        [&](std::span<const double> y, std::span<double> out) {
          for (int e = 0; e < entries; ++e) out[e] = 0.0;
          for (const auto& node : nodes) {
            if (node.jval == 0.0) continue;
            // radial part: int_0^delta r^2 kappa r^{-1-alpha} dr, kernel
            // frozen at delta (exact for the direction-only families)
            double radial = kappa_at(y, delta, node.dir) *
                            std::pow(delta, 2.0 - alpha) / (2.0 - alpha);
            int e = 0;
            for (int i = 0; i < d; ++i)
              for (int j = i; j < d; ++j, ++e)
                out[e] += node.weight * node.jval * node.dir[i] * node.dir[j] * radial;
          }
        });
    diffusion_active_ = diffusion_field_.sup_bound() > 1e-14;
  }

  double vb = comp_field_.sup_bound() * std::sqrt(static_cast<double>(d_));
  if (alpha_ > 1.0 && alpha_ < 2.0) {
    double bsup = model_->b ? model_->b->sup_bound() : 0.0;
    double csup = model_->c ? model_->c->sup_bound() : 0.0;
    switch (kind_) {
      case ProcessKind::Eps:
        vb += std::pow(eps_, 1.0 - alpha_) * bsup + csup;
        break;
      case ProcessKind::CellEps:
        vb += bsup + std::pow(eps_, alpha_ - 1.0) * csup;
        break;
      case ProcessKind::Cell:
        vb += bsup;
        break;
      case ProcessKind::Limit:
        break;
    }
  }
  velocity_bound_ = vb;
  has_drift_ = vb > 1e-14;

  // drift resolution: the eps-process drift oscillates on spatial scale eps
  if (kind_ == ProcessKind::Eps) {
    substep_cap_ = opts_.substep_scale *
                   std::min(std::pow(eps_, alpha_), eps_ / std::max(1.0, velocity_bound_));
  } else {
    substep_cap_ = opts_.substep_scale / std::max(1.0, velocity_bound_);
  }
}

void Simulator::drift_velocity(double, std::span<const double> x, std::span<double> v) const {
  for (int j = 0; j < d_; ++j) v[j] = 0.0;
  if (kind_ == ProcessKind::Limit) {
    for (int j = 0; j < d_; ++j) v[j] = limit_drift_[j];
    return;
  }
  double y[4];
  std::span<double> ys(y, static_cast<std::size_t>(d_));
  if (kind_ == ProcessKind::Eps) {
    for (int j = 0; j < d_; ++j) y[j] = wrap_coord(x[j] / eps_);
  } else {
    wrap_point(x, ys);
  }
  double tmp[4];
  std::span<double> ts(tmp, static_cast<std::size_t>(d_));
  if (alpha_ > 1.0 && alpha_ < 2.0) {
    if (model_->b) {
      model_->b->evaluate(ys, ts);
      double scale = (kind_ == ProcessKind::Eps) ? std::pow(eps_, 1.0 - alpha_) : 1.0;
      for (int j = 0; j < d_; ++j) v[j] += scale * tmp[j];
    }
    if (model_->c) {
      model_->c->evaluate(ys, ts);
      double scale = 1.0;
      if (kind_ == ProcessKind::CellEps) scale = std::pow(eps_, alpha_ - 1.0);
      if (kind_ == ProcessKind::Cell) scale = 0.0;  // A~ carries b only
      for (int j = 0; j < d_; ++j) v[j] += scale * tmp[j];
    }
  }
  if (comp_active_) {
    comp_field_.evaluate(ys, ts);
    for (int j = 0; j < d_; ++j) v[j] -= tmp[j];
  }
}

double Simulator::acceptance_kappa(std::span<const double> x, std::span<const double> z) const {
  double y[4], zz[4], uu[4];
  std::span<double> ys(y, static_cast<std::size_t>(d_));
  switch (kind_) {
    case ProcessKind::Eps: {
      for (int j = 0; j < d_; ++j) {
        y[j] = wrap_coord(x[j] / eps_);
        uu[j] = z[j] / eps_;
      }
      return model_->kernel.kappa_unchecked(ys, z, std::span<const double>(uu, z.size()));
    }
    case ProcessKind::CellEps: {
      for (int j = 0; j < d_; ++j) {
        y[j] = wrap_coord(x[j]);
        zz[j] = eps_ * z[j];
      }
      return model_->kernel.kappa_unchecked(ys, std::span<const double>(zz, z.size()), z);
    }
    case ProcessKind::Cell: {
      for (int j = 0; j < d_; ++j) y[j] = wrap_coord(x[j]);
      return model_->kernel.kappa_unchecked(ys, z, z);
    }
    case ProcessKind::Limit:
      return triplet_->kappa_bar.eval(z);
  }
  return 0.0;
}

void Simulator::run(Rng& rng, std::span<const double> x0, PathObserver& obs) const {
  if (static_cast<int>(x0.size()) != d_) throw ConfigError("Simulator::run: x0 dimension mismatch");
  double x[4], v[4], z[4], xp[4];
  std::span<double> xs(x, static_cast<std::size_t>(d_));
  std::span<double> vs(v, static_cast<std::size_t>(d_));
  std::span<double> zs(z, static_cast<std::size_t>(d_));
  for (int j = 0; j < d_; ++j) x[j] = x0[j];
  obs.start(xs);

  const double T = opts_.T;
  double t = 0.0;
  double sig[10];  // packed covariance buffer (d <= 4)
  while (t < T) {
    double gap = rng.exponential(rate_);
    double t_jump = t + gap;
    double t_end = std::min(t_jump, T);
    // deterministic drift between proposals, state frozen per substep; the
    // Gaussian surrogate kicks at substep ends (Euler-Maruyama)
    if (has_drift_ || diffusion_active_) {
      while (t < t_end) {
        double h = std::min(substep_cap_, t_end - t);
        drift_velocity(t, xs, vs);
        obs.segment(t, t + h, xs, vs);
        for (int j = 0; j < d_; ++j) x[j] += v[j] * h;
        if (diffusion_active_) {
          double y[4];
          for (int j = 0; j < d_; ++j) y[j] = wrap_coord(x[j]);
          diffusion_field_.evaluate(std::span<const double>(y, static_cast<std::size_t>(d_)),
                                    std::span<double>(sig, diffusion_field_.arity()));
          if (d_ == 1) {
            x[0] += std::sqrt(std::max(0.0, sig[0]) * h) * rng.normal();
          } else {
            // Cholesky of the packed symmetric matrix
            double a[4][4] = {};
            int e = 0;
            for (int i = 0; i < d_; ++i)
              for (int j = i; j < d_; ++j, ++e) a[i][j] = a[j][i] = sig[e];
            double l[4][4] = {};
            for (int i = 0; i < d_; ++i)
              for (int j = 0; j <= i; ++j) {
                double s = a[i][j];
                for (int k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
                l[i][j] = (i == j) ? std::sqrt(std::max(s, 0.0))
                                   : (l[j][j] > 0.0 ? s / l[j][j] : 0.0);
              }
            double xi[4];
            for (int j = 0; j < d_; ++j) xi[j] = rng.normal();
            for (int i = 0; i < d_; ++i) {
              double inc = 0.0;
              for (int k = 0; k <= i; ++k) inc += l[i][k] * xi[k];
              x[i] += std::sqrt(h) * inc;
            }
          }
        }
        t += h;
      }
    } else {
      for (int j = 0; j < d_; ++j) v[j] = 0.0;
      obs.segment(t, t_end, xs, vs);
      t = t_end;
    }
    if (t_jump >= T) break;
    // proposal from the dominating measure kappa2 J, thinned by kappa/kappa2
    sampler_->sample(rng, zs);
    double kap = acceptance_kappa(xs, zs);
    if (kap > kappa2_ * (1.0 + 1e-9))
      throw ValidationError("Simulator: kernel value exceeds kappa2; thinning envelope invalid");
    bool accepted = rng.uniform() * kappa2_ < kap;
    for (int j = 0; j < d_; ++j) xp[j] = x[j] + (accepted ? z[j] : 0.0);
    obs.jump_event(t_jump, xs, zs, std::span<const double>(xp, static_cast<std::size_t>(d_)),
                   accepted);
    if (accepted)
      for (int j = 0; j < d_; ++j) x[j] = xp[j];
    t = t_jump;
  }
  obs.finished(T, xs);
}

// ---------------------------------------------------------------------------
// Observers

PathRecorder::PathRecorder(std::string tag, double eps, std::vector<double> sample_times) {
  record_.tag = std::move(tag);
  record_.eps = eps;
  record_.sample_times = std::move(sample_times);
  std::sort(record_.sample_times.begin(), record_.sample_times.end());
}

void PathRecorder::start(std::span<const double> x0) {
  record_.x0.assign(x0.begin(), x0.end());
}

void PathRecorder::segment(double t0, double t1, std::span<const double> x,
                           std::span<const double> v) {
  while (next_sample_ < record_.sample_times.size() && record_.sample_times[next_sample_] <= t1) {
    double dt = record_.sample_times[next_sample_] - t0;
    std::vector<double> xt(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) xt[j] = x[j] + v[j] * dt;
    record_.samples.push_back(std::move(xt));
    ++next_sample_;
  }
}

void PathRecorder::jump_event(double t, std::span<const double> x_pre, std::span<const double> jump,
                              std::span<const double> x_post, bool accepted) {
  PathEvent e;
  e.t = t;
  e.x_pre.assign(x_pre.begin(), x_pre.end());
  e.jump.assign(jump.begin(), jump.end());
  e.x_post.assign(x_post.begin(), x_post.end());
  e.accepted = accepted;
  record_.events.push_back(std::move(e));
}

void PathRecorder::finished(double T, std::span<const double> xT) {
  record_.T = T;
  while (next_sample_ < record_.sample_times.size()) {
    record_.samples.emplace_back(xT.begin(), xT.end());
    ++next_sample_;
  }
}

MarginalRecorder::MarginalRecorder(std::vector<double> times) : times_(std::move(times)) {
  std::sort(times_.begin(), times_.end());
  values_.reserve(times_.size());
}

void MarginalRecorder::start(std::span<const double>) {}

void MarginalRecorder::segment(double t0, double t1, std::span<const double> x,
                               std::span<const double> v) {
  while (next_ < times_.size() && times_[next_] <= t1) {
    double dt = times_[next_] - t0;
    std::vector<double> xt(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) xt[j] = x[j] + v[j] * dt;
    values_.push_back(std::move(xt));
    ++next_;
  }
}

void MarginalRecorder::finished(double, std::span<const double> xT) {
  while (next_ < times_.size()) {
    values_.emplace_back(xT.begin(), xT.end());
    ++next_;
  }
}

TimeIntegralObserver::TimeIntegralObserver(Fn integrand, std::vector<double> checkpoints)
    : g_(std::move(integrand)), checkpoints_(std::move(checkpoints)) {
  std::sort(checkpoints_.begin(), checkpoints_.end());
}

void TimeIntegralObserver::segment(double t0, double t1, std::span<const double> x,
                                   std::span<const double> v) {
  buf_.resize(x.size());
  auto eval_at = [&](double tt) {
    for (std::size_t j = 0; j < x.size(); ++j) buf_[j] = x[j] + v[j] * (tt - t0);
    return g_(tt, buf_);
  };
  double cursor = t0;
  auto simpson_to = [&](double tt) {
    double h = tt - cursor;
    if (h > 0.0) {
      double fa = eval_at(cursor), fm = eval_at(cursor + 0.5 * h), fb = eval_at(tt);
      acc_ += h / 6.0 * (fa + 4.0 * fm + fb);
      cursor = tt;
    }
  };
  while (next_cp_ < checkpoints_.size() && checkpoints_[next_cp_] <= t1) {
    simpson_to(checkpoints_[next_cp_]);
    checkpoint_values_.push_back(acc_);
    ++next_cp_;
  }
  simpson_to(t1);
}

void TimeIntegralObserver::finished(double, std::span<const double>) {
  while (next_cp_ < checkpoints_.size()) {
    checkpoint_values_.push_back(acc_);
    ++next_cp_;
  }
}

SupDeviationObserver::SupDeviationObserver(Fn integrand, double reference)
    : g_(std::move(integrand)), ref_(reference) {}

void SupDeviationObserver::segment(double t0, double t1, std::span<const double> x,
                                   std::span<const double> v) {
  double h = t1 - t0;
  if (h <= 0.0) return;
  buf_.resize(x.size());
  auto eval_at = [&](double tt) {
    for (std::size_t j = 0; j < x.size(); ++j) buf_[j] = x[j] + v[j] * (tt - t0);
    return g_(buf_);
  };
  // Simpson increment + sup check at the midpoint and the end
  double fa = eval_at(t0), fm = eval_at(t0 + 0.5 * h), fb = eval_at(t1);
  double half = h / 12.0 * (fa + 4.0 * eval_at(t0 + 0.25 * h) + fm);
  acc_ += half;
  sup_ = std::max(sup_, std::abs(acc_ - (t0 + 0.5 * h) * ref_));
  double rest = h / 12.0 * (fm + 4.0 * eval_at(t0 + 0.75 * h) + fb);
  acc_ += rest;
  sup_ = std::max(sup_, std::abs(acc_ - t1 * ref_));
}

OccupationObserver::OccupationObserver(int dim, int grid_n, double t_start)
    : measure_(dim, grid_n), t_start_(t_start) {}

void OccupationObserver::segment(double t0, double t1, std::span<const double> x,
                                 std::span<const double> v) {
  if (t1 <= t_start_) return;
  if (t0 < t_start_) {
    // clip the segment to the accumulation window
    double dt = t_start_ - t0;
    buf_.resize(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) buf_[j] = x[j] + v[j] * dt;
    deposit(t_start_, t1, buf_, v);
    return;
  }
  deposit(t0, t1, x, v);
}

void OccupationObserver::deposit(double t0, double t1, std::span<const double> x,
                                 std::span<const double> v) {
  const int n = measure_.grid_n();
  double len = t1 - t0;
  if (len <= 0.0) return;
  if (measure_.dim() == 1) {
    double speed = v[0];
    if (std::abs(speed) * len < 1e-14) {
      measure_.add_cell(measure_.cell_index(x.first(1)), len);
      return;
    }
    // exact apportioning across crossed cells of the linear motion
    double a = x[0], b = x[0] + speed * len;
    double lo = std::min(a, b), hi = std::max(a, b);
    double inv_speed = 1.0 / std::abs(speed);
    double start_cell = std::floor(lo * n);
    double end_cell = std::floor(hi * n);
    for (double cidx = start_cell; cidx <= end_cell; ++cidx) {
      double cl = cidx / n, cr = (cidx + 1.0) / n;
      double seg = std::max(0.0, std::min(hi, cr) - std::max(lo, cl));
      if (seg <= 0.0) continue;
      long wrapped = static_cast<long>(cidx) % n;
      if (wrapped < 0) wrapped += n;
      measure_.add_cell(static_cast<std::size_t>(wrapped), seg * inv_speed);
    }
    return;
  }
  // midpoint rule in higher dimensions
  buf_.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) buf_[j] = x[j] + 0.5 * v[j] * len;
  measure_.add_cell(measure_.cell_index(buf_), len);
}

// ---------------------------------------------------------------------------
// Wrappers

namespace {

PathRecord record_path(const Simulator& sim, std::span<const double> x0, std::uint64_t seed,
                       std::string tag, double eps, std::vector<double> sample_times) {
  Rng rng(seed);
  PathRecorder rec(std::move(tag), eps, std::move(sample_times));
  sim.run(rng, x0, rec);
  return rec.take();
}

}  // namespace

PathRecord simulate_eps_path(const ModelSpec& model, double eps, const SimOptions& opts,
                             std::span<const double> x0, std::uint64_t seed,
                             std::vector<double> sample_times) {
  Simulator sim = Simulator::eps_process(model, eps, opts);
  return record_path(sim, x0, seed, "eps", eps, std::move(sample_times));
}

PathRecord simulate_cell_path(const ModelSpec& model, const SimOptions& opts,
                              std::span<const double> x0, std::uint64_t seed,
                              std::vector<double> sample_times) {
  Simulator sim = Simulator::cell_process(model, opts);
  return record_path(sim, x0, seed, "cell", 0.0, std::move(sample_times));
}

PathRecord simulate_limit_levy(const HomogenizedTriplet& triplet, const SimOptions& opts,
                               std::uint64_t seed, std::vector<double> sample_times) {
  Simulator sim = Simulator::limit_process(triplet, opts);
  std::vector<double> x0(triplet.d, 0.0);
  return record_path(sim, x0, seed, "limit", 0.0, std::move(sample_times));
}

RescalingReport check_rescaling_law(const ModelSpec& model, double eps, const SimOptions& opts,
                                    std::vector<double> times, int n_paths, double significance,
                                    std::uint64_t seed_base) {
  if (model.d != 1)
    throw ConfigError("check_rescaling_law: marginal KS comparison implemented for d = 1");
  std::sort(times.begin(), times.end());
  const double t_max = times.back();

  // cell side: A~^eps on [0, t_max] with the cutoff matched to delta/eps so
  // both sides drop exactly the same jumps under the law identity
  SimOptions cell_opts = opts;
  cell_opts.T = t_max;
  cell_opts.delta = std::min(0.9, opts.delta / eps);
  Simulator cell_sim = Simulator::cell_eps_process(model, eps, cell_opts);

  // eps side: X^eps on [0, eps^alpha t_max], marginals rescaled by 1/eps
  SimOptions eps_opts = opts;
  const double time_scale = std::pow(eps, model.alpha);
  eps_opts.T = time_scale * t_max;
  Simulator eps_sim = Simulator::eps_process(model, eps, eps_opts);

  std::vector<std::vector<double>> cell_samples(times.size()), eps_samples(times.size());
  for (auto& v : cell_samples) v.reserve(n_paths);
  for (auto& v : eps_samples) v.reserve(n_paths);
  std::vector<double> x0(1, 0.0);

  std::vector<double> eps_times(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) eps_times[i] = time_scale * times[i];

  for (int p = 0; p < n_paths; ++p) {
    {
      Rng rng(derive_seed(seed_base, "rescaling-cell", static_cast<std::uint64_t>(p)));
      MarginalRecorder rec(times);
      cell_sim.run(rng, x0, rec);
      for (std::size_t i = 0; i < times.size(); ++i) cell_samples[i].push_back(rec.values()[i][0]);
    }
    {
      Rng rng(derive_seed(seed_base, "rescaling-eps", static_cast<std::uint64_t>(p)));
      MarginalRecorder rec(eps_times);
      eps_sim.run(rng, x0, rec);
      for (std::size_t i = 0; i < times.size(); ++i)
        eps_samples[i].push_back(rec.values()[i][0] / eps);
    }
  }

  RescalingReport rep;
  rep.eps = eps;
  rep.times = times;
  rep.significance = significance;
  rep.pass = true;
  rep.ecf_agree = true;
  for (std::size_t i = 0; i < times.size(); ++i) {
    double d = ks_two_sample(cell_samples[i], eps_samples[i]);
    double crit = ks_two_sample_critical(cell_samples[i].size(), eps_samples[i].size(),
                                         significance);
    rep.ks_distance.push_back(d);
    rep.ks_critical.push_back(crit);
    if (d > crit) rep.pass = false;

    // complementary check: the two empirical characteristic functions agree
    // pointwise within four combined standard errors
    auto to_rows = [](const std::vector<double>& xs) {
      std::vector<std::vector<double>> rows(xs.size(), std::vector<double>(1));
      for (std::size_t k = 0; k < xs.size(); ++k) rows[k][0] = xs[k];
      return rows;
    };
    auto grid = make_xi_grid(1, 9, 4.0);
    auto ea = empirical_char_fn(to_rows(cell_samples[i]), grid);
    auto eb = empirical_char_fn(to_rows(eps_samples[i]), grid);
    double worst = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      double dev = std::abs(ea.points[k].value - eb.points[k].value);
      double se = std::sqrt(ea.points[k].se * ea.points[k].se +
                            eb.points[k].se * eb.points[k].se);
      if (se > 0.0) worst = std::max(worst, dev / se);
    }
    rep.ecf_max_ratio.push_back(worst);
    if (worst > 4.0) rep.ecf_agree = false;
  }
  return rep;
}

}  // namespace homog
