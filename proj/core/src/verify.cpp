#include "homog/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "homog/errors.hpp"
#include "homog/generator.hpp"
#include "homog/parallel.hpp"

namespace homog {

namespace {

std::size_t pow_n(int n, int d) {
  std::size_t p = 1;
  for (int i = 0; i < d; ++i) p *= static_cast<std::size_t>(n);
  return p;
}

/// int f_bump(z) kappa(y, z, z/eps) J(z) dz over the bump support [1, 2],
/// tabulated as a periodic field of the torus coordinate.
PeriodicField tabulate_nu_functional(const ModelSpec& model, double eps, int grid_n,
                                     int per_decade_base) {
  const int d = model.d;
  auto nodes = angular_quadrature(model.J, 32);
  int per_decade = per_decade_base;
  {
    // resolve the z/eps oscillation across [1,2]
    double h_needed = eps / (8.0 * 2.0);
    per_decade = std::clamp(static_cast<int>(std::ceil(std::numbers::ln10 / h_needed)),
                            per_decade_base, 1 << 14);
  }
  std::vector<double> z(d), u(d);
  return PeriodicField::sample(d, grid_n, 1, [&](std::span<const double> y,
                                                 std::span<double> out) {
    double acc = 0.0;
    for (const auto& node : nodes) {
      if (node.jval == 0.0) continue;
      auto g = [&](double r) {
        for (int j = 0; j < d; ++j) {
          z[j] = r * node.dir[j];
          u[j] = z[j] / eps;
        }
        return nu_test_function(z) * model.kernel.kappa_unchecked(y, z, u);
      };
      acc += node.weight * node.jval * radial_log_integral(1.0, 2.0, model.alpha, per_decade, g);
    }
    out[0] = acc;
  });
}

double nu_reference_value(const HomogenizedTriplet& trip) {
  auto nodes = angular_quadrature(trip.J, std::max<int>(32, static_cast<int>(
                                              trip.kappa_bar.values.size())));
  double acc = 0.0;
  std::vector<double> z(trip.d);
  for (const auto& node : nodes) {
    if (node.jval == 0.0) continue;
    auto g = [&](double r) {
      for (int j = 0; j < trip.d; ++j) z[j] = r * node.dir[j];
      return nu_test_function(z) * trip.kappa_bar.eval(z);
    };
    acc += node.weight * node.jval * radial_log_integral(1.0, 2.0, trip.alpha, 512, g);
  }
  return acc;
}

}  // namespace

double nu_test_function(std::span<const double> z) {
  double r2 = 0.0;
  for (double v : z) r2 += v * v;
  double r = std::sqrt(r2);
  if (r <= 1.0 || r >= 2.0) return 0.0;
  double s = 2.0 * r - 3.0;  // s in (-1, 1)
  return std::exp(-1.0 / (1.0 - s * s));
}

EcfResult empirical_char_fn(const std::vector<std::vector<double>>& samples,
                            const std::vector<std::vector<double>>& xi_grid) {
  if (samples.empty()) throw NumericsError("empirical_char_fn: empty sample set");
  EcfResult res;
  res.n_samples = samples.size();
  const double n = static_cast<double>(samples.size());
  const int d = static_cast<int>(samples.front().size());
  for (const auto& xi : xi_grid) {
    double sc = 0.0, ss = 0.0, sc2 = 0.0, ss2 = 0.0;
    for (const auto& x : samples) {
      double phase = 0.0;
      for (int j = 0; j < d; ++j) phase += xi[j] * x[j];
      double c = std::cos(phase), s = std::sin(phase);
      sc += c;
      ss += s;
      sc2 += c * c;
      ss2 += s * s;
    }
    EcfPoint p;
    p.xi = xi;
    p.value = {sc / n, ss / n};
    double var_c = std::max(0.0, sc2 / n - (sc / n) * (sc / n));
    double var_s = std::max(0.0, ss2 / n - (ss / n) * (ss / n));
    p.se = std::sqrt((var_c + var_s) / n);
    res.points.push_back(std::move(p));
  }
  return res;
}

std::vector<std::vector<double>> make_xi_grid(int d, int points_per_axis, double max_xi) {
  std::vector<double> axis(points_per_axis);
  for (int i = 0; i < points_per_axis; ++i)
    axis[i] = -max_xi + 2.0 * max_xi * i / (points_per_axis - 1);
  std::vector<std::vector<double>> grid;
  std::size_t total = pow_n(points_per_axis, d);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::vector<double> xi(d);
    std::size_t rem = flat;
    for (int j = d - 1; j >= 0; --j) {
      xi[j] = axis[rem % points_per_axis];
      rem /= points_per_axis;
    }
    grid.push_back(std::move(xi));
  }
  return grid;
}

ConvergenceReport convergence_report(const ModelSpec& model, const HomogenizedTriplet& triplet,
                                     std::vector<double> eps_list, std::vector<double> t_list,
                                     const SimOptions& sim_opts, const VerifyOptions& opts,
                                     std::uint64_t seed_base) {
  if (eps_list.empty() || t_list.empty())
    throw ConfigError("convergence_report: empty eps or t list");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (eps_list[i] >= eps_list[i - 1])
      throw ConfigError("convergence_report: eps_list must be strictly decreasing");
  if (model.d != triplet.d || std::abs(model.alpha - triplet.alpha) > 1e-12)
    throw ConfigError("convergence_report: model and triplet disagree");
  std::sort(t_list.begin(), t_list.end());

  const int d = model.d;
  const double t_max = t_list.back();
  auto xi_grid = make_xi_grid(d, opts.xi_points_per_axis, opts.xi_max);

  // reference exponent and marginal ECF targets
  std::vector<std::complex<double>> psi(xi_grid.size());
  for (std::size_t i = 0; i < xi_grid.size(); ++i)
    psi[i] = levy_exponent(triplet, xi_grid[i], opts.exponent_quad);

  ConvergenceReport rep;
  rep.eps_list = eps_list;
  rep.t_list = t_list;
  rep.nu_reference = nu_reference_value(triplet);
  rep.ecf.resize(eps_list.size());

  for (std::size_t ei = 0; ei < eps_list.size(); ++ei) {
    const double eps = eps_list[ei];
    SimOptions so = sim_opts;
    so.T = t_max;
    Simulator sim = Simulator::eps_process(model, eps, so);

    // drift characteristic field (relative to the 1_B truncation)
    PeriodicField bchar_field;
    bool bchar_active = false;
    if (model.alpha < 1.0) {
      // q(y) = int_{|z|<1} z kappa(y, z, z/eps) J dz
      auto fn = model.kernel.as_fn();
      const int grid_n = field_tabulation_n(model, sim_opts);
      bchar_field = PeriodicField::sample(
          d, grid_n, d, [&](std::span<const double> y, std::span<double> out) {
            auto q = compensator_integral(model.J, fn, y, eps, 0.0, 1.0,
                                          RadialQuad{256}, sim_opts.comp_angular_nodes);
            for (int j = 0; j < d; ++j) out[j] = q[j];
          });
      bchar_active = true;
    } else if (model.drift_active() && (model.b || model.c)) {
      bchar_active = true;  // evaluated directly from the drift fields
    }

    SimOptions tab_opts = sim_opts;
    PeriodicField nu_field =
        tabulate_nu_functional(model, eps, field_tabulation_n(model, tab_opts), 256);

    const int n_paths = opts.n_paths;
    std::vector<std::vector<double>> marginals(
        static_cast<std::size_t>(n_paths) * t_list.size());
    std::vector<double> bchar(static_cast<std::size_t>(n_paths) * d, 0.0);
    std::vector<double> nuval(n_paths, 0.0);
    std::vector<std::uint64_t> jump_counts(n_paths, 0);

    parallel_for(static_cast<std::size_t>(n_paths), [&](std::size_t p) {
      Rng rng(derive_seed(seed_base, "verify", static_cast<std::uint64_t>(ei) * 1000003ull + p));
      MarginalRecorder marg(t_list);

      struct CharObserver : PathObserver {
        const ModelSpec* model;
        const PeriodicField* bchar_field;
        const PeriodicField* nu_field;
        bool bchar_active;
        double eps;
        int d;
        std::vector<double> bacc;
        double nuacc = 0.0;
        std::uint64_t jumps = 0;
        double y[4], tmp[4];

        void eval_bchar(std::span<const double> x, double* out) {
          for (int j = 0; j < d; ++j) out[j] = 0.0;
          if (!bchar_active) return;
          for (int j = 0; j < d; ++j) y[j] = wrap_unit(x[j] / eps);
          std::span<const double> ys(y, static_cast<std::size_t>(d));
          std::span<double> ts(tmp, static_cast<std::size_t>(d));
          if (model->alpha < 1.0) {
            bchar_field->evaluate(ys, ts);
            for (int j = 0; j < d; ++j) out[j] += tmp[j];
            return;
          }
          if (model->b) {
            model->b->evaluate(ys, ts);
            double s = std::pow(eps, 1.0 - model->alpha);
            for (int j = 0; j < d; ++j) out[j] += s * tmp[j];
          }
          if (model->c) {
            model->c->evaluate(ys, ts);
            for (int j = 0; j < d; ++j) out[j] += tmp[j];
          }
        }

        void segment(double t0, double t1, std::span<const double> x,
                     std::span<const double> v) override {
          double h = t1 - t0;
          if (h <= 0.0) return;
          // Simpson in time for both characteristic integrals
          double xa[4], xm[4], xb[4], qa[4], qm[4], qb[4];
          for (int j = 0; j < d; ++j) {
            xa[j] = x[j];
            xm[j] = x[j] + 0.5 * h * v[j];
            xb[j] = x[j] + h * v[j];
          }
          std::span<const double> sa(xa, static_cast<std::size_t>(d));
          std::span<const double> sm(xm, static_cast<std::size_t>(d));
          std::span<const double> sb(xb, static_cast<std::size_t>(d));
          eval_bchar(sa, qa);
          eval_bchar(sm, qm);
          eval_bchar(sb, qb);
          for (int j = 0; j < d; ++j) bacc[j] += h / 6.0 * (qa[j] + 4.0 * qm[j] + qb[j]);
          auto nu_at = [&](std::span<const double> xs) {
            for (int j = 0; j < d; ++j) y[j] = wrap_unit(xs[j] / eps);
            return nu_field->evaluate_scalar(
                std::span<const double>(y, static_cast<std::size_t>(d)));
          };
          nuacc += h / 6.0 * (nu_at(sa) + 4.0 * nu_at(sm) + nu_at(sb));
        }
        void jump_event(double, std::span<const double>, std::span<const double>,
                        std::span<const double>, bool) override {
          ++jumps;
        }
      } charo;
      charo.model = &model;
      charo.bchar_field = &bchar_field;
      charo.nu_field = &nu_field;
      charo.bchar_active = bchar_active;
      charo.eps = eps;
      charo.d = d;
      charo.bacc.assign(d, 0.0);

      std::vector<PathObserver*> parts{&marg, &charo};
      MultiObserver multi(parts);
      std::vector<double> x0(d, 0.0);
      sim.run(rng, x0, multi);

      for (std::size_t ti = 0; ti < t_list.size(); ++ti)
        marginals[p * t_list.size() + ti] = marg.values()[ti];
      for (int j = 0; j < d; ++j) bchar[p * d + j] = charo.bacc[j] / t_max;
      nuval[p] = charo.nuacc / t_max;
      jump_counts[p] = charo.jumps;
    });

    for (auto c : jump_counts) rep.total_jumps += c;
    rep.total_paths += static_cast<std::uint64_t>(n_paths);

    // ECF distances per t
    for (std::size_t ti = 0; ti < t_list.size(); ++ti) {
      std::vector<std::vector<double>> samples(n_paths);
      for (int p = 0; p < n_paths; ++p)
        samples[p] = marginals[static_cast<std::size_t>(p) * t_list.size() + ti];
      EcfResult ecf = empirical_char_fn(samples, xi_grid);
      EcfDistance dist;
      for (std::size_t i = 0; i < xi_grid.size(); ++i) {
        std::complex<double> ref = std::exp(t_list[ti] * psi[i]);
        double dev = std::abs(ecf.points[i].value - ref);
        double se = ecf.points[i].se;
        dist.noise_floor = std::max(dist.noise_floor, se);
        double ratio = se > 0.0 ? dev / se : (dev <= 1e-12 ? 0.0 : 1e18);
        if (dev > dist.distance) {
          dist.distance = dev;
          dist.se_at_argmax = se;
        }
        dist.max_ratio = std::max(dist.max_ratio, ratio);
        ConvergenceReport::Row row;
        row.eps = eps;
        row.t = t_list[ti];
        row.xi = xi_grid[i];
        row.re = ecf.points[i].value.real();
        row.im = ecf.points[i].value.imag();
        row.se = se;
        row.ref_re = ref.real();
        row.ref_im = ref.imag();
        rep.table.push_back(std::move(row));
      }
      dist.at_floor = dist.max_ratio <= 4.0;
      rep.ecf[ei].push_back(dist);
    }

    // drift characteristic against b_bar
    {
      double worst = 0.0, worst_se = 0.0;
      for (int j = 0; j < d; ++j) {
        std::vector<double> comp(n_paths);
        for (int p = 0; p < n_paths; ++p) comp[p] = bchar[static_cast<std::size_t>(p) * d + j];
        MeanSe ms = mean_se(comp);
        double target = triplet.b_bar.empty() ? 0.0 : triplet.b_bar[j];
        // the b_bar convention includes the ball compensator for alpha < 1
        // via the same functional, and equals c_bar for alpha in (1,2)
        double devj = std::abs(ms.mean - target);
        if (devj > worst) {
          worst = devj;
          worst_se = ms.se;
        }
      }
      rep.bconv_stat.push_back(worst);
      rep.bconv_se.push_back(worst_se);
    }
    {
      MeanSe ms = mean_se(nuval);
      rep.nuconv_stat.push_back(std::abs(ms.mean - rep.nu_reference));
      rep.nuconv_se.push_back(ms.se);
    }
  }

  // verdicts
  rep.monotone = true;
  for (std::size_t ti = 0; ti < t_list.size(); ++ti) {
    for (std::size_t ei = 1; ei < eps_list.size(); ++ei) {
      const auto& prev = rep.ecf[ei - 1][ti];
      const auto& cur = rep.ecf[ei][ti];
      double combined = std::sqrt(prev.se_at_argmax * prev.se_at_argmax +
                                  cur.se_at_argmax * cur.se_at_argmax);
      if (cur.distance > prev.distance + 2.0 * combined) rep.monotone = false;
    }
  }
  rep.final_at_floor = true;
  for (std::size_t ti = 0; ti < t_list.size(); ++ti)
    if (!rep.ecf.back()[ti].at_floor) rep.final_at_floor = false;
  rep.pass = rep.monotone && rep.final_at_floor;

  double blast = rep.bconv_stat.back();
  rep.bconv_pass = blast <= 4.0 * rep.bconv_se.back() + 1e-3;
  double nulast = rep.nuconv_stat.back();
  rep.nuconv_pass = nulast <= 4.0 * rep.nuconv_se.back() + 1e-3 * std::abs(rep.nu_reference);
  return rep;
}

MartingaleReport martingale_test(const ModelSpec& model, const PeriodicField& f, double eps,
                                 const SimOptions& sim_opts, int n_paths, double drift_scale,
                                 std::uint64_t seed_base, int table_n) {
  if (f.arity() != 1) throw ConfigError("martingale_test: scalar f only");
  const int d = model.d;
  Simulator sim = Simulator::eps_process(model, eps, sim_opts);
  GenQuad quad;
  quad.nodes_per_decade = 128;
  GeneratorTable table(model, ProcessKind::Eps, eps, f, table_n, quad, drift_scale);

  const double T = sim_opts.T;
  std::vector<double> times{T / 3.0, 2.0 * T / 3.0, T};
  std::vector<std::vector<double>> m_values(times.size(), std::vector<double>(n_paths));

  parallel_for(static_cast<std::size_t>(n_paths), [&](std::size_t p) {
    Rng rng(derive_seed(seed_base, "martingale", p));
    double y[4];
    TimeIntegralObserver integ(
        [&](double, std::span<const double> x) {
          for (int j = 0; j < d; ++j) y[j] = wrap_unit(x[j]);
          return table(std::span<const double>(y, static_cast<std::size_t>(d)));
        },
        times);
    MarginalRecorder marg(times);
    std::vector<PathObserver*> parts{&integ, &marg};
    MultiObserver multi(parts);
    std::vector<double> x0(d, 0.0);
    sim.run(rng, x0, multi);
    double f0 = f.evaluate_scalar(x0);
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      double ft = f.evaluate_scalar(marg.values()[ti]);
      m_values[ti][p] = ft - f0 - integ.checkpoint_values()[ti];
    }
  });

  MartingaleReport rep;
  rep.times = times;
  rep.generator_error_bound = table.error_bound();
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    MeanSe ms = mean_se(m_values[ti]);
    rep.m_stats.push_back(ms);
    double z = ms.se > 0.0 ? ms.mean / ms.se : 0.0;
    rep.z_scores.push_back(z);
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
  }
  return rep;
}

}  // namespace homog
