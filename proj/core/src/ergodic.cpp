#include "homog/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "homog/errors.hpp"
#include "homog/parallel.hpp"

namespace homog {

EmpiricalMeasure estimate_invariant_measure(const ModelSpec& model, const SimOptions& sim_opts,
                                            const InvariantOptions& opts, std::uint64_t seed_base,
                                            double eps) {
  if (opts.t_run <= 0.0 || opts.t_burn < 0.0)
    throw ConfigError("estimate_invariant_measure: degenerate run");
  SimOptions so = sim_opts;
  so.T = opts.t_burn + opts.t_run;
  so.small_jump_diffusion = true;  // cell-side statistics use the surrogate
  Simulator sim = eps > 0.0 ? Simulator::cell_eps_process(model, eps, so)
                            : Simulator::cell_process(model, so);
  std::vector<EmpiricalMeasure> partial(opts.n_chains);
  parallel_for(static_cast<std::size_t>(opts.n_chains), [&](std::size_t chain) {
    Rng rng(derive_seed(seed_base, "invariant", chain));
    OccupationObserver occ(model.d, opts.grid_n, opts.t_burn);
    std::vector<double> x0(model.d,
                           (static_cast<double>(chain) + 0.5) / opts.n_chains);
    sim.run(rng, x0, occ);
    partial[chain] = occ.take();
  });
  EmpiricalMeasure pooled(model.d, opts.grid_n);
  for (const auto& m : partial) pooled.merge(m);
  pooled.normalize();
  return pooled;
}

ErgodicAverageReport ergodic_average(const ModelSpec& model, const PeriodicField& f, double eps,
                                     const SimOptions& sim_opts, int n_paths, double reference,
                                     std::uint64_t seed_base) {
  if (f.arity() != 1) throw ConfigError("ergodic_average: scalar f only");
  Simulator sim = Simulator::eps_process(model, eps, sim_opts);
  std::vector<double> averages(n_paths), sups(n_paths);
  parallel_for(static_cast<std::size_t>(n_paths), [&](std::size_t p) {
    Rng rng(derive_seed(seed_base, "ergodic-average", p));
    double y[4];
    const int d = model.d;
    auto g = [&](std::span<const double> x) {
      for (int j = 0; j < d; ++j) y[j] = wrap_unit(x[j] / eps);
      return f.evaluate_scalar(std::span<const double>(y, static_cast<std::size_t>(d)));
    };
    SupDeviationObserver obs(g, reference);
    std::vector<double> x0(d, 0.0);
    sim.run(rng, x0, obs);
    averages[p] = obs.integral() / sim_opts.T;
    sups[p] = obs.sup_deviation();
  });
  ErgodicAverageReport rep;
  rep.time_average = mean_se(averages);
  rep.sup_deviation = mean_se(sups);
  rep.reference = reference;
  rep.horizon = sim_opts.T;
  return rep;
}

MixingEstimate mixing_rate_estimate(const ModelSpec& model, const SimOptions& sim_opts,
                                    std::vector<double> t_grid, int n_paths,
                                    std::uint64_t seed_base) {
  std::sort(t_grid.begin(), t_grid.end());
  if (t_grid.empty() || t_grid.front() <= 0.0)
    throw ConfigError("mixing_rate_estimate: t_grid must be positive increasing");
  SimOptions so = sim_opts;
  so.T = t_grid.back();
  so.small_jump_diffusion = true;
  Simulator sim = Simulator::cell_process(model, so);
  const int d = model.d;
  const std::size_t nt = t_grid.size();

  // complex low-mode probes e^{2 pi i x_j}, one per axis, from the two
  // extreme starts x = 0 and y = (1/2, ..., 1/2)
  struct Acc {
    std::vector<double> re, im, re2, im2;  // sums per (t, axis)
  };
  std::vector<Acc> accs(2ull * n_paths);

  parallel_for(2ull * static_cast<std::size_t>(n_paths), [&](std::size_t idx) {
    const bool from_mid = idx >= static_cast<std::size_t>(n_paths);
    const std::size_t p = from_mid ? idx - n_paths : idx;
    Rng rng(derive_seed(seed_base, from_mid ? "mixing-mid" : "mixing-zero", p));
    MarginalRecorder rec(t_grid);
    std::vector<double> x0(d, from_mid ? 0.5 : 0.0);
    sim.run(rng, x0, rec);
    Acc a;
    a.re.assign(nt * d, 0.0);
    a.im.assign(nt * d, 0.0);
    a.re2.assign(nt * d, 0.0);
    a.im2.assign(nt * d, 0.0);
    for (std::size_t ti = 0; ti < nt; ++ti)
      for (int j = 0; j < d; ++j) {
        double phase = 2.0 * std::numbers::pi * rec.values()[ti][j];
        double cr = std::cos(phase), ci = std::sin(phase);
        a.re[ti * d + j] = cr;
        a.im[ti * d + j] = ci;
        a.re2[ti * d + j] = cr * cr;
        a.im2[ti * d + j] = ci * ci;
      }
    accs[idx] = std::move(a);
  });

  MixingEstimate est;
  est.t_grid = t_grid;
  const double n = static_cast<double>(n_paths);
  for (std::size_t ti = 0; ti < nt; ++ti) {
    double best = 0.0, best_se = 0.0;
    for (int j = 0; j < d; ++j) {
      double sums[2][4] = {{0, 0, 0, 0}, {0, 0, 0, 0}};
      for (int s = 0; s < 2; ++s)
        for (int p = 0; p < n_paths; ++p) {
          const Acc& a = accs[static_cast<std::size_t>(s) * n_paths + p];
          sums[s][0] += a.re[ti * d + j];
          sums[s][1] += a.im[ti * d + j];
          sums[s][2] += a.re2[ti * d + j];
          sums[s][3] += a.im2[ti * d + j];
        }
      std::complex<double> mean0(sums[0][0] / n, sums[0][1] / n);
      std::complex<double> mean1(sums[1][0] / n, sums[1][1] / n);
      double dval = std::abs(mean0 - mean1);
      double var = 0.0;
      for (int s = 0; s < 2; ++s) {
        var += (sums[s][2] / n - (sums[s][0] / n) * (sums[s][0] / n)) / n;
        var += (sums[s][3] / n - (sums[s][1] / n) * (sums[s][1] / n)) / n;
      }
      double se = std::sqrt(std::max(var, 0.0));
      if (dval > best) {
        best = dval;
        best_se = se;
      }
    }
    est.d_values.push_back(best);
    est.d_se.push_back(best_se);
  }

  // log-linear fit over points that stand clear of the sampling noise
  std::vector<double> ts, logs;
  for (std::size_t ti = 0; ti < nt; ++ti)
    if (est.d_values[ti] > 4.0 * est.d_se[ti] && est.d_values[ti] > 0.0) {
      ts.push_back(t_grid[ti]);
      logs.push_back(std::log(est.d_values[ti]));
    }
  est.fit_points = static_cast<int>(ts.size());
  if (ts.size() < 2) {
    est.decaying = false;
    return est;
  }
  double mt = 0, ml = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    ml += logs[i];
  }
  mt /= ts.size();
  ml /= ts.size();
  double stt = 0, stl = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    stl += (ts[i] - mt) * (logs[i] - ml);
  }
  double slope = stl / stt;
  est.rate = -slope;
  est.prefactor = std::exp(ml - slope * mt);
  double res = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double pred = ml + slope * (ts[i] - mt);
    res = std::max(res, std::abs(pred - logs[i]));
  }
  est.fit_residual = res;
  est.decaying = slope < 0.0;
  return est;
}

}  // namespace homog
