#include <doctest.h>

#include <cmath>
#include <numbers>

#include "homog/ergodic.hpp"
#include "homog/errors.hpp"
#include "test_util.hpp"

using namespace homog;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TEST_CASE("occupation observer apportions 1-d segments exactly") {
  OccupationObserver occ(1, 4, 0.0);
  std::vector<double> x{0.9}, v{0.5};
  occ.segment(0.0, 1.0, x, v);  // moves 0.9 -> 1.4 across cells 3, 0, 1
  const auto& w = occ.measure().weights();
  CHECK(w[3] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(0.3).epsilon(1e-12));

  OccupationObserver still(1, 4, 0.0);
  std::vector<double> v0{0.0};
  still.segment(0.0, 2.5, x, v0);
  CHECK(still.measure().weights()[3] == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("grid_n = 1 is the trivial partition") {
  auto m = testutil::constant_model(1.5, 1.0);
  SimOptions so;
  so.delta = 0.05;
  InvariantOptions io;
  io.grid_n = 1;
  io.t_burn = 0.1;
  io.t_run = 0.5;
  io.n_chains = 2;
  auto mu = estimate_invariant_measure(m, so, io, 777);
  CHECK(mu.cell_count() == 1);
  CHECK(mu.weights()[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("x-independent kernel: occupation histogram is uniform") {
  auto m = testutil::constant_model(1.5, 1.0);
  SimOptions so;
  so.delta = 0.05;
  InvariantOptions io;
  io.grid_n = 32;
  io.t_burn = 0.5;
  io.t_run = 40.0;
  io.n_chains = 8;
  auto mu = estimate_invariant_measure(m, so, io, 123);
  // effective sample count from the known contraction rate ~ |psi(2 pi)|
  double rho = -testutil::symmetric_exponent_quadrature(1.5, 2.0, 1.0, kTwoPi);
  double t_total = io.t_run * io.n_chains;
  double p = 1.0 / 32.0;
  double se = std::sqrt(2.0 * p * (1.0 - p) / (0.5 * rho * t_total));
  for (double w : mu.weights()) CHECK(std::abs(w - p) <= 3.0 * se);
}

TEST_CASE("two chains with different seeds agree in total variation") {
  auto m = testutil::product_model(1.5, 0.5);
  SimOptions so;
  so.delta = 0.05;
  InvariantOptions io;
  io.grid_n = 32;
  io.t_burn = 0.5;
  io.t_run = 40.0;
  io.n_chains = 8;
  auto mu1 = estimate_invariant_measure(m, so, io, 1);
  auto mu2 = estimate_invariant_measure(m, so, io, 2);
  CHECK(mu1.tv_distance(mu2) < 0.05);
}

TEST_CASE("mu_eps approaches mu as eps decreases") {
  // diffeo kernel with a constant c drift: A~^eps differs from A~ by the
  // eps^{alpha-1} c term, so mu_eps genuinely moves with eps
  auto a = PeriodicField::fourier(1, {{FourierTerm{{0}, 2.0, 0.0}, FourierTerm{{1}, 0.0, 0.5}}});
  ModelSpec m;
  m.d = 1;
  m.alpha = 1.5;
  m.J = LevyDensity::one_dim(1.5, 1.0, 1.0);
  m.kernel = JumpKernel::diffeo(1, 1.5, a);
  m.c = PeriodicField::constant(1, {3.0});
  SimOptions so;
  so.delta = 0.05;
  InvariantOptions io;
  io.grid_n = 16;
  io.t_burn = 0.5;
  io.t_run = 60.0;
  io.n_chains = 8;
  auto mu = estimate_invariant_measure(m, so, io, 42);
  std::vector<double> tv;
  for (double eps : {0.4, 0.2, 0.1})
    tv.push_back(mu.tv_distance(estimate_invariant_measure(m, so, io, 42, eps)));
  // decreasing within statistical noise
  double noise = 0.03;
  CHECK(tv[1] <= tv[0] + noise);
  CHECK(tv[2] <= tv[1] + noise);
  CHECK(tv[2] <= tv[0]);
}

TEST_CASE("ergodic average of a constant is exact with zero variance") {
  auto m = testutil::constant_model(1.5, 1.0);
  SimOptions so;
  so.delta = 0.05;
  so.T = 1.0;
  auto f = PeriodicField::constant(1, {2.5});
  auto rep = ergodic_average(m, f, 0.2, so, 50, 2.5, 99);
  CHECK(rep.time_average.mean == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(rep.time_average.stddev <= 1e-12);
  CHECK(rep.sup_deviation.mean <= 1e-12);
}

TEST_CASE("ergodic average of sin against the uniform-measure reference") {
  auto m = testutil::constant_model(1.5, 1.0);
  SimOptions so;
  so.delta = 0.02;
  so.T = 1.0;
  auto f = testutil::sin_field_1d(1.0);
  auto rep = ergodic_average(m, f, 0.1, so, 300, 0.0, 2024);
  CHECK(rep.sup_deviation.mean < 0.05);
  // sup deviation shrinks with eps (within Monte Carlo noise)
  auto rep4 = ergodic_average(m, f, 0.4, so, 300, 0.0, 2025);
  auto rep2 = ergodic_average(m, f, 0.2, so, 300, 0.0, 2026);
  double noise = 4.0 * std::sqrt(rep4.sup_deviation.se * rep4.sup_deviation.se +
                                 rep2.sup_deviation.se * rep2.sup_deviation.se);
  CHECK(rep2.sup_deviation.mean <= rep4.sup_deviation.mean + noise);
  CHECK(rep.sup_deviation.mean <= rep2.sup_deviation.mean + noise);
}

TEST_CASE("mixing rate recovers the spectral gap of the multiplier case") {
  auto m = testutil::constant_model(1.5, 1.0);
  SimOptions so;
  // the mode-1 contraction rate is dominated by small jumps at alpha = 1.5,
  // so the cutoff must sit well below the probe wavelength
  so.delta = 0.005;
  std::vector<double> ts;
  for (int i = 1; i <= 8; ++i) ts.push_back(0.008 * i);
  auto est = mixing_rate_estimate(m, so, ts, 30000, 31);
  CHECK(est.decaying);
  double rho = -testutil::symmetric_exponent_quadrature(1.5, 2.0, 1.0, kTwoPi);
  CHECK(std::abs(est.rate - rho) <= 0.3 * rho);

  auto est2 = mixing_rate_estimate(m, so, ts, 30000, 32);
  CHECK(std::abs(est2.rate - est.rate) <= 0.3 * std::max(est.rate, est2.rate));
}

TEST_CASE("degenerate run parameters are rejected") {
  auto m = testutil::constant_model(1.5, 1.0);
  SimOptions so;
  InvariantOptions io;
  io.t_run = 0.0;
  CHECK_THROWS_AS(estimate_invariant_measure(m, so, io, 1), ConfigError);
}

TEST_CASE("doubling the horizon halves the variance of the time average") {
  auto m = testutil::constant_model(1.5, 1.0);
  auto f = testutil::sin_field_1d(1.0);
  SimOptions s1;
  s1.delta = 0.02;
  s1.T = 1.0;
  SimOptions s2 = s1;
  s2.T = 2.0;
  auto r1 = ergodic_average(m, f, 0.2, s1, 600, 0.0, 4040);
  auto r2 = ergodic_average(m, f, 0.2, s2, 600, 0.0, 4041);
  double v1 = r1.time_average.stddev * r1.time_average.stddev;
  double v2 = r2.time_average.stddev * r2.time_average.stddev;
  double ratio = v2 / v1;
  CHECK(ratio == doctest::Approx(0.5).epsilon(0.3));
}
