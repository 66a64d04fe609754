#include <doctest.h>

#include <cmath>
#include <numbers>

#include "homog/corrector.hpp"
#include "homog/ergodic.hpp"
#include "homog/errors.hpp"
#include "test_util.hpp"

using namespace homog;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Manufactured instance: target b-hat* = amp sin(2 pi x) under the constant
/// symmetric kernel, b chosen so that (L + b d/dx) b-hat* + b = 0 exactly.
struct Manufactured {
  ModelSpec model;
  double psi;  // |multiplier at frequency 1|
  double amp;
  double target(double x) const { return amp * std::sin(kTwoPi * x); }
};

Manufactured manufactured_case(double amp = 0.1) {
  Manufactured mf;
  mf.amp = amp;
  mf.model = testutil::constant_model(1.5, 1.0);
  mf.psi = -testutil::symmetric_exponent_quadrature(1.5, 2.0, 1.0, kTwoPi);
  // L bhat* = -psi bhat*; solve b (1 + bhat*') = psi bhat*
  mf.model.b = PeriodicField::sample(1, 2048, 1, [&](std::span<const double> p,
                                                     std::span<double> o) {
    double x = p[0];
    double bhat = amp * std::sin(kTwoPi * x);
    double dbhat = amp * kTwoPi * std::cos(kTwoPi * x);
    o[0] = mf.psi * bhat / (1.0 + dbhat);
  });
  return mf;
}

}  // namespace

TEST_CASE("zero source gives the trivial corrector") {
  auto m = testutil::constant_model(1.5, 1.0);
  auto mu = EmpiricalMeasure::uniform(1, 32);
  SimOptions so;
  so.delta = 0.05;
  CorrectorOptions co;
  co.grid_n = 16;
  auto c = solve_corrector(m, mu, so, co, 5);
  CHECK(c.trivial);
  CHECK(c.residual_norm == doctest::Approx(0.0));
  std::vector<double> x{0.3}, v(1);
  c.values.evaluate(x, v);
  CHECK(v[0] == doctest::Approx(0.0));
}

TEST_CASE("corrector requires alpha in (1,2) and centered b") {
  auto m = testutil::constant_model(0.7, 1.0);
  auto mu = EmpiricalMeasure::uniform(1, 16);
  SimOptions so;
  CorrectorOptions co;
  CHECK_THROWS_AS(solve_corrector(m, mu, so, co, 1), ConfigError);

  auto m2 = testutil::constant_model(1.5, 1.0);
  m2.b = PeriodicField::constant(1, {1.0});
  CHECK_THROWS_AS(solve_corrector(m2, mu, so, co, 1), ValidationError);
}

TEST_CASE("manufactured solution: solver recovers the target after gauge fixing") {
  auto mf = manufactured_case(0.1);
  auto mu = EmpiricalMeasure::uniform(1, 32);  // proxy measure for the precondition
  SimOptions so;
  so.delta = 0.05;
  CorrectorOptions co;
  co.grid_n = 32;
  co.n_paths = 6000;
  co.horizon = 0.35;
  co.fourier_modes = 4;
  co.target_tol = 0.05;
  co.centering_tol = 0.2;
  co.throw_on_residual = false;
  auto c = solve_corrector(mf.model, mu, so, co, 90210);

  // gauge: align means, then compare in sup norm
  double mean_dev = 0.0;
  std::vector<double> x(1), v(1);
  for (int i = 0; i < 32; ++i) {
    x[0] = (i + 0.5) / 32.0;
    c.values.evaluate(x, v);
    mean_dev += v[0] - mf.target(x[0]);
  }
  mean_dev /= 32.0;
  double worst = 0.0;
  for (int i = 0; i < 64; ++i) {
    x[0] = i / 64.0;
    c.values.evaluate(x, v);
    worst = std::max(worst, std::abs(v[0] - mean_dev - mf.target(x[0])));
  }
  CHECK(worst < 0.05);
  CHECK(c.residual_norm < 0.1);
}

TEST_CASE("resolvent of a constant is the constant over lambda") {
  auto m = testutil::constant_model(1.5, 1.0);
  auto f = PeriodicField::constant(1, {3.0});
  SimOptions so;
  so.delta = 0.05;
  auto u = resolvent(m, f, 2.0, so, 4, 20, 11);
  std::vector<double> x{0.6}, v(1);
  u.evaluate(x, v);
  CHECK(v[0] == doctest::Approx(1.5).epsilon(1e-5));
}

TEST_CASE("resolvent sup bound and multiplier value") {
  auto m = testutil::constant_model(1.5, 1.0);
  SimOptions so;
  so.delta = 0.05;  // the Gaussian surrogate keeps the law accurate
  const double lambda = 1.0;

  // random Fourier f: ||u||_0 <= ||f||_0 / lambda with Monte Carlo slack
  auto f = PeriodicField::fourier(
      1, {{FourierTerm{{1}, 0.4, -0.3}, FourierTerm{{2}, 0.0, 0.5}, FourierTerm{{3}, 0.2, 0.0}}});
  auto u = resolvent(m, f, lambda, so, 8, 400, 17);
  double fb = f.sup_bound();
  for (int i = 0; i < 8; ++i) {
    std::vector<double> x{i / 8.0}, v(1);
    u.evaluate(x, v);
    CHECK(std::abs(v[0]) <= fb / lambda + 0.05);
  }

  // multiplier case: u = sin(2 pi x) / (lambda + psi(2 pi))
  auto fs = testutil::sin_field_1d(1.0);
  auto us = resolvent(m, fs, lambda, so, 8, 2000, 18);
  double psi = -testutil::symmetric_exponent_quadrature(1.5, 2.0, 1.0, kTwoPi);
  for (int i = 0; i < 8; ++i) {
    std::vector<double> x{i / 8.0}, v(1);
    us.evaluate(x, v);
    double expected = std::sin(kTwoPi * x[0]) / (lambda + psi);
    CHECK(std::abs(v[0] - expected) <= 8e-3);
  }
}

TEST_CASE("poisson identity: constants, perturbation detection, pipeline self-check") {
  auto m = testutil::constant_model(1.5, 1.0);
  const double lambda = 1.0;
  std::vector<std::vector<double>> nodes;
  for (int i = 0; i < 8; ++i) nodes.push_back({i / 8.0});

  auto f = PeriodicField::constant(1, {2.0});
  auto u = PeriodicField::constant(1, {2.0 / lambda});
  CHECK(verify_poisson_identity(m, u, f, lambda, nodes) <= 1e-10);

  // perturbing u by 0.1 sin(2 pi x) must register at least 0.1 lambda
  auto upert = PeriodicField::fourier(
      1, {{FourierTerm{{0}, 2.0 / lambda, 0.0}, FourierTerm{{1}, 0.0, 0.1}}});
  double res = verify_poisson_identity(m, upert, f, lambda, nodes);
  CHECK(res >= 0.1 * lambda);

  // resolvent output passes its own equation within MC + quadrature noise
  SimOptions so;
  so.delta = 0.05;
  const double lam2 = 2.0;
  auto fs = testutil::sin_field_1d(1.0);
  auto us = resolvent(m, fs, lam2, so, 16, 1500, 19);
  GenQuad quad;
  quad.period_hint = 1.0;  // smooth low-mode content of the solution
  double res2 = verify_poisson_identity(m, us, fs, lam2, nodes, quad);
  CHECK(res2 < 0.15);
}

TEST_CASE("two independent corrector solves agree within combined error") {
  auto mf = manufactured_case(0.1);
  auto mu = EmpiricalMeasure::uniform(1, 32);
  SimOptions so;
  so.delta = 0.05;
  CorrectorOptions co;
  co.grid_n = 16;
  co.n_paths = 3000;
  co.horizon = 0.35;
  co.fourier_modes = 4;
  co.throw_on_residual = false;
  co.centering_tol = 0.2;
  auto c1 = solve_corrector(mf.model, mu, so, co, 101);
  auto c2 = solve_corrector(mf.model, mu, so, co, 202);
  double worst = 0.0;
  std::vector<double> x(1), v1(1), v2(1);
  for (int i = 0; i < 32; ++i) {
    x[0] = i / 32.0;
    c1.values.evaluate(x, v1);
    c2.values.evaluate(x, v2);
    worst = std::max(worst, std::abs(v1[0] - v2[0]));
  }
  // MC standard error of each solve is about sigma_path / sqrt(n)
  CHECK(worst <= 0.05);
}

TEST_CASE("centering residual of the returned corrector vanishes") {
  auto mf = manufactured_case(0.1);
  auto mu = EmpiricalMeasure::uniform(1, 32);
  SimOptions so;
  so.delta = 0.05;
  CorrectorOptions co;
  co.grid_n = 16;
  co.n_paths = 1500;
  co.horizon = 0.3;
  co.fourier_modes = 4;
  co.throw_on_residual = false;
  co.centering_tol = 0.2;
  auto c = solve_corrector(mf.model, mu, so, co, 303);
  auto cent = integrate(c.values, mu);
  CHECK(std::abs(cent[0]) <= 1e-8);
}

TEST_CASE("resolvent route with Richardson extrapolation recovers the corrector") {
  // x-independent symmetric kernel: the centered solution of L u + sin = 0
  // is sin(2 pi x) / psi(2 pi); extrapolate the resolvent in lambda -> 0
  auto m = testutil::constant_model(1.5, 1.0);
  auto fs = testutil::sin_field_1d(1.0);
  SimOptions so;
  so.delta = 0.05;
  auto u0 = resolvent_corrector_route(m, fs, 1.0, 2.0, so, 8, 2000, 505);
  double psi = -testutil::symmetric_exponent_quadrature(1.5, 2.0, 1.0, kTwoPi);
  for (int i = 0; i < 8; ++i) {
    std::vector<double> x{i / 8.0}, v(1);
    u0.evaluate(x, v);
    CHECK(std::abs(v[0] - std::sin(kTwoPi * x[0]) / psi) <= 1.2e-2);
  }
}

TEST_CASE("two-dimensional corrector solve against the multiplier prediction") {
  // isotropic constant kernel, small centered drift: to first order in the
  // amplitude the solution is the Fourier-multiplier inverse of -b
  ModelSpec m;
  m.d = 2;
  m.alpha = 1.5;
  m.J = LevyDensity::isotropic(2, 1.5);
  m.kernel = JumpKernel::constant(2, 1.0);
  const double amp = 0.3;
  m.b = PeriodicField::fourier(
      2, {{FourierTerm{{1, 0}, 0.0, amp}}, {FourierTerm{{0, 1}, amp, 0.0}}});
  auto mu = EmpiricalMeasure::uniform(2, 8);

  SimOptions so;
  so.delta = 0.1;
  CorrectorOptions co;
  co.grid_n = 8;
  co.n_paths = 2500;
  co.horizon = 0.15;
  co.fourier_modes = 2;
  co.target_tol = 0.05;
  co.residual_probes = 8;
  co.centering_tol = 0.2;
  co.throw_on_residual = false;
  co.residual_quad.angular_nodes = 16;
  co.residual_quad.nodes_per_decade = 64;
  co.residual_quad.resolve_radius = 12.0;  // smoke budget; tail bound ~ 5e-4
  auto corr = solve_corrector(m, mu, so, co, 777);

  // multiplier at the unit modes: psi = C_alpha (2 pi)^alpha int_S |cos|^alpha
  double cang = 0.0;
  const int na = 2048;
  for (int i = 0; i < na; ++i) {
    double th = (i + 0.5) * 2.0 * std::numbers::pi / na;
    cang += std::pow(std::abs(std::cos(th)), 1.5);
  }
  cang *= 2.0 * std::numbers::pi / na;
  double c_alpha = -testutil::symmetric_exponent_quadrature(1.5, 1.0, 1.0, 1.0);
  double psi2 = c_alpha * std::pow(kTwoPi, 1.5) * cang;

  std::vector<double> x(2), v(2);
  double worst = 0.0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      x[0] = i / 8.0;
      x[1] = j / 8.0;
      corr.values.evaluate(x, v);
      worst = std::max(worst, std::abs(v[0] - amp * std::sin(kTwoPi * x[0]) / psi2));
      worst = std::max(worst, std::abs(v[1] - amp * std::cos(kTwoPi * x[1]) / psi2));
    }
  // first-order prediction: the drift coupling enters at O(amp^2 / psi^2)
  CHECK(worst <= 0.02);
  CHECK(corr.residual_norm <= 0.05 + corr.residual_tolerance);
}
