#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "homog/errors.hpp"
#include "homog/homogenize.hpp"
#include "test_util.hpp"

using namespace homog;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Corrector analytic_corrector(int grid_n, double amp) {
  // b-hat = amp sin(2 pi x) with its exact gradient table
  std::vector<double> vals(grid_n), grads(grid_n);
  for (int i = 0; i < grid_n; ++i) {
    double x = static_cast<double>(i) / grid_n;
    vals[i] = amp * std::sin(kTwoPi * x);
    grads[i] = amp * kTwoPi * std::cos(kTwoPi * x);
  }
  Corrector c;
  c.values = PeriodicField::grid(1, grid_n, 1, vals);
  c.gradient = PeriodicField::grid(1, grid_n, 1, grads);
  return c;
}

}  // namespace

TEST_CASE("product family homogenizes to the u-average: kappa_bar = 1") {
  auto m = testutil::product_model(1.5, 0.5);
  auto mu = EmpiricalMeasure::uniform(1, 32);
  std::vector<double> z{0.7};
  CHECK(homogenized_kappa(m.kernel, mu, z) == doctest::Approx(1.0).epsilon(1e-6));
  z[0] = -2.3;
  CHECK(homogenized_kappa(m.kernel, mu, z) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("constant family homogenizes to itself") {
  auto m = testutil::constant_model(1.5, 0.8);
  auto mu = EmpiricalMeasure::uniform(1, 16);
  std::vector<double> z{1.0};
  CHECK(homogenized_kappa(m.kernel, mu, z) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("one-dim family: kappa_bar is the mu-average of the directional limits") {
  auto k0p = PeriodicField::fourier(1, {{FourierTerm{{0}, 1.5, 0.0}, FourierTerm{{1}, 0.0, 0.3}}});
  auto k0m = PeriodicField::fourier(1, {{FourierTerm{{0}, 1.0, 0.0}, FourierTerm{{1}, 0.2, 0.0}}});
  OneDimProfile prof;
  auto kernel = JumpKernel::one_dim(k0p, k0m, {}, prof);
  // a deliberately non-uniform measure
  EmpiricalMeasure mu(1, 16);
  for (int i = 0; i < 16; ++i) mu.add_cell(static_cast<std::size_t>(i), 1.0 + 0.1 * i);
  mu.normalize();

  auto J = LevyDensity::one_dim(1.5, 1.0, 2.0);
  auto table = homogenized_kappa_table(kernel, J, mu);
  // direct quadrature with the same cell centers
  double plus = 0.0, minus = 0.0;
  std::vector<double> x(1), vp(1), vm(1);
  for (int i = 0; i < 16; ++i) {
    mu.cell_center(static_cast<std::size_t>(i), x);
    k0p.evaluate(x, vp);
    k0m.evaluate(x, vm);
    plus += mu.weights()[i] * vp[0];
    minus += mu.weights()[i] * vm[0];
  }
  CHECK(table.values[0] == doctest::Approx(plus).epsilon(1e-12));
  CHECK(table.values[1] == doctest::Approx(minus).epsilon(1e-12));
  std::vector<double> z{3.3};
  CHECK(table.eval(z) == doctest::Approx(plus).epsilon(1e-12));
}

TEST_CASE("homogenized drift: b = 0, constant c gives c_bar = b_bar = c0") {
  auto m = testutil::constant_model(1.5, 1.0);
  m.c = PeriodicField::constant(1, {0.7});
  auto mu = EmpiricalMeasure::uniform(1, 32);
  auto trip = homogenize(m, mu, nullptr);
  REQUIRE(trip.c_bar.size() == 1);
  CHECK(trip.c_bar[0] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(trip.b_bar[0] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(trip.kappa_bar.values[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("alpha < 1 with symmetric data has zero truncation drift") {
  auto m = testutil::constant_model(0.7, 1.0);
  auto mu = EmpiricalMeasure::uniform(1, 16);
  auto trip = homogenize(m, mu, nullptr);
  CHECK(std::abs(trip.b_bar[0]) <= 1e-12);
  CHECK(trip.c_bar.empty());
}

TEST_CASE("alpha < 1 one-sided: b_bar equals the ball integral") {
  auto m = testutil::constant_model(0.6, 2.0, 1.0, 0.0);  // J on the positive ray
  auto mu = EmpiricalMeasure::uniform(1, 16);
  auto trip = homogenize(m, mu, nullptr);
  // int_0^1 kappa z J dz = 2 int_0^1 r^{-0.6} dr = 2 / 0.4
  CHECK(trip.b_bar[0] == doctest::Approx(2.0 / 0.4).epsilon(1e-10));
}

TEST_CASE("missing corrector with b != 0 is rejected") {
  auto m = testutil::constant_model(1.5, 1.0);
  m.b = testutil::sin_field_1d(0.3);
  m.c = PeriodicField::constant(1, {1.0});
  auto mu = EmpiricalMeasure::uniform(1, 16);
  CHECK_THROWS_AS(homogenize(m, mu, nullptr), ConfigError);
}

TEST_CASE("manufactured c_bar against an independent brute-force triple quadrature") {
  // product kernel, analytic corrector gradient, c field, asymmetric J so
  // the B^c term is nonzero: every ingredient closed-form, compared against
  // explicit loops independent of the homogenizer machinery
  auto m = testutil::product_model(1.5, 0.5);
  m.J = LevyDensity::one_dim(1.5, 1.0, 2.0);
  m.b = testutil::sin_field_1d(0.2);  // forces the corrector path
  m.c = PeriodicField::fourier(1, {{FourierTerm{{0}, 1.0, 0.0}, FourierTerm{{1}, 0.5, 0.0}}});
  EmpiricalMeasure mu(1, 64);
  for (int i = 0; i < 64; ++i) {
    double x = (i + 0.5) / 64.0;
    mu.add_cell(static_cast<std::size_t>(i), 1.0 + 0.3 * std::cos(kTwoPi * x));
  }
  mu.normalize();
  auto corr = analytic_corrector(256, 0.1);

  HomogenizeOptions ho;
  ho.u_nodes = 128;
  auto trip = homogenize(m, mu, &corr, ho);

  // brute force over the same 64 cells:
  //   term1 = sum_x mu(x) (1 + g(x)) c(x)
  //   term2 = sum_dir J(dir) dir (int_1^inf r^{-alpha} dr) sum_x mu g(x) ubar
  const double alpha = 1.5;
  const double u_avg = 1.0;  // int (1 + 0.5 sin(2 pi u)) du
  double term1 = 0.0, gsum = 0.0;
  for (int i = 0; i < 64; ++i) {
    double x = (i + 0.5) / 64.0;
    double w = mu.weights()[static_cast<std::size_t>(i)];
    double g = 0.1 * kTwoPi * std::cos(kTwoPi * x);
    double cv = 1.0 + 0.5 * std::cos(kTwoPi * x);
    term1 += w * (1.0 + g) * cv;
    gsum += w * g * u_avg;
  }
  double term2 = gsum * (1.0 - 2.0) / (alpha - 1.0);  // j+ = 1, j- = 2
  double expected = term1 + term2;
  CHECK(std::abs(term2) > 0.1);  // the B^c contribution genuinely matters
  CHECK(trip.c_bar[0] == doctest::Approx(expected).epsilon(0.01));
  CHECK(trip.b_bar[0] == doctest::Approx(trip.c_bar[0]).epsilon(1e-12));
}

TEST_CASE("levy exponent: normalization, symmetry, hermitianity") {
  auto m = testutil::constant_model(1.5, 1.0);
  auto mu = EmpiricalMeasure::uniform(1, 8);
  auto trip = homogenize(m, mu, nullptr);

  std::vector<double> xi{0.0};
  auto z0 = levy_exponent(trip, xi);
  CHECK(std::abs(z0) == doctest::Approx(0.0));

  xi[0] = 1.7;
  auto zp = levy_exponent(trip, xi);
  CHECK(zp.real() < 0.0);
  CHECK(std::abs(zp.imag()) <= 1e-10);

  xi[0] = -1.7;
  auto zm = levy_exponent(trip, xi);
  CHECK(zm.real() == doctest::Approx(zp.real()).epsilon(1e-12));
  CHECK(zm.imag() == doctest::Approx(-zp.imag()).epsilon(1e-10));
}

TEST_CASE("levy exponent matches the adaptive-quadrature closed form") {
  auto m = testutil::constant_model(1.5, 1.0);
  auto mu = EmpiricalMeasure::uniform(1, 8);
  auto trip = homogenize(m, mu, nullptr);
  for (double s : {0.5, 1.0, 2.0}) {
    std::vector<double> xi{s};
    auto z = levy_exponent(trip, xi);
    double oracle = testutil::symmetric_exponent_quadrature(1.5, 2.0, 1.0, s);
    CHECK(z.real() == doctest::Approx(oracle).epsilon(1e-4));
    CHECK(std::abs(z.imag()) <= 1e-6 * std::abs(oracle));
  }
}

TEST_CASE("one-sided alpha < 1 exponent against a direct quadrature oracle") {
  auto m = testutil::constant_model(0.6, 1.0, 1.0, 0.0);
  auto mu = EmpiricalMeasure::uniform(1, 8);
  auto trip = homogenize(m, mu, nullptr);
  const double alpha = 0.6, s = 1.3;
  std::vector<double> xi{s};
  auto z = levy_exponent(trip, xi);
  // oracle: int_0^inf (e^{isr} - 1) r^{-1-alpha} dr (no drift in the
  // generator form; the b_bar/truncation bookkeeping must cancel)
  auto re = [&](double r) { return (std::cos(s * r) - 1.0) * std::pow(r, -1.0 - alpha); };
  auto im = [&](double r) { return std::sin(s * r) * std::pow(r, -1.0 - alpha); };
  double v0 = 1e-3, V = 400.0;
  double re_inner = -0.5 * s * s * std::pow(v0, 2.0 - alpha) / (2.0 - alpha);
  double im_inner = s * std::pow(v0, 1.0 - alpha) / (1.0 - alpha) -
                    s * s * s * std::pow(v0, 3.0 - alpha) / (6.0 * (3.0 - alpha));
  double re_val = re_inner + testutil::adaptive_simpson(re, v0, V, 1e-11) -
                  std::pow(V, -alpha) / alpha + std::sin(V * s) / s * std::pow(V, -1.0 - alpha);
  double im_val = im_inner + testutil::adaptive_simpson(im, v0, V, 1e-11) -
                  std::cos(V * s) / s * std::pow(V, -1.0 - alpha);
  CHECK(z.real() == doctest::Approx(re_val).epsilon(2e-4));
  CHECK(z.imag() == doctest::Approx(im_val).epsilon(2e-4));
}

TEST_CASE("kappa_bar bounds and scale coherence") {
  auto m = testutil::product_model(1.5, 0.5);
  auto mu = EmpiricalMeasure::uniform(1, 32);
  auto trip = homogenize(m, mu, nullptr);
  CHECK(trip.kappa_bar.min_value() >= trip.kappa1 - 1e-9);
  CHECK(trip.kappa_bar.max_value() <= trip.kappa2 + 1e-9);
  std::vector<double> z1{0.001}, z2{123.0};
  CHECK(trip.kappa_bar.eval(z1) == doctest::Approx(trip.kappa_bar.eval(z2)).epsilon(1e-10));
}

TEST_CASE("variable-order family reproduces the indicator-weighted measure") {
  const double alpha0 = 0.6;
  auto alpha_field = PeriodicField::sample(1, 256, 1, [&](std::span<const double> p,
                                                          std::span<double> o) {
    double x = p[0];
    double bump = x >= 0.5 ? std::pow(std::sin(kTwoPi * (x - 0.5)), 2) : 0.0;
    o[0] = alpha0 + 0.3 * bump;
  });
  auto rho = PeriodicField::fourier(1, {{FourierTerm{{0}, 1.2, 0.0}, FourierTerm{{1}, 0.3, 0.0}}});
  auto J0 = LevyDensity::one_dim(alpha0, 1.0, 1.0);
  auto kernel = JumpKernel::variable_order(alpha_field, rho, {}, J0);
  auto mu = EmpiricalMeasure::uniform(1, 64);

  // nu_bar([r1, r2] both rays) = int kappa_bar J0 over the annulus
  const double r1 = 1.0, r2 = 2.0;
  auto table = homogenized_kappa_table(kernel, J0, mu);
  double lhs = (table.values[0] + table.values[1]) *
               (std::pow(r1, -alpha0) - std::pow(r2, -alpha0)) / alpha0;
  // int 1_{alpha = alpha0}(x) eta(x, A) mu(dx), eta(x, A) = 2 rho(x) (...)/alpha(x)
  double rhs = 0.0;
  std::vector<double> x(1), rv(1), av(1);
  for (std::size_t i = 0; i < mu.cell_count(); ++i) {
    mu.cell_center(i, x);
    alpha_field.evaluate(x, av);
    if (av[0] > alpha0 + 1e-12) continue;
    rho.evaluate(x, rv);
    rhs += mu.weights()[i] * 2.0 * rv[0] *
           (std::pow(r1, -av[0]) - std::pow(r2, -av[0])) / av[0];
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
}

TEST_CASE("kappa_bar radial table evaluates with log-radius interpolation") {
  KappaBarTable t;
  t.d = 1;
  t.values = {1.0, 2.0};
  t.log_radii = {std::log(0.1), std::log(10.0)};
  t.radial_values = {{1.0, 3.0}, {2.0, 2.0}};
  std::vector<double> z{1.0};  // log r = 0: halfway in log scale
  CHECK(t.eval(z) == doctest::Approx(2.0).epsilon(1e-12));
  z[0] = 0.05;  // below the grid: clamp
  CHECK(t.eval(z) == doctest::Approx(1.0).epsilon(1e-12));
  z[0] = -5.0;  // negative ray, constant in r
  CHECK(t.eval(z) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("two-dimensional homogenization: product kernel averages in u") {
  ModelSpec m;
  m.d = 2;
  m.alpha = 1.2;
  m.J = LevyDensity::isotropic(2, 1.2);
  auto one2 = PeriodicField::constant(2, {1.0});
  auto u_factor = PeriodicField::fourier(
      2, {{FourierTerm{{0, 0}, 1.0, 0.0}, FourierTerm{{1, 0}, 0.0, 0.4},
           FourierTerm{{0, 2}, 0.3, 0.0}}});
  auto vone = PeriodicField::constant(1, {1.0});
  m.kernel = JumpKernel::product(2, one2, u_factor, vone);
  auto mu = EmpiricalMeasure::uniform(2, 8);
  HomogenizeOptions ho;
  ho.u_nodes = 16;
  ho.angular_nodes = 8;
  auto table = homogenized_kappa_table(m.kernel, m.J, mu, ho);
  for (double v : table.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
}
