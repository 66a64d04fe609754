#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "homog/errors.hpp"
#include "homog/simulate.hpp"
#include "homog/stats.hpp"
#include "test_util.hpp"

using namespace homog;

namespace {

HomogenizedTriplet constant_triplet(double alpha = 1.5, double kappa = 1.0) {
  HomogenizedTriplet t;
  t.d = 1;
  t.alpha = alpha;
  t.b_bar = {0.0};
  t.c_bar = {0.0};
  t.kappa_bar.d = 1;
  t.kappa_bar.values = {kappa, kappa};
  t.J = LevyDensity::one_dim(alpha, 1.0, 1.0);
  t.kappa1 = t.kappa2 = kappa;
  return t;
}

}  // namespace

TEST_CASE("same seed gives a bitwise-identical path record") {
  auto m = testutil::product_model(1.5, 0.5);
  SimOptions so;
  so.T = 0.5;
  so.delta = 0.05;
  std::vector<double> x0{0.0};
  auto a = simulate_eps_path(m, 0.25, so, x0, 424242, {0.1, 0.3, 0.5});
  auto b = simulate_eps_path(m, 0.25, so, x0, 424242, {0.1, 0.3, 0.5});
  CHECK(a == b);
  CHECK(a.events.size() > 0);
  auto c = simulate_eps_path(m, 0.25, so, x0, 424243, {0.1, 0.3, 0.5});
  CHECK_FALSE(a == c);
}

TEST_CASE("constant kernel accepts every proposal") {
  auto m = testutil::constant_model(1.5, 2.0);
  SimOptions so;
  so.T = 1.0;
  so.delta = 0.05;
  std::vector<double> x0{0.0};
  auto rec = simulate_eps_path(m, 0.5, so, x0, 7, {});
  REQUIRE(rec.events.size() > 10);
  for (const auto& e : rec.events) CHECK(e.accepted);
}

TEST_CASE("proposal count is Poisson with the dominating-measure rate") {
  auto m = testutil::constant_model(1.5, 1.0);
  SimOptions so;
  so.T = 1.0;
  so.delta = 0.05;
  Simulator sim = Simulator::eps_process(m, 0.5, so);
  double lam = sim.proposal_rate();
  CHECK(lam == doctest::Approx(2.0 * std::pow(0.05, -1.5) / 1.5).epsilon(1e-12));
  const int n = 2000;
  std::vector<double> counts(n);
  std::vector<double> x0{0.0};
  parallel_for(n, [&](std::size_t p) {
    Rng rng(derive_seed(99, "poisson-count", p));
    struct Counter : PathObserver {
      double c = 0.0;
      void jump_event(double, std::span<const double>, std::span<const double>,
                      std::span<const double>, bool) override {
        c += 1.0;
      }
    } counter;
    sim.run(rng, x0, counter);
    counts[p] = counter.c;
  });
  auto ms = mean_se(counts);
  CHECK(std::abs(ms.mean - lam * so.T) <= 4.0 * ms.se);
}

TEST_CASE("eps-process ECF matches the constant-kernel exponent oracle") {
  auto m = testutil::constant_model(1.5, 1.0);
  SimOptions so;
  so.T = 1.0;
  so.delta = 0.01;
  Simulator sim = Simulator::eps_process(m, 0.25, so);
  std::vector<double> x0{0.0};
  auto samples = testutil::marginal_batch(sim, 10000, 1.0, "ecf-oracle", 314159, x0);
  double psi1 = testutil::symmetric_exponent_quadrature(1.5, 2.0, 1.0, 1.0);
  // frozen cross-check of the oracle itself: -2 C(1.5) = -3.34217103284...
  CHECK(psi1 == doctest::Approx(-2.0 * testutil::stable_cos_constant(1.5)).epsilon(1e-7));
  CHECK(psi1 == doctest::Approx(-3.3421710328413).epsilon(1e-7));
  auto chk = testutil::ecf_deviation(samples, 1.0, std::exp(std::complex<double>(psi1, 0.0)));
  CHECK(chk.deviation <= 4.0 * chk.se + 0.01);
}

TEST_CASE("constant kernel is eps-free in law") {
  auto m = testutil::constant_model(1.5, 1.0);
  SimOptions so;
  so.T = 1.0;
  so.delta = 0.02;
  std::vector<double> x0{0.0};
  Simulator s1 = Simulator::eps_process(m, 0.5, so);
  Simulator s2 = Simulator::eps_process(m, 0.125, so);
  auto a = testutil::marginal_batch(s1, 4000, 1.0, "epsfree-a", 1001, x0);
  auto b = testutil::marginal_batch(s2, 4000, 1.0, "epsfree-b", 1002, x0);
  double d = ks_two_sample(a, b);
  CHECK(d <= ks_two_sample_critical(a.size(), b.size(), 0.01));
}

TEST_CASE("cell process wraps to a uniform invariant marginal") {
  auto m = testutil::product_model(1.5, 0.5);
  SimOptions so;
  so.T = 3.0;
  so.delta = 0.05;
  Simulator sim = Simulator::cell_process(m, so);
  std::vector<double> x0{0.25};
  auto samples = testutil::marginal_batch(sim, 10000, 3.0, "cell-uniform", 271828, x0);
  for (auto& s : samples) s = wrap_unit(s);
  double ks = ks_against_cdf(samples, [](double x) { return x; });
  CHECK(ks < 0.02);
}

TEST_CASE("symmetric cell increments have zero mean") {
  auto m = testutil::constant_model(1.5, 1.0);
  SimOptions so;
  so.T = 1.0;
  so.delta = 0.05;
  Simulator sim = Simulator::cell_process(m, so);
  std::vector<double> x0{0.5};
  auto samples = testutil::marginal_batch(sim, 5000, 1.0, "cell-sym", 5150, x0);
  for (auto& s : samples) s -= 0.5;
  auto ms = mean_se(samples);
  CHECK(std::abs(ms.mean) <= 4.0 * ms.se);
}

TEST_CASE("thinning reproduces the z-dependent jump density") {
  // the cell process sees kappa(x, z, z) = kappa*(z): accepted jump sizes on
  // the positive ray follow kappa*(r) r^{-1-alpha} / norm
  auto m = testutil::product_model(1.5, 0.5);
  SimOptions so;
  so.T = 2.0;
  so.delta = 0.25;
  Simulator sim = Simulator::cell_process(m, so);
  std::vector<double> x0{0.0};
  std::vector<std::vector<double>> per_path(400);
  parallel_for(per_path.size(), [&](std::size_t p) {
    Rng rng(derive_seed(8888, "thinning", p));
    struct Collect : PathObserver {
      std::vector<double>* out;
      void jump_event(double, std::span<const double>, std::span<const double> z,
                      std::span<const double>, bool acc) override {
        if (acc && z[0] > 0.0) out->push_back(z[0]);
      }
    } col;
    col.out = &per_path[p];
    sim.run(rng, x0, col);
  });
  std::vector<double> jumps;
  for (auto& v : per_path) jumps.insert(jumps.end(), v.begin(), v.end());
  REQUIRE(jumps.size() > 3000);

  const double alpha = 1.5, delta = 0.25;
  auto dens = [&](double r) {
    return (1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * r)) * std::pow(r, -1.0 - alpha);
  };
  double norm = testutil::adaptive_simpson(dens, delta, 50.0, 1e-12) +
                testutil::adaptive_simpson(dens, 50.0, 1e5, 1e-12);
  double ks = ks_against_cdf(jumps, [&](double r) {
    if (r <= delta) return 0.0;
    if (r > 50.0) return 1.0 - 1e-9;
    return testutil::adaptive_simpson(dens, delta, r, 1e-10) / norm;
  });
  double crit = 1.6276 / std::sqrt(static_cast<double>(jumps.size()));
  CHECK(ks < crit);
}

TEST_CASE("state-dependent acceptance follows kappa(x)/kappa2") {
  auto a = PeriodicField::fourier(1, {{FourierTerm{{0}, 2.0, 0.0}, FourierTerm{{1}, 0.0, 1.0}}});
  ModelSpec m;
  m.d = 1;
  m.alpha = 0.7;  // drift machinery off: the state moves by jumps alone
  m.J = LevyDensity::one_dim(0.7, 1.0, 1.0);
  m.kernel = JumpKernel::diffeo(1, 0.7, a);
  SimOptions so;
  so.T = 2.0;
  so.delta = 0.3;
  Simulator sim = Simulator::cell_process(m, so);
  const int bins = 8;
  std::vector<double> acc_n(bins, 0.0), try_n(bins, 0.0);
  std::vector<double> x0{0.0};
  for (int p = 0; p < 600; ++p) {
    Rng rng(derive_seed(1212, "acceptance", static_cast<std::uint64_t>(p)));
    struct Collect : PathObserver {
      std::vector<double>*an, *tn;
      int bins;
      void jump_event(double, std::span<const double> x_pre, std::span<const double>,
                      std::span<const double>, bool acc) override {
        int b = static_cast<int>(wrap_unit(x_pre[0]) * bins);
        if (b >= bins) b = bins - 1;
        (*tn)[b] += 1.0;
        if (acc) (*an)[b] += 1.0;
      }
    } col;
    col.an = &acc_n;
    col.tn = &try_n;
    col.bins = bins;
    sim.run(rng, x0, col);
  }
  double kappa2 = m.kernel.kappa2();
  for (int b = 0; b < bins; ++b) {
    REQUIRE(try_n[b] > 200);
    double frac = acc_n[b] / try_n[b];
    double lo = static_cast<double>(b) / bins, hi = (b + 1.0) / bins;
    double kbar = testutil::adaptive_simpson(
                      [&](double x) {
                        return std::pow(2.0 + std::sin(2.0 * std::numbers::pi * x), 0.7);
                      },
                      lo, hi, 1e-10) *
                  bins;
    double se = std::sqrt(0.25 / try_n[b]);
    // bin occupation is only approximately uniform: allow a width term
    CHECK(std::abs(frac - kbar / kappa2) <= 4.0 * se + 0.02);
  }
}

TEST_CASE("halving the small-jump cutoff moves the ECF less than the noise") {
  auto m = testutil::constant_model(1.5, 1.0);
  std::vector<double> x0{0.0};
  SimOptions s1;
  s1.T = 1.0;
  s1.delta = 0.05;
  SimOptions s2 = s1;
  s2.delta = 0.025;
  auto a = testutil::marginal_batch(Simulator::eps_process(m, 0.5, s1), 8000, 1.0, "bias-a", 4001,
                                    x0);
  auto b = testutil::marginal_batch(Simulator::eps_process(m, 0.5, s2), 8000, 1.0, "bias-b", 4002,
                                    x0);
  auto ca = testutil::ecf_deviation(a, 1.0, {0.0, 0.0});
  auto cb = testutil::ecf_deviation(b, 1.0, {0.0, 0.0});
  CHECK(std::abs(ca.deviation - cb.deviation) <=
        4.0 * std::sqrt(ca.se * ca.se + cb.se * cb.se));
}

TEST_CASE("limit simulator: degenerate triplet stays at zero") {
  auto trip = constant_triplet(1.5, 1e-12);
  trip.kappa1 = 0.0;
  trip.kappa2 = 1e-12;
  SimOptions so;
  so.T = 1.0;
  so.delta = 0.05;
  auto rec = simulate_limit_levy(trip, so, 31337, {1.0});
  CHECK(rec.samples[0][0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("limit simulator matches the constant-kernel law and is deterministic") {
  auto trip = constant_triplet(1.5, 1.0);
  SimOptions so;
  so.T = 1.0;
  so.delta = 0.01;
  Simulator sim = Simulator::limit_process(trip, so);
  std::vector<double> x0{0.0};
  auto samples = testutil::marginal_batch(sim, 10000, 1.0, "limit-ecf", 2718, x0);
  double psi1 = testutil::symmetric_exponent_quadrature(1.5, 2.0, 1.0, 1.0);
  auto chk = testutil::ecf_deviation(samples, 1.0, std::exp(std::complex<double>(psi1, 0.0)));
  CHECK(chk.deviation <= 4.0 * chk.se + 0.01);
  auto r1 = simulate_limit_levy(trip, so, 5555, {0.5, 1.0});
  auto r2 = simulate_limit_levy(trip, so, 5555, {0.5, 1.0});
  CHECK(r1 == r2);
}

TEST_CASE("rescaling law: eps = 1 identity and constant-kernel case") {
  auto m = testutil::product_model(1.5, 0.5);
  SimOptions so;
  so.delta = 0.02;
  so.T = 1.0;
  auto rep1 = check_rescaling_law(m, 1.0, so, {0.5, 1.0}, 3000, 0.01, 808);
  CHECK(rep1.pass);

  auto mc = testutil::constant_model(1.5, 1.0);
  auto rep2 = check_rescaling_law(mc, 0.25, so, {0.5, 1.0}, 3000, 0.01, 809);
  CHECK(rep2.pass);
}

TEST_CASE("jump budget overflow is rejected") {
  auto m = testutil::constant_model(1.5, 1.0);
  SimOptions so;
  so.T = 1.0;
  so.delta = 0.01;
  so.jump_cap = 100.0;
  CHECK_THROWS_AS(Simulator::eps_process(m, 0.5, so), NumericsError);
}

TEST_CASE("drift fields with alpha outside (1,2) are rejected without override") {
  ModelSpec m;
  m.d = 1;
  m.alpha = 0.7;
  m.J = LevyDensity::one_dim(0.7, 1.0, 1.0);
  m.kernel = JumpKernel::constant(1, 1.0);
  m.b = PeriodicField::constant(1, {1.0});
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m.allow_inactive_drift = true;
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("two-dimensional isotropic model matches its exponent oracle") {
  ModelSpec m;
  m.d = 2;
  m.alpha = 1.2;
  m.J = LevyDensity::isotropic(2, 1.2);
  m.kernel = JumpKernel::constant(2, 1.0);
  SimOptions so;
  so.T = 1.0;
  so.delta = 0.05;
  Simulator sim = Simulator::eps_process(m, 0.5, so);
  std::vector<double> x0{0.0, 0.0};
  const int n = 6000;
  std::vector<std::vector<double>> samples(n);
  parallel_for(n, [&](std::size_t p) {
    Rng rng(derive_seed(777, "iso2d", p));
    MarginalRecorder rec({1.0});
    sim.run(rng, x0, rec);
    samples[p] = rec.values()[0];
  });
  // psi(xi) = -C_alpha |xi|^alpha int_0^{2pi} |cos theta|^alpha dtheta for the
  // isotropic circle density J == 1
  const double alpha = 1.2;
  double cang = 0.0;
  const int na = 4096;
  for (int i = 0; i < na; ++i) {
    double th = (i + 0.5) * 2.0 * std::numbers::pi / na;
    cang += std::pow(std::abs(std::cos(th)), alpha);
  }
  cang *= 2.0 * std::numbers::pi / na;
  double c_alpha = -testutil::symmetric_exponent_quadrature(alpha, 1.0, 1.0, 1.0);
  std::vector<std::vector<double>> grid{{1.0, 0.0}, {0.7, 0.7}};
  auto ecf = empirical_char_fn(samples, grid);
  for (const auto& pt : ecf.points) {
    double xin = std::hypot(pt.xi[0], pt.xi[1]);
    double psi = -c_alpha * cang * std::pow(xin, alpha);
    double dev = std::abs(pt.value - std::exp(std::complex<double>(psi, 0.0)));
    CHECK(dev <= 4.0 * pt.se + 0.02);
  }
}

TEST_CASE("rescaling-law sample sets also agree in ECF at every node") {
  auto m = testutil::product_model(1.5, 0.5);
  SimOptions so;
  so.delta = 0.02;
  so.T = 1.0;
  auto rep = check_rescaling_law(m, 0.5, so, {1.0}, 3000, 0.01, 818);
  CHECK(rep.ecf_agree);
  REQUIRE(rep.ecf_max_ratio.size() == 1);
  CHECK(rep.ecf_max_ratio[0] <= 4.0);
}
