#include <doctest.h>

#include <cmath>

#include "ggsp/pvalue_model.hpp"
#include "ggsp/rng.hpp"
#include "support.hpp"

using namespace ggsp;

namespace {
const MixtureFamily fam = MixtureFamily::sigmoid_beta();
const NullDensity nd = NullDensity::uniform();
}  // namespace

TEST_CASE("sigmoid: values and stability") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(sigmoid(800.0) == 1.0);
  CHECK(sigmoid(-800.0) == doctest::Approx(0.0));
  CHECK(std::isfinite(sigmoid(-1e308)));
  CHECK(sigmoid(60.0) > sigmoid(50.0) - 1e-15);  // saturates without overflow
}

TEST_CASE("mixture density: worked values") {
  CHECK(mixture_density(fam, 1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mixture_density(fam, 0.25, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  // zeta -> +inf: density -> 1 for all p
  CHECK(mixture_density(fam, 0.37, 200.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(mixture_density(fam, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(mixture_density(fam, -0.1, 0.0), DomainError);
}

TEST_CASE("mixture density integrates to one") {
  // Sampled zeta from [-5,5], kept at zeta >= -3: below that, part of the
  // unit mass sits at p smaller than the double-precision floor and no
  // pointwise quadrature can see it.
  for (double zeta : {-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 5.0}) {
    const double total = oracle::unit_interval_log_quadrature(
        [&](double p) { return fam.density(p, zeta); }, 700000);
    CHECK(std::abs(total - 1.0) <= 1e-6);
  }
}

TEST_CASE("pi0: sigmoid of zeta under the uniform null") {
  CHECK(pi0_of(fam, nd, 0.0, 0, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pi0_of(fam, nd, std::log(3.0), 0, 0.0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(pi0_of(fam, nd, -30.0, 0, 0.0) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("f1: worked values and normalization") {
  CHECK(f1_of(fam, nd, 1.0, 0.7, 0, 0.0) == doctest::Approx(0.0));
  CHECK(f1_of(fam, nd, 1.0, -1.3, 0, 0.0) == doctest::Approx(0.0));
  CHECK(f1_of(fam, nd, 0.25, 0.0, 0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  for (double zeta : {-2.0, 0.0, 2.0}) {
    const double total = oracle::unit_interval_log_quadrature(
        [&](double p) { return f1_of(fam, nd, p, zeta, 0, 0.0); }, 700000);
    CHECK(std::abs(total - 1.0) <= 1e-6);
  }
}

TEST_CASE("lfdr: closed form p^(1-sigmoid(zeta))") {
  CHECK(lfdr(fam, nd, 0.25, 0.0, 0, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(lfdr(fam, nd, 1.0, 1.7, 0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lfdr(fam, nd, 1e-12, 0.0, 0, 0.0) == doctest::Approx(0.0).epsilon(1e-5));

  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const double p = rng.uniform_pos();
    const double zeta = 6.0 * rng.uniform() - 3.0;
    const double expected = std::pow(p, 1.0 - sigmoid(zeta));
    CHECK(std::abs(lfdr(fam, nd, p, zeta, 0, 0.0) - expected) <= 1e-10);
  }
}

TEST_CASE("mixture identity: pi0 f0 + (1-pi0) f1 reproduces f_mix") {
  Rng rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const double p = rng.uniform_pos();
    const double zeta = 10.0 * rng.uniform() - 5.0;
    const double pi0 = pi0_of(fam, nd, zeta, 0, 0.0);
    const double rebuilt =
        pi0 * nd.density(p, 0, 0.0) + (1.0 - pi0) * f1_of(fam, nd, p, zeta, 0, 0.0);
    CHECK(std::abs(rebuilt - fam.density(p, zeta)) <= 1e-10);
  }
}

TEST_CASE("lfdr stays in [0,1] and is strictly increasing in p") {
  for (double zeta : {-3.0, 0.0, 3.0}) {
    double prev = -1.0;
    for (int i = 1; i <= 1000; ++i) {
      const double p = static_cast<double>(i) / 1000.0;
      const double val = lfdr(fam, nd, p, zeta, 0, 0.0);
      CHECK(val >= 0.0);
      CHECK(val <= 1.0);
      CHECK(val > prev);
      prev = val;
    }
  }
}

TEST_CASE("model violations are detected for a broken family") {
  // f_mix(1) = 2 > f0(1) makes the recovered pi0 leave (0,1)
  MixtureFamily bad;
  bad.name = "bad-pi0";
  bad.density = [](double p, double) { return 2.0 * p; };
  CHECK_THROWS_AS(pi0_of(bad, nd, 0.0, 0, 0.0), ModelViolation);

  // f_mix dips below pi0*f0 in the interior: recovered f1 goes negative
  MixtureFamily dip;
  dip.name = "bad-f1";
  dip.density = [](double p, double) { return 0.6 - 0.3 * std::sin(3.14159265358979 * p); };
  CHECK_THROWS_AS(f1_of(dip, nd, 0.5, 0.0, 0, 0.0), ModelViolation);
}

TEST_CASE("dlog_dzeta matches finite differences of ln density") {
  Rng rng(47);
  for (int trial = 0; trial < 100; ++trial) {
    const double p = 0.01 + 0.98 * rng.uniform();
    const double zeta = 6.0 * rng.uniform() - 3.0;
    const double step = 1e-5;
    const double fd = (std::log(fam.density(p, zeta + step)) -
                       std::log(fam.density(p, zeta - step))) /
                      (2.0 * step);
    const double analytic = fam.dlog_dzeta(p, zeta);
    CHECK(std::abs(analytic - fd) <= 1e-6 * std::max(1.0, std::abs(analytic)));
  }
}
