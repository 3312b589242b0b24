#include <cmath>
#include <numbers>

#include "doctest.h"
#include "stag/charflow.hpp"
#include "stag/exact.hpp"
#include "stag/quad.hpp"

using namespace stag;
using namespace stag::exact;

namespace {

// Frozen values from tests/oracles/compute_oracles.py
constexpr double kMu1OneOne = 1.94047102378734;
constexpr double kSigmaTenPlusTen = -0.0498756211208903;

double sech2(double u) { return 1.0 / (std::cosh(u) * std::cosh(u)); }

// five-point centered first and second derivatives
template <typename F>
double d1(F f, double t, double h) {
  return (8 * (f(t + h) - f(t - h)) - (f(t + 2 * h) - f(t - 2 * h))) / (12 * h);
}
template <typename F>
double d2(F f, double t, double h) {
  return (-f(t + 2 * h) + 16 * f(t + h) - 30 * f(t) + 16 * f(t - h) - f(t - 2 * h)) / (12 * h * h);
}

}  // namespace

TEST_CASE("mu1 and mu2") {
  for (double n0 : {0.0, 0.5, 1.0, 3.0}) CHECK(mu1(0.0, {n0}) == doctest::Approx(1.0).epsilon(1e-15));
  for (double t : {0.0, 0.3, 2.0, 7.5}) CHECK(mu1(t, {0.0}) == doctest::Approx(sech2(t / 2)).epsilon(1e-14));
  CHECK(std::abs(mu1(1.0, {1.0}) - kMu1OneOne) <= 1e-12);
  CHECK(std::exp(log_mu1(3.0, {0.5})) == doctest::Approx(mu1(3.0, {0.5})).epsilon(1e-14));

  CHECK(mu2(0.0, {2.0}) == doctest::Approx(0.0).epsilon(1e-15));
  for (double t : {0.4, 3.0}) {
    double c = std::cosh(t / 2);
    CHECK(mu2(t, {0.0}) == doctest::Approx(c * c - 1 / (c * c)).epsilon(1e-13));
  }
  for (double n0 : {0.0, 0.5, 1.0, 3.0}) {
    CAPTURE(n0);
    CHECK(d1([&](double t) { return mu1(t, {n0}); }, 0.0, 1e-3) == doctest::Approx(n0).epsilon(1e-9));
    CHECK(d1([&](double t) { return mu2(t, {n0}); }, 0.0, 1e-3) == doctest::Approx(-2 * n0).epsilon(1e-9));
  }
}

TEST_CASE("mu1 solves 2 (ln mu1)'' + mu1 = 0 and the Riccati equation") {
  const double h = 3e-3;
  for (double n0 : {0.0, 0.5, 1.0, 3.0}) {
    FamilyParams p{n0};
    auto lm = [&](double t) { return log_mu1(t, p); };
    for (int k = 0; k <= 100; ++k) {
      double t = 0.1 * k;
      CAPTURE(n0);
      CAPTURE(t);
      double second = d2(lm, t, h);
      double n = d1(lm, t, h);  // N = mu1' / mu1
      CHECK(std::abs(2 * second + mu1(t, p)) <= 1e-8);
      CHECK(std::abs(2 * second - n * n + p.C0()) <= 1e-8);
    }
  }
}

TEST_CASE("sigma") {
  CHECK(sigma(0.0) == -1.0);
  CHECK(std::abs(sigma(1.0) + std::sqrt(2.0)) <= 1e-12);
  CHECK(std::abs(sigma(10.0) + 10.0 - kSigmaTenPlusTen) <= 1e-13);
  CHECK(sigma(10.0) + 10.0 < 0.0);
  CHECK(std::abs(sigma(10.0) + 10.0) <= 0.1);
  for (double n0 : {0.0, 0.3, 2.0, 100.0}) CHECK(sigma(n0) < 0.0);
}

TEST_CASE("gamma_x_exact") {
  for (double x : {0.0, 0.1, 0.37, 1.0}) CHECK(gamma_x_exact(0.0, x) == doctest::Approx(1.0).epsilon(1e-15));
  for (double t : {0.5, 3.0, 12.0}) {
    double c = std::cosh(t / 2);
    CHECK(gamma_x_exact(t, 0.0) == doctest::Approx(c * c).epsilon(1e-13));
  }
  for (double t : {0.5, 1.0, 5.0}) {
    const double pts[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    double mean = quad::integrate_with_breaks([&](double x) { return gamma_x_exact(t, x); }, pts,
                                              quad::Tolerance{1e-13, 1e-13})
                      .value;
    CHECK(std::abs(mean - 1.0) <= 1e-10);
  }
}

TEST_CASE("fields_exact") {
  for (double x : {0.0, 0.2, 0.6}) {
    Fields f = fields_exact(0.0, x);
    CHECK(f.fx == 0.0);
    CHECK(f.rho == doctest::Approx(rho0(x)).epsilon(1e-15));
  }
  for (double t : {0.0, 1.0, 25.0}) CHECK(std::abs(fields_exact(t, 0.125).fx) <= 1e-15);
  CHECK(std::abs(std::exp(30.0) * fields_exact(30.0, 0.1).rho - 4.0) <= 1e-3);
  for (double t : {0.7, 4.0}) {
    for (double x : {0.05, 0.3, 0.81}) {
      double s = std::sinh(t / 2);
      double stated = (1 + std::cosh(t)) * rho0(x) / (2 + (3 + std::cosh(t)) * s * s * rho0(x));
      CHECK(fields_exact(t, x).rho == doctest::Approx(stated).epsilon(1e-13));
      CHECK(fields_exact(t, x).rho == doctest::Approx(rho0(x) * gamma_x_exact(t, x)).epsilon(1e-14));
    }
  }
}

TEST_CASE("flow map") {
  for (double t : {0.0, 1.0, 6.0}) {
    CHECK(gamma_exact(t, 0.0) == 0.0);
    CHECK(gamma_exact(t, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(gamma_exact(t, 0.5) - 0.5) <= 1e-15);
    CHECK(gamma_exact(t, 0.25) == doctest::Approx(0.25).epsilon(1e-15));
    double prev = -1.0;
    for (int j = 0; j <= 200; ++j) {
      double x = j / 200.0;
      double g = gamma_exact(t, x);
      CHECK(g > prev);
      prev = g;
      CHECK(label_exact(t, g) == doctest::Approx(x).epsilon(1e-12));
      if (j > 0 && j < 200) {
        double fd = d1([&](double y) { return gamma_exact(t, y); }, x, 1e-5);
        CHECK(fd == doctest::Approx(gamma_x_exact(t, x)).epsilon(1e-5));
      }
    }
  }
  for (double t : {0.3, 2.0}) {
    for (double y : {0.1, 0.4, 0.9}) {
      CHECK(rho_eulerian(t, y) == doctest::Approx(rho0(y) * sech2(t / 2)).epsilon(1e-12));
    }
  }
}

TEST_CASE("long-time Lagrangian slope on the zeros of rho0 tends to -sigma(0)") {
  for (double x : {0.0, 0.5, 1.0}) {
    double fx = fields_exact(40.0, gamma_exact(40.0, x)).fx;
    CHECK(std::abs(fx + sigma(0.0)) <= 1e-12);
  }
  CHECK(std::abs(fields_exact(40.0, 0.1).fx - std::cos(0.4 * std::numbers::pi)) <= 1e-12);
}

TEST_CASE("characteristics reproduce the closed forms at N0 = 0") {
  auto pr = catalog("global-family", {{"N0", 0.0}});
  charflow::Flow flow(pr.f0, pr.rho0);
  charflow::EngineOptions opt;
  opt.t_max = 2.0;
  charflow::Trajectory tr = flow.run(opt);
  const charflow::CharState* before = &tr.states.front();
  for (const auto& s : tr.states) {
    if (s.t <= 2.0) before = &s;
  }
  charflow::CharState s = flow.advance_to_time(*before, 2.0);
  REQUIRE(s.t == doctest::Approx(2.0).epsilon(1e-13));
  for (double x : {0.0, 0.05, 0.1, 0.2, 0.3, 0.45, 0.6, 0.8, 1.0}) {
    CAPTURE(x);
    charflow::LagrangianSample ls = flow.lagrangian_sample(s, x);
    CHECK(std::abs(ls.gamma - gamma_exact(2.0, x)) <= 1e-4);
    CHECK(std::abs(ls.gamma_x - gamma_x_exact(2.0, x)) <= 1e-4 * gamma_x_exact(2.0, x));
    CHECK(std::abs(rho_eulerian(2.0, ls.gamma) - ls.rho) <= 1e-4);
    CHECK(std::abs(fields_exact(2.0, ls.gamma).fx - ls.fx) <= 1e-4);
  }
}
