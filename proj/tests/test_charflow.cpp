#include <cmath>
#include <map>
#include <string>

#include "doctest.h"
#include "stag/blowup.hpp"
#include "stag/charflow.hpp"

using namespace stag;
using namespace stag::charflow;

namespace {

const Profile& parabola() {
  static const Profile p = Profile::parse("x*(1-x)");
  return p;
}
const Profile& zero() {
  static const Profile p = Profile::parse("0");
  return p;
}
const Profile& sin2() {
  static const Profile p = Profile::parse("sin(2*pi*x)^2");
  return p;
}

// Frozen values from tests/oracles/compute_oracles.py
constexpr double kLn3 = 1.0986122886681097;
constexpr double kPhiNearStar = 7.254335873597921;
constexpr double kTParabolaHalf = 0.5315346462742445;
constexpr double kDphiExample = 0.4694420893304473;

const Trajectory& preset(const char* name) {
  static std::map<std::string, Trajectory> cache;
  auto it = cache.find(name);
  if (it != cache.end()) return it->second;
  auto pr = catalog(name, {{"c", 1.0}, {"N0", 0.0}});
  Flow flow(pr.f0, pr.rho0);
  return cache.emplace(name, flow.run(EngineOptions{})).first->second;
}

Flow preset_flow(const char* name) {
  auto pr = catalog(name, {{"c", 1.0}, {"N0", 0.0}});
  return Flow(pr.f0, pr.rho0);
}

}  // namespace

TEST_CASE("phi1_of") {
  CHECK(phi1_of(0.0, 0.0, parabola(), sin2(), 1e-10) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(phi1_of(0.5, 0.0, parabola(), zero(), 1e-12) - kLn3) <= 1e-11);
  double near = phi1_of(1.0 - 1e-6, 0.0, parabola(), zero(), 1e-10);
  CHECK(near > 6.0);
  CHECK(std::abs(near - kPhiNearStar) <= 1e-8);
  CHECK_THROWS_AS(phi1_of(1.0, 0.0, parabola(), zero(), 1e-10), DenominatorError);
  CHECK_THROWS_AS(phi1_of(1.5, 0.0, parabola(), zero(), 1e-10), DenominatorError);
}

TEST_CASE("dphi1_deta") {
  CHECK(std::abs(dphi1_deta(CharState{}, parabola(), sin2(), 1e-10)) <= 1e-12);
  CharState half{0.5, 0.0, 0.0, 0.0, kLn3, 0.0};
  CHECK(std::abs(dphi1_deta(half, parabola(), zero(), 1e-12) - kDphiExample) <= 1e-11);
  CharState flat{0.0, 0.0, 1.0, 0.0, 1.0, 0.0};
  CHECK(dphi1_deta(flat, zero(), sin2(), 1e-10) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("dphi1_deta matches centered differences along a trajectory") {
  Flow flow = preset_flow("parabola");
  const Trajectory& tr = preset("parabola");
  for (std::size_t k = 1; k < tr.states.size(); k += 23) {
    const CharState& s = tr.states[k];
    double h = 1e-4 * flow.gap(s.eta);
    // dg/deta = -A
    double fd = (flow.phi1_of(s.eta + h, s.g - s.A * h) - flow.phi1_of(s.eta - h, s.g + s.A * h)) / (2 * h);
    double exact = flow.dphi1_deta(s);
    CAPTURE(s.eta);
    CHECK(std::abs(fd - exact) <= 1e-4 * std::abs(exact));
  }
}

TEST_CASE("advance") {
  CharState s = advance(CharState{}, 1e-6, parabola(), sin2(), 1e-10);
  CHECK(s.eta == 1e-6);
  CHECK(s.t == doctest::Approx(1e-6).epsilon(1e-5));
  CHECK(s.A == doctest::Approx(1e-6).epsilon(1e-5));
  CHECK(std::abs(s.B) <= 1e-11);
  CHECK(std::abs(s.g - (s.B - s.eta * s.A)) <= 1e-18);

  Flow flow(parabola(), zero(), 1e-12);
  CharState c = flow.initial_state();
  for (int k = 0; k < 500; ++k) c = flow.advance(c, 0.001);
  CHECK(c.eta == doctest::Approx(0.5));
  CHECK(std::abs(c.t - kTParabolaHalf) <= 1e-8);

  CharState target = flow.advance_to_time(flow.initial_state(), kTParabolaHalf);
  CHECK(target.t == doctest::Approx(kTParabolaHalf).epsilon(1e-13));
}

TEST_CASE("run: stop reasons") {
  const Trajectory& p = preset("parabola");
  CHECK(p.reason == StopReason::blowup_approach);
  CHECK(p.final().t <= 1.6450);
  CHECK(1.0 - p.final().eta * p.M0 < 1e-8);

  auto family = catalog("global-family", {{"N0", 0.0}});
  Trajectory g = Flow(family.f0, family.rho0).run(EngineOptions{});
  CHECK(g.reason == StopReason::time_limit);
  CHECK(g.final().t == 20.0);
  CHECK(std::isinf(g.eta_star));
  for (const CharState& st : g.states) {
    // gamma_x(t, 0) = cosh^2(t/2) for this family
    const double c = std::cosh(0.5 * st.t);
    CAPTURE(st.t);
    CHECK(std::abs(1.0 / (st.phi1 * c * c) - 1.0) <= 1e-6);
  }

  const Trajectory& s = preset("sine");
  CHECK((s.reason == StopReason::blowup_approach || s.reason == StopReason::time_limit));
}

TEST_CASE("trajectory invariants") {
  for (const char* name : {"parabola", "sine", "cubic-symmetric"}) {
    CAPTURE(name);
    Flow flow = preset_flow(name);
    const Trajectory& tr = preset(name);
    REQUIRE(tr.states.size() > 50);
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
      const CharState& s = tr.states[k];
      CAPTURE(k);
      CHECK(s.g <= 0.0);
      CHECK(s.phi1 > 0.0);
      CHECK(s.eta < tr.eta_star);
      CHECK(std::abs(flow.gamma(s, 1.0) - 1.0) <= 1e-8);
      CHECK(flow.gamma(s, 0.0) == 0.0);
      if (k > 0) {
        const CharState& prev = tr.states[k - 1];
        CHECK(s.g <= prev.g);
        CHECK(s.t >= prev.t);
        CHECK(s.A >= prev.A);
        CHECK(s.B >= prev.B);
      }
    }
  }
}

TEST_CASE("parabola: Jacobian lower bound at the boundary maximizer") {
  Flow flow = preset_flow("parabola");
  Flow plain(parabola(), zero());
  for (const CharState& s : preset("parabola").states) {
    double bound = 1.0 / (plain.phi1_of(s.eta, 0.0) * (1.0 - s.eta));
    CHECK(flow.jacobian_at(s, 0.0) >= bound * (1.0 - 1e-12));
  }
  CHECK(flow.jacobian_at(preset("parabola").final(), 0.0) > 1e6);
}

TEST_CASE("lagrangian samples at t=0 reproduce the data") {
  auto pr = catalog("cubic-symmetric", {{"c", 1.0}});
  Flow flow(pr.f0, pr.rho0);
  CHECK(flow.jacobian_at(flow.initial_state(), 0.3) == 1.0);
  for (double x : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    LagrangianSample s = flow.lagrangian_sample(flow.initial_state(), x);
    CHECK(s.fx == doctest::Approx(pr.f0.d1(x)).epsilon(1e-12));
    CHECK(s.fxx == doctest::Approx(pr.f0.d2(x)).epsilon(1e-12));
    CHECK(s.rho == doctest::Approx(pr.rho0(x)).epsilon(1e-12));
    CHECK(s.gamma == doctest::Approx(x).epsilon(1e-12));
  }
}

TEST_CASE("cubic-symmetric: two-sided vorticity growth") {
  auto pr = catalog("cubic-symmetric", {{"c", 1.0}});
  Flow flow(pr.f0, pr.rho0);
  const double guard = 1e-12;
  for (const CharState& s : preset("cubic-symmetric").states) {
    LagrangianSample left = flow.lagrangian_sample(s, 0.0);
    LagrangianSample right = flow.lagrangian_sample(s, 1.0);
    double lb = pr.f0.d2(0.0) * left.gamma_x;
    double rb = pr.f0.d2(1.0) * right.gamma_x;
    CHECK(lb < 0.0);
    CHECK(rb > 0.0);
    CHECK(left.fxx <= lb + guard * std::abs(lb));
    CHECK(right.fxx >= rb - guard * std::abs(rb));
  }
}

TEST_CASE("log gamma_x equals the time integral of fx") {
  for (const char* name : {"parabola", "cubic-symmetric"}) {
    CAPTURE(name);
    Flow flow = preset_flow(name);
    const Trajectory& tr = preset(name);
    for (double x : {0.0, 0.3, 0.5}) {
      CAPTURE(x);
      double integral = 0.0;
      double prev_fx = flow.lagrangian_sample(tr.states[0], x).fx;
      for (std::size_t k = 1; k < tr.states.size(); ++k) {
        LagrangianSample s = flow.lagrangian_sample(tr.states[k], x);
        integral += 0.5 * (s.fx + prev_fx) * (tr.states[k].t - tr.states[k - 1].t);
        prev_fx = s.fx;
        double lg = std::log(s.gamma_x);
        CHECK(std::abs(integral - lg) <= 1e-3 * std::max(1.0, std::abs(lg)));
      }
    }
  }
}

TEST_CASE("fxx matches differences of fx in Eulerian position") {
  Flow flow = preset_flow("parabola");
  const Trajectory& tr = preset("parabola");
  for (std::size_t k : {tr.states.size() / 3, tr.states.size() / 2}) {
    const CharState& s = tr.states[k];
    const double h = 1e-4;
    for (double x : {0.2, 0.4, 0.6, 0.8}) {
      LagrangianSample c = flow.lagrangian_sample(s, x);
      LagrangianSample l = flow.lagrangian_sample(s, x - h);
      LagrangianSample r = flow.lagrangian_sample(s, x + h);
      double fd = (r.fx - l.fx) / (r.gamma - l.gamma);
      CAPTURE(x);
      CHECK(std::abs(fd - c.fxx) <= 1e-3 * std::max(1.0, std::abs(c.fxx)));
      CHECK(c.rho == flow.rho0()(x) * c.gamma_x);
    }
  }
}
