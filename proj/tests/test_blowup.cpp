#include <cmath>
#include <numbers>
#include <string>

#include "doctest.h"
#include "stag/blowup.hpp"

using namespace stag;
using namespace stag::blowup;

namespace {

// Frozen values from tests/oracles/compute_oracles.py
constexpr double kPiSquaredOverSix = 1.6449340668482264;
constexpr double kCubicBound = 1.40239972035286;

const BoundaryCondition kDirichlet{BoundaryKind::dirichlet};
const BoundaryCondition kPeriodic{BoundaryKind::periodic};

}  // namespace

TEST_CASE("find_maximizers") {
  Maxima p = find_maximizers(Profile::parse("x*(1-x)"));
  CHECK(p.M0 == 1.0);
  REQUIRE(p.maximizers.size() == 1);
  CHECK(p.maximizers[0].x == 0.0);
  CHECK(p.maximizers[0].location == Location::left_boundary);
  CHECK(p.maximizers[0].f0_pp == -2.0);

  Maxima s = find_maximizers(Profile::parse("sin(2*pi*x)"));
  CHECK(s.M0 == doctest::Approx(2 * std::numbers::pi).epsilon(1e-15));
  REQUIRE(s.maximizers.size() == 2);
  CHECK(s.maximizers[0].location == Location::left_boundary);
  CHECK(s.maximizers[1].location == Location::right_boundary);
  CHECK(s.maximizers[1].x == 1.0);
  for (const auto& m : s.maximizers) CHECK(std::abs(m.f0_pp) <= kVorticityThreshold);

  auto family = catalog("global-family", {{"N0", 1.0}});
  Maxima g = find_maximizers(family.f0);
  CHECK(g.M0 == doctest::Approx(1.0).epsilon(1e-14));
  REQUIRE(g.maximizers.size() == 2);
  CHECK(g.maximizers[0].x == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(g.maximizers[1].x == doctest::Approx(0.75).epsilon(1e-9));
  for (const auto& m : g.maximizers) {
    CHECK(m.location == Location::interior);
    CHECK(std::abs(m.f0_pp) <= kVorticityThreshold);
  }

  Maxima flat = find_maximizers(Profile::parse("0"));
  CHECK(flat.M0 == 0.0);
  CHECK(flat.maximizers.empty());

  Maxima bump = find_maximizers(Profile::parse("-cos(2*pi*x)/(2*pi)^2"));
  REQUIRE(bump.maximizers.size() == 1);
  CHECK(bump.maximizers[0].x == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(bump.maximizers[0].location == Location::interior);
}

TEST_CASE("find_maximizers ignores constants added to f0") {
  Maxima a = find_maximizers(Profile::parse("x*(1-x)*(1-2*x)"));
  Maxima b = find_maximizers(Profile::parse("x*(1-x)*(1-2*x) + 3.5"));
  CHECK(a.M0 == b.M0);
  REQUIRE(a.maximizers.size() == b.maximizers.size());
  for (std::size_t k = 0; k < a.maximizers.size(); ++k) {
    CHECK(a.maximizers[k].x == b.maximizers[k].x);
    CHECK(a.maximizers[k].f0_pp == b.maximizers[k].f0_pp);
  }
}

TEST_CASE("classify presets") {
  auto parabola = catalog("parabola", {});
  BlowupReport p = classify(parabola.f0, parabola.rho0, kDirichlet);
  CHECK(p.verdict == Verdict::blowup_guaranteed);
  CHECK(p.eta_star == 1.0);
  CHECK(p.bc_ok);
  CHECK(p.rho0_nonneg);
  REQUIRE(p.t_star_bound.has_value());
  CHECK(std::abs(*p.t_star_bound - kPiSquaredOverSix) <= 1e-6 * kPiSquaredOverSix);

  auto sine = catalog("sine", {});
  BlowupReport s = classify(sine.f0, sine.rho0, kPeriodic);
  CHECK(s.verdict == Verdict::inconclusive);
  CHECK(s.bc_ok);
  CHECK_FALSE(s.t_star_bound.has_value());

  auto family = catalog("global-family", {{"N0", 1.0}});
  CHECK(classify(family.f0, family.rho0, kDirichlet).verdict == Verdict::global_family_match);
  CHECK(classify(family.f0, family.rho0, kPeriodic).verdict == Verdict::global_family_match);
  auto family0 = catalog("global-family", {{"N0", 0.0}});
  BlowupReport g0 = classify(family0.f0, family0.rho0, kDirichlet);
  CHECK(g0.verdict == Verdict::global_family_match);
  CHECK(std::isinf(g0.eta_star));
  CHECK_FALSE(g0.t_star_bound.has_value());

  auto cubic = catalog("cubic-symmetric", {{"c", 1.0}});
  CHECK(classify(cubic.f0, cubic.rho0, kDirichlet).verdict == Verdict::blowup_guaranteed);
}

TEST_CASE("classify: each failed hypothesis gives Inconclusive") {
  auto parabola = catalog("parabola", {});
  // periodic boundary does not support the boundary blowup argument
  BlowupReport wrong_bc = classify(parabola.f0, parabola.rho0, kPeriodic);
  CHECK_FALSE(wrong_bc.bc_ok);
  CHECK(wrong_bc.verdict == Verdict::inconclusive);

  BlowupReport negative = classify(parabola.f0, Profile::parse("sin(2*pi*x)^2 - 0.1"), kDirichlet);
  CHECK_FALSE(negative.rho0_nonneg);
  CHECK(negative.verdict == Verdict::inconclusive);

  // the steepest slope of x^2 (1-x)^2 lies inside (0, 1)
  BlowupReport interior = classify(Profile::parse("x^2*(1-x)^2"), parabola.rho0, kDirichlet);
  CHECK(interior.verdict == Verdict::inconclusive);

  // the sine's maxima sit on the boundary but with zero vorticity
  auto sine = catalog("sine", {});
  CHECK(classify(sine.f0, sine.rho0, kDirichlet).verdict == Verdict::inconclusive);

  // rho0 that differs from the family breaks the match
  auto family = catalog("global-family", {{"N0", 1.0}});
  CHECK(classify(family.f0, Profile::parse("sin(2*pi*x)^2*1.001"), kDirichlet).verdict == Verdict::inconclusive);
}

TEST_CASE("classify is invariant under positive rescaling of rho0") {
  for (const char* name : {"parabola", "sine", "cubic-symmetric"}) {
    auto pr = catalog(name, {{"c", 1.0}});
    for (auto bc : {kDirichlet, kPeriodic}) {
      BlowupReport a = classify(pr.f0, pr.rho0, bc);
      BlowupReport b = classify(pr.f0, Profile::parse("3.7*sin(2*pi*x)^2"), bc);
      CAPTURE(name);
      CHECK(a.verdict == b.verdict);
      CHECK(a.rho0_nonneg == b.rho0_nonneg);
      CHECK(a.bc_ok == b.bc_ok);
    }
  }
}

TEST_CASE("t_star_bound") {
  auto bound = t_star_bound(Profile::parse("x*(1-x)"), 1e-10);
  REQUIRE(bound.has_value());
  CHECK(std::abs(*bound - kPiSquaredOverSix) <= 1e-6 * kPiSquaredOverSix);

  CHECK_FALSE(t_star_bound(Profile::parse("sin(2*pi*x)"), 1e-10).has_value());

  auto cubic = t_star_bound(Profile::parse("x*(1-x)*(1-2*x)"), 1e-10);
  REQUIRE(cubic.has_value());
  CHECK(std::abs(*cubic - kCubicBound) <= 1e-9);

  CHECK_THROWS_AS(t_star_bound(Profile::parse("0"), 1e-10), ConfigError);
  CHECK_THROWS_AS(t_star_bound(Profile::parse("-x*x"), 1e-10), ConfigError);
}

TEST_CASE("boundary maximizers with nonzero vorticity give a finite bound") {
  for (const char* src : {"x*(1-x)", "x*(1-x)*(2-x)", "x*(1-x)*exp(-x)", "2*x*(1-x)*(1-2*x)"}) {
    Profile f0 = Profile::parse(src);
    Maxima m = find_maximizers(f0);
    bool eligible = !m.maximizers.empty();
    for (const auto& mx : m.maximizers) {
      if (mx.location == Location::interior || std::abs(mx.f0_pp) <= kVorticityThreshold) eligible = false;
    }
    CAPTURE(std::string(src));
    REQUIRE(eligible);
    CHECK(t_star_bound(f0, 1e-10).has_value());
  }
}

TEST_CASE("bound exceeds the measured blowup time") {
  auto pr = catalog("parabola", {});
  charflow::Flow flow(pr.f0, pr.rho0);
  charflow::Trajectory tr = flow.run(charflow::EngineOptions{});
  REQUIRE(tr.reason == charflow::StopReason::blowup_approach);
  CHECK(tr.final().t <= *t_star_bound(pr.f0, 1e-10));
}

TEST_CASE("rate_diagnostic") {
  auto parabola = catalog("parabola", {});
  charflow::Flow pf(parabola.f0, parabola.rho0);
  charflow::Trajectory pt = pf.run(charflow::EngineOptions{});
  RateFit fit = rate_diagnostic(pt, 0.0, pf);
  CHECK(fit.samples >= kMinRateSamples);
  CHECK(fit.slope >= 0.95);

  auto sine = catalog("sine", {});
  charflow::Flow sf(sine.f0, sine.rho0);
  charflow::Trajectory st = sf.run(charflow::EngineOptions{});
  REQUIRE(st.reason == charflow::StopReason::blowup_approach);
  CHECK(rate_diagnostic(st, 0.0, sf).exponent >= 0.45);

  charflow::Trajectory start;
  start.states.push_back(pf.initial_state());
  start.M0 = pf.M0();
  start.eta_star = pf.eta_star();
  CHECK_THROWS_AS(rate_diagnostic(start, 0.0, pf), InsufficientData);
}

TEST_CASE("report json") {
  auto parabola = catalog("parabola", {});
  nlohmann::json j = to_json(classify(parabola.f0, parabola.rho0, kDirichlet));
  CHECK(j["verdict"] == "BlowupGuaranteed");
  CHECK(j["M0"] == 1.0);
  CHECK(j["eta_star"] == 1.0);
  CHECK(j["maximizers"][0]["location"] == "left-boundary");
  CHECK(j["maximizers"][0]["f0_pp"] == -2.0);
  CHECK(j["rho0_nonneg"] == true);
  CHECK(j["bc_ok"] == true);
  CHECK(j["t_star_bound"].get<double>() == doctest::Approx(kPiSquaredOverSix).epsilon(1e-6));
  CHECK(j.size() == 7);

  auto sine = catalog("sine", {});
  nlohmann::json s = to_json(classify(sine.f0, sine.rho0, kPeriodic));
  CHECK(s["t_star_bound"] == "unbounded");
  CHECK(s["verdict"] == "Inconclusive");

  auto family = catalog("global-family", {{"N0", 0.0}});
  CHECK(to_json(classify(family.f0, family.rho0, kDirichlet))["eta_star"] == "infinity");
}
