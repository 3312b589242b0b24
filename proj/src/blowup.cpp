#include "stag/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "stag/quad.hpp"

namespace stag::blowup {

namespace {

constexpr double kTailDeltaFloor = 1e-12;
constexpr int kRho0Samples = 1001;
constexpr double kRho0Slack = 1e-14;
constexpr int kFamilySamples = 101;

double bisect_curvature(const Profile& f0, double lo, double hi) {
  // f0'' > 0 at lo, < 0 at hi
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    double c = f0.d2(mid);
    if (c == 0.0) return mid;
    (c > 0.0 ? lo : hi) = mid;
  }
  return f0.d1(lo) >= f0.d1(hi) ? lo : hi;
}

Location locate(double x) {
  if (x <= kBoundaryRadius) return Location::left_boundary;
  if (x >= 1.0 - kBoundaryRadius) return Location::right_boundary;
  return Location::interior;
}

bool matches_global_family(const Profile& f0, const Profile& rho0) {
  const double n0 = -f0.d1(0.0);
  if (n0 < -kFamilyMatchTol) return false;
  for (int j = 0; j < kFamilySamples; ++j) {
    double x = static_cast<double>(j) / (kFamilySamples - 1);
    double s = std::sin(2.0 * std::numbers::pi * x);
    if (std::abs(f0.d1(x) + n0 * std::cos(4.0 * std::numbers::pi * x)) > kFamilyMatchTol) return false;
    if (std::abs(rho0(x) - s * s) > kFamilyMatchTol) return false;
  }
  return true;
}

}  // namespace

Maxima find_maximizers(const Profile& f0) {
  const int n = kMaximizerSamples;
  std::vector<double> xs(n), slope(n), curv(n);
  for (int j = 0; j < n; ++j) {
    xs[j] = static_cast<double>(j) / (n - 1);
    slope[j] = f0.d1(xs[j]);
    curv[j] = f0.d2(xs[j]);
  }
  auto [lo, hi] = std::minmax_element(slope.begin(), slope.end());
  Maxima out;
  out.M0 = *hi;
  if (*hi - *lo <= 1e-12 * std::max(1.0, std::abs(*hi))) return out;

  std::vector<double> candidates{0.0, 1.0, xs[hi - slope.begin()]};
  for (int j = 1; j + 1 < n; ++j) {
    if (curv[j] == 0.0) candidates.push_back(xs[j]);
  }
  for (int j = 0; j + 1 < n; ++j) {
    if (curv[j] > 0.0 && curv[j + 1] < 0.0) candidates.push_back(bisect_curvature(f0, xs[j], xs[j + 1]));
  }
  for (double x : candidates) out.M0 = std::max(out.M0, f0.d1(x));

  const double cutoff = out.M0 - 1e-12 * std::max(1.0, std::abs(out.M0));
  std::vector<double> hits;
  for (double x : candidates) {
    if (f0.d1(x) >= cutoff) hits.push_back(x);
  }
  std::sort(hits.begin(), hits.end());
  for (double x : hits) {
    if (!out.maximizers.empty() && x - out.maximizers.back().x < kMergeRadius) {
      if (f0.d1(x) > f0.d1(out.maximizers.back().x)) out.maximizers.back().x = x;
      continue;
    }
    out.maximizers.push_back(Maximizer{x, Location::interior, 0.0});
  }
  for (auto& m : out.maximizers) {
    m.location = locate(m.x);
    m.f0_pp = f0.d2(m.x);
  }
  return out;
}

std::string_view to_string(Location l) {
  switch (l) {
    case Location::left_boundary: return "left-boundary";
    case Location::right_boundary: return "right-boundary";
    case Location::interior: return "interior";
  }
  return "interior";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::blowup_guaranteed: return "BlowupGuaranteed";
    case Verdict::global_family_match: return "GlobalFamilyMatch";
    case Verdict::inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

BlowupReport classify(const Profile& f0, const Profile& rho0, const BoundaryCondition& bc, double tol) {
  BlowupReport r;
  Maxima maxima = find_maximizers(f0);
  r.M0 = maxima.M0;
  r.eta_star = r.M0 > 0.0 ? 1.0 / r.M0 : std::numeric_limits<double>::infinity();
  r.maximizers = std::move(maxima.maximizers);
  r.bc_ok = !boundary_violation(bc, f0, rho0).has_value();
  r.rho0_nonneg = true;
  for (int j = 0; j < kRho0Samples; ++j) {
    if (rho0(static_cast<double>(j) / (kRho0Samples - 1)) < -kRho0Slack) r.rho0_nonneg = false;
  }

  bool boundary_only = !r.maximizers.empty();
  for (const auto& m : r.maximizers) {
    if (m.location == Location::interior || !(std::abs(m.f0_pp) > kVorticityThreshold)) boundary_only = false;
  }

  if (r.bc_ok && matches_global_family(f0, rho0)) {
    r.verdict = Verdict::global_family_match;
  } else if (r.bc_ok && bc.kind == BoundaryKind::dirichlet && r.rho0_nonneg && r.M0 > 0.0 && boundary_only) {
    r.verdict = Verdict::blowup_guaranteed;
  }

  if (r.M0 > 0.0) {
    try {
      r.t_star_bound = t_star_bound(f0, tol);
    } catch (const NumericalError&) {
      r.t_star_bound.reset();
    }
  }
  return r;
}

std::optional<double> t_star_bound(const Profile& f0, double tol) {
  const Maxima maxima = find_maximizers(f0);
  const double M0 = maxima.M0;
  if (!(M0 > 0.0)) throw ConfigError("blowup", "t_star_bound requires max f0' > 0");
  std::vector<double> breaks{0.0};
  for (const auto& m : maxima.maximizers) breaks.push_back(m.x);
  breaks.push_back(1.0);
  const double eta_star = 1.0 / M0;
  auto phi_squared = [&](double mu, double rel) {
    auto integrand = [&](double x) {
      double d = 1.0 - mu * f0.d1(x);
      if (!(d > 0.0)) throw NumericalError("blowup", "inner denominator vanished before eta*");
      return 1.0 / d;
    };
    double phi = quad::integrate_with_breaks(integrand, breaks, quad::Tolerance{0.0, rel}).value;
    return phi * phi;
  };

  // Inner quadrature noise enters the outer panels' error estimates, so the
  // inner relative tolerance is kept well below the outer target. Close to
  // eta* the rounding in 1 - mu f0'(x) caps the attainable inner accuracy at
  // about eps / (1 - mu M0); the tail pieces only need a few digits for the
  // ratio test, and convergent tails are tiny in absolute terms.
  const double fine = std::max(0.01 * tol, 1e-14);
  quad::CompensatedSum total;
  total.add(quad::integrate([&](double mu) { return phi_squared(mu, fine); }, 0.0, 0.5 * eta_star,
                            quad::Tolerance{tol, tol})
                .value);

  std::vector<double> pieces;
  for (double d = 0.5 * eta_star; d >= kTailDeltaFloor * eta_star; d *= 0.5) {
    const double floor = 100.0 * std::numeric_limits<double>::epsilon() / (0.5 * d * M0);
    double estimate = 0.5 * d * phi_squared(eta_star - 0.75 * d, std::max(1e-6, floor));
    double rel = std::max(std::clamp(0.01 * tol / estimate, fine, 1e-8), floor);
    double piece = quad::integrate([&](double mu) { return phi_squared(mu, rel); }, eta_star - d, eta_star - 0.5 * d,
                                   quad::Tolerance{0.1 * tol, std::max(1e-6, 10.0 * rel)})
                       .value;
    pieces.push_back(piece);
    total.add(piece);
  }

  // Convergent tails shrink roughly geometrically (ratio ~1/2 for a log
  // singularity); divergent ones keep a ratio near 1.
  const std::size_t w = std::min<std::size_t>(kTailRatioWindow, pieces.size() - 1);
  double ratio = 0.0;
  for (std::size_t k = pieces.size() - w; k < pieces.size(); ++k) ratio += pieces[k] / pieces[k - 1];
  ratio /= static_cast<double>(w);
  if (!(ratio < kTailRatioLimit)) return std::nullopt;
  total.add(pieces.back() * ratio / (1.0 - ratio));
  return total.value();
}

RateFit rate_diagnostic(const charflow::Trajectory& traj, double x_star, const charflow::Flow& flow) {
  if (traj.states.empty() || !(traj.M0 > 0.0)) throw InsufficientData("rate fit needs a trajectory with M0 > 0");
  const double final_gap = flow.gap(traj.final().eta);
  std::vector<double> u, plain, v;
  for (const auto& s : traj.states) {
    double gap = flow.gap(s.eta);
    if (gap > 10.0 * final_gap) continue;
    double dist = gap / traj.M0;  // eta* - eta
    if (!(dist > 0.0 && dist < 1.0)) continue;
    u.push_back(-std::log(dist * std::abs(std::log(dist))));
    plain.push_back(-std::log(dist));
    v.push_back(std::log(flow.jacobian_at(s, x_star)));
  }
  if (v.size() < kMinRateSamples) {
    throw InsufficientData("only " + std::to_string(v.size()) + " samples in the final decade of eta*-eta (need " +
                           std::to_string(kMinRateSamples) + ")");
  }

  auto slope_of = [&](const std::vector<double>& a) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += v[i];
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      sab += (a[i] - ma) * (v[i] - mb);
      saa += (a[i] - ma) * (a[i] - ma);
    }
    return sab / saa;
  };
  return RateFit{slope_of(u), slope_of(plain), v.size()};
}

nlohmann::json to_json(const BlowupReport& r) {
  nlohmann::json j;
  j["M0"] = r.M0;
  if (std::isfinite(r.eta_star)) {
    j["eta_star"] = r.eta_star;
  } else {
    j["eta_star"] = "infinity";
  }
  j["maximizers"] = nlohmann::json::array();
  for (const auto& m : r.maximizers) {
    j["maximizers"].push_back({{"x", m.x}, {"location", std::string(to_string(m.location))}, {"f0_pp", m.f0_pp}});
  }
  j["rho0_nonneg"] = r.rho0_nonneg;
  j["bc_ok"] = r.bc_ok;
  j["verdict"] = std::string(to_string(r.verdict));
  if (r.t_star_bound) {
    j["t_star_bound"] = *r.t_star_bound;
  } else {
    j["t_star_bound"] = "unbounded";
  }
  return j;
}

}  // namespace stag::blowup
