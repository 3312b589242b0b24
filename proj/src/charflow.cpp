#include "stag/charflow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "stag/blowup.hpp"
#include "stag/quad.hpp"

namespace stag::charflow {

namespace {

constexpr int kPrecheckPoints = 1025;
constexpr std::size_t kMaxDenominatorMinima = 64;

std::string describe(const char* what, double eta, double x, double d) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s: nonpositive denominator %.6g at x=%.6g (eta=%.17g)", what, d, x, eta);
  return buf;
}

struct Rates {
  double t, A, B, g;
};

}  // namespace

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::blowup_approach: return "blowup-approach";
    case StopReason::time_limit: return "time-limit";
    case StopReason::error: return "error";
  }
  return "error";
}

Flow::Flow(Profile f0, Profile rho0, double quad_tol)
    : f0_(std::move(f0)), rho0_(std::move(rho0)), quad_tol_(quad_tol) {
  blowup::Maxima maxima = blowup::find_maximizers(f0_);
  M0_ = maxima.M0;
  eta_star_ = M0_ > 0.0 ? 1.0 / M0_ : std::numeric_limits<double>::infinity();
  grid_slope_.resize(kPrecheckPoints);
  grid_rho_.resize(kPrecheckPoints);
  for (int j = 0; j < kPrecheckPoints; ++j) {
    double x = static_cast<double>(j) / (kPrecheckPoints - 1);
    grid_slope_[j] = f0_.d1(x);
    grid_rho_[j] = rho0_(x);
  }
  for (const auto& m : maxima.maximizers) extra_x_.push_back(m.x);
}

double Flow::denominator(double eta, double g, double x) const {
  return (1.0 - eta * f0_.d1(x)) - rho0_(x) * g;
}

Flow::Prepared Flow::precheck(double eta, double g) const {
  std::vector<double> d(kPrecheckPoints);
  double smallest = std::numeric_limits<double>::infinity();
  for (int j = 0; j < kPrecheckPoints; ++j) {
    d[j] = (1.0 - eta * grid_slope_[j]) - grid_rho_[j] * g;
    if (!(d[j] > 0.0)) throw DenominatorError(describe("precheck", eta, static_cast<double>(j) / (kPrecheckPoints - 1), d[j]));
    smallest = std::min(smallest, d[j]);
  }
  Prepared p;
  p.breaks.push_back(0.0);
  for (double x : extra_x_) {
    double dx = denominator(eta, g, x);
    if (!(dx > 0.0)) throw DenominatorError(describe("precheck", eta, x, dx));
    smallest = std::min(smallest, dx);
    p.breaks.push_back(x);
  }
  // Every interior local minimum of D is a peak of the integrands; each is
  // refined by golden-section search and becomes a breakpoint.
  std::vector<int> minima;
  for (int j = 1; j + 1 < kPrecheckPoints; ++j) {
    if (d[j] < d[j - 1] && d[j] <= d[j + 1]) minima.push_back(j);
  }
  if (minima.size() > kMaxDenominatorMinima) {
    std::partial_sort(minima.begin(), minima.begin() + kMaxDenominatorMinima, minima.end(),
                      [&](int a, int b) { return d[a] < d[b]; });
    minima.resize(kMaxDenominatorMinima);
  }
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int where : minima) {
    double lo = static_cast<double>(where - 1) / (kPrecheckPoints - 1);
    double hi = static_cast<double>(where + 1) / (kPrecheckPoints - 1);
    for (int it = 0; it < 60; ++it) {
      double m1 = hi - r * (hi - lo), m2 = lo + r * (hi - lo);
      if (denominator(eta, g, m1) < denominator(eta, g, m2)) {
        hi = m2;
      } else {
        lo = m1;
      }
    }
    double x = 0.5 * (lo + hi);
    double dx = denominator(eta, g, x);
    if (!(dx > 0.0)) throw DenominatorError(describe("precheck", eta, x, dx));
    smallest = std::min(smallest, dx);
    p.breaks.push_back(x);
  }
  p.breaks.push_back(1.0);

  // Peaks much narrower than the grid are invisible to the first Kronrod
  // panels, so breakpoints are graded geometrically down to the peak width.
  std::vector<double> peaks(p.breaks.begin() + 1, p.breaks.end() - 1);
  if (d[0] < d[1]) peaks.push_back(0.0);
  if (d[kPrecheckPoints - 1] < d[kPrecheckPoints - 2]) peaks.push_back(1.0);
  const double h = 1.0 / (kPrecheckPoints - 1);
  // Rounding in D: a few ulps of each term, plus the rounding of the argument
  // x itself propagated through f0' and rho0. Near a peak this sets the
  // attainable relative accuracy of 1/D.
  double noise = 1.0 / smallest;
  auto relative_noise = [&](double y) {
    const double terms = 1.0 + std::abs(eta) * (std::abs(f0_.d1(y)) + std::abs(y * f0_.d2(y))) +
                         std::abs(g) * (std::abs(rho0_(y)) + std::abs(y * rho0_.d1(y)));
    return terms / denominator(eta, g, y);
  };
  for (double xm : peaks) {
    const double dm = denominator(eta, g, xm);
    for (int side : {-1, 1}) {
      if ((side < 0 && xm <= 0.0) || (side > 0 && xm >= 1.0)) continue;
      double w = h;
      for (int it = 0; it < 60; ++it) {
        const double y = std::clamp(xm + side * w, 0.0, 1.0);
        if (denominator(eta, g, y) <= 2.0 * dm) break;
        w *= 0.5;
      }
      noise = std::max(noise, relative_noise(std::clamp(xm + side * w, 0.0, 1.0)));
      for (double dist = w; dist < h; dist *= 4.0) {
        const double y = xm + side * dist;
        if (y > 0.0 && y < 1.0) p.breaks.push_back(y);
      }
    }
  }
  std::sort(p.breaks.begin(), p.breaks.end());
  p.breaks.erase(std::unique(p.breaks.begin(), p.breaks.end()), p.breaks.end());
  // Purely relative: phi1 and its eta-derivative shrink by many orders of
  // magnitude on long runs.
  p.min_d = smallest;
  p.argmin_d = peaks.empty() ? 0.0 : *std::min_element(peaks.begin(), peaks.end(), [&](double a, double b) {
    return denominator(eta, g, a) < denominator(eta, g, b);
  });
  p.tol = quad::Tolerance{0.0, std::max(quad_tol_, 100.0 * std::numeric_limits<double>::epsilon() * noise)};
  return p;
}

double Flow::phi1_of(double eta, double g) const {
  const Prepared p = precheck(eta, g);
  auto integrand = [&](double x) {
    double d = denominator(eta, g, x);
    if (!(d > 0.0)) throw DenominatorError(describe("phi1", eta, x, d));
    return 1.0 / d;
  };
  return quad::integrate_with_breaks(integrand, p.breaks, p.tol).value;
}

double Flow::dphi1_deta(const CharState& s) const {
  const Prepared p = precheck(s.eta, s.g);
  auto integrand = [&](double x) {
    double d = denominator(s.eta, s.g, x);
    if (!(d > 0.0)) throw DenominatorError(describe("dphi1", s.eta, x, d));
    return (f0_.d1(x) - rho0_(x) * s.A) / (d * d);
  };
  return quad::integrate_with_breaks(integrand, p.breaks, p.tol).value;
}

CharState Flow::make_state(double eta, double t, double A, double B, double g) const {
  CharState s{eta, t, A, B, 0.0, g};
  s.phi1 = phi1_of(eta, s.g);
  return s;
}

CharState Flow::advance(const CharState& s, double h) const {
  auto rates = [&](double eta, double A, double g, const double* cached_phi) {
    double phi = cached_phi ? *cached_phi : phi1_of(eta, g);
    double p2 = phi * phi;
    return Rates{p2, p2 * phi, eta * p2 * phi, -A};
  };
  const Rates k1 = rates(s.eta, s.A, s.g, &s.phi1);
  const Rates k2 = rates(s.eta + 0.5 * h, s.A + 0.5 * h * k1.A, s.g + 0.5 * h * k1.g, nullptr);
  const Rates k3 = rates(s.eta + 0.5 * h, s.A + 0.5 * h * k2.A, s.g + 0.5 * h * k2.g, nullptr);
  const Rates k4 = rates(s.eta + h, s.A + h * k3.A, s.g + h * k3.g, nullptr);
  const double w = h / 6.0;
  return make_state(s.eta + h, s.t + w * (k1.t + 2 * k2.t + 2 * k3.t + k4.t),
                    s.A + w * (k1.A + 2 * k2.A + 2 * k3.A + k4.A), s.B + w * (k1.B + 2 * k2.B + 2 * k3.B + k4.B),
                    s.g + w * (k1.g + 2 * k2.g + 2 * k3.g + k4.g));
}

double Flow::jacobian_at(const CharState& s, double x) const {
  double d = denominator(s.eta, s.g, x);
  if (!(d > 0.0)) throw DenominatorError(describe("jacobian", s.eta, x, d));
  return 1.0 / (s.phi1 * d);
}

double Flow::gamma(const CharState& s, double x) const {
  Prepared p = precheck(s.eta, s.g);
  std::erase_if(p.breaks, [&](double b) { return b > x; });
  p.breaks.push_back(x);
  return quad::integrate_with_breaks([&](double y) { return jacobian_at(s, y); }, p.breaks, p.tol).value;
}

LagrangianSample Flow::sample_with(const CharState& s, double x, double dphi) const {
  const double slope = f0_.d1(x);
  const double curv = f0_.d2(x);
  const double rho = rho0_(x);
  const double drho = rho0_.d1(x);
  const double d = denominator(s.eta, s.g, x);
  if (!(d > 0.0)) throw DenominatorError(describe("sample", s.eta, x, d));
  const double phi = s.phi1;
  LagrangianSample out;
  out.x = x;
  out.gamma_x = 1.0 / (phi * d);
  out.fx = (slope - rho * s.A) / (phi * phi * d) - dphi / (phi * phi * phi);
  out.fxx = (curv - drho * s.A + (drho * slope - rho * curv) * s.B) * out.gamma_x;
  out.rho = rho * out.gamma_x;
  out.gamma = gamma(s, x);
  return out;
}

LagrangianSample Flow::lagrangian_sample(const CharState& s, double x) const {
  return sample_with(s, x, dphi1_deta(s));
}

std::vector<LagrangianSample> Flow::lagrangian_samples(const CharState& s, std::span<const double> xs) const {
  std::vector<LagrangianSample> out;
  out.reserve(xs.size());
  if (xs.empty()) return out;
  const double dphi = dphi1_deta(s);
  for (double x : xs) out.push_back(sample_with(s, x, dphi));
  return out;
}

Trajectory Flow::run(const EngineOptions& opt) const {
  Trajectory tr;
  tr.M0 = M0_;
  tr.eta_star = eta_star_;
  CharState s = initial_state();
  tr.states.push_back(s);

  double h = opt.initial_deta * (std::isfinite(eta_star_) ? std::min(1.0, eta_star_) : 1.0);
  int retries = 0;
  std::size_t attempts = 0;

  auto stop = [&](StopReason r, std::string msg) {
    tr.reason = r;
    tr.message = std::move(msg);
    return tr;
  };

  for (;;) {
    if (++attempts > opt.max_steps) return stop(StopReason::error, "step budget exhausted");
    double cap = opt.max_deta;
    if (M0_ > 0.0) cap = std::min(cap, opt.endcap_fraction * gap(s.eta) / M0_);
    h = std::min(h, cap);

    CharState whole, half;
    try {
      whole = advance(s, h);
      half = advance(advance(s, 0.5 * h), 0.5 * h);
    } catch (const NumericalError& e) {
      h *= 0.5;
      if (++retries > opt.max_retries) return stop(StopReason::error, e.what());
      continue;
    }

    // Step doubling: the RK4 local error of `half` is about |whole - half| / 15.
    auto scaled = [&](double a, double b) { return std::abs(a - b) / (15.0 * opt.ode_tol * std::max(1.0, std::abs(b))); };
    double err = std::max({scaled(whole.t, half.t), scaled(whole.A, half.A), scaled(whole.B, half.B), scaled(whole.g, half.g)});
    if (!std::isfinite(err)) {
      h *= 0.5;
      if (++retries > opt.max_retries) return stop(StopReason::error, "non-finite step error estimate");
      continue;
    }
    if (err > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      continue;
    }
    retries = 0;

    if (!(half.phi1 > 0.0)) throw InvariantError("charflow", "phi1 lost positivity");
    if (half.g > s.g + 1e-12 * (1.0 + std::abs(s.g))) throw InvariantError("charflow", "g increased along the trajectory");
    if (half.t < s.t || half.A < s.A) throw InvariantError("charflow", "t or A decreased along the trajectory");

    if (half.t > opt.t_max && s.t < opt.t_max) half = advance_to_time(s, opt.t_max);
    s = half;
    tr.states.push_back(s);
    if (M0_ > 0.0 && gap(s.eta) < opt.stop_epsilon) return stop(StopReason::blowup_approach, "");
    if (s.t >= opt.t_max) return stop(StopReason::time_limit, "");
    // D can also collapse away from the maximizers of f0' when rho0 < 0
    // somewhere; the construction breaks down there before eta*.
    if (const Prepared p = precheck(s.eta, s.g); p.min_d < opt.stop_epsilon) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "denominator collapsed to %.3g at x=%.9g before eta* (t=%.9g)", p.min_d,
                    p.argmin_d, s.t);
      return stop(StopReason::error, buf);
    }

    h *= err > 0.0 ? std::min(4.0, 0.9 * std::pow(err, -0.2)) : 4.0;
  }
}

CharState Flow::advance_to_time(const CharState& from, double t_target) const {
  if (t_target < from.t) throw ConfigError("charflow", "advance_to_time needs a target at or after the state");
  if (t_target == from.t) return from;
  double limit = std::isfinite(eta_star_) ? 0.5 * (eta_star_ - from.eta) : std::numeric_limits<double>::infinity();
  double d = std::min((t_target - from.t) / (from.phi1 * from.phi1), limit);
  CharState s = from;
  for (int it = 0; it < 60; ++it) {
    s = advance(from, d);
    double diff = t_target - s.t;
    if (std::abs(diff) <= 1e-14 * std::max(1.0, std::abs(t_target))) return s;
    d = std::clamp(d + diff / (s.phi1 * s.phi1), 0.0, limit);
  }
  return s;
}

double phi1_of(double eta, double g, const Profile& f0, const Profile& rho0, double tol) {
  return Flow(f0, rho0, tol).phi1_of(eta, g);
}

double dphi1_deta(const CharState& s, const Profile& f0, const Profile& rho0, double tol) {
  return Flow(f0, rho0, tol).dphi1_deta(s);
}

CharState advance(const CharState& s, double d_eta, const Profile& f0, const Profile& rho0, double tol) {
  return Flow(f0, rho0, tol).advance(s, d_eta);
}

double jacobian_at(const CharState& s, double x, const Profile& f0, const Profile& rho0) {
  return Flow(f0, rho0).jacobian_at(s, x);
}

LagrangianSample lagrangian_sample(const CharState& s, double x, const Profile& f0, const Profile& rho0) {
  return Flow(f0, rho0).lagrangian_sample(s, x);
}

}  // namespace stag::charflow
