#pragma once

// Semi-analytic characteristic engine.
//
// The flow map Jacobian is gamma_x = 1 / (phi1 * D(x)) with
//   D(x) = 1 - eta f0'(x) - rho0(x) g,   phi1 = integral of 1/D over [0, 1],
// where the clock eta obeys d(eta)/dt = phi1^-2 and g = B - eta A with
// A = int phi1 dt, B = int eta phi1 dt. Integrating in eta instead of t turns
// the construction into an explicit ODE for (t, A, B):
//   dt/deta = phi1^2,  dA/deta = phi1^3,  dB/deta = eta phi1^3.
// g itself is carried along with dg/deta = -A; forming B - eta A at large
// eta cancels catastrophically.

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "stag/error.hpp"
#include "stag/profile.hpp"
#include "stag/quad.hpp"

namespace stag::charflow {

struct CharState {
  double eta = 0.0;
  double t = 0.0;
  double A = 0.0;
  double B = 0.0;
  double phi1 = 1.0;
  double g = 0.0;  // B - eta * A
};

struct LagrangianSample {
  double x = 0.0;
  double gamma = 0.0;
  double gamma_x = 0.0;
  double fx = 0.0;
  double fxx = 0.0;
  double rho = 0.0;
};

/// D(x) <= 0 somewhere: eta has reached eta* or g is invalid.
class DenominatorError : public NumericalError {
 public:
  explicit DenominatorError(const std::string& what) : NumericalError("charflow", what) {}
};

enum class StopReason { blowup_approach, time_limit, error };

std::string_view to_string(StopReason r);

struct EngineOptions {
  double quad_tol = 1e-10;
  double ode_tol = 1e-10;
  double stop_epsilon = 1e-8;  // stop once 1 - eta M0 drops below this
  double t_max = 20.0;
  /// Each step may shrink 1 - eta M0 by at most this fraction. Anything
  /// <= 1/2 honours the halving rule; the default leaves ~27 steps per decade
  /// of eta* - eta for the endcap rate fit.
  double endcap_fraction = 0.08;
  double max_deta = std::numeric_limits<double>::infinity();
  double initial_deta = 1e-3;
  std::size_t max_steps = 200000;
  int max_retries = 40;
};

struct Trajectory {
  std::vector<CharState> states;
  StopReason reason = StopReason::error;
  std::string message;
  double M0 = 0.0;
  double eta_star = std::numeric_limits<double>::infinity();

  const CharState& final() const { return states.back(); }
};

/// Profiles plus the precomputed data every evaluation needs (M0 and a
/// dense sampling grid for the denominator precheck).
class Flow {
 public:
  Flow(Profile f0, Profile rho0, double quad_tol = 1e-10);

  const Profile& f0() const { return f0_; }
  const Profile& rho0() const { return rho0_; }
  double M0() const { return M0_; }
  /// 1 / M0, or +inf when M0 <= 0.
  double eta_star() const { return eta_star_; }
  double quad_tol() const { return quad_tol_; }

  /// 1 - eta * M0; the distance to blowup in units of M0.
  double gap(double eta) const { return M0_ > 0.0 ? 1.0 - eta * M0_ : 1.0; }

  double denominator(double eta, double g, double x) const;

  double phi1_of(double eta, double g) const;
  double dphi1_deta(const CharState& s) const;

  CharState initial_state() const { return CharState{}; }
  CharState make_state(double eta, double t, double A, double B, double g) const;

  /// One classical RK4 step of size d_eta; phi1 at the new state is recomputed.
  CharState advance(const CharState& s, double d_eta) const;

  double jacobian_at(const CharState& s, double x) const;
  LagrangianSample lagrangian_sample(const CharState& s, double x) const;
  std::vector<LagrangianSample> lagrangian_samples(const CharState& s, std::span<const double> xs) const;

  /// Integral of gamma_x over [0, x] (the flow map, anchored at gamma(t,0)=0).
  double gamma(const CharState& s, double x) const;

  /// Adaptive integration until 1 - eta M0 < stop_epsilon or t >= t_max.
  Trajectory run(const EngineOptions& opt) const;

  /// State with t equal to `t_target`, reached by one RK4 step from `from`
  /// (which must satisfy from.t <= t_target). Newton iteration on the step size.
  CharState advance_to_time(const CharState& from, double t_target) const;

 private:
  struct Prepared {
    quad::Tolerance tol;
    std::vector<double> breaks;  // 0, 1, maximizers of f0', minimizers of D and grading around them
    double min_d = 0.0;
    double argmin_d = 0.0;
  };
  /// Throws DenominatorError unless D > 0 on the grid.
  Prepared precheck(double eta, double g) const;
  LagrangianSample sample_with(const CharState& s, double x, double dphi) const;

  Profile f0_;
  Profile rho0_;
  double quad_tol_;
  double M0_;
  double eta_star_;
  std::vector<double> grid_slope_;  // f0' on the precheck grid
  std::vector<double> grid_rho_;
  std::vector<double> extra_x_;     // maximizers of f0', always prechecked
};

// Free-function forms of the engine operations.
double phi1_of(double eta, double g, const Profile& f0, const Profile& rho0, double tol);
double dphi1_deta(const CharState& s, const Profile& f0, const Profile& rho0, double tol);
CharState advance(const CharState& s, double d_eta, const Profile& f0, const Profile& rho0, double tol);
double jacobian_at(const CharState& s, double x, const Profile& f0, const Profile& rho0);
LagrangianSample lagrangian_sample(const CharState& s, double x, const Profile& f0, const Profile& rho0);

}  // namespace stag::charflow
