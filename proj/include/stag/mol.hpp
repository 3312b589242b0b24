#pragma once

// Method-of-lines solver for
//   v_t   = -f v_x + v^2 - rho + I(t),
//   rho_t = -f rho_x + rho v,          I = int rho - 2 int v^2,
// with v = f_x. f is recovered from v by quadrature: f(0) = 0 under
// Dirichlet conditions, zero mean under periodic ones.

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "stag/error.hpp"
#include "stag/profile.hpp"

namespace stag::mol {

class CflError : public NumericalError {
 public:
  explicit CflError(const std::string& what) : NumericalError("mol", what) {}
};

/// Non-finite values appeared during a step.
class Overflow : public NumericalError {
 public:
  explicit Overflow(const std::string& what) : NumericalError("mol", what) {}
};

struct GridField {
  std::vector<double> values;
  std::size_t n() const { return values.size(); }
};

struct Monitors {
  double max_v = 0.0;
  double min_rho = 0.0;
  double int_v = 0.0;
  double int_f = 0.0;
  double I = 0.0;
  double reg_integral = 0.0;  // int_0^t ||v||_inf ds, trapezoid rule over the steps
};

struct MolState {
  double t = 0.0;
  GridField v;
  GridField rho;
  Monitors monitors;
};

struct Rates {
  std::vector<double> v;
  std::vector<double> rho;
};

constexpr std::size_t kMinGrid = 64;

/// Grid geometry and differentiation operators for one boundary kind.
/// Dirichlet grids have n = 2^k + 1 points x_j = j/(n-1); periodic grids
/// have n = 2^k points x_j = j/n.
class Solver {
 public:
  Solver(BoundaryKind kind, std::size_t n);
  ~Solver();
  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;
  Solver(Solver&&) noexcept;
  Solver& operator=(Solver&&) noexcept;

  BoundaryKind kind() const { return kind_; }
  std::size_t n() const { return n_; }
  double dx() const { return dx_; }
  double x(std::size_t j) const { return static_cast<double>(j) * dx_; }

  MolState initial(const Profile& f0, const Profile& rho0) const;
  MolState make_state(double t, std::vector<double> v, std::vector<double> rho) const;

  std::vector<double> derivative(std::span<const double> u) const;
  /// f from v = f_x.
  std::vector<double> antiderivative(std::span<const double> v) const;
  /// Grid quadrature over [0, 1]: Simpson (Dirichlet) or the trapezoid rule (periodic).
  double integral(std::span<const double> u) const;
  double forcing(std::span<const double> v, std::span<const double> rho) const;

  Rates rhs(const MolState& s) const;

  /// Largest step allowed by 0.5 dx / max(1, ||f||_inf).
  double cfl_limit(const MolState& s) const;

  /// One classical RK4 step. Throws CflError when dt exceeds cfl_limit and
  /// Overflow when the result is not finite.
  MolState step(const MolState& s, double dt) const;

  /// Cubic (four-point) interpolation of grid values at position y.
  double interpolate(std::span<const double> u, double y) const;

 private:
  void fill_monitors(MolState& s) const;

  BoundaryKind kind_;
  std::size_t n_;
  double dx_;
  struct Fft;
  std::unique_ptr<Fft> fft_;
};

enum class StopReason { completed, blowup_indicated };
std::string_view to_string(StopReason r);

struct RunOptions {
  double t_max = 20.0;
  double dt_max = 1e-3;
  /// Also keep dt <= dv_limit / ||v||_inf so the quadratic growth term is resolved.
  double dv_limit = 0.05;
  double blowup_threshold = 1e6;
  /// Steps never straddle these times; the state at each is kept in `samples`.
  std::vector<double> sample_times;
  /// Keep a full-field snapshot every k steps (0: none).
  std::size_t snapshot_every = 0;
  /// Fluid labels followed along the run (Heun's rule on dgamma/dt = f(gamma)).
  std::vector<double> markers;
};

struct MarkerSample {
  double gamma = 0.0;
  double gamma_x = 1.0;
  double fx = 0.0;
  double fxx = 0.0;
  double rho = 0.0;
};

struct MarkerRow {
  double t = 0.0;
  std::vector<MarkerSample> samples;  // one per label, in RunOptions::markers order
};

struct SeriesRow {
  double t = 0.0;
  Monitors monitors;
};

struct RunResult {
  StopReason reason = StopReason::completed;
  std::string message;
  std::vector<SeriesRow> series;
  std::vector<MolState> samples;
  std::vector<MolState> snapshots;
  std::vector<MarkerRow> tracks;
  MolState final;
};

RunResult run(const Solver& solver, const MolState& initial, const RunOptions& opt);

}  // namespace stag::mol
