#include "stag/mol.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>

#include "stag/quad.hpp"

namespace stag::mol {

namespace {

bool is_power_of_two(std::size_t m) { return m != 0 && (m & (m - 1)) == 0; }

std::string format_double(const char* fmt, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

// Real-to-complex transforms of length n on owned buffers. FFTW_ESTIMATE
// plans are deterministic, so repeated runs give identical bits.
struct Solver::Fft {
  explicit Fft(std::size_t n)
      : n(n),
        real(fftw_alloc_real(n)),
        spectrum(fftw_alloc_complex(n / 2 + 1)),
        forward(fftw_plan_dft_r2c_1d(static_cast<int>(n), real, spectrum, FFTW_ESTIMATE)),
        backward(fftw_plan_dft_c2r_1d(static_cast<int>(n), spectrum, real, FFTW_ESTIMATE)) {}
  ~Fft() {
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
    fftw_free(spectrum);
    fftw_free(real);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  // Multiplies mode k (k = 1 .. n/2-1) by factor(k); the mean and Nyquist
  // modes are zeroed.
  template <typename F>
  std::vector<double> apply(std::span<const double> u, F factor) {
    std::copy(u.begin(), u.end(), real);
    fftw_execute(forward);
    auto* c = reinterpret_cast<std::complex<double>*>(spectrum);
    c[0] = 0.0;
    c[n / 2] = 0.0;
    for (std::size_t k = 1; k < n / 2; ++k) c[k] *= factor(static_cast<double>(k));
    fftw_execute(backward);
    std::vector<double> out(real, real + n);
    for (double& x : out) x /= static_cast<double>(n);
    return out;
  }

  std::size_t n;
  double* real;
  fftw_complex* spectrum;
  fftw_plan forward;
  fftw_plan backward;
};

Solver::Solver(BoundaryKind kind, std::size_t n) : kind_(kind), n_(n) {
  if (kind == BoundaryKind::dirichlet) {
    if (n < kMinGrid + 1 || !is_power_of_two(n - 1)) {
      throw ConfigError("mol", "Dirichlet grids need n = 2^k + 1 >= 65 points, got " + std::to_string(n));
    }
    dx_ = 1.0 / static_cast<double>(n - 1);
  } else {
    if (n < kMinGrid || !is_power_of_two(n)) {
      throw ConfigError("mol", "periodic grids need n = 2^k >= 64 points, got " + std::to_string(n));
    }
    dx_ = 1.0 / static_cast<double>(n);
    fft_ = std::make_unique<Fft>(n);
  }
}

Solver::~Solver() = default;
Solver::Solver(Solver&&) noexcept = default;
Solver& Solver::operator=(Solver&&) noexcept = default;

std::vector<double> Solver::derivative(std::span<const double> u) const {
  if (kind_ == BoundaryKind::periodic) {
    return fft_->apply(u, [](double k) { return std::complex<double>(0.0, 2.0 * std::numbers::pi * k); });
  }
  const std::size_t n = n_;
  const double c = 1.0 / (12.0 * dx_);
  std::vector<double> d(n);
  d[0] = c * (-25.0 * u[0] + 48.0 * u[1] - 36.0 * u[2] + 16.0 * u[3] - 3.0 * u[4]);
  d[1] = c * (-3.0 * u[0] - 10.0 * u[1] + 18.0 * u[2] - 6.0 * u[3] + u[4]);
  for (std::size_t j = 2; j + 2 < n; ++j) d[j] = c * (u[j - 2] - 8.0 * u[j - 1] + 8.0 * u[j + 1] - u[j + 2]);
  d[n - 2] = -c * (-3.0 * u[n - 1] - 10.0 * u[n - 2] + 18.0 * u[n - 3] - 6.0 * u[n - 4] + u[n - 5]);
  d[n - 1] = -c * (-25.0 * u[n - 1] + 48.0 * u[n - 2] - 36.0 * u[n - 3] + 16.0 * u[n - 4] - 3.0 * u[n - 5]);
  return d;
}

std::vector<double> Solver::antiderivative(std::span<const double> v) const {
  if (kind_ == BoundaryKind::periodic) {
    return fft_->apply(v, [](double k) { return std::complex<double>(0.0, -1.0 / (2.0 * std::numbers::pi * k)); });
  }
  return quad::cumulative_uniform(v, dx_);
}

double Solver::integral(std::span<const double> u) const {
  if (kind_ == BoundaryKind::dirichlet) return quad::simpson(u, dx_);
  quad::CompensatedSum s;
  for (double x : u) s.add(x);
  return s.value() * dx_;
}

double Solver::forcing(std::span<const double> v, std::span<const double> rho) const {
  std::vector<double> v2(v.size());
  std::transform(v.begin(), v.end(), v2.begin(), [](double a) { return a * a; });
  return integral(rho) - 2.0 * integral(v2);
}

MolState Solver::make_state(double t, std::vector<double> v, std::vector<double> rho) const {
  MolState s;
  s.t = t;
  s.v.values = std::move(v);
  s.rho.values = std::move(rho);
  fill_monitors(s);
  return s;
}

MolState Solver::initial(const Profile& f0, const Profile& rho0) const {
  std::vector<double> v(n_), rho(n_);
  for (std::size_t j = 0; j < n_; ++j) {
    v[j] = f0.d1(x(j));
    rho[j] = rho0(x(j));
  }
  return make_state(0.0, std::move(v), std::move(rho));
}

void Solver::fill_monitors(MolState& s) const {
  const auto& v = s.v.values;
  const auto& rho = s.rho.values;
  Monitors& m = s.monitors;
  m.max_v = 0.0;
  for (double a : v) m.max_v = std::max(m.max_v, std::abs(a));
  m.min_rho = *std::min_element(rho.begin(), rho.end());
  m.int_v = integral(v);
  m.int_f = integral(antiderivative(v));
  m.I = forcing(v, rho);
}

Rates Solver::rhs(const MolState& s) const {
  const auto& v = s.v.values;
  const auto& rho = s.rho.values;
  const std::vector<double> f = antiderivative(v);
  const std::vector<double> vx = derivative(v);
  const std::vector<double> rx = derivative(rho);
  const double I = forcing(v, rho);
  Rates r{std::vector<double>(n_), std::vector<double>(n_)};
  for (std::size_t j = 0; j < n_; ++j) {
    r.v[j] = -f[j] * vx[j] + v[j] * v[j] - rho[j] + I;
    r.rho[j] = -f[j] * rx[j] + rho[j] * v[j];
  }
  return r;
}

double Solver::cfl_limit(const MolState& s) const {
  const std::vector<double> f = antiderivative(s.v.values);
  double fmax = 1.0;
  for (double a : f) fmax = std::max(fmax, std::abs(a));
  return 0.5 * dx_ / fmax;
}

MolState Solver::step(const MolState& s, double dt) const {
  const double limit = cfl_limit(s);
  if (dt > limit * (1.0 + 1e-12)) {
    throw CflError(format_double("time step %.6g", dt) + format_double(" exceeds the CFL bound %.6g", limit));
  }
  auto shifted = [&](const Rates& k, double w) {
    MolState m;
    m.v.values.resize(n_);
    m.rho.values.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      m.v.values[j] = s.v.values[j] + w * k.v[j];
      m.rho.values[j] = s.rho.values[j] + w * k.rho[j];
    }
    return m;
  };
  const Rates k1 = rhs(s);
  const Rates k2 = rhs(shifted(k1, 0.5 * dt));
  const Rates k3 = rhs(shifted(k2, 0.5 * dt));
  const Rates k4 = rhs(shifted(k3, dt));
  std::vector<double> v(n_), rho(n_);
  const double w = dt / 6.0;
  for (std::size_t j = 0; j < n_; ++j) {
    v[j] = s.v.values[j] + w * (k1.v[j] + 2.0 * k2.v[j] + 2.0 * k3.v[j] + k4.v[j]);
    rho[j] = s.rho.values[j] + w * (k1.rho[j] + 2.0 * k2.rho[j] + 2.0 * k3.rho[j] + k4.rho[j]);
    if (!std::isfinite(v[j]) || !std::isfinite(rho[j])) {
      throw Overflow(format_double("non-finite values after the step from t=%.9g", s.t));
    }
  }
  MolState out = make_state(s.t + dt, std::move(v), std::move(rho));
  out.monitors.reg_integral = s.monitors.reg_integral + 0.5 * dt * (s.monitors.max_v + out.monitors.max_v);
  return out;
}

double Solver::interpolate(std::span<const double> u, double y) const {
  const auto n = static_cast<long>(n_);
  long base;
  double s;
  if (kind_ == BoundaryKind::periodic) {
    double pos = (y - std::floor(y)) / dx_;
    base = static_cast<long>(std::floor(pos)) - 1;
    s = pos - static_cast<double>(base + 1);
  } else {
    double pos = std::clamp(y, 0.0, 1.0) / dx_;
    base = std::clamp(static_cast<long>(std::floor(pos)) - 1, 0L, n - 4);
    s = pos - static_cast<double>(base + 1);
  }
  auto at = [&](long k) { return u[static_cast<std::size_t>(((k % n) + n) % n)]; };
  // Lagrange weights on nodes -1, 0, 1, 2 relative to base + 1
  const double w0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
  const double w1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
  const double w2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
  const double w3 = (s + 1.0) * s * (s - 1.0) / 6.0;
  return w0 * at(base) + w1 * at(base + 1) + w2 * at(base + 2) + w3 * at(base + 3);
}

std::string_view to_string(StopReason r) {
  return r == StopReason::completed ? "completed" : "blowup-indicated";
}

namespace {

class MarkerTracker {
 public:
  MarkerTracker(const Solver& solver, const std::vector<double>& labels, const MolState& s)
      : solver_(solver), position_(labels), log_jacobian_(labels.size(), 0.0) {
    if (!labels.empty()) f_ = solver.antiderivative(s.v.values);
  }

  bool active() const { return !position_.empty(); }

  void advance(const MolState& from, const MolState& to) {
    const double dt = to.t - from.t;
    std::vector<double> f_next = solver_.antiderivative(to.v.values);
    for (std::size_t k = 0; k < position_.size(); ++k) {
      const double p = position_[k];
      const double u0 = solver_.interpolate(f_, p);
      const double guess = clamp(p + dt * u0);
      const double moved = clamp(p + 0.5 * dt * (u0 + solver_.interpolate(f_next, guess)));
      log_jacobian_[k] += 0.5 * dt * (solver_.interpolate(from.v.values, p) + solver_.interpolate(to.v.values, moved));
      position_[k] = moved;
    }
    f_ = std::move(f_next);
  }

  MarkerRow row(const MolState& s) const {
    MarkerRow out{s.t, {}};
    const std::vector<double> vx = solver_.derivative(s.v.values);
    for (std::size_t k = 0; k < position_.size(); ++k) {
      const double p = position_[k];
      out.samples.push_back(MarkerSample{p, std::exp(log_jacobian_[k]), solver_.interpolate(s.v.values, p),
                                         solver_.interpolate(vx, p), solver_.interpolate(s.rho.values, p)});
    }
    return out;
  }

 private:
  double clamp(double y) const { return solver_.kind() == BoundaryKind::dirichlet ? std::clamp(y, 0.0, 1.0) : y; }

  const Solver& solver_;
  std::vector<double> position_;
  std::vector<double> log_jacobian_;
  std::vector<double> f_;
};

}  // namespace

RunResult run(const Solver& solver, const MolState& initial, const RunOptions& opt) {
  if (!(opt.t_max > 0.0) || !(opt.dt_max > 0.0)) throw ConfigError("mol", "t_max and dt_max must be positive");
  std::vector<double> targets = opt.sample_times;
  std::sort(targets.begin(), targets.end());
  std::erase_if(targets, [&](double t) { return t < initial.t || t > opt.t_max; });
  std::size_t next = 0;

  RunResult r;
  MolState s = initial;
  r.series.push_back(SeriesRow{s.t, s.monitors});
  while (next < targets.size() && targets[next] <= s.t) {
    r.samples.push_back(s);
    ++next;
  }
  if (opt.snapshot_every > 0) r.snapshots.push_back(s);
  MarkerTracker tracker(solver, opt.markers, s);
  if (tracker.active()) r.tracks.push_back(tracker.row(s));

  auto indicate = [&](std::string msg) {
    r.reason = StopReason::blowup_indicated;
    r.message = std::move(msg);
  };

  std::size_t steps = 0;
  while (s.t < opt.t_max) {
    if (s.monitors.max_v > opt.blowup_threshold) {
      indicate(format_double("||v||_inf = %.6g", s.monitors.max_v) + format_double(" exceeds the threshold at t=%.9g", s.t));
      break;
    }
    double dt = std::min({opt.dt_max, solver.cfl_limit(s), opt.dv_limit / std::max(s.monitors.max_v, 1e-300)});
    const double target = next < targets.size() ? targets[next] : opt.t_max;
    bool landing = false;
    if (s.t + dt >= target - 1e-9 * dt) {
      dt = target - s.t;
      landing = true;
    }
    if (!(dt > 1e-14 * std::max(1.0, s.t))) {
      indicate(format_double("time step collapsed at t=%.9g", s.t));
      break;
    }
    MolState nxt;
    try {
      nxt = solver.step(s, dt);
    } catch (const Overflow& e) {
      indicate(e.what());
      break;
    }
    if (landing) nxt.t = target;
    if (tracker.active()) {
      tracker.advance(s, nxt);
      r.tracks.push_back(tracker.row(nxt));
    }
    s = std::move(nxt);
    ++steps;
    r.series.push_back(SeriesRow{s.t, s.monitors});
    while (next < targets.size() && targets[next] <= s.t) {
      r.samples.push_back(s);
      ++next;
    }
    if (opt.snapshot_every > 0 && steps % opt.snapshot_every == 0) r.snapshots.push_back(s);
  }
  if (r.reason == StopReason::completed && s.monitors.max_v > opt.blowup_threshold) {
    indicate(format_double("||v||_inf = %.6g", s.monitors.max_v) + format_double(" exceeds the threshold at t=%.9g", s.t));
  }
  r.final = std::move(s);
  return r;
}

}  // namespace stag::mol
