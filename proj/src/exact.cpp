#include "stag/exact.hpp"

#include <cmath>
#include <numbers>

namespace stag::exact {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// sech^2(t/2) = 4 e^-t / (1 + e^-t)^2, accurate for large t
double sech2_half(double t) {
  double e = std::exp(-std::abs(t));
  return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

// Pieces of mu1 with the dominant exponential factored out:
// mu1 = 4 C0 q / (1/(r + N0) + q (r + N0))^2, q = exp(-sqrt(C0) t), r = sqrt(C0).
double bracket(double t, const FamilyParams& p, double& log_q) {
  const double r = std::sqrt(p.C0());
  log_q = -r * t;
  const double q = std::exp(log_q);
  return 1.0 / (r + p.N0) + q * (r + p.N0);
}

// Solves tan(2 pi y) = scale * tan(2 pi x) on the branch through the nearest
// multiple of 1/2, where x - k/2 is exact and the angle stays accurate.
double scaled_angle(double x, double scale) {
  const double k = std::round(2.0 * x);
  const double theta = kTwoPi * (x - 0.5 * k);
  return 0.5 * k + std::atan(scale * std::tan(theta)) / kTwoPi;
}

}  // namespace

double mu1(double t, const FamilyParams& p) {
  double log_q = 0.0;
  double b = bracket(t, p, log_q);
  return 4.0 * p.C0() * std::exp(log_q) / (b * b);
}

double log_mu1(double t, const FamilyParams& p) {
  double log_q = 0.0;
  double b = bracket(t, p, log_q);
  return std::log(4.0 * p.C0()) + log_q - 2.0 * std::log(b);
}

double mu2(double t, const FamilyParams& p) {
  double m = mu1(t, p);
  return 1.0 / m - m;
}

double sigma(double N0) { return -std::hypot(1.0, N0); }

double rho0(double x) {
  double s = std::sin(kTwoPi * x);
  return s * s;
}

double gamma_x_exact(double t, double x) {
  // [sech^2 + (3 + cosh t)/2 tanh^2 rho0]^-1, written with s = sech^2(t/2)
  // as 1 / (s + (1 - s^2) rho0 / s)
  const double s = sech2_half(t);
  return s / (s * s + (1.0 - s * s) * rho0(x));
}

double gamma_exact(double t, double x) { return scaled_angle(x, 1.0 / sech2_half(t)); }

double label_exact(double t, double y) { return scaled_angle(y, sech2_half(t)); }

Fields fields_exact(double t, double x) {
  Fields f;
  f.fx = std::cos(2.0 * kTwoPi * x) * std::tanh(0.5 * t);
  // numerator and denominator divided by cosh^4(t/2)
  const double s = sech2_half(t);
  const double r = rho0(x);
  f.rho = s * r / (s * s + (1.0 - s * s) * r);
  return f;
}

double rho_eulerian(double t, double y) { return fields_exact(t, label_exact(t, y)).rho; }

}  // namespace stag::exact
