#pragma once

// Closed-form global solution family with rho0 = sin^2(2 pi x).
//
// mu1 and mu2 are available for every N0 >= 0; the flow map and the fields
// are closed-form only for N0 = 0.

namespace stag::exact {

struct FamilyParams {
  double N0 = 0.0;
  double C0() const { return 1.0 + N0 * N0; }
};

/// mu1(t) = C0 [sqrt(C0) cosh(sqrt(C0) t/2) - N0 sinh(sqrt(C0) t/2)]^-2
double mu1(double t, const FamilyParams& p);
/// ln mu1(t), without the underflow of mu1 at large t.
double log_mu1(double t, const FamilyParams& p);
/// mu2 = 1/mu1 - mu1
double mu2(double t, const FamilyParams& p);

/// sigma(N0) = (1 + N0^2 - N0 sqrt(1+N0^2)) / (N0 - sqrt(1+N0^2)), which
/// simplifies to -sqrt(1 + N0^2).
double sigma(double N0);

double rho0(double x);

/// Jacobian of the flow map at label x (N0 = 0).
double gamma_x_exact(double t, double x);

/// Flow map gamma(t, x) for N0 = 0: tan(2 pi gamma) = cosh^2(t/2) tan(2 pi x).
double gamma_exact(double t, double x);
/// Inverse flow map: the label that sits at position y at time t.
double label_exact(double t, double y);

struct Fields {
  double fx = 0.0;   // f_x at position x
  double rho = 0.0;  // density carried by label x, i.e. rho(t, gamma(t, x))
};

/// The N0 = 0 fields as the closed forms give them: fx = cos(4 pi x) tanh(t/2)
/// in Eulerian position and rho = (1 + cosh t) rho0 / (2 + (3 + cosh t)
/// sinh^2(t/2) rho0) along the characteristic from label x.
Fields fields_exact(double t, double x);

/// Density at position y (N0 = 0); equals rho0(y) sech^2(t/2).
double rho_eulerian(double t, double y);

}  // namespace stag::exact
