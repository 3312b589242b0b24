#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "stag/error.hpp"

namespace stag::quad {

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t panels = 0;
};

/// Accept when error_estimate <= max(abs, rel * |value|).
struct Tolerance {
  double abs = 1e-10;
  double rel = 0.0;
};

class QuadratureError : public NumericalError {
 public:
  explicit QuadratureError(const std::string& what) : NumericalError("quad", what) {}
};

/// Non-owning reference to a callable double(double).
class FunctionRef {
 public:
  FunctionRef(double (*fn)(double)) : fn_(fn) {}  // NOLINT(google-explicit-constructor)

  template <typename F, typename D = std::remove_cvref_t<F>,
            typename = std::enable_if_t<!std::is_same_v<D, FunctionRef> && !std::is_function_v<D> &&
                                        !std::is_pointer_v<D>>>
  FunctionRef(F&& f)  // NOLINT(google-explicit-constructor)
      : object_(const_cast<void*>(static_cast<const void*>(std::addressof(f)))),
        call_([](void* obj, double x) -> double { return (*static_cast<std::remove_reference_t<F>*>(obj))(x); }) {}

  double operator()(double x) const { return fn_ ? fn_(x) : call_(object_, x); }

 private:
  double (*fn_)(double) = nullptr;
  void* object_ = nullptr;
  double (*call_)(void*, double) = nullptr;
};

constexpr int kMaxDepth = 60;
constexpr std::size_t kMaxPanels = 200000;

/// Globally adaptive Gauss-Kronrod (7/15) bisection on [a, b].
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate meets the tolerance. Panel values are summed in left-to-right
/// order with Neumaier compensation, so the result depends only on (g, a, b,
/// tol). Throws QuadratureError if a panel needing refinement sits at depth
/// kMaxDepth, or if g returns a non-finite value.
QuadResult integrate(FunctionRef g, double a, double b, Tolerance tol);

inline QuadResult integrate(FunctionRef g, double a, double b, double tol) {
  return integrate(g, a, b, Tolerance{tol, 0.0});
}

/// Integral over [points.front(), points.back()] split at every point, so
/// that narrow features at known locations fall on panel edges. Points must
/// be nondecreasing. tol.rel is measured against the whole integral of |g|
/// (estimated from one panel per piece) and shared between the pieces.
QuadResult integrate_with_breaks(FunctionRef g, std::span<const double> points, Tolerance tol);

/// Integral of g over [0, x].
double cumulative(FunctionRef g, double x, Tolerance tol);

/// Running integral of uniformly spaced samples (spacing h), fourth order.
/// result[0] = 0 and result[j] approximates the integral from x_0 to x_j.
/// Needs at least 4 samples.
std::vector<double> cumulative_uniform(std::span<const double> samples, double h);

/// Composite Simpson on an odd number (>= 3) of uniform samples.
double simpson(std::span<const double> samples, double h);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace stag::quad
