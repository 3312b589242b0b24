#include "stag/quad.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <queue>
#include <string>

namespace stag::quad {

namespace {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
constexpr std::array<double, 8> kNodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
};
constexpr std::array<double, 8> kKronrod{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
};
// Gauss weights for kNodes[1], [3], [5], [7].
constexpr std::array<double, 4> kGauss{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  int depth;
};

struct ByError {
  bool operator()(const Panel& l, const Panel& r) const {
    if (l.error != r.error) return l.error < r.error;
    return l.a > r.a;
  }
};

double checked(FunctionRef g, double x) {
  double v = g(x);
  if (!std::isfinite(v)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "non-finite integrand value at x=%.17g", x);
    throw QuadratureError(buf);
  }
  return v;
}

Panel evaluate_panel(FunctionRef g, double a, double b, int depth) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double fc = checked(g, center);
  double kronrod = fc * kKronrod[7];
  double gauss = fc * kGauss[3];
  for (int i = 0; i < 7; ++i) {
    double dx = half * kNodes[i];
    double f1 = checked(g, center - dx);
    double f2 = checked(g, center + dx);
    kronrod += kKronrod[i] * (f1 + f2);
    if (i % 2 == 1) gauss += kGauss[i / 2] * (f1 + f2);
  }
  kronrod *= half;
  gauss *= half;
  return Panel{a, b, kronrod, std::abs(kronrod - gauss), depth};
}

}  // namespace

QuadResult integrate(FunctionRef g, double a, double b, Tolerance tol) {
  if (!(tol.abs > 0.0 || tol.rel > 0.0)) throw QuadratureError("tolerance must be positive");
  if (!(a < b)) {
    if (a == b) return QuadResult{};
    throw QuadratureError("integration interval must satisfy a < b");
  }

  std::priority_queue<Panel, std::vector<Panel>, ByError> work;
  std::vector<Panel> done;
  Panel first = evaluate_panel(g, a, b, 0);
  double total = first.value;
  double total_error = first.error;
  work.push(first);

  auto target = [&] { return std::max(tol.abs, tol.rel * std::abs(total)); };

  while (!work.empty() && total_error > target()) {
    Panel worst = work.top();
    if (worst.depth >= kMaxDepth) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "max subdivision depth %d exceeded near x=%.17g (unresolved singularity?)",
                    kMaxDepth, worst.a);
      throw QuadratureError(buf);
    }
    if (work.size() + done.size() >= kMaxPanels) throw QuadratureError("panel budget exhausted");
    work.pop();
    double mid = 0.5 * (worst.a + worst.b);
    Panel left = evaluate_panel(g, worst.a, mid, worst.depth + 1);
    Panel right = evaluate_panel(g, mid, worst.b, worst.depth + 1);
    total += (left.value + right.value) - worst.value;
    total_error += (left.error + right.error) - worst.error;
    work.push(left);
    work.push(right);
  }

  while (!work.empty()) {
    done.push_back(work.top());
    work.pop();
  }
  std::sort(done.begin(), done.end(), [](const Panel& l, const Panel& r) { return l.a < r.a; });
  CompensatedSum value;
  CompensatedSum error;
  for (const Panel& p : done) {
    value.add(p.value);
    error.add(p.error);
  }
  return QuadResult{value.value(), error.value(), done.size()};
}

QuadResult integrate_with_breaks(FunctionRef g, std::span<const double> points, Tolerance tol) {
  if (points.size() < 2) throw QuadratureError("need at least two break points");
  // The relative target refers to the whole range: a piece far from every
  // peak may hold a negligible share and must not be resolved to tol.rel of
  // its own size. One panel per piece gives the scale.
  double scale = 0.0;
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    if (points[k] < points[k + 1]) scale += std::abs(evaluate_panel(g, points[k], points[k + 1], 0).value);
  }
  const double pieces = static_cast<double>(points.size() - 1);
  const Tolerance share{std::max(tol.abs, tol.rel * scale) / pieces, tol.rel};
  CompensatedSum value, error;
  std::size_t panels = 0;
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    if (points[k] == points[k + 1]) continue;
    QuadResult r = integrate(g, points[k], points[k + 1], share);
    value.add(r.value);
    error.add(r.error_estimate);
    panels += r.panels;
  }
  return QuadResult{value.value(), error.value(), panels};
}

double cumulative(FunctionRef g, double x, Tolerance tol) {
  if (x == 0.0) return 0.0;
  return integrate(g, 0.0, x, tol).value;
}

std::vector<double> cumulative_uniform(std::span<const double> v, double h) {
  const std::size_t n = v.size();
  if (n < 4) throw QuadratureError("cumulative_uniform needs at least 4 samples");
  std::vector<double> out(n, 0.0);
  const double c = h / 24.0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    double cell;
    if (j == 0) {
      cell = c * (9.0 * v[0] + 19.0 * v[1] - 5.0 * v[2] + v[3]);
    } else if (j + 2 == n) {
      cell = c * (v[n - 4] - 5.0 * v[n - 3] + 19.0 * v[n - 2] + 9.0 * v[n - 1]);
    } else {
      cell = c * (-v[j - 1] + 13.0 * v[j] + 13.0 * v[j + 1] - v[j + 2]);
    }
    out[j + 1] = out[j] + cell;
  }
  return out;
}

double simpson(std::span<const double> v, double h) {
  const std::size_t n = v.size();
  if (n < 3 || n % 2 == 0) throw QuadratureError("simpson needs an odd number (>= 3) of samples");
  CompensatedSum s;
  s.add(v[0]);
  s.add(v[n - 1]);
  for (std::size_t j = 1; j + 1 < n; ++j) s.add((j % 2 == 1 ? 4.0 : 2.0) * v[j]);
  return s.value() * h / 3.0;
}

}  // namespace stag::quad
