#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stag/charflow.hpp"
#include "stag/profile.hpp"

namespace stag::blowup {

enum class Location { left_boundary, right_boundary, interior };

struct Maximizer {
  double x = 0.0;
  Location location = Location::interior;
  double f0_pp = 0.0;  // f0''(x)
};

struct Maxima {
  double M0 = 0.0;
  std::vector<Maximizer> maximizers;
};

constexpr int kMaximizerSamples = 4097;
constexpr double kMergeRadius = 1e-6;
constexpr double kBoundaryRadius = 1e-9;
constexpr double kVorticityThreshold = 1e-9;
constexpr double kFamilyMatchTol = 1e-9;

/// Global maximizers of f0' on [0, 1]. A flat f0' has no isolated
/// maximizers and yields an empty list.
Maxima find_maximizers(const Profile& f0);

enum class Verdict { blowup_guaranteed, global_family_match, inconclusive };

std::string_view to_string(Location l);
std::string_view to_string(Verdict v);

struct BlowupReport {
  double M0 = 0.0;
  double eta_star = 0.0;  // +inf when M0 <= 0
  std::vector<Maximizer> maximizers;
  bool rho0_nonneg = false;
  bool bc_ok = false;
  Verdict verdict = Verdict::inconclusive;
  std::optional<double> t_star_bound;  // nullopt means unbounded
};

BlowupReport classify(const Profile& f0, const Profile& rho0, const BoundaryCondition& bc, double tol = 1e-10);

/// Limit of int_0^eta (int_0^1 dx / (1 - mu f0'(x)))^2 dmu as eta -> eta*.
///
/// The outer integral runs to eta*/2, then over pieces [eta* - d, eta* - d/2]
/// with d halving down to 1e-12 eta*. The tail is accepted as convergent when
/// the final piece contributions shrink geometrically (mean ratio below
/// kTailRatioLimit); otherwise the bound is unbounded (nullopt). Throws
/// ConfigError when M0 <= 0.
std::optional<double> t_star_bound(const Profile& f0, double tol = 1e-10);

constexpr double kTailRatioLimit = 0.85;
constexpr int kTailRatioWindow = 8;

struct RateFit {
  double slope = 0.0;     // log gamma_x vs -log((eta*-eta)|ln(eta*-eta)|)
  double exponent = 0.0;  // log gamma_x vs -log(eta*-eta)
  std::size_t samples = 0;
};

class InsufficientData : public NumericalError {
 public:
  explicit InsufficientData(const std::string& what) : NumericalError("blowup", what) {}
};

constexpr std::size_t kMinRateSamples = 20;

/// Least-squares growth rate of gamma_x(t, x_star) over the last decade of
/// eta* - eta in `traj`.
RateFit rate_diagnostic(const charflow::Trajectory& traj, double x_star, const charflow::Flow& flow);

nlohmann::json to_json(const BlowupReport& r);

}  // namespace stag::blowup
