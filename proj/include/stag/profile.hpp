#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "stag/error.hpp"
#include "stag/expr.hpp"

namespace stag {

/// Initial-data function on [0, 1] with symbolic first and second derivatives.
///
/// Construction parses the source, differentiates twice and samples all three
/// trees at 1001 points of [0, 1]; any non-finite value is a domain error.
/// Immutable afterwards and cheap to copy.
class Profile {
 public:
  static Profile parse(std::string_view source);
  static Profile from_tree(const expr::NodePtr& ast, std::string source);

  const std::string& source() const { return impl_->source; }
  const expr::NodePtr& ast() const { return impl_->ast; }
  const expr::NodePtr& d1_ast() const { return impl_->d1; }
  const expr::NodePtr& d2_ast() const { return impl_->d2; }

  double operator()(double x) const { return impl_->value(x); }
  double d1(double x) const { return impl_->first(x); }
  double d2(double x) const { return impl_->second(x); }

 private:
  struct Impl {
    std::string source;
    expr::NodePtr ast, d1, d2;
    expr::Program value, first, second;
  };
  explicit Profile(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

class DomainError : public ConfigError {
 public:
  explicit DomainError(const std::string& what) : ConfigError("profiles", what) {}
};

enum class BoundaryKind { dirichlet, periodic };

struct BoundaryCondition {
  BoundaryKind kind = BoundaryKind::dirichlet;
};

std::string_view to_string(BoundaryKind kind);
BoundaryKind boundary_kind_from_string(std::string_view name);

constexpr double kBoundaryValueTol = 1e-12;
constexpr double kMeanZeroTol = 1e-10;

/// First violated boundary requirement, phrased for users
/// (e.g. "Dirichlet requires f0(1)=0, got 0.25"); nullopt when compatible.
std::optional<std::string> boundary_violation(const BoundaryCondition& bc, const Profile& f0,
                                              const Profile& rho0);

/// Throws ConfigError carrying boundary_violation's message.
void validate(const BoundaryCondition& bc, const Profile& f0, const Profile& rho0);

struct ProfilePair {
  Profile f0;
  Profile rho0;
};

using Params = std::map<std::string, double, std::less<>>;

/// Named initial data: parabola, sine, global-family (N0), cubic-symmetric (c).
ProfilePair catalog(std::string_view name, const Params& params);

}  // namespace stag
