#include "stag/profile.hpp"

#include <cmath>
#include <cstdio>

#include "stag/quad.hpp"

namespace stag {

namespace {

constexpr int kDomainSamples = 1001;

std::string fmt_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void check_domain(const expr::Program& p, const std::string& what, const std::string& source) {
  for (int j = 0; j < kDomainSamples; ++j) {
    double x = static_cast<double>(j) / (kDomainSamples - 1);
    double v = p(x);
    if (!std::isfinite(v)) {
      throw DomainError(what + " of \"" + source + "\" is undefined at x=" + fmt_short(x));
    }
  }
}

double require(const Params& params, std::string_view preset, const char* key) {
  auto it = params.find(key);
  if (it == params.end()) {
    throw ConfigError("profiles", "preset '" + std::string(preset) + "' requires parameter params." + key);
  }
  return it->second;
}

}  // namespace

Profile Profile::parse(std::string_view source) {
  if (source.empty()) throw expr::ParseError(0, "expected expression, got empty input");
  return from_tree(expr::parse(source), std::string(source));
}

Profile Profile::from_tree(const expr::NodePtr& ast, std::string source) {
  auto impl = std::make_shared<Impl>();
  impl->source = std::move(source);
  impl->ast = ast;
  impl->d1 = expr::differentiate(ast);
  impl->d2 = expr::differentiate(impl->d1);
  impl->value = expr::Program(impl->ast);
  impl->first = expr::Program(impl->d1);
  impl->second = expr::Program(impl->d2);
  check_domain(impl->value, "value", impl->source);
  check_domain(impl->first, "first derivative", impl->source);
  check_domain(impl->second, "second derivative", impl->source);
  return Profile(std::move(impl));
}

std::string_view to_string(BoundaryKind kind) {
  return kind == BoundaryKind::dirichlet ? "dirichlet" : "periodic";
}

BoundaryKind boundary_kind_from_string(std::string_view name) {
  if (name == "dirichlet" || name == "Dirichlet") return BoundaryKind::dirichlet;
  if (name == "periodic" || name == "Periodic") return BoundaryKind::periodic;
  throw ConfigError("profiles", "unknown boundary condition '" + std::string(name) +
                                    "' (expected dirichlet or periodic)");
}

std::optional<std::string> boundary_violation(const BoundaryCondition& bc, const Profile& f0,
                                              const Profile& rho0) {
  auto off = [](double v) { return !(std::abs(v) <= kBoundaryValueTol); };
  if (bc.kind == BoundaryKind::dirichlet) {
    if (off(f0(0.0))) return "Dirichlet requires f0(0)=0, got " + fmt_short(f0(0.0));
    if (off(f0(1.0))) return "Dirichlet requires f0(1)=0, got " + fmt_short(f0(1.0));
    if (off(rho0(0.0))) return "Dirichlet requires rho0(0)=0, got " + fmt_short(rho0(0.0));
    if (off(rho0(1.0))) return "Dirichlet requires rho0(1)=0, got " + fmt_short(rho0(1.0));
    return std::nullopt;
  }
  if (off(f0(1.0) - f0(0.0))) {
    return "periodic requires f0(0)=f0(1), got " + fmt_short(f0(0.0)) + " and " + fmt_short(f0(1.0));
  }
  if (off(f0.d1(1.0) - f0.d1(0.0))) {
    return "periodic requires f0'(0)=f0'(1), got " + fmt_short(f0.d1(0.0)) + " and " + fmt_short(f0.d1(1.0));
  }
  if (off(rho0(1.0) - rho0(0.0))) {
    return "periodic requires rho0(0)=rho0(1), got " + fmt_short(rho0(0.0)) + " and " + fmt_short(rho0(1.0));
  }
  double mean = quad::integrate([&](double x) { return f0(x); }, 0.0, 1.0, quad::Tolerance{1e-13, 0.0}).value;
  if (!(std::abs(mean) <= kMeanZeroTol)) return "periodic requires mean-zero f0, got integral " + fmt_short(mean);
  return std::nullopt;
}

void validate(const BoundaryCondition& bc, const Profile& f0, const Profile& rho0) {
  if (auto msg = boundary_violation(bc, f0, rho0)) throw ConfigError("profiles", *msg);
}

ProfilePair catalog(std::string_view name, const Params& params) {
  const std::string rho = "sin(2*pi*x)^2";
  if (name == "parabola") return {Profile::parse("x*(1-x)"), Profile::parse(rho)};
  if (name == "sine") return {Profile::parse("sin(2*pi*x)"), Profile::parse(rho)};
  if (name == "global-family") {
    double n0 = require(params, name, "N0");
    if (!(n0 >= 0.0)) throw ConfigError("profiles", "global-family requires N0 >= 0, got " + fmt_short(n0));
    return {Profile::parse("-" + fmt_number(n0) + "*sin(4*pi*x)/(4*pi)"), Profile::parse(rho)};
  }
  if (name == "cubic-symmetric") {
    double c = require(params, name, "c");
    if (!(c > 0.0)) throw ConfigError("profiles", "cubic-symmetric requires c > 0, got " + fmt_short(c));
    return {Profile::parse(fmt_number(c) + "*x*(1-x)*(1-2*x)"), Profile::parse(rho)};
  }
  throw ConfigError("profiles", "unknown preset '" + std::string(name) +
                                    "' (expected parabola, sine, global-family, cubic-symmetric)");
}

}  // namespace stag
