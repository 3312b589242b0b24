#pragma once

// Scenario files: `key = value` lines, optional `[section]` headers that
// prefix the keys that follow, `#` comments. Values are numbers, quoted or
// bare strings, or `[a, b, ...]` lists of numbers.
//
//   name = parabola
//   bc = dirichlet
//   engine = both
//   preset = global-family
//   params.N0 = 1
//   [numerics]
//   n = 1025
//   t_max = 2
//   [output]
//   probes = [0, 0.25, 0.5]
//   dir = "out/parabola"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stag/profile.hpp"

namespace stag::cli {

enum class Engine { characteristics, pde, both };
std::string_view to_string(Engine e);

struct Tolerances {
  double quad = 1e-10;
  double ode = 1e-10;
  double stop_epsilon = 1e-8;
};

struct Scenario {
  std::string name = "scenario";
  BoundaryCondition bc;
  std::string preset;  // empty when f0 and rho0 are given directly
  Params params;
  std::string f0_source;
  std::string rho0_source;
  Engine engine = Engine::both;
  std::size_t n = 0;  // 0: 1025 (Dirichlet) or 256 (periodic)
  Tolerances tol;
  double t_max = 20.0;
  double dt_max = 1e-3;
  std::vector<double> probes;
  std::filesystem::path out = "out";

  ProfilePair profiles() const;
  std::size_t grid_points() const;
  bool runs_characteristics() const { return engine != Engine::pde; }
  bool runs_pde() const { return engine != Engine::characteristics; }
};

Scenario parse_scenario(std::string_view text, const std::string& origin = "<config>");
Scenario load_scenario(const std::filesystem::path& path);

/// Throws ConfigError naming the first violated requirement.
void validate(const Scenario& s);

struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<double> tol;
  std::optional<double> t_max;
};

void apply(Scenario& s, const Overrides& o);

}  // namespace stag::cli
