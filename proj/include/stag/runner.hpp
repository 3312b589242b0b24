#pragma once

// Orchestration behind the stagnation-lab subcommands. Every artifact is
// written to a temporary file in the output directory and renamed into place.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stag/error.hpp"
#include "stag/scenario.hpp"

namespace stag::cli {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitInvariant = 4;

int exit_code(const Error& e);

void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Probe file name for label x, e.g. probe_0.25.dat.
std::string probe_file_name(double x);

/// BlowupReport only; writes report.json.
nlohmann::json analyze(const Scenario& s);

struct RunOutcome {
  nlohmann::json report;
  std::vector<std::filesystem::path> written;
};

/// Runs the configured engines and writes report.json, char.csv and/or
/// mol.csv, one probe file per probe and, with both engines, cross.csv.
/// Artifacts of the engines that finished are still written when one fails;
/// the failure is then rethrown.
RunOutcome run_scenario(const Scenario& s);

struct CompareSummary {
  std::size_t rows = 0;
  double max_rel_diff = 0.0;
  /// Only for the N0 = 0 global family, which has closed-form fx.
  std::optional<double> max_err_lagrangian;
  std::optional<double> max_err_eulerian;
};

/// Reads cross.csv from the output directory and writes compare.csv.
CompareSummary compare(const Scenario& s);

/// Closed-form values of the global family at (t, x).
nlohmann::json exact_point(double N0, double t, double x);

}  // namespace stag::cli
