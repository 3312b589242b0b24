// stagnation-lab: analyze, run and compare scenarios; evaluate the exact family.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "stag/runner.hpp"
#include "stag/scenario.hpp"

using namespace stag;
using namespace stag::cli;

namespace {

struct Shared {
  std::string config;
  std::optional<std::string> out;
  std::optional<double> tol;
  std::optional<double> tmax;
};

void add_shared(CLI::App* cmd, Shared& sh) {
  cmd->add_option("config", sh.config, "scenario file")->required();
  cmd->add_option("--out", sh.out, "output directory");
  cmd->add_option("--tol", sh.tol, "quadrature tolerance");
  cmd->add_option("--tmax", sh.tmax, "final time");
}

Scenario load(const Shared& sh) {
  Scenario s = load_scenario(sh.config);
  Overrides o;
  if (sh.out) o.out = *sh.out;
  o.tol = sh.tol;
  o.t_max = sh.tmax;
  apply(s, o);
  return s;
}

void print_engine(const nlohmann::json& report, const char* key) {
  if (!report.contains(key)) return;
  const auto& e = report[key];
  std::printf("%s: %s at t=%.10g\n", key, e["stop_reason"].get<std::string>().c_str(),
              e["final"]["t"].get<double>());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stagnation-point similitude solutions: blowup analysis and solvers"};
  app.require_subcommand(1);

  Shared analyze_args, run_args, compare_args;
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "classify the initial data (report.json only)");
  add_shared(analyze_cmd, analyze_args);
  CLI::App* run_cmd = app.add_subcommand("run", "run the configured engines and write all artifacts");
  add_shared(run_cmd, run_args);
  CLI::App* compare_cmd = app.add_subcommand("compare", "tabulate Lagrangian against Eulerian f_x from a finished run");
  add_shared(compare_cmd, compare_args);

  double n0 = 0.0, t = 0.0, x = 0.0;
  CLI::App* exact_cmd = app.add_subcommand("exact", "closed-form values of the global family");
  exact_cmd->add_option("--n0", n0, "family parameter N0")->required();
  exact_cmd->add_option("--t", t, "time")->required();
  exact_cmd->add_option("--x", x, "position or label in [0, 1]")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (analyze_cmd->parsed()) {
      nlohmann::json report = analyze(load(analyze_args));
      std::cout << report.dump(2) << "\n";
    } else if (run_cmd->parsed()) {
      RunOutcome r = run_scenario(load(run_args));
      std::printf("verdict: %s\n", r.report["verdict"].get<std::string>().c_str());
      print_engine(r.report, "characteristics");
      print_engine(r.report, "pde");
      for (const auto& p : r.written) std::printf("wrote %s\n", p.string().c_str());
    } else if (compare_cmd->parsed()) {
      CompareSummary c = compare(load(compare_args));
      std::printf("rows: %zu\nmax relative difference: %.6e\n", c.rows, c.max_rel_diff);
      if (c.max_err_lagrangian) {
        std::printf("max error vs closed form: lagrangian %.6e, eulerian %.6e\n", *c.max_err_lagrangian,
                    *c.max_err_eulerian);
      }
    } else if (exact_cmd->parsed()) {
      std::cout << exact_point(n0, t, x).dump(2) << "\n";
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e);
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvariant;
  }
  return kExitOk;
}
