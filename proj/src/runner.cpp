#include "stag/runner.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "stag/blowup.hpp"
#include "stag/charflow.hpp"
#include "stag/exact.hpp"
#include "stag/mol.hpp"

namespace stag::cli {

namespace {

constexpr int kCrossSamples = 20;
constexpr double kCrossHorizon = 0.8;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string join(const std::vector<std::string>& cells, char sep) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += sep;
    out += cells[i];
  }
  out += '\n';
  return out;
}

nlohmann::json monitors_json(double t, const mol::Monitors& m) {
  return {{"t", t},       {"max_v", m.max_v}, {"min_rho", m.min_rho},          {"int_v", m.int_v},
          {"int_f", m.int_f}, {"I", m.I},     {"reg_integral", m.reg_integral}};
}

bool exact_family(const Scenario& s) {
  if (s.preset != "global-family" || !s.f0_source.empty() || !s.rho0_source.empty()) return false;
  auto it = s.params.find("N0");
  return it != s.params.end() && it->second == 0.0;
}

class Artifacts {
 public:
  explicit Artifacts(const std::filesystem::path& dir) : dir_(dir) { std::filesystem::create_directories(dir_); }

  void write(const std::string& name, const std::string& content) {
    write_atomic(dir_ / name, content);
    written_.push_back(dir_ / name);
  }
  std::vector<std::filesystem::path> take() { return std::move(written_); }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> written_;
};

struct ProbeTable {
  std::vector<std::string> text;

  explicit ProbeTable(std::size_t n) : text(n, "# t value_gamma_x value_fx value_fxx value_rho\n") {}
  void add(std::size_t k, double t, double gx, double fx, double fxx, double rho) {
    text[k] += join({num(t), num(gx), num(fx), num(fxx), num(rho)}, ' ');
  }
};

charflow::CharState state_at(const charflow::Flow& flow, const charflow::Trajectory& tr, double t) {
  std::size_t k = 0;
  while (k + 1 < tr.states.size() && tr.states[k + 1].t <= t) ++k;
  return flow.advance_to_time(tr.states[k], t);
}

}  // namespace

int exit_code(const Error& e) {
  switch (e.error_class()) {
    case ErrorClass::config: return kExitConfig;
    case ErrorClass::numerical: return kExitNumerical;
    case ErrorClass::invariant: return kExitInvariant;
  }
  return kExitInvariant;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw ConfigError("cli", "cannot write " + path.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

std::string probe_file_name(double x) { return "probe_" + label(x) + ".dat"; }

nlohmann::json analyze(const Scenario& s) {
  ProfilePair p = s.profiles();
  nlohmann::json report = blowup::to_json(blowup::classify(p.f0, p.rho0, s.bc, s.tol.quad));
  Artifacts out(s.out);
  out.write("report.json", report.dump(2) + "\n");
  return report;
}

RunOutcome run_scenario(const Scenario& s) {
  ProfilePair p = s.profiles();
  Artifacts out(s.out);
  nlohmann::json report = blowup::to_json(blowup::classify(p.f0, p.rho0, s.bc, s.tol.quad));
  report["scenario"] = {{"name", s.name},
                        {"bc", std::string(to_string(s.bc.kind))},
                        {"engine", std::string(to_string(s.engine))},
                        {"f0", p.f0.source()},
                        {"rho0", p.rho0.source()},
                        {"t_max", s.t_max}};
  std::optional<NumericalError> failure;

  std::optional<charflow::Flow> flow;
  charflow::Trajectory tr;
  if (s.runs_characteristics()) {
    flow.emplace(p.f0, p.rho0, s.tol.quad);
    charflow::EngineOptions opt;
    opt.quad_tol = s.tol.quad;
    opt.ode_tol = s.tol.ode;
    opt.stop_epsilon = s.tol.stop_epsilon;
    opt.t_max = s.t_max;
    tr = flow->run(opt);

    std::vector<std::string> head{"eta", "t", "A", "B", "phi1", "g"};
    for (double x : s.probes) head.push_back("gx_" + label(x));
    std::string csv = join(head, ',');
    ProbeTable probes(s.probes.size());
    for (const auto& st : tr.states) {
      std::vector<std::string> row{num(st.eta), num(st.t), num(st.A), num(st.B), num(st.phi1), num(st.g)};
      std::vector<charflow::LagrangianSample> samples = flow->lagrangian_samples(st, s.probes);
      for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto& ls = samples[k];
        row.push_back(num(ls.gamma_x));
        probes.add(k, st.t, ls.gamma_x, ls.fx, ls.fxx, ls.rho);
      }
      csv += join(row, ',');
    }
    out.write("char.csv", csv);
    for (std::size_t k = 0; k < s.probes.size(); ++k) out.write(probe_file_name(s.probes[k]), probes.text[k]);

    const auto& f = tr.final();
    report["characteristics"] = {
        {"stop_reason", std::string(to_string(tr.reason))},
        {"message", tr.message},
        {"steps", tr.states.size() - 1},
        {"final", {{"eta", f.eta}, {"t", f.t}, {"A", f.A}, {"B", f.B}, {"phi1", f.phi1}, {"g", f.g}}}};
    if (tr.reason == charflow::StopReason::error) failure.emplace("charflow", tr.message);
  }

  if (s.runs_pde()) {
    mol::Solver solver(s.bc.kind, s.grid_points());
    mol::RunOptions opt;
    opt.t_max = s.t_max;
    opt.dt_max = s.dt_max;
    std::vector<double> cross_times;
    if (s.runs_characteristics()) {
      if (!failure) {
        const double stop = tr.final().t;
        const double horizon =
            tr.reason == charflow::StopReason::blowup_approach ? kCrossHorizon * stop : std::min(stop, s.t_max);
        for (int k = 0; k <= kCrossSamples; ++k) cross_times.push_back(horizon * k / kCrossSamples);
      }
    } else {
      opt.markers = s.probes;
    }
    opt.sample_times = cross_times;
    mol::RunResult r = mol::run(solver, solver.initial(p.f0, p.rho0), opt);

    std::string csv = "t,max_v,min_rho,int_v,int_f,I,reg_integral\n";
    for (const auto& row : r.series) {
      const auto& m = row.monitors;
      csv += join({num(row.t), num(m.max_v), num(m.min_rho), num(m.int_v), num(m.int_f), num(m.I), num(m.reg_integral)},
                  ',');
    }
    out.write("mol.csv", csv);

    if (!opt.markers.empty()) {
      ProbeTable probes(s.probes.size());
      for (const auto& row : r.tracks) {
        for (std::size_t k = 0; k < row.samples.size(); ++k) {
          const auto& m = row.samples[k];
          probes.add(k, row.t, m.gamma_x, m.fx, m.fxx, m.rho);
        }
      }
      for (std::size_t k = 0; k < s.probes.size(); ++k) out.write(probe_file_name(s.probes[k]), probes.text[k]);
    }

    if (!cross_times.empty()) {
      std::string cross = "t,x,gamma,fx_lagrangian,fx_eulerian,rel_diff\n";
      for (const auto& sample : r.samples) {
        const charflow::CharState st = state_at(*flow, tr, sample.t);
        std::vector<charflow::LagrangianSample> ls = flow->lagrangian_samples(st, s.probes);
        for (const auto& l : ls) {
          const double eulerian = solver.interpolate(sample.v.values, l.gamma);
          const double rel = std::abs(l.fx - eulerian) / std::max(1.0, std::abs(l.fx));
          cross += join({num(sample.t), num(l.x), num(l.gamma), num(l.fx), num(eulerian), num(rel)}, ',');
        }
      }
      out.write("cross.csv", cross);
    }

    report["pde"] = {{"stop_reason", std::string(mol::to_string(r.reason))},
                     {"message", r.message},
                     {"n", solver.n()},
                     {"steps", r.series.size() - 1},
                     {"final", monitors_json(r.final.t, r.final.monitors)}};
  }

  out.write("report.json", report.dump(2) + "\n");
  if (failure) throw *failure;
  return RunOutcome{report, out.take()};
}

CompareSummary compare(const Scenario& s) {
  if (s.engine != Engine::both) throw ConfigError("compare", "compare needs a scenario with engine = both");
  const std::filesystem::path source = s.out / "cross.csv";
  std::ifstream in(source);
  if (!in) throw ConfigError("compare", "missing run artifact " + source.string() + "; run the scenario first");

  const bool with_exact = exact_family(s);
  std::string csv = with_exact ? "t,x,fx_lagrangian,fx_eulerian,rel_diff,fx_exact,err_lagrangian,err_eulerian\n"
                               : "t,x,fx_lagrangian,fx_eulerian,rel_diff\n";
  CompareSummary sum;
  if (with_exact) sum.max_err_lagrangian = sum.max_err_eulerian = 0.0;

  std::string line;
  std::getline(in, line);
  if (line != "t,x,gamma,fx_lagrangian,fx_eulerian,rel_diff") {
    throw ConfigError("compare", source.string() + " has an unexpected header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) v.push_back(std::strtod(cell.c_str(), nullptr));
    if (v.size() != 6) throw ConfigError("compare", source.string() + " has a malformed row: " + line);
    const double t = v[0], x = v[1], gamma = v[2], lag = v[3], eul = v[4];
    const double rel = std::abs(lag - eul) / std::max(1.0, std::abs(lag));
    std::vector<std::string> row{num(t), num(x), num(lag), num(eul), num(rel)};
    sum.max_rel_diff = std::max(sum.max_rel_diff, rel);
    if (with_exact) {
      const double fx = std::cos(4.0 * std::numbers::pi * gamma) * std::tanh(0.5 * t);
      const double el = std::abs(lag - fx), ee = std::abs(eul - fx);
      sum.max_err_lagrangian = std::max(*sum.max_err_lagrangian, el);
      sum.max_err_eulerian = std::max(*sum.max_err_eulerian, ee);
      row.insert(row.end(), {num(fx), num(el), num(ee)});
    }
    csv += join(row, ',');
    ++sum.rows;
  }
  csv += "# max_rel_diff=" + num(sum.max_rel_diff);
  if (with_exact) {
    csv += " max_err_lagrangian=" + num(*sum.max_err_lagrangian) + " max_err_eulerian=" + num(*sum.max_err_eulerian);
  }
  csv += "\n";
  Artifacts out(s.out);
  out.write("compare.csv", csv);
  return sum;
}

nlohmann::json exact_point(double N0, double t, double x) {
  if (!(N0 >= 0.0)) throw ConfigError("exact", "N0 must be >= 0");
  if (!(t >= 0.0)) throw ConfigError("exact", "t must be >= 0");
  if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("exact", "x must lie in [0, 1]");
  exact::FamilyParams p{N0};
  nlohmann::json j = {{"N0", N0},
                      {"t", t},
                      {"x", x},
                      {"C0", p.C0()},
                      {"mu1", exact::mu1(t, p)},
                      {"mu2", exact::mu2(t, p)},
                      {"sigma", exact::sigma(N0)}};
  if (N0 == 0.0) {
    const exact::Fields f = exact::fields_exact(t, x);
    j["gamma"] = exact::gamma_exact(t, x);
    j["gamma_x"] = exact::gamma_x_exact(t, x);
    j["fx"] = f.fx;
    j["rho"] = exact::rho_eulerian(t, x);
    j["rho_along_label"] = f.rho;
  }
  return j;
}

}  // namespace stag::cli
