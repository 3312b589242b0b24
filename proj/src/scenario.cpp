#include "stag/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <cstdio>
#include <sstream>

#include "stag/mol.hpp"

namespace stag::cli {

namespace {

struct Value {
  enum class Kind { number, text, list } kind = Kind::text;
  double number = 0.0;
  std::string text;
  std::vector<double> list;
  int line = 0;
};

std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> to_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

bool is_key(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
  });
}

class Parser {
 public:
  explicit Parser(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError("config", origin_ + ":" + std::to_string(line) + ": " + msg);
  }

  std::map<std::string, Value> parse(std::string_view text) {
    std::map<std::string, Value> out;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      line = trim(strip_comment(line, line_no));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(line_no, "unterminated section header");
        std::string_view name = trim(line.substr(1, line.size() - 2));
        if (!is_key(name)) fail(line_no, "invalid section name '" + std::string(name) + "'");
        section = std::string(name);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) fail(line_no, "expected 'key = value'");
      std::string_view key = trim(line.substr(0, eq));
      if (!is_key(key)) fail(line_no, "invalid key '" + std::string(key) + "'");
      std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
      Value v = parse_value(trim(line.substr(eq + 1)), line_no);
      auto [it, fresh] = out.emplace(full, v);
      if (!fresh) fail(line_no, "duplicate key '" + full + "' (first set on line " + std::to_string(it->second.line) + ")");
    }
    return out;
  }

 private:
  std::string_view strip_comment(std::string_view line, int line_no) const {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    if (quoted) fail(line_no, "unterminated string");
    return line;
  }

  Value parse_value(std::string_view raw, int line_no) const {
    Value v;
    v.line = line_no;
    if (raw.empty()) fail(line_no, "missing value");
    if (raw.front() == '"') {
      if (raw.size() < 2 || raw.back() != '"') fail(line_no, "unterminated string");
      v.text = std::string(raw.substr(1, raw.size() - 2));
      return v;
    }
    if (raw.front() == '[') {
      if (raw.back() != ']') fail(line_no, "unterminated list");
      v.kind = Value::Kind::list;
      std::string_view body = trim(raw.substr(1, raw.size() - 2));
      while (!body.empty()) {
        const auto comma = body.find(',');
        std::string_view item = trim(body.substr(0, comma));
        auto x = to_number(item);
        if (!x) fail(line_no, "list item '" + std::string(item) + "' is not a number");
        v.list.push_back(*x);
        if (comma == std::string_view::npos) break;
        body = trim(body.substr(comma + 1));
        if (body.empty()) fail(line_no, "trailing comma in list");
      }
      return v;
    }
    v.text = std::string(raw);
    if (auto x = to_number(raw)) {
      v.kind = Value::Kind::number;
      v.number = *x;
    }
    return v;
  }

  std::string origin_;
};

}  // namespace

std::string_view to_string(Engine e) {
  switch (e) {
    case Engine::characteristics: return "characteristics";
    case Engine::pde: return "pde";
    case Engine::both: return "both";
  }
  return "both";
}

ProfilePair Scenario::profiles() const {
  std::optional<ProfilePair> base;
  if (!preset.empty()) base = catalog(preset, params);
  Profile f0 = f0_source.empty() ? base->f0 : Profile::parse(f0_source);
  Profile rho0 = rho0_source.empty() ? base->rho0 : Profile::parse(rho0_source);
  return {f0, rho0};
}

std::size_t Scenario::grid_points() const {
  if (n != 0) return n;
  return bc.kind == BoundaryKind::dirichlet ? 1025 : 256;
}

Scenario parse_scenario(std::string_view text, const std::string& origin) {
  Parser parser(origin);
  auto entries = parser.parse(text);
  Scenario s;

  auto number = [&](const std::string& key, const Value& v) {
    if (v.kind != Value::Kind::number) parser.fail(v.line, "'" + key + "' must be a number, got '" + v.text + "'");
    return v.number;
  };
  auto text_of = [&](const std::string& key, const Value& v) {
    if (v.kind == Value::Kind::list) parser.fail(v.line, "'" + key + "' must be a string");
    return v.text;
  };

  for (const auto& [key, v] : entries) {
    if (key == "name") {
      s.name = text_of(key, v);
    } else if (key == "bc") {
      try {
        s.bc.kind = boundary_kind_from_string(text_of(key, v));
      } catch (const ConfigError& e) {
        parser.fail(v.line, e.what());
      }
    } else if (key == "engine") {
      std::string e = text_of(key, v);
      if (e == "characteristics") {
        s.engine = Engine::characteristics;
      } else if (e == "pde") {
        s.engine = Engine::pde;
      } else if (e == "both") {
        s.engine = Engine::both;
      } else {
        parser.fail(v.line, "engine must be characteristics, pde or both, got '" + e + "'");
      }
    } else if (key == "preset") {
      s.preset = text_of(key, v);
    } else if (key.starts_with("params.")) {
      s.params[key.substr(7)] = number(key, v);
    } else if (key == "f0") {
      s.f0_source = text_of(key, v);
    } else if (key == "rho0") {
      s.rho0_source = text_of(key, v);
    } else if (key == "numerics.n") {
      double n = number(key, v);
      if (!(n >= 1.0) || n != std::floor(n) || n > 1e8) parser.fail(v.line, "'numerics.n' must be a positive integer");
      s.n = static_cast<std::size_t>(n);
    } else if (key == "numerics.quad_tol") {
      s.tol.quad = number(key, v);
    } else if (key == "numerics.ode_tol") {
      s.tol.ode = number(key, v);
    } else if (key == "numerics.stop_epsilon") {
      s.tol.stop_epsilon = number(key, v);
    } else if (key == "numerics.t_max") {
      s.t_max = number(key, v);
    } else if (key == "numerics.dt_max") {
      s.dt_max = number(key, v);
    } else if (key == "output.probes") {
      if (v.kind == Value::Kind::number) {
        s.probes = {v.number};
      } else if (v.kind == Value::Kind::list) {
        s.probes = v.list;
      } else {
        parser.fail(v.line, "'output.probes' must be a list of numbers");
      }
    } else if (key == "output.dir") {
      s.out = text_of(key, v);
    } else {
      parser.fail(v.line, "unknown key '" + key + "'");
    }
  }
  if (s.preset.empty() && (s.f0_source.empty() || s.rho0_source.empty())) {
    throw ConfigError("config", origin + ": either 'preset' or both 'f0' and 'rho0' are required");
  }
  if (s.preset.empty() && !s.params.empty()) {
    throw ConfigError("config", origin + ": 'params' only apply to a preset");
  }
  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

void validate(const Scenario& s) {
  auto fail = [](const std::string& msg) { throw ConfigError("scenario", msg); };
  for (double p : s.probes) {
    if (!(p >= 0.0 && p <= 1.0)) fail("probes must lie in [0, 1], got " + short_number(p));
  }
  if (!(s.tol.quad > 0.0)) fail("quad_tol must be > 0");
  if (!(s.tol.ode > 0.0)) fail("ode_tol must be > 0");
  if (!(s.tol.stop_epsilon > 0.0)) fail("stop_epsilon must be > 0");
  if (!(s.t_max > 0.0) || !std::isfinite(s.t_max)) fail("t_max must be > 0");
  if (!(s.dt_max > 0.0)) fail("dt_max must be > 0");
  if (s.name.empty()) fail("name must not be empty");
  if (s.runs_pde()) mol::Solver(s.bc.kind, s.grid_points());
  ProfilePair p = s.profiles();
  stag::validate(s.bc, p.f0, p.rho0);
}

void apply(Scenario& s, const Overrides& o) {
  if (o.out) s.out = *o.out;
  if (o.tol) s.tol.quad = *o.tol;
  if (o.t_max) s.t_max = *o.t_max;
  validate(s);
}

}  // namespace stag::cli
