#include "config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace monodromize::cli {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": not a number: '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  int x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": not an integer: '" + v + "'");
  return x;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

Setter real(double RunConfig::*m) {
  return [m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = to_double(k, v); };
}
Setter integer(int RunConfig::*m) {
  return [m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = to_int(k, v); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> s = {
      {"residual_tol", real(&RunConfig::residual_tol)},
      {"det_tol", real(&RunConfig::det_tol)},
      {"fit_tol", real(&RunConfig::fit_tol)},
      {"shape_tol", real(&RunConfig::shape_tol)},
      {"order_tol", real(&RunConfig::order_tol)},
      {"harmonic_tol", real(&RunConfig::harmonic_tol)},
      {"pair_tol", real(&RunConfig::pair_tol)},
      {"sing_rel", real(&RunConfig::sing_rel)},
      {"denom_guard", real(&RunConfig::denom_guard)},
      {"degenerate_tol", real(&RunConfig::degenerate_tol)},
      {"rational_tol", real(&RunConfig::rational_tol)},
      {"density", real(&RunConfig::density)},
      {"tail_tol", real(&RunConfig::tail_tol)},
      {"samples", integer(&RunConfig::samples)},
      {"slot_samples", integer(&RunConfig::slot_samples)},
      {"slot_height", real(&RunConfig::slot_height)},
      {"out", [](RunConfig& c, const std::string&, const std::string& v) { c.out = v; }},
  };
  return s;
}

}  // namespace

AssemblyOptions RunConfig::assembly() const {
  AssemblyOptions a;
  a.density = density;
  a.tail_tol = tail_tol;
  a.solve.sing_rel = sing_rel;
  return a;
}

SlotOptions RunConfig::slots() const {
  SlotOptions s;
  s.height = slot_height;
  s.samples = slot_samples;
  return s;
}

MonodromyOptions RunConfig::monodromy() const {
  MonodromyOptions m;
  m.samples = samples;
  m.pair_tol = pair_tol;
  m.harmonic_tol = harmonic_tol;
  return m;
}

RenormOptions RunConfig::renorm() const {
  RenormOptions r;
  r.shape.pair.assembly = assembly();
  r.shape.pair.slots = slots();
  r.shape.pair.degenerate_tol = degenerate_tol;
  r.shape.monodromy = monodromy();
  r.shape.shape_tol = shape_tol;
  r.rational_tol = rational_tol;
  r.degenerate_tol = degenerate_tol;
  return r;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

void set(RunConfig& c, const std::string& key, const std::string& value) {
  auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown configuration key '" + key + "'");
  it->second(c, key, trim(value));
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    set(base, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read configuration file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), base);
}

void validate(const RunConfig& c) {
  const std::pair<const char*, double> positive[] = {
      {"residual_tol", c.residual_tol}, {"det_tol", c.det_tol},       {"fit_tol", c.fit_tol},
      {"shape_tol", c.shape_tol},       {"order_tol", c.order_tol},     {"harmonic_tol", c.harmonic_tol},
      {"pair_tol", c.pair_tol},
      {"sing_rel", c.sing_rel},         {"denom_guard", c.denom_guard}, {"degenerate_tol", c.degenerate_tol},
      {"rational_tol", c.rational_tol}, {"density", c.density},       {"tail_tol", c.tail_tol},
  };
  for (auto [k, v] : positive)
    if (!(v > 0.0)) throw ConfigError(std::string(k) + " must be positive");
  if (c.samples < 64) throw ConfigError("samples must be at least 64");
  if (c.slot_samples < 64) throw ConfigError("slot_samples must be at least 64");
  if (!(c.slot_height >= 8.0)) throw ConfigError("slot_height must be at least 8");
}

cplx parse_complex(const std::string& s) {
  std::string t = trim(s);
  size_t comma = t.find(',');
  if (comma == std::string::npos) return to_double("complex", t);
  return {to_double("complex", trim(t.substr(0, comma))), to_double("complex", trim(t.substr(comma + 1)))};
}

}  // namespace monodromize::cli
