#pragma once

#include <string>
#include <vector>

#include "monodromize/harper.hpp"

namespace monodromize::cli {

struct RunConfig {
  // check thresholds
  double residual_tol = 1e-6;
  double det_tol = 1e-7;
  double fit_tol = 1e-3;
  double shape_tol = 1e-4;
  double order_tol = 1e-5;  // harmonics beyond the order, relative
  // solver guards
  double harmonic_tol = 1e-6;
  double pair_tol = 1e-8;
  double sing_rel = 1e-8;
  double denom_guard = 1e-8;
  double degenerate_tol = 1e-8;
  double rational_tol = 1e-12;
  // quadrature and sampling
  double density = 0.5;
  double tail_tol = 1e-12;
  int samples = 64;  // monodromy samples per period
  int slot_samples = 64;
  double slot_height = 13.0;
  std::string out;

  AssemblyOptions assembly() const;
  SlotOptions slots() const;
  MonodromyOptions monodromy() const;
  RenormOptions renorm() const;
};

// Names accepted by set() and in config files.
const std::vector<std::string>& config_keys();

// Unknown keys, malformed values and violated bounds.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

void set(RunConfig& c, const std::string& key, const std::string& value);
// key = value lines; '#' starts a comment.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});
// tolerances positive, sample counts >= 64, slot height >= 8
void validate(const RunConfig& c);

// "re,im" or "re"
cplx parse_complex(const std::string& s);

}  // namespace monodromize::cli
