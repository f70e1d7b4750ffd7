#pragma once

// INI-style run configuration for the CLI and the CSV writer shared by all
// subcommands.
//
//   [trap]        ions, omega (or omega_x/omega_y), g, delta (or delta_x/delta_y)
//   [protocol]    kind = bs|tms|full|effective, phase, duration ("optimal" = pi/theta)
//   [experiment]  T ("optimal" = T_max), shots, trials, seed, bracket = "lo, hi",
//                 bootstrap, model = closed|numeric
//   [output]      csv
//
// Physical values need unit suffixes (see units.hpp).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "iontherm/estimate.hpp"
#include "iontherm/model.hpp"

namespace iontherm::config {

/// Parse/validation failure; what() names the file, line and field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  model::TrapConfig trap;
  model::EffectiveKind kind = model::EffectiveKind::BeamSplitter;
  double phase = 0.0;
  std::optional<double> duration;     // unset: optimal
  std::optional<double> temperature;  // unset: optimal
  std::int64_t shots = 10000;
  int trials = 200;
  std::uint64_t seed = 0;
  double bracket_lo = 0.0, bracket_hi = 0.0;  // 0: default [T/10, 10 T]
  int bootstrap = 1000;
  std::string model = "closed";
  std::string csv;

  double resolved_duration() const;
  double resolved_temperature() const;
  estimate::CrbExperimentConfig experiment() const;
  /// key=value;... with every quantity in SI, fixed key order.
  std::string canonical() const;
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(std::istream& in, const std::string& source_name);

/// Probability and density models at the configured duration and phase.
struct ProtocolModels {
  fisher::ProbModel prob;
  fisher::DensityModel rho;
  double duration = 0.0;
  std::string description;
};

/// model = "closed" uses the analytic forms (bs with one or two ions, tms);
/// "numeric" builds the exact evolution valid up to t_hi.
ProtocolModels make_models(const RunConfig& cfg, double t_hi);

struct CsvTable {
  std::string params;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
  void write(std::ostream& out) const;
  void write(const std::string& path) const;
};

}  // namespace iontherm::config
