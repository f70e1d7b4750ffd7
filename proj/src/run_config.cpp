#include "iontherm/run_config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "iontherm/closedform.hpp"
#include "iontherm/units.hpp"

namespace iontherm::config {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_fields() {
  static const std::map<std::string, std::set<std::string>> k = {
      {"trap", {"ions", "omega", "omega_x", "omega_y", "g", "delta", "delta_x", "delta_y"}},
      {"protocol", {"kind", "phase", "duration"}},
      {"experiment", {"T", "shots", "trials", "seed", "bracket", "bootstrap", "model"}},
      {"output", {"csv"}}};
  return k;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

class Reader {
 public:
  Reader(std::istream& in, std::string source) : source_(std::move(source)) {
    // Blank out comment lines so the INI parser and our line index agree.
    std::ostringstream cleaned;
    std::string line, section;
    int no = 0;
    while (std::getline(in, line)) {
      ++no;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#' || t[0] == ';') {
        cleaned << '\n';
        continue;
      }
      if (t.front() == '[' && t.back() == ']') {
        section = trim(t.substr(1, t.size() - 2));
        sections_[section] = no;
      } else if (const auto eq = t.find('='); eq != std::string::npos) {
        lines_[section + "." + trim(t.substr(0, eq))] = no;
      }
      cleaned << line << '\n';
    }
    std::istringstream src(cleaned.str());
    try {
      pt::read_ini(src, tree_);
    } catch (const pt::ini_parser_error& e) {
      std::ostringstream msg;
      msg << source_ << ":" << e.line() << ": " << e.message();
      throw ConfigError(msg.str());
    }
    for (const auto& [sec, body] : tree_) {
      const auto it = known_fields().find(sec);
      if (it == known_fields().end()) fail_at(sections_[sec], "unknown section [" + sec + "]");
      for (const auto& [key, _] : body)
        if (!it->second.count(key)) fail_at(lines_[sec + "." + key], "unknown field [" + sec + "] " + key);
    }
  }

  bool has(const std::string& sec, const std::string& key) const {
    return static_cast<bool>(tree_.get_optional<std::string>(pt::ptree::path_type(sec + "." + key, '.')));
  }

  std::string raw(const std::string& sec, const std::string& key) const {
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(sec + "." + key, '.'));
    if (!v) throw ConfigError(source_ + ": missing required field [" + sec + "] " + key);
    return units::unquote(*v);
  }

  // Converts a field, prefixing conversion errors with file, line and field.
  template <class F>
  auto get(const std::string& sec, const std::string& key, F convert) const {
    const std::string v = raw(sec, key);
    try {
      return convert(v);
    } catch (const std::exception& e) {
      fail_at(line_of(sec, key), "field [" + sec + "] " + key + ": " + e.what());
    }
    return decltype(convert(v))();
  }

  int line_of(const std::string& sec, const std::string& key) const {
    const auto it = lines_.find(sec + "." + key);
    return it == lines_.end() ? 0 : it->second;
  }

  [[noreturn]] void fail_at(int line, const std::string& what) const {
    std::ostringstream msg;
    msg << source_ << ":" << line << ": " << what;
    throw ConfigError(msg.str());
  }

 private:
  std::string source_;
  pt::ptree tree_;
  std::map<std::string, int> sections_, lines_;
};

template <class T>
T parse_integer(const std::string& s) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected an integer, got '" + s + "'");
  }
  if (pos != s.size()) throw std::invalid_argument("expected an integer, got '" + s + "'");
  return static_cast<T>(v);
}

std::uint64_t parse_seed(const std::string& s) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    if (!s.empty() && s[0] == '-') throw std::invalid_argument("negative");
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected an unsigned 64-bit integer, got '" + s + "'");
  }
  if (pos != s.size()) throw std::invalid_argument("expected an unsigned 64-bit integer, got '" + s + "'");
  return v;
}

}  // namespace

double RunConfig::resolved_duration() const {
  return duration ? *duration : closedform::optimal_time(trap.theta());
}

double RunConfig::resolved_temperature() const {
  return temperature ? *temperature : closedform::optimal_temperature(trap.omega_x).temperature;
}

estimate::CrbExperimentConfig RunConfig::experiment() const {
  estimate::CrbExperimentConfig e;
  e.T_true = resolved_temperature();
  e.shots = shots;
  e.trials = trials;
  e.seed = seed;
  e.bracket_lo = bracket_lo;
  e.bracket_hi = bracket_hi;
  e.bootstrap = bootstrap;
  return e;
}

std::string RunConfig::canonical() const {
  using units::format;
  std::ostringstream s;
  s << "ions=" << trap.n_ions << ";omega_x=" << format(trap.omega_x) << ";omega_y=" << format(trap.omega_y)
    << ";g=" << format(trap.g) << ";delta_x=" << format(trap.delta_x) << ";delta_y=" << format(trap.delta_y)
    << ";kind=" << model::to_string(kind) << ";phase=" << format(phase)
    << ";duration=" << format(resolved_duration()) << ";T=" << format(resolved_temperature()) << ";shots=" << shots
    << ";trials=" << trials << ";seed=" << seed << ";bracket=" << format(bracket_lo) << ".." << format(bracket_hi)
    << ";bootstrap=" << bootstrap << ";model=" << model;
  return s.str();
}

RunConfig parse_run_config(std::istream& in, const std::string& source_name) {
  const Reader r(in, source_name);
  auto freq = [](const std::string& v) { return units::angular_frequency(v); };
  RunConfig c;

  if (r.has("trap", "ions")) c.trap.n_ions = r.get("trap", "ions", parse_integer<int>);
  if (r.has("trap", "omega")) {
    c.trap.omega_x = c.trap.omega_y = r.get("trap", "omega", freq);
  } else {
    c.trap.omega_x = r.get("trap", "omega_x", freq);
    c.trap.omega_y = r.get("trap", "omega_y", freq);
  }
  c.trap.g = r.get("trap", "g", freq);

  if (r.has("protocol", "kind")) c.kind = r.get("protocol", "kind", model::parse_kind);
  if (r.has("trap", "delta")) {
    c.trap.delta_x = r.get("trap", "delta", freq);
    c.trap.delta_y = c.kind == model::EffectiveKind::TwoModeSqueezing ? -c.trap.delta_x : c.trap.delta_x;
  } else {
    c.trap.delta_x = r.get("trap", "delta_x", freq);
    c.trap.delta_y = r.get("trap", "delta_y", freq);
  }
  try {
    c.trap.validate();
  } catch (const std::exception& e) {
    r.fail_at(r.line_of("trap", "omega"), std::string("[trap]: ") + e.what());
  }

  if (r.has("protocol", "phase")) c.phase = r.get("protocol", "phase", [](const std::string& v) { return units::angle(v); });
  if (r.has("protocol", "duration") && r.raw("protocol", "duration") != "optimal") {
    c.duration = r.get("protocol", "duration", [](const std::string& v) {
      const double t = units::time(v);
      if (!(t >= 0)) throw std::invalid_argument("duration must be >= 0");
      return t;
    });
  }

  if (r.raw("experiment", "T") != "optimal") {
    c.temperature = r.get("experiment", "T", [](const std::string& v) {
      const double t = units::temperature(v);
      if (!(t > 0)) throw std::invalid_argument("temperature must be > 0");
      return t;
    });
  }
  c.shots = r.get("experiment", "shots", parse_integer<std::int64_t>);
  c.trials = r.get("experiment", "trials", parse_integer<int>);
  c.seed = r.get("experiment", "seed", parse_seed);
  if (r.has("experiment", "bracket")) {
    const auto [lo, hi] = r.get("experiment", "bracket", [](const std::string& v) {
      const auto comma = v.find(',');
      if (comma == std::string::npos) throw std::invalid_argument("expected \"lo, hi\"");
      const double a = units::temperature(v.substr(0, comma)), b = units::temperature(v.substr(comma + 1));
      if (!(a > 0 && b > a)) throw std::invalid_argument("bracket must satisfy 0 < lo < hi");
      return std::make_pair(a, b);
    });
    c.bracket_lo = lo;
    c.bracket_hi = hi;
  }
  if (r.has("experiment", "bootstrap")) c.bootstrap = r.get("experiment", "bootstrap", parse_integer<int>);
  if (r.has("experiment", "model")) {
    c.model = r.get("experiment", "model", [](const std::string& v) {
      if (v != "closed" && v != "numeric") throw std::invalid_argument("expected closed or numeric, got '" + v + "'");
      return v;
    });
  }
  if (r.has("output", "csv")) c.csv = r.raw("output", "csv");

  try {
    c.experiment().validate();
  } catch (const std::exception& e) {
    r.fail_at(r.line_of("experiment", "shots"), std::string("[experiment]: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_run_config(in, path);
}

ProtocolModels make_models(const RunConfig& cfg, double t_hi) {
  ProtocolModels m;
  m.duration = cfg.resolved_duration();
  const double theta_t = std::abs(cfg.trap.theta()) * m.duration;
  const auto& trap = cfg.trap;
  using model::EffectiveKind;

  if (cfg.model == "closed") {
    if (trap.omega_x != trap.omega_y)
      throw std::invalid_argument("closed-form models need omega_x == omega_y; use model = numeric");
    const double w = trap.omega_x;
    if (cfg.kind == EffectiveKind::BeamSplitter && trap.n_ions == 1) {
      m.rho = fisher::bs_closed(theta_t, w, cfg.phase);
      m.description = "closed form, beam splitter, j = 1/2";
    } else if (cfg.kind == EffectiveKind::BeamSplitter && trap.n_ions == 2 && cfg.phase == 0.0) {
      m.rho = fisher::j1_closed(theta_t, w);
      m.description = "closed form, beam splitter, j = 1";
    } else if (cfg.kind == EffectiveKind::TwoModeSqueezing && trap.n_ions == 1 && cfg.phase == 0.0) {
      m.rho = [theta_t, w](double T) {
        const double p = closedform::p_up_tms(theta_t, model::nbar_from_temperature(T, w));
        CMatrix r = CMatrix::Zero(2, 2);
        r(0, 0) = p;
        r(1, 1) = 1.0 - p;
        return r;
      };
      m.description = "closed form, two-mode squeezing, j = 1/2";
    } else {
      throw std::invalid_argument("no closed form for kind " + model::to_string(cfg.kind) + " with " +
                                  std::to_string(trap.n_ions) + " ions at this phase; use model = numeric");
    }
  } else if (cfg.model == "numeric") {
    protocol::RamseyConfig rc;
    rc.kind = cfg.kind;
    rc.trap = trap;
    rc.pulse_phase = cfg.phase;
    rc.initial_spin = trap.n_ions == 1 ? protocol::InitialSpin::EqualSuperposition : protocol::InitialSpin::PolarizedX;
    auto engine = fisher::engine_for(rc, t_hi, m.duration);
    m.rho = fisher::numeric_density(std::move(engine), trap, m.duration, cfg.phase);
    m.description = "numeric evolution, kind " + model::to_string(cfg.kind);
  } else {
    throw std::invalid_argument("unknown model '" + cfg.model + "'");
  }
  m.prob = fisher::populations(m.rho);
  return m;
}

void CsvTable::add(std::vector<double> row) {
  if (row.size() != columns.size()) throw std::logic_error("CsvTable: row width does not match the header");
  rows.push_back(std::move(row));
}

void CsvTable::write(std::ostream& out) const {
  out << "# params: " << params << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << (std::isnan(r[i]) ? "" : units::format(r[i]));
    out << '\n';
  }
}

void CsvTable::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write '" + path + "'");
  write(out);
}

}  // namespace iontherm::config
