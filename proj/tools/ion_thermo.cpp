// ion-thermo: figures, single runs, Fisher information, optimum and Monte
// Carlo Cramer-Rao checks from the command line.
//
// Exit codes: 0 success, 1 usage or invalid input, 2 physics/convergence error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "iontherm/closedform.hpp"
#include "iontherm/crystal.hpp"
#include "iontherm/estimate.hpp"
#include "iontherm/figures.hpp"
#include "iontherm/run_config.hpp"
#include "iontherm/units.hpp"

using namespace iontherm;

namespace {

// Shared physics flags. Bare numbers are SI; unit suffixes are accepted too.
struct Flags {
  std::string config, out, kind = "bs", model = "closed";
  std::vector<std::string> omega, temps, nbar;
  std::string g, delta, phi;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int ions = 1;
  int points = 0;
  std::string theta_t;
};

std::vector<double> convert(const std::vector<std::string>& v, units::Quantity q) {
  std::vector<double> out;
  for (const auto& s : v) out.push_back(units::parse(s, q, false));
  return out;
}

std::vector<double> numbers(const std::vector<std::string>& v) {
  std::vector<double> out;
  for (const auto& s : v) {
    std::size_t pos = 0;
    double x = 0;
    try {
      x = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != s.size()) throw std::invalid_argument("expected a number, got '" + s + "'");
    out.push_back(x);
  }
  return out;
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  if (suffix.empty()) return path;
  const auto dot = path.rfind('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

void emit(const config::CsvTable& t, const std::string& path) {
  if (path.empty() || path == "-") {
    t.write(std::cout);
  } else {
    t.write(path);
    std::cerr << "wrote " << path << "\n";
  }
}

model::TrapConfig trap_from(const Flags& f) {
  model::TrapConfig t;
  t.n_ions = f.ions;
  if (!f.omega.empty()) {
    const auto w = convert(f.omega, units::Quantity::AngularFrequency);
    t.omega_x = w[0];
    t.omega_y = w.size() > 1 ? w[1] : w[0];
  }
  if (!f.g.empty()) t.g = units::angular_frequency(f.g, false);
  if (!f.delta.empty()) t.delta_x = t.delta_y = units::angular_frequency(f.delta, false);
  if (model::parse_kind(f.kind) == model::EffectiveKind::TwoModeSqueezing) t.delta_y = -t.delta_x;
  t.validate();
  return t;
}

void add_physics(CLI::App* c, Flags& f, bool lists) {
  c->add_option("--omega", f.omega, "Trap frequency (rad/s, or with unit; two values give omega_x, omega_y)")
      ->delimiter(',');
  c->add_option("--g", f.g, "Spin-phonon coupling (rad/s)");
  c->add_option("--delta", f.delta, "Detuning delta_x (rad/s); delta_y = delta_x, or -delta_x for tms");
  c->add_option("--phi", f.phi, "Pulse phase (rad)");
  if (lists) {
    c->add_option("--T", f.temps, "Temperatures (K, comma list; units like 5uK accepted)")->delimiter(',');
    c->add_option("--nbar", f.nbar, "Thermal occupations (comma list)")->delimiter(',');
  }
}

// ---- subcommands ----------------------------------------------------------

int run_figure(int number, const Flags& f) {
  figures::FigureOptions o;
  o.omegas = convert(f.omega, units::Quantity::AngularFrequency);
  o.temperatures = convert(f.temps, units::Quantity::Temperature);
  o.nbars = numbers(f.nbar);
  if (!f.g.empty()) o.g = units::angular_frequency(f.g, false);
  if (!f.delta.empty()) o.delta = units::angular_frequency(f.delta, false);
  if (!f.phi.empty()) o.phi = units::angle(f.phi, false);
  if (f.points > 0) o.points = f.points;
  const std::string base = f.out.empty() ? "fig" + std::to_string(number) + ".csv" : f.out;
  for (const auto& out : figures::make_figure(number, o)) emit(out.table, with_suffix(base, out.suffix));
  return 0;
}

int run_simulate(const Flags& f, double theta_t_max) {
  const model::TrapConfig trap = trap_from(f);
  const auto kind = model::parse_kind(f.kind);
  const double phi = f.phi.empty() ? 0.0 : units::angle(f.phi, false);
  double nbar_x = 0.1, nbar_y = 0.1;
  if (!f.nbar.empty()) {
    const auto n = numbers(f.nbar);
    nbar_x = n[0];
    nbar_y = n.size() > 1 ? n[1] : n[0];
  } else if (!f.temps.empty()) {
    const double T = convert(f.temps, units::Quantity::Temperature)[0];
    nbar_x = model::nbar_from_temperature(T, trap.omega_x);
    nbar_y = model::nbar_from_temperature(T, trap.omega_y);
  }
  const double theta = std::abs(trap.theta());
  const int points = f.points > 0 ? f.points : 200;

  protocol::RamseyConfig rc;
  rc.kind = kind;
  rc.trap = trap;
  rc.pulse_phase = phi;
  rc.initial_spin = trap.n_ions == 1 ? protocol::InitialSpin::EqualSuperposition : protocol::InitialSpin::PolarizedX;
  rc.duration = theta_t_max / theta;
  rc.thermal = protocol::thermal_for(rc, nbar_x, nbar_y, rc.duration);
  const protocol::RamseyEvolution ev(rc);

  const int d = trap.spin().dim();
  const bool same = nbar_x == nbar_y;
  using model::EffectiveKind;
  const bool closed_bs = same && trap.n_ions == 1 && kind != EffectiveKind::TwoModeSqueezing;
  const bool closed_j1 = same && trap.n_ions == 2 && phi == 0.0 && kind != EffectiveKind::TwoModeSqueezing;
  const bool closed_tms = same && trap.n_ions == 1 && phi == 0.0 && kind == EffectiveKind::TwoModeSqueezing;

  config::CsvTable t;
  std::ostringstream p;
  p << "kind=" << model::to_string(kind) << ";ions=" << trap.n_ions << ";omega_x=" << units::format(trap.omega_x)
    << ";omega_y=" << units::format(trap.omega_y) << ";g=" << units::format(trap.g)
    << ";delta_x=" << units::format(trap.delta_x) << ";delta_y=" << units::format(trap.delta_y)
    << ";phi=" << units::format(phi) << ";nbar_x=" << units::format(nbar_x) << ";nbar_y=" << units::format(nbar_y)
    << ";n_max_x=" << rc.thermal.n_max_x << ";n_max_y=" << rc.thermal.n_max_y << ";points=" << points;
  t.params = p.str();
  t.columns = {"theta_t", "t_s"};
  for (int k = 0; k < d; ++k) t.columns.push_back("p_" + std::to_string(k) + "_numeric");
  t.columns.push_back("re_p_first_last_numeric");
  t.columns.push_back("im_p_first_last_numeric");
  t.columns.push_back("max_abs_offdiag_numeric");
  if (closed_bs || closed_j1 || closed_tms)
    for (int k = 0; k < d; ++k) t.columns.push_back("p_" + std::to_string(k) + "_closed");
  for (double x : figures::grid(0.0, theta_t_max, points)) {
    const CMatrix r = ev.state(x / theta, nbar_x, nbar_y, phi).rho.matrix();
    std::vector<double> row = {x, x / theta};
    double off = 0.0;
    for (int a = 0; a < d; ++a) {
      row.push_back(r(a, a).real());
      for (int b = 0; b < d; ++b)
        if (a != b) off = std::max(off, std::abs(r(a, b)));
    }
    row.push_back(r(0, d - 1).real());
    row.push_back(r(0, d - 1).imag());
    row.push_back(off);
    if (closed_bs) {
      row.push_back(closedform::p_up_bs(x, nbar_x, phi));
      row.push_back(closedform::p_down_bs(x, nbar_x, phi));
    } else if (closed_j1) {
      for (double v : closedform::pops_j1(x, nbar_x)) row.push_back(v);
    } else if (closed_tms) {
      const double pu = closedform::p_up_tms(x, nbar_x);
      row.push_back(pu);
      row.push_back(1.0 - pu);
    }
    t.add(row);
  }
  emit(t, f.out);
  return 0;
}

int run_fisher(const Flags& f, bool validation) {
  if (validation) {
    const double w = f.omega.empty() ? 4e6 : convert(f.omega, units::Quantity::AngularFrequency)[0];
    int failures = 0;
    for (const auto& e : fisher::validation_report(w)) {
      std::printf("%-64s points=%-3d textbook_dev=%.3e implemented_dev=%.3e  %s\n", e.name.c_str(), e.points,
                  e.max_rel_deviation, e.max_rel_corrected, e.verdict.c_str());
      if (e.verdict.rfind("VALIDATION FAILURE", 0) == 0) ++failures;
    }
    return failures ? 2 : 0;
  }
  config::RunConfig cfg;
  cfg.trap = trap_from(f);
  cfg.kind = model::parse_kind(f.kind);
  cfg.phase = f.phi.empty() ? 0.0 : units::angle(f.phi, false);
  cfg.model = f.model;
  const double theta = std::abs(cfg.trap.theta());
  cfg.duration = (f.theta_t.empty() ? kPi : units::angle(f.theta_t, false)) / theta;
  std::vector<double> temps = convert(f.temps, units::Quantity::Temperature);
  if (temps.empty()) temps.push_back(closedform::optimal_temperature(cfg.trap.omega_x).temperature);
  const double t_hi = *std::max_element(temps.begin(), temps.end());
  const auto m = config::make_models(cfg, t_hi);

  config::CsvTable t;
  t.params = cfg.canonical() + ";models=" + m.description;
  t.columns = {"T_K", "theta_t", "t_s", "F_cl", "F_q", "F_q_classical", "F_q_nonclassical", "dT_per_shot_K"};
  for (double T : temps) {
    const auto r = fisher::fisher_report(m.prob, m.rho, T, m.duration);
    t.add({T, theta * m.duration, m.duration, r.F_cl, r.F_q, r.F_q_classical_part, r.F_q_nonclassical_part,
           r.F_q > 0 ? std::sqrt(r.crb_variance(1)) : std::nan("")});
  }
  emit(t, f.out);
  return 0;
}

int run_optimum(const Flags& f) {
  if (f.omega.empty()) throw std::invalid_argument("optimum: --omega is required");
  const double w = convert(f.omega, units::Quantity::AngularFrequency)[0];
  if (!(w > 0)) throw std::invalid_argument("optimum: omega must be > 0");
  const auto o = closedform::optimal_temperature(w);
  const auto y = closedform::optimal_temperature_ground_y(w);
  std::printf("omega                      %.6g rad/s\n", w);
  std::printf("hbar omega / k_B           %.6g K\n", kHbarOverKb * w);
  std::printf("both modes thermal:\n");
  std::printf("  x = hbar omega / k_B T   %.6f\n", o.x);
  std::printf("  T_max                    %.6g K\n", o.temperature);
  std::printf("  bound constant           %.6f\n", o.bound_constant);
  std::printf("  delta T per shot         %.6g K\n", o.delta_t_per_shot);
  std::printf("y mode in ground state:\n");
  std::printf("  x                        %.6f\n", y.x);
  std::printf("  T_max                    %.6g K\n", y.temperature);
  std::printf("  bound constant           %.6f\n", y.bound_constant);
  std::printf("  delta T per shot         %.6g K\n", y.delta_t_per_shot);
  return 0;
}

int run_crb(const Flags& f) {
  if (f.config.empty()) throw std::invalid_argument("crb-experiment: --config is required");
  config::RunConfig cfg = config::load_run_config(f.config);
  if (f.seed_set) cfg.seed = f.seed;
  const auto exp = cfg.experiment();
  const double t_hi = exp.bracket_hi > 0 ? exp.bracket_hi : 10 * exp.T_true;
  const auto m = config::make_models(cfg, t_hi);
  const auto rep = estimate::crb_experiment(exp, m.prob, m.rho);

  // Written by hand rather than through CsvTable: 64-bit seeds do not fit a double.
  auto write = [&](std::ostream& o) {
    o << "# params: " << cfg.canonical() << "\n" << "trial,seed,T_hat_K,converged\n";
    for (const auto& tr : rep.trials)
      o << tr.index << "," << tr.seed << "," << units::format(tr.T_hat) << "," << tr.converged << "\n";
  };
  const std::string out = f.out.empty() ? cfg.csv : f.out;
  const bool csv_to_stdout = out.empty() || out == "-";
  if (csv_to_stdout) {
    write(std::cout);
  } else {
    std::ofstream o(out);
    if (!o) throw std::invalid_argument("cannot write '" + out + "'");
    write(o);
    std::cerr << "wrote " << out << "\n";
  }
  std::FILE* s = csv_to_stdout ? stderr : stdout;
  std::fprintf(s, "seed                 %llu\n", static_cast<unsigned long long>(cfg.seed));
  std::fprintf(s, "model                %s\n", m.description.c_str());
  std::fprintf(s, "T_true               %.6g K\n", exp.T_true);
  std::fprintf(s, "duration             %.6g s\n", m.duration);
  std::fprintf(s, "F_q / F_cl           %.6g / %.6g K^-2\n", rep.fisher_q, rep.fisher_cl);
  std::fprintf(s, "CRB 1/(nu F_q)       %.6g K^2\n", rep.crb);
  std::fprintf(s, "converged trials     %d / %d\n", rep.converged, exp.trials);
  std::fprintf(s, "mean T_hat           %.6g K (bias %.3g sd)\n", rep.mean,
               rep.variance > 0 ? rep.bias / std::sqrt(rep.variance) : 0.0);
  std::fprintf(s, "Var(T_hat)           %.6g K^2\n", rep.variance);
  std::fprintf(s, "Var / CRB            %.4f  (95%% bootstrap %.4f .. %.4f)\n", rep.ratio, rep.ratio_ci_lo,
               rep.ratio_ci_hi);
  std::fprintf(s, "chi2 one-sided 1%%    %.2f >= %.2f : %s\n", rep.chi2_statistic, rep.chi2_critical,
               rep.bound_respected ? "variance consistent with the bound" : "VARIANCE BELOW BOUND");
  return 0;
}

int run_modes(int ions, double anisotropy) {
  const auto geo = crystal::solve_equilibrium(ions);
  const auto spec = crystal::transverse_spectrum(geo, anisotropy);
  config::CsvTable t;
  t.params = "ions=" + std::to_string(ions) + ";anisotropy=" + units::format(anisotropy) +
             ";equilibrium_residual=" + units::format(geo.residual) + ";positions=";
  for (std::size_t i = 0; i < geo.positions.size(); ++i)
    t.params += (i ? " " : "") + units::format(geo.positions[i]);
  t.columns = {"mode", "lambda", "frequency_over_omega"};
  for (int i = 0; i < ions; ++i) t.columns.push_back("b_ion" + std::to_string(i));
  for (int n = 0; n < ions; ++n) {
    std::vector<double> row = {static_cast<double>(n), spec.eigenvalues(n), spec.frequency(n)};
    for (int i = 0; i < ions; ++i) row.push_back(spec.eigenvectors(i, n));
    t.add(row);
  }
  t.write(std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trapped-ion quantum thermometry: Ramsey simulations, Fisher information, CRB experiments"};
  app.require_subcommand(1);
  Flags f;

  int fig = 0;
  auto* c_fig = app.add_subcommand("figure", "Write the data of figure 1..7 as CSV");
  c_fig->add_option("n", fig, "Figure number")->required()->check(CLI::Range(1, 7));
  c_fig->add_option("--out", f.out, "Output CSV (companions get a suffix); default figN.csv");
  c_fig->add_option("--points", f.points, "Grid points");
  add_physics(c_fig, f, true);

  double theta_t_max = 2 * kPi;
  auto* c_sim = app.add_subcommand("simulate", "Numeric Ramsey run over a theta*t grid");
  c_sim->add_option("--kind", f.kind, "bs, tms, full or effective")->check(CLI::IsMember({"bs", "tms", "full", "effective"}));
  c_sim->add_option("--ions", f.ions, "Number of ions")->check(CLI::Range(1, 8));
  c_sim->add_option("--theta-t-max", theta_t_max, "End of the theta*t grid");
  c_sim->add_option("--points", f.points, "Grid points (default 200)");
  c_sim->add_option("--out", f.out, "Output CSV (default stdout)");
  add_physics(c_sim, f, true);

  bool validation = false;
  auto* c_fi = app.add_subcommand("fisher", "Classical and quantum Fisher information vs temperature");
  c_fi->add_flag("--validation", validation, "Check the textbook closed forms against finite-difference oracles");
  c_fi->add_option("--kind", f.kind, "bs or tms (closed), any kind with --model numeric")
      ->check(CLI::IsMember({"bs", "tms", "full", "effective"}));
  c_fi->add_option("--ions", f.ions, "Number of ions")->check(CLI::Range(1, 8));
  c_fi->add_option("--model", f.model, "closed or numeric")->check(CLI::IsMember({"closed", "numeric"}));
  c_fi->add_option("--theta-t", f.theta_t, "Interaction time as theta*t (default pi)");
  c_fi->add_option("--out", f.out, "Output CSV (default stdout)");
  add_physics(c_fi, f, true);

  auto* c_opt = app.add_subcommand("optimum", "Optimal temperature and per-shot sensitivity");
  c_opt->add_option("--omega", f.omega, "Trap frequency (rad/s)")->required();

  auto* c_crb = app.add_subcommand("crb-experiment", "Monte Carlo MLE variance vs the Cramer-Rao bound");
  c_crb->add_option("--config", f.config, "INI run configuration")->required();
  c_crb->add_option("--seed", f.seed, "Override the configured seed")->each([&](const std::string&) { f.seed_set = true; });
  c_crb->add_option("--out", f.out, "Per-trial CSV (overrides [output] csv; '-' for stdout)");

  int mode_ions = 3;
  double anisotropy = 0.1;
  auto* c_modes = app.add_subcommand("modes", "Transverse normal modes of a linear crystal");
  c_modes->add_option("--ions", mode_ions, "Number of ions")->check(CLI::Range(1, 50));
  c_modes->add_option("--anisotropy", anisotropy, "omega_z / omega_transverse");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*c_fig) return run_figure(fig, f);
    if (*c_sim) return run_simulate(f, theta_t_max);
    if (*c_fi) return run_fisher(f, validation);
    if (*c_opt) return run_optimum(f);
    if (*c_crb) return run_crb(f);
    if (*c_modes) return run_modes(mode_ions, anisotropy);
  } catch (const PhysicsError& e) {
    std::cerr << "physics error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
