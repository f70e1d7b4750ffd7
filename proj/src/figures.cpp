#include "iontherm/figures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "iontherm/closedform.hpp"
#include "iontherm/units.hpp"

namespace iontherm::figures {

namespace {

using model::EffectiveKind;
using protocol::InitialSpin;
using protocol::RamseyConfig;
using protocol::RamseyEvolution;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) { return units::format(v); }
// 5e-6 -> "5uK"; rounds away binary noise from the unit conversion.
std::string micro_kelvin(double T) { return fmt(std::round(T * 1e12) / 1e6) + "uK"; }

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ",") + fmt(x);
  return s;
}

struct Setup {
  model::TrapConfig trap;
  double phi = 0.0;
  int points = 400;
  std::vector<double> omegas, temps, nbars;
};

Setup setup(const FigureOptions& o, int default_points, std::vector<double> temps, std::vector<double> nbars,
            std::vector<double> omegas = {4e6}) {
  Setup s;
  if (o.g) s.trap.g = *o.g;
  if (o.delta) s.trap.delta_x = s.trap.delta_y = *o.delta;
  s.phi = o.phi.value_or(0.0);
  s.points = o.points.value_or(default_points);
  s.omegas = o.omegas.empty() ? omegas : o.omegas;
  s.temps = o.temperatures.empty() ? temps : o.temperatures;
  s.nbars = o.nbars.empty() ? nbars : o.nbars;
  if (s.points < 2) throw std::invalid_argument("figure: need at least 2 grid points");
  for (double w : s.omegas)
    if (!(w > 0)) throw std::invalid_argument("figure: omega must be > 0");
  for (double T : s.temps)
    if (!(T > 0)) throw std::invalid_argument("figure: temperatures must be > 0");
  for (double n : s.nbars)
    if (!(n >= 0)) throw std::invalid_argument("figure: nbar must be >= 0");
  s.trap.omega_x = s.trap.omega_y = s.omegas.front();
  s.trap.validate();
  return s;
}

std::string params(int n, const Setup& s, const std::string& extra = "") {
  std::ostringstream p;
  p << "figure=" << n << ";g=" << fmt(s.trap.g) << ";delta_x=" << fmt(s.trap.delta_x)
    << ";delta_y=" << fmt(s.trap.delta_y) << ";theta=" << fmt(s.trap.theta()) << ";phi=" << fmt(s.phi)
    << ";points=" << s.points;
  if (!extra.empty()) p << ";" << extra;
  return p.str();
}

RamseyConfig ramsey(const model::TrapConfig& trap, EffectiveKind kind, int ions, double t_max, double nbar) {
  RamseyConfig c;
  c.kind = kind;
  c.trap = trap;
  c.trap.n_ions = ions;
  if (kind == EffectiveKind::TwoModeSqueezing) c.trap.delta_y = -c.trap.delta_x;
  c.initial_spin = ions == 1 ? InitialSpin::EqualSuperposition : InitialSpin::PolarizedX;
  c.duration = t_max;
  c.thermal = protocol::thermal_for(c, nbar, nbar, t_max);
  return c;
}

// F value or NaN when the stencil meets an eigenvalue crossing.
template <class F>
double guarded(F f) {
  try {
    return f();
  } catch (const PhysicsError&) {
    return kNaN;
  }
}

std::vector<FigureOutput> figure1(const FigureOptions& o) {
  const Setup s = setup(o, 400, {}, {0.15, 0.1, 0.05});
  const double theta = s.trap.theta();
  const auto angles = grid(0.0, 4 * kPi, s.points);
  config::CsvTable tab;
  tab.params = params(1, s, "kind=full;nbar=" + join(s.nbars));
  tab.columns = {"theta_t", "t_s"};
  for (double n : s.nbars) {
    const std::string l = "_nbar" + fmt(n);
    for (auto c : {"p_up_numeric", "p_up_closed", "p_up_numeric_ground_y", "p_up_closed_ground_y"})
      tab.columns.push_back(c + l);
  }
  std::vector<std::vector<double>> cols;
  for (double n : s.nbars) {
    const RamseyEvolution ev(ramsey(s.trap, EffectiveKind::FullSideband, 1, angles.back() / theta, n));
    std::vector<double> a, b, c, d;
    for (double x : angles) {
      a.push_back(ev.state(x / theta, n, n, s.phi).rho.matrix()(0, 0).real());
      b.push_back(closedform::p_up_bs(x, n, s.phi));
      c.push_back(ev.state(x / theta, n, 0.0, s.phi).rho.matrix()(0, 0).real());
      d.push_back(closedform::p_up_ground_y(x, n));
    }
    for (auto* v : {&a, &b, &c, &d}) cols.push_back(std::move(*v));
  }
  for (std::size_t i = 0; i < angles.size(); ++i) {
    std::vector<double> row = {angles[i], angles[i] / theta};
    for (const auto& c : cols) row.push_back(c[i]);
    tab.add(row);
  }
  return {{"", tab}};
}

std::vector<FigureOutput> figure2(const FigureOptions& o) {
  const Setup s = setup(o, 400, {5e-6, 6e-6, 7e-6}, {});
  const double theta = s.trap.theta();
  const double w = s.trap.omega_x;
  const auto angles = grid(0.0, 2 * kPi, s.points);
  const double t_hi = *std::max_element(s.temps.begin(), s.temps.end());

  config::CsvTable a;
  a.params = params(2, s, "kind=bs;omega=" + fmt(w) + ";T=" + join(s.temps));
  a.columns = {"theta_t", "t_s"};
  for (double T : s.temps) {
    a.columns.push_back("F_cl_numeric_T" + micro_kelvin(T));
    a.columns.push_back("F_cl_closed_T" + micro_kelvin(T));
  }
  RamseyConfig rc = ramsey(s.trap, EffectiveKind::BeamSplitter, 1, angles.back() / theta, 0.0);
  const auto engine = fisher::engine_for(rc, t_hi, angles.back() / theta);
  for (double x : angles) {
    std::vector<double> row = {x, x / theta};
    const auto prob = fisher::populations(fisher::numeric_density(engine, s.trap, x / theta, s.phi));
    for (double T : s.temps) {
      row.push_back(guarded([&] { return fisher::classical_fisher(prob, T); }));
      row.push_back(s.phi == 0.0 ? closedform::fcl_bs(T, w, x)
                                 : fisher::classical_fisher(fisher::populations(fisher::bs_closed(x, w, s.phi)), T));
    }
    a.add(row);
  }

  // Companion: F_CL at t_max = pi / theta against T for several trap frequencies.
  const std::vector<double> omegas = o.omegas.empty() ? std::vector<double>{2e6, 4e6, 6e6} : o.omegas;
  const auto temps = grid(1e-6, 30e-6, 120);
  config::CsvTable b;
  b.params = params(2, s, "kind=bs;theta_t=pi;omega=" + join(omegas));
  b.columns = {"T_K"};
  std::vector<fisher::ProbModel> numeric;
  for (double om : omegas) {
    b.columns.push_back("F_cl_numeric_omega" + fmt(om));
    b.columns.push_back("F_cl_closed_omega" + fmt(om));
    model::TrapConfig tr = s.trap;
    tr.omega_x = tr.omega_y = om;
    RamseyConfig r2 = ramsey(tr, EffectiveKind::BeamSplitter, 1, kPi / theta, 0.0);
    numeric.push_back(fisher::populations(
        fisher::numeric_density(fisher::engine_for(r2, temps.back(), kPi / theta), tr, kPi / theta, 0.0)));
  }
  for (double T : temps) {
    std::vector<double> row = {T};
    for (std::size_t k = 0; k < omegas.size(); ++k) {
      row.push_back(guarded([&] { return fisher::classical_fisher(numeric[k], T); }));
      row.push_back(closedform::fcl_bs(T, omegas[k], kPi));
    }
    b.add(row);
  }
  return {{"", a}, {"_b", b}};
}

std::vector<FigureOutput> figure3(const FigureOptions& o) {
  const Setup s = setup(o, 400, {}, {0.15});
  const double theta = s.trap.theta();
  const double n = s.nbars.front();
  const double t = kPi / theta;
  const RamseyEvolution ev(ramsey(s.trap, EffectiveKind::BeamSplitter, 1, t, n));
  config::CsvTable tab;
  tab.params = params(3, s, "kind=bs;theta_t=pi;nbar=" + fmt(n));
  tab.columns = {"phi",
                 "p_up_numeric",
                 "p_up_closed",
                 "p_down_numeric",
                 "p_down_closed",
                 "re_p_up_down_numeric",
                 "re_p_up_down_closed",
                 "im_p_up_down_numeric",
                 "im_p_up_down_closed"};
  for (double phi : grid(0.0, 2 * kPi, s.points)) {
    const CMatrix r = ev.state(t, n, n, phi).rho.matrix();
    const cplx c = closedform::coherence_bs(kPi, n, phi);
    tab.add({phi, r(0, 0).real(), closedform::p_up_bs(kPi, n, phi), r(1, 1).real(), closedform::p_down_bs(kPi, n, phi),
             r(0, 1).real(), c.real(), r(0, 1).imag(), c.imag()});
  }
  return {{"", tab}};
}

std::vector<FigureOutput> figure4(const FigureOptions& o) {
  const Setup s = setup(o, 400, {}, {0.1});
  const double theta = s.trap.theta();
  const double n = s.nbars.front();
  const auto angles = grid(0.0, 4 * kPi, s.points);
  const RamseyEvolution ev(ramsey(s.trap, EffectiveKind::FullSideband, 2, angles.back() / theta, n));
  config::CsvTable tab;
  tab.params = params(4, s, "kind=full;ions=2;nbar=" + fmt(n));
  tab.columns = {"theta_t",      "t_s",          "p_1_numeric",        "p_1_closed",        "p_0_numeric",
                 "p_0_closed",   "p_m1_numeric", "p_m1_closed",        "re_p_1m1_numeric",  "re_p_1m1_closed",
                 "im_p_1m1_numeric", "im_p_1m1_closed"};
  for (double x : angles) {
    const CMatrix r = ev.state(x / theta, n, n, 0.0).rho.matrix();
    const auto p = closedform::pops_j1(x, n);
    const cplx c = closedform::coh_j1(x, n);
    tab.add({x, x / theta, r(0, 0).real(), p[0], r(1, 1).real(), p[1], r(2, 2).real(), p[2], r(0, 2).real(), c.real(),
             r(0, 2).imag(), c.imag()});
  }
  return {{"", tab}};
}

std::vector<FigureOutput> figure5(const FigureOptions& o) {
  const Setup s = setup(o, 400, {5e-6, 15e-6}, {});
  const double theta = s.trap.theta();
  const double w = s.trap.omega_x;
  const auto angles = grid(0.0, 4 * kPi, s.points);
  const double t_max = angles.back() / theta;
  const double t_hi = *std::max_element(s.temps.begin(), s.temps.end());
  const auto j1 = fisher::engine_for(ramsey(s.trap, EffectiveKind::BeamSplitter, 2, t_max, 0.0), t_hi, t_max);
  const auto j32 = fisher::engine_for(ramsey(s.trap, EffectiveKind::BeamSplitter, 3, t_max, 0.0), t_hi, t_max);
  model::TrapConfig t2 = s.trap, t3 = s.trap;
  t2.n_ions = 2;
  t3.n_ions = 3;

  config::CsvTable tab;
  tab.params = params(5, s, "kind=bs;omega=" + fmt(w) + ";T=" + join(s.temps));
  tab.columns = {"theta_t", "t_s"};
  for (double T : s.temps)
    for (auto c : {"F_q_j1_numeric", "F_q_j1_closed", "F_q_nc_j1_numeric", "F_q_nc_j1_closed", "F_q_j3half_numeric",
                   "F_q_nc_j3half_numeric", "F_q_jhalf_closed", "F_q_jhalf_max_closed"})
      tab.columns.push_back(std::string(c) + "_T" + micro_kelvin(T));

  std::vector<double> half_max;
  for (double T : s.temps) {
    double m = 0.0;
    for (double x : grid(0.0, 2 * kPi, 4001)) m = std::max(m, closedform::fcl_bs(T, w, x));
    half_max.push_back(m);
  }
  for (double x : angles) {
    std::vector<double> row = {x, x / theta};
    for (std::size_t k = 0; k < s.temps.size(); ++k) {
      const double T = s.temps[k];
      fisher::QfiResult a, b, c;
      const bool ok_a = std::isfinite(guarded([&] {
        a = fisher::qfi(fisher::numeric_density(j1, t2, x / theta, 0.0), T);
        return 0.0;
      }));
      const bool ok_b = std::isfinite(guarded([&] {
        b = fisher::qfi(fisher::j1_closed(x, w), T);
        return 0.0;
      }));
      const bool ok_c = std::isfinite(guarded([&] {
        c = fisher::qfi(fisher::numeric_density(j32, t3, x / theta, 0.0), T);
        return 0.0;
      }));
      row.push_back(ok_a ? a.total : kNaN);
      row.push_back(ok_b ? b.total : kNaN);
      row.push_back(ok_a ? a.nonclassical_part : kNaN);
      row.push_back(ok_b ? b.nonclassical_part : kNaN);
      row.push_back(ok_c ? c.total : kNaN);
      row.push_back(ok_c ? c.nonclassical_part : kNaN);
      row.push_back(closedform::fcl_bs(T, w, x));
      row.push_back(half_max[k]);
    }
    tab.add(row);
  }
  return {{"", tab}};
}

std::vector<FigureOutput> figure6(const FigureOptions& o) {
  const Setup s = setup(o, 400, {}, {0.1});
  const double theta = s.trap.theta();
  const double n = s.nbars.front();
  const auto angles = grid(0.0, 5.0, s.points);
  const RamseyEvolution ev(ramsey(s.trap, EffectiveKind::TwoModeSqueezing, 1, angles.back() / theta, n));
  config::CsvTable tab;
  tab.params = params(6, s, "kind=tms;delta_y=-delta_x;nbar=" + fmt(n));
  tab.columns = {"theta_t",        "t_s",          "p_up_numeric",   "p_up_closed", "p_up_closed_printed",
                 "p_down_numeric", "p_down_closed", "max_abs_offdiag_numeric"};
  for (double x : angles) {
    const CMatrix r = ev.state(x / theta, n, n, 0.0).rho.matrix();
    const double p = closedform::p_up_tms(x, n);
    tab.add({x, x / theta, r(0, 0).real(), p, closedform::p_up_tms_printed(x, n).value, r(1, 1).real(), 1.0 - p,
             std::abs(r(0, 1))});
  }
  return {{"", tab}};
}

std::vector<FigureOutput> figure7(const FigureOptions& o) {
  const Setup s = setup(o, 100, {5e-6, 6e-6, 7e-6}, {});
  const double theta = s.trap.theta();
  const double w = s.trap.omega_x;
  const auto angles = grid(0.0, 5.0, s.points);
  const double t_hi = *std::max_element(s.temps.begin(), s.temps.end());
  model::TrapConfig trap = s.trap;
  trap.delta_y = -trap.delta_x;
  const auto engine =
      fisher::engine_for(ramsey(s.trap, EffectiveKind::TwoModeSqueezing, 1, angles.back() / theta, 0.0), t_hi,
                         angles.back() / theta);
  config::CsvTable tab;
  tab.params = params(7, s, "kind=tms;delta_y=-delta_x;omega=" + fmt(w) + ";T=" + join(s.temps));
  tab.columns = {"theta_t", "t_s"};
  for (double T : s.temps) {
    tab.columns.push_back("F_cl_numeric_T" + micro_kelvin(T));
    tab.columns.push_back("F_cl_closed_T" + micro_kelvin(T));
  }
  for (double x : angles) {
    std::vector<double> row = {x, x / theta};
    const auto numeric = fisher::populations(fisher::numeric_density(engine, trap, x / theta, 0.0));
    const fisher::ProbModel closed = [x, w](double T) {
      const double p = closedform::p_up_tms(x, model::nbar_from_temperature(T, w));
      RVector v(2);
      v << p, 1.0 - p;
      return v;
    };
    for (double T : s.temps) {
      row.push_back(guarded([&] { return fisher::classical_fisher(numeric, T); }));
      row.push_back(guarded([&] { return fisher::classical_fisher(closed, T); }));
    }
    tab.add(row);
  }
  return {{"", tab}};
}

}  // namespace

std::vector<double> grid(double lo, double hi, int points) {
  if (points < 2) throw std::invalid_argument("grid: need at least 2 points");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = lo + (hi - lo) * i / (points - 1);
  return g;
}

std::vector<FigureOutput> make_figure(int number, const FigureOptions& options) {
  switch (number) {
    case 1: return figure1(options);
    case 2: return figure2(options);
    case 3: return figure3(options);
    case 4: return figure4(options);
    case 5: return figure5(options);
    case 6: return figure6(options);
    case 7: return figure7(options);
    default: throw std::invalid_argument("figure: number must be 1..7, got " + std::to_string(number));
  }
}

}  // namespace iontherm::figures
