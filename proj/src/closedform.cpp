#include "iontherm/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>

namespace iontherm::closedform {

namespace {

double sq(double v) { return v * v; }

void check_nbar(double nbar) {
  if (!(nbar >= 0.0) || !std::isfinite(nbar)) throw std::invalid_argument("closedform: nbar must be finite and >= 0");
}

// 4 nbar (nbar + 1) sin^2(angle)
double thermal_u(double nbar, double angle) {
  check_nbar(nbar);
  return 4.0 * nbar * (nbar + 1.0) * sq(std::sin(angle));
}

double lchoose(int n, int k) { return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0); }

double lfact(int n) { return std::lgamma(n + 1.0); }

template <class F>
double bracketed_root(F f, double lo, double hi, const char* what) {
  if (f(lo) * f(hi) > 0) {
    std::ostringstream msg;
    msg << what << ": root not bracketed on [" << lo << ", " << hi << "]";
    throw PhysicsError(msg.str());
  }
  boost::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace

double theta_rate(double g, double delta) {
  const double th = 4.0 * g * g / delta;
  if (!std::isfinite(th) || th == 0.0) throw std::invalid_argument("theta_rate: theta must be finite and nonzero");
  return th;
}

double boltzmann_ratio(double temperature, double omega) {
  if (!(temperature > 0) || !(omega > 0)) throw std::invalid_argument("boltzmann_ratio: T and omega must be > 0");
  return kHbarOverKb * omega / temperature;
}

double bs_contrast(double theta_t, double nbar) { return 1.0 / (1.0 + thermal_u(nbar, 0.5 * theta_t)); }

double p_up_bs(double theta_t, double nbar, double phi) {
  return 0.5 * (1.0 + std::cos(phi) * bs_contrast(theta_t, nbar));
}

double p_down_bs(double theta_t, double nbar, double phi) {
  // 1 - cos(phi) D = 2 sin^2(phi/2) + cos(phi) u / (1 + u)
  const double u = thermal_u(nbar, 0.5 * theta_t);
  return 0.5 * (2.0 * sq(std::sin(0.5 * phi)) + std::cos(phi) * u / (1.0 + u));
}

cplx coherence_bs(double theta_t, double nbar, double phi) {
  return cplx(0.0, -0.5) * std::exp(cplx(0.0, phi)) * std::sin(phi) * bs_contrast(theta_t, nbar);
}

CMatrix spin_density_bs(double theta_t, double nbar, double phi) {
  CMatrix rho(2, 2);
  const cplx c = coherence_bs(theta_t, nbar, phi);
  rho << p_up_bs(theta_t, nbar, phi), c, std::conj(c), p_down_bs(theta_t, nbar, phi);
  return rho;
}

// With E = e^{-x} every hyperbolic factor is rescaled so nothing overflows:
// (cosh x - 1) E = (1-E)^2 / 2 and sinh x E = (1 - E^2) / 2.
double fcl_bs(double temperature, double omega, double theta_t) {
  const double x = boltzmann_ratio(temperature, omega);
  const double e = std::exp(-x);
  const double one_minus_e = -std::expm1(-x);
  const double a = 0.5 * sq(one_minus_e);  // (cosh x - 1) E
  const double s2 = sq(std::sin(0.5 * theta_t));
  const double sh = 0.5 * one_minus_e * (1.0 + e);
  // x^2 sinh^2 x s^2 / (T^2 (cosh x - cos theta t)^2 (cosh x - cos^2(theta t / 2)))
  return sq(x / temperature) * s2 * sq(sh) * e / (sq(a + 2.0 * s2 * e) * (a + s2 * e));
}

double fcl_bs_printed(double temperature, double omega, double theta_t) {
  const double x = boltzmann_ratio(temperature, omega);
  const double e = std::exp(-x);
  const double one_minus_e = -std::expm1(-x);
  const double a = 0.5 * sq(one_minus_e);
  const double s2 = sq(std::sin(0.5 * theta_t));
  const double s4 = sq(std::sin(0.25 * theta_t));
  const double sh = 0.5 * one_minus_e * (1.0 + e);
  // x^2 s^2 sinh^2 x / (T^2 (cosh x - cos(theta t / 2)) (cosh x - cos theta t)^2)
  return sq(x / temperature) * s2 * sq(sh) * e / ((a + 2.0 * s4 * e) * sq(a + 2.0 * s2 * e));
}

double p_up_ground_y(double theta_t, double nbar_x) {
  check_nbar(nbar_x);
  return 0.5 * (1.0 + 1.0 / (1.0 + 2.0 * nbar_x * sq(std::sin(0.5 * theta_t))));
}

double p_down_ground_y(double theta_t, double nbar_x) {
  check_nbar(nbar_x);
  const double v = 2.0 * nbar_x * sq(std::sin(0.5 * theta_t));
  return 0.5 * v / (1.0 + v);
}

double fcl_ground_y(double temperature, double omega_x, double theta_t) {
  const double x = boltzmann_ratio(temperature, omega_x);
  const double e = std::exp(-x);
  const double one_minus_e = -std::expm1(-x);
  const double s2 = sq(std::sin(0.5 * theta_t));
  // x^2 e^{2x} s^2 / (T^2 (e^x - cos theta t)^2 (e^x - cos^2(theta t / 2))), times e^{-3x} / e^{-3x}
  return sq(x / temperature) * s2 * e / (sq(one_minus_e + 2.0 * s2 * e) * (one_minus_e + s2 * e));
}

double fcl_ground_y_printed(double temperature, double omega_x, double theta_t) {
  const double x = boltzmann_ratio(temperature, omega_x);
  const double e = std::exp(-x);
  const double one_minus_e = -std::expm1(-x);
  const double s2 = sq(std::sin(0.5 * theta_t));
  const double c2 = sq(std::cos(0.5 * theta_t));
  return sq(x / temperature) * s2 * e / ((1.0 + c2 * e) * sq(one_minus_e + 2.0 * s2 * e));
}

std::array<double, 3> pops_j1(double theta_t, double nbar) {
  const double u2 = thermal_u(nbar, 0.5 * theta_t);
  const double a = 1.0 / (1.0 + u2);
  const double b = 1.0 / (1.0 + thermal_u(nbar, 0.25 * theta_t));
  const double h = 4.0 * b * std::cos(0.5 * theta_t);
  return {(3.0 + a + h) / 8.0, 0.25 * u2 / (1.0 + u2), (3.0 + a - h) / 8.0};
}

cplx coh_j1(double theta_t, double nbar) {
  const double u2 = thermal_u(nbar, 0.5 * theta_t);
  const double b = 1.0 / (1.0 + thermal_u(nbar, 0.25 * theta_t));
  return cplx(-u2 / (1.0 + u2), 4.0 * b * std::sin(0.5 * theta_t)) / 8.0;
}

CMatrix spin_density_j1(double theta_t, double nbar) {
  const auto p = pops_j1(theta_t, nbar);
  const cplx c = coh_j1(theta_t, nbar);
  CMatrix rho = CMatrix::Zero(3, 3);
  rho(0, 0) = p[0];
  rho(1, 1) = p[1];
  rho(2, 2) = p[2];
  rho(0, 2) = c;
  rho(2, 0) = std::conj(c);
  return rho;
}

CMatrix EigDecompJ1::reconstruct() const {
  return rho_minus * psi_1 * psi_1.adjoint() + rho_zero * psi_0 * psi_0.adjoint() +
         rho_plus * psi_m1 * psi_m1.adjoint();
}

EigDecompJ1 eig_j1(double theta_t, double nbar) {
  EigDecompJ1 e;
  const double u2 = thermal_u(nbar, 0.5 * theta_t);
  const double u4 = thermal_u(nbar, 0.25 * theta_t);
  e.a = 1.0 / (1.0 + u2);
  e.b = 1.0 / (1.0 + u4);
  const double am1 = -u2 / (1.0 + u2);  // a - 1 without cancellation
  const double b = e.b;
  const double s2 = std::sin(0.5 * theta_t);
  const double root = std::sqrt(sq(am1) + 16.0 * sq(b));
  const double q = std::sqrt(sq(am1) + 16.0 * sq(b * s2));
  // sqrt(A^2 + 16 b^2) - 4 b cos(theta t / 2), rearranged to avoid cancellation
  const double denom = sq(am1) / (root + 4.0 * b) + 8.0 * b * sq(std::sin(0.25 * theta_t));

  e.xi = (q == 0.0 && denom == 0.0) ? 0.5 * kPi : std::atan2(q, denom);
  if (am1 != 0.0) {
    e.varphi = std::atan(4.0 * b * s2 / am1);
  } else {
    // a -> 1: continuity of the phase of the coherence
    e.varphi = s2 > 0 ? -0.5 * kPi : (s2 < 0 ? 0.5 * kPi : 0.0);
  }
  e.rho_plus = (3.0 + e.a + root) / 8.0;
  e.rho_minus = (3.0 + e.a - root) / 8.0;
  e.rho_zero = 0.25 * u2 / (1.0 + u2);

  const cplx ph = std::exp(cplx(0.0, e.varphi));
  e.psi_1 = CVector::Zero(3);
  e.psi_0 = CVector::Zero(3);
  e.psi_m1 = CVector::Zero(3);
  e.psi_1 << ph * std::cos(e.xi), 0.0, std::sin(e.xi);
  e.psi_0(1) = 1.0;
  e.psi_m1 << -ph * std::sin(e.xi), 0.0, std::cos(e.xi);
  return e;
}

double squeeze_overlap(int n, int s, double r) {
  if (n < 0 || s < 0) throw std::invalid_argument("squeeze_overlap: Fock indices must be >= 0");
  if (r == 0.0) return 1.0;
  const double lt = 2.0 * std::log(std::abs(std::tanh(r)));
  const double ls = -std::log(std::cosh(r));
  long double sum = 0.0L;
  for (int l = 0; l <= std::min(n, s); ++l) {
    const double term = std::exp(lchoose(n, l) + lchoose(s, l) + l * lt + (n + s - 2 * l + 1) * ls);
    sum += (l % 2 ? -1.0L : 1.0L) * term;
  }
  return static_cast<double>(sum);
}

namespace {

int tms_cap(double theta_t, double nbar) {
  const double c = std::cosh(std::min(std::abs(theta_t), 20.0));
  return static_cast<int>(std::min(1e5, std::max(20.0, 10.0 + 20.0 * nbar * c * c)));
}

}  // namespace

SeriesResult p_up_tms_series(double theta_t, double nbar, double series_tol) {
  check_nbar(nbar);
  if (!(theta_t >= 0.0)) throw std::invalid_argument("p_up_tms: theta t must be >= 0");
  if (!(series_tol > 0.0)) throw std::invalid_argument("p_up_tms: series_tol must be > 0");
  SeriesResult res;
  const double q = nbar / (1.0 + nbar);
  const double norm = sq(1.0 / (1.0 + nbar));
  const int cap = tms_cap(theta_t, nbar);
  long double sum = 0.0L;
  for (int shell = 0;; ++shell) {
    if (shell > 2 * cap) {
      std::ostringstream msg;
      msg << "p_up_tms: series not converged within n, s <= " << cap << " (theta t = " << theta_t
          << ", nbar = " << nbar << ")";
      throw PhysicsError(msg.str());
    }
    const double w = norm * std::pow(q, shell);
    long double shell_sum = 0.0L;
    for (int n = 0; n <= shell; ++n) {
      shell_sum += squeeze_overlap(n, shell - n, theta_t);
      ++res.terms;
    }
    sum += w * shell_sum;
    res.max_shell = shell;
    // |<n,s|S|n,s>| <= 1 bounds everything beyond this shell.
    const double tail = q == 0.0 ? 0.0 : std::pow(q, shell + 1) * ((shell + 2) - (shell + 1) * q);
    if (tail < series_tol) break;
  }
  res.value = 0.5 * (1.0 + static_cast<double>(sum));
  return res;
}

double p_up_tms(double theta_t, double nbar, double series_tol) {
  return p_up_tms_series(theta_t, nbar, series_tol).value;
}

SeriesResult p_up_tms_printed(double theta_t, double nbar, double series_tol) {
  check_nbar(nbar);
  if (!(theta_t >= 0.0)) throw std::invalid_argument("p_up_tms_printed: theta t must be >= 0");
  SeriesResult res;
  const double lq = nbar > 0 ? std::log(nbar / (1.0 + nbar)) : -INFINITY;
  const double lnorm = -2.0 * std::log1p(nbar);
  const double lsech = -std::log(std::cosh(theta_t));
  const int cap = tms_cap(theta_t, nbar);
  long double sum = 0.0L;
  int quiet = 0;
  for (int shell = 0; shell <= std::min(2 * cap, 400); ++shell) {
    long double shell_sum = 0.0L;
    for (int n = 0; n <= shell; ++n) {
      const int s = shell - n;
      const double lw = (shell == 0 ? 0.0 : shell * lq) + lnorm;
      for (int l = 0; l <= std::min(n, s); ++l)
        for (int k = 0; k <= std::min(n, s); ++k) {
          const double lt = lw + (n + s - l - k + 1) * lsech + theta_t * (l - k) + lfact(n + s - l - k) + lfact(n) +
                            lfact(s) - lfact(l) - lfact(n - l) - lfact(s - l) - lfact(k) - lfact(n - k) -
                            lfact(s - k);
          shell_sum += std::exp(lt);
        }
      ++res.terms;
    }
    sum += shell_sum;
    res.max_shell = shell;
    if (std::abs(static_cast<double>(shell_sum)) < series_tol) {
      if (++quiet == 2) break;
    } else {
      quiet = 0;
    }
  }
  res.value = 0.5 * (1.0 + static_cast<double>(sum));
  return res;
}

double optimal_time(double theta) {
  if (theta == 0.0 || !std::isfinite(theta)) throw std::invalid_argument("optimal_time: theta must be finite and nonzero");
  return kPi / std::abs(theta);
}

double optimal_phase() { return 0.0; }

Optimum optimal_temperature(double omega) {
  if (!(omega > 0)) throw std::invalid_argument("optimal_temperature: omega must be > 0");
  auto f = [](double x) {
    const double sech = 1.0 / std::cosh(x);
    return x - x * sech * (2.0 + sech) - 4.0 * std::tanh(x);
  };
  Optimum o;
  o.x = bracketed_root(f, 3.0, 6.0, "optimal_temperature");
  o.residual = f(o.x);
  o.temperature = kHbarOverKb * omega / o.x;
  o.bound_constant = sq(o.x) * std::tanh(0.5 * o.x) / std::sqrt(std::cosh(o.x));
  o.delta_t_per_shot = kHbarOverKb * omega / o.bound_constant;
  return o;
}

Optimum optimal_temperature_ground_y(double omega_x) {
  if (!(omega_x > 0)) throw std::invalid_argument("optimal_temperature_ground_y: omega must be > 0");
  auto f = [](double x) { return x * std::tanh(0.5 * x) - 4.0; };
  Optimum o;
  o.x = bracketed_root(f, 3.0, 6.0, "optimal_temperature_ground_y");
  o.residual = f(o.x);
  o.temperature = kHbarOverKb * omega_x / o.x;
  o.bound_constant = sq(o.x) / (2.0 * std::cosh(0.5 * o.x));
  o.delta_t_per_shot = kHbarOverKb * omega_x / o.bound_constant;
  return o;
}

std::pair<CVector, CVector> optimal_basis(double phi) {
  const cplx e = std::exp(cplx(0.0, phi));
  const double c = std::cos(0.5 * phi), s = std::sin(0.5 * phi);
  CVector up(2), down(2);
  up << cplx(0.0, -1.0) * e * c, s;
  down << cplx(0.0, 1.0) * e * s, c;
  return {up, down};
}

}  // namespace iontherm::closedform
