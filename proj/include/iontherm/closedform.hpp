#pragma once

// Analytic spin populations, coherences and Fisher information of the Ramsey
// protocol. Everything is parameterized by the dimensionless product theta*t
// (theta = 4 g^2 / delta) and by occupations or x = hbar*omega / (k_B T).

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "iontherm/core.hpp"

namespace iontherm::closedform {

/// theta = 4 g^2 / delta; throws std::invalid_argument if zero or not finite.
double theta_rate(double g, double delta);

/// x = hbar omega / (k_B T)
double boltzmann_ratio(double temperature, double omega);

// ---- beam splitter, one ion ----------------------------------------------

/// Contrast 1 / (1 + 4 nbar (nbar + 1) sin^2(theta t / 2)).
double bs_contrast(double theta_t, double nbar);
double p_up_bs(double theta_t, double nbar, double phi);
/// 1 - p_up_bs without cancellation.
double p_down_bs(double theta_t, double nbar, double phi);
/// <up|rho|down>
cplx coherence_bs(double theta_t, double nbar, double phi);
CMatrix spin_density_bs(double theta_t, double nbar, double phi);

/// Classical Fisher information of the phi = 0 measurement, K^-2.
double fcl_bs(double temperature, double omega, double theta_t);
/// The textbook expression with (cosh x - cos(theta t / 2)) as the first
/// denominator factor; kept for the validation report only.
double fcl_bs_printed(double temperature, double omega, double theta_t);

// ---- beam splitter, y mode in its ground state ----------------------------

double p_up_ground_y(double theta_t, double nbar_x);
double p_down_ground_y(double theta_t, double nbar_x);
double fcl_ground_y(double temperature, double omega_x, double theta_t);
/// Variant with (e^x + cos^2(theta t / 2)); validation report only.
double fcl_ground_y_printed(double temperature, double omega_x, double theta_t);

// ---- beam splitter, two ions (j = 1) --------------------------------------

/// (p_1, p_0, p_-1)
std::array<double, 3> pops_j1(double theta_t, double nbar);
/// p_{1,-1} = <1,1|rho|1,-1>
cplx coh_j1(double theta_t, double nbar);
CMatrix spin_density_j1(double theta_t, double nbar);

struct EigDecompJ1 {
  double xi = 0.0;
  double varphi = 0.0;
  double a = 1.0;
  double b = 1.0;
  double rho_plus = 1.0;
  double rho_zero = 0.0;
  double rho_minus = 0.0;
  // psi_1 = e^{i varphi} cos(xi)|1> + sin(xi)|-1> carries rho_minus;
  // psi_-1 = -e^{i varphi} sin(xi)|1> + cos(xi)|-1> carries rho_plus.
  CVector psi_1, psi_0, psi_m1;

  CMatrix reconstruct() const;
};

EigDecompJ1 eig_j1(double theta_t, double nbar);

// ---- two-mode squeezing, one ion ------------------------------------------

struct SeriesResult {
  double value = 0.0;
  int terms = 0;     // (n, s) pairs summed
  int max_shell = 0;  // largest n + s reached
};

/// p_up after the squeezing sequence, from the thermal average of the
/// diagonal overlaps <n,s|S(theta t)|n,s>. Throws PhysicsError
/// when the series does not converge within its term cap.
double p_up_tms(double theta_t, double nbar, double series_tol = 1e-12);
SeriesResult p_up_tms_series(double theta_t, double nbar, double series_tol = 1e-12);
/// The four-index double series in its published form (validation only).
SeriesResult p_up_tms_printed(double theta_t, double nbar, double series_tol = 1e-12);
/// <n,s| exp(r (a^dag b^dag - a b)) |n,s>
double squeeze_overlap(int n, int s, double r);

// ---- optimum -------------------------------------------------------------

/// t_max = pi / |theta|
double optimal_time(double theta);
/// phi = 0
double optimal_phase();

struct Optimum {
  double x = 0.0;                // hbar omega / (k_B T_max)
  double temperature = 0.0;      // K
  double bound_constant = 0.0;   // delta T >= hbar omega / (bound_constant k_B sqrt(nu))
  double delta_t_per_shot = 0.0; // K
  double residual = 0.0;         // of the defining equation at x
};

/// Root of x - x sech(x)(2 + sech(x)) - 4 tanh(x) = 0 on [3, 6].
Optimum optimal_temperature(double omega);
/// Ground-y variant: root of x tanh(x/2) = 4.
Optimum optimal_temperature_ground_y(double omega_x);

/// Basis (|psi_up>, |psi_down>) that diagonalizes the phi-dependent one-ion
/// density operator for every temperature.
std::pair<CVector, CVector> optimal_basis(double phi);

}  // namespace iontherm::closedform
