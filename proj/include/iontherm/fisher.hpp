#pragma once

// Classical and quantum Fisher information with respect to temperature.
// Derivatives are taken by central differences with one Richardson step;
// the models passed in must be pure functions of T.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "iontherm/protocol.hpp"

namespace iontherm::fisher {

using ProbModel = std::function<RVector(double)>;
using DensityModel = std::function<CMatrix(double)>;

struct StepPolicy {
  double relative = 1e-4;  // h = max(relative * T, floor)
  double floor = 1e-9;     // K
  int max_shrinks = 2;     // each halves h; used when an eigenvalue crossing is seen

  double step(double temperature) const;
};

inline constexpr double kProbabilityFloor = 1e-12;
inline constexpr double kPairFloor = 1e-12;      // rho_m + rho_k below this is dropped
inline constexpr double kClusterGap = 1e-9;      // eigenvalues closer than this share a subspace
inline constexpr double kCrossingOverlap = 0.99;

struct ClassicalFisher {
  double value = 0.0;
  double rel_error = 0.0;  // Richardson estimate on the derivative vector
  int excluded = 0;        // outcomes below kProbabilityFloor
  std::vector<std::string> warnings;
};

ClassicalFisher classical_fisher_detail(const ProbModel& model, double temperature, const StepPolicy& policy = {});
double classical_fisher(const ProbModel& model, double temperature, const StepPolicy& policy = {});

struct QfiResult {
  double total = 0.0;
  double classical_part = 0.0;     // sum (d rho_m)^2 / rho_m
  double nonclassical_part = 0.0;  // eigenvector contribution
  double sld_value = 0.0;          // Tr(rho L^2), independent cross-check
  CMatrix sld;                     // L in the input basis
  int dropped = 0;                 // eigenvalue pairs below kPairFloor
  double eigenvector_drift = 0.0;  // max 1 - |<psi_m(T)|psi_m(T +- h)>| over the stencil
  double step = 0.0;               // h actually used
};

/// Throws PhysicsError naming T when an eigenvalue crossing persists after
/// max_shrinks step reductions.
QfiResult qfi(const DensityModel& model, double temperature, const StepPolicy& policy = {});

/// 1 / (nu F). Throws std::invalid_argument for F <= 0 or nu < 1.
double crb(double fisher_information, double shots);

struct FisherReport {
  double T = 0.0;
  double t = 0.0;
  double F_cl = 0.0;
  double F_q = 0.0;
  double F_q_classical_part = 0.0;
  double F_q_nonclassical_part = 0.0;

  double crb_variance(double shots) const { return crb(F_q, shots); }
};

FisherReport fisher_report(const ProbModel& prob, const DensityModel& rho, double temperature, double t,
                           const StepPolicy& policy = {});

// ---- model adapters -------------------------------------------------------

/// Dicke-basis populations of a density model.
ProbModel populations(DensityModel rho);
/// Projective measurement onto the given orthonormal basis.
ProbModel measured_in(DensityModel rho, std::vector<CVector> basis);

/// One ion, beam splitter, both modes at omega, from the closed form.
DensityModel bs_closed(double theta_t, double omega, double phi);
/// Two ions, beam splitter, both modes at omega, from the closed form.
DensityModel j1_closed(double theta_t, double omega);
/// Outcome probabilities (p_up, p_down) for the y mode in its ground state.
ProbModel ground_y_closed(double theta_t, double omega_x);

/// Engine covering temperatures up to t_hi (with a margin for the
/// difference stencil) and times up to t_max.
std::shared_ptr<const protocol::RamseyEvolution> engine_for(const protocol::RamseyConfig& cfg, double t_hi,
                                                            double t_max);
/// Numeric spin density after the pulse at time t as a function of T.
DensityModel numeric_density(std::shared_ptr<const protocol::RamseyEvolution> engine,
                             const model::TrapConfig& trap, double t, double phi);

// ---- closed-form cross-checks ----------------------------------------------

struct ValidationEntry {
  std::string name;
  double max_rel_deviation = 0.0;  // textbook expression vs oracle
  double max_rel_corrected = 0.0;  // implemented expression vs oracle
  int points = 0;
  std::string verdict;
};

/// Compares the textbook Fisher expressions and the textbook squeezing series
/// against finite-difference / independent oracles on a fixed grid. The
/// oracle is authoritative; disagreements are reported as VALIDATION entries.
std::vector<ValidationEntry> validation_report(double omega = 4e6);

}  // namespace iontherm::fisher
