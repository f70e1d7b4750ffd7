#pragma once

// Hamiltonians and initial states of the two-mode spin-phonon model.
//
// Units: hbar = 1, frequencies are angular (rad/s), temperatures in kelvin.
// Constant (c-number) terms are dropped from every Hamiltonian.

#include <string>

#include <Eigen/SparseCore>

#include "iontherm/qop.hpp"

namespace iontherm::model {

using SparseOp = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

/// Spin length j stored as the integer 2j.
class SpinLength {
 public:
  explicit SpinLength(int twice_j);
  static SpinLength for_ions(int n_ions) { return SpinLength(n_ions); }

  int twice() const { return twice_; }
  double value() const { return 0.5 * twice_; }
  int dim() const { return twice_ + 1; }
  int n_ions() const { return twice_; }
  /// m quantum number of Dicke index k (k = 0 is m = +j).
  double m(int k) const { return value() - k; }

 private:
  int twice_;
};

struct SpinOperators {
  qop::QOperator jx, jy, jz;
};

struct LadderOps {
  qop::QOperator a, a_dagger;
};

enum class Mode { x, y };

enum class EffectiveKind { FullSideband, Effective, BeamSplitter, TwoModeSqueezing };

std::string to_string(EffectiveKind kind);
/// Accepts "full", "effective", "bs", "tms" (and the enum names).
EffectiveKind parse_kind(const std::string& name);

struct TrapConfig {
  int n_ions = 1;
  double omega_x = 4e6;  // rad/s
  double omega_y = 4e6;
  double g = 4e3;        // spin-phonon coupling, rad/s
  double delta_x = 150e3;
  double delta_y = 150e3;

  void validate() const;
  /// True when |delta_alpha| < 0.1 omega_alpha and |delta_alpha| >= 10 g, i.e. both
  /// the resolved-sideband and the adiabatic-elimination conditions hold.
  bool in_dispersive_regime() const;
  SpinLength spin() const { return SpinLength::for_ions(n_ions); }
  /// Rate of the residual spin-phonon coupling, 4 g^2 / delta_x.
  double theta() const;
};

struct ThermalSpec {
  double nbar_x = 0.0;
  double nbar_y = 0.0;
  int n_max_x = 1;
  int n_max_y = 1;

  static constexpr double kTailTolerance = 1e-10;

  static ThermalSpec from_temperature(double temperature, double omega_x, double omega_y,
                                      int n_max_x, int n_max_y);
  void validate() const;
  qop::HilbertDims dims(int spin_dim) const { return {spin_dim, n_max_x + 1, n_max_y + 1}; }
};

SpinOperators collective_spin(SpinLength j);
LadderOps mode_ops(int n_max, Mode mode = Mode::x);

/// Thermal occupation P_n = nbar^n / (1+nbar)^(n+1).
double thermal_probability(double nbar, int n);
/// Weight of the thermal distribution above n_max.
double thermal_tail(double nbar, int n_max);
/// Smallest n_max >= 1 with thermal_tail(nbar, n_max) < tol.
int minimal_fock_cutoff(double nbar, double tol = ThermalSpec::kTailTolerance);
/// minimal_fock_cutoff plus the per-kind guard (+5, or +15 for two-mode squeezing).
int fock_cutoff(EffectiveKind kind, double nbar);

double nbar_from_temperature(double temperature, double omega);
double temperature_from_nbar(double nbar, double omega);

/// Sparse Hamiltonian on spin (x) mode_x (x) mode_y. Throws std::invalid_argument
/// when dims do not match the trap or the kind's detuning constraint fails.
SparseOp hamiltonian_sparse(EffectiveKind kind, const TrapConfig& cfg, const qop::HilbertDims& dims);
qop::QOperator hamiltonian(EffectiveKind kind, const TrapConfig& cfg, const qop::HilbertDims& dims);

/// Free phonon part delta_x n_x + delta_y n_y.
qop::QOperator phonon_hamiltonian(const TrapConfig& cfg, const qop::HilbertDims& dims);

/// Diagonal Fock-basis Gibbs state of both modes, per-mode renormalized.
/// Throws PhysicsError when a mode's truncated tail exceeds kTailTolerance.
qop::DensityOp thermal_state(const ThermalSpec& spec);

}  // namespace iontherm::model
