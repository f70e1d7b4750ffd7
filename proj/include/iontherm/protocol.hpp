#pragma once

// Ramsey sequence: prepare spins -> evolve with a spin-phonon Hamiltonian ->
// trace out the phonons -> global pi/2 pulse with phase phi.

#include <utility>
#include <vector>

#include "iontherm/model.hpp"

namespace iontherm::protocol {

enum class InitialSpin { EqualSuperposition, PolarizedX };

struct RamseyConfig {
  model::EffectiveKind kind = model::EffectiveKind::BeamSplitter;
  model::TrapConfig trap;
  model::ThermalSpec thermal;
  double duration = 0.0;     // s
  double pulse_phase = 0.0;  // rad
  InitialSpin initial_spin = InitialSpin::EqualSuperposition;

  void validate() const;
  qop::HilbertDims dims() const { return thermal.dims(trap.spin().dim()); }
};

/// Spin density operator in the Dicke basis, index k <-> m = j - k.
struct SpinState {
  qop::DensityOp rho;

  explicit SpinState(qop::DensityOp r) : rho(std::move(r)) {}
  explicit SpinState(const CMatrix& m);
  int dim() const { return rho.dim(); }
};

struct SpinObservables {
  RVector populations;  // p_m, Dicke order
  CMatrix elements;     // p_{m,k} = <j,m|rho|j,k>
};

/// Squeezing parameter reached by the spin-dependent pair term, |coefficient| * j * t.
/// Zero for kinds without a pair-creation term.
double max_squeezing(const RamseyConfig& cfg, double t_max);

/// Levels needed to hold a squeezed distribution with parameter r to kSqueezeTail.
int squeezing_allowance(double r);
inline constexpr double kSqueezeTail = 1e-7;

/// Thermal spec with the standard truncation rule for `kind`, widened by the
/// squeezing allowance when the Hamiltonian creates phonon pairs up to t_max.
model::ThermalSpec thermal_for(const RamseyConfig& cfg, double nbar_x, double nbar_y, double t_max);

CVector initial_spin_vector(InitialSpin kind, model::SpinLength j);
SpinState initial_spin_state(InitialSpin kind, model::SpinLength j);

/// R = exp(i pi/2 (cos(phi) Jy + sin(phi) Jx)); on one spin
/// |up> -> (|up> - e^{-i phi}|down>)/sqrt2, |down> -> (|down> + e^{i phi}|up>)/sqrt2.
CMatrix pulse_rotation(model::SpinLength j, double phi);
SpinState pi_half_pulse(const SpinState& state, double phi);

SpinObservables spin_observables(const SpinState& state);

/// Exact evolution by diagonalizing the Hamiltonian blocks that the initial
/// mixture can reach. Thermal weights enter only at evaluation, so one engine
/// serves a whole temperature sweep as long as the occupations stay within
/// the truncation it was built for.
class RamseyEvolution {
 public:
  explicit RamseyEvolution(const RamseyConfig& cfg);

  /// Reduced spin density operator at time t, before the pulse.
  CMatrix spin_density(double t, double nbar_x, double nbar_y) const;
  /// After the pulse with phase phi.
  SpinState state(double t, double nbar_x, double nbar_y, double phi) const;

  const qop::HilbertDims& dims() const { return dims_; }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  int largest_block() const;
  int component_count() const { return static_cast<int>(components_.size()); }

  /// Components whose initial weight falls below this are never propagated.
  static constexpr double kWeightFloor = 1e-15;
  static constexpr int kMaxDenseBlock = 6000;

 private:
  // Tridiagonal blocks that differ only by a diagonal shift and a phase gauge
  // share one real eigendecomposition.
  struct Spectrum {
    RVector diag_rel, sub;  // diagonal minus its first entry, |off-diagonal|
    RVector values;         // for diag_rel
    RMatrix q;
    std::vector<int> members;
  };
  struct Block {
    std::vector<int> rows;  // global indices, ascending
    RVector energies;
    int spectrum = -1;      // >= 0: vectors = diag(gauge) * spectra_[spectrum].q
    CVector gauge;
    CMatrix vectors;        // dense path only
    std::vector<int> comps;  // global component ids
    CMatrix coeffs;          // V^dagger psi0 per component (column)
  };
  struct RowPair {
    int i, j, spin_pair;  // local row in block a, local row in block b, a*ds + a'
  };
  struct BlockPair {
    int a, b;
    std::vector<RowPair> rows;
    std::vector<std::pair<int, int>> comps;  // local column in a, local column in b
    std::vector<int> comp_ids;
  };

  RVector weights(double nbar_x, double nbar_y) const;

  qop::HilbertDims dims_;
  model::SpinLength j_;
  std::vector<std::pair<int, int>> components_;  // (nx, ny)
  std::vector<Spectrum> spectra_;
  std::vector<Block> blocks_;
  std::vector<BlockPair> pairs_;
};

SpinState run_ramsey(const RamseyConfig& cfg);
/// Same configuration evaluated at several durations (cfg.duration ignored).
std::vector<SpinState> run_ramsey_series(const RamseyConfig& cfg, const std::vector<double>& times);

/// Dense reference: full U rho U^dagger on the product space, then trace.
/// With pulse_first the rotation is applied on the full space before tracing.
SpinState run_ramsey_dense(const RamseyConfig& cfg, bool pulse_first = false);

struct TruncationCertificate {
  int n_max_x = 0, n_max_y = 0;
  double max_population_change = 0.0;
  bool certified = false;
};

/// Re-runs at n_max + 5 and compares populations over `times`.
TruncationCertificate certify_truncation(const RamseyConfig& cfg, const std::vector<double>& times,
                                         double tolerance = 1e-6);

}  // namespace iontherm::protocol
