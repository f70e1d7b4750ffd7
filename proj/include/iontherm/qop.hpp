#pragma once

// Dense operator algebra on the spin (x) mode_x (x) mode_y product space.

#include <string>

#include "iontherm/core.hpp"

namespace iontherm::qop {

/// Which tensor factors an operator acts on, in the fixed order
/// spin, mode_x, mode_y. A zero entry means the factor is absent.
/// Operators built without a physical meaning (plain matrices) carry
/// an untagged dimension instead.
struct Space {
  int spin = 0;
  int mode_x = 0;
  int mode_y = 0;
  int untagged = 0;

  static Space spin_only(int d) { return {d, 0, 0, 0}; }
  static Space mode_x_only(int d) { return {0, d, 0, 0}; }
  static Space mode_y_only(int d) { return {0, 0, d, 0}; }
  static Space modes(int dx, int dy) { return {0, dx, dy, 0}; }
  static Space plain(int d) { return {0, 0, 0, d}; }

  bool tagged() const { return untagged == 0; }
  int dim() const;
  std::string describe() const;
  bool operator==(const Space&) const = default;
};

/// Shape contract for the full space: spin_dim = 2j+1, fock_* = n_max+1.
struct HilbertDims {
  int spin_dim = 2;
  int fock_x = 1;
  int fock_y = 1;

  int total() const { return spin_dim * fock_x * fock_y; }
  int phonon_dim() const { return fock_x * fock_y; }
  Space space() const { return {spin_dim, fock_x, fock_y, 0}; }
  int index(int spin, int nx, int ny) const { return (spin * fock_x + nx) * fock_y + ny; }
  void validate() const;
};

class QOperator {
 public:
  QOperator() = default;
  QOperator(CMatrix m, Space space);

  const CMatrix& matrix() const { return m_; }
  const Space& space() const { return space_; }
  int dim() const { return static_cast<int>(m_.rows()); }

  /// ||A - A^dagger||_max <= tol * max(1, ||A||_max)
  bool is_hermitian(double tol = 1e-12) const;
  QOperator adjoint() const { return {m_.adjoint(), space_}; }
  cplx trace() const { return m_.trace(); }

  QOperator& operator+=(const QOperator& o);
  QOperator& operator-=(const QOperator& o);
  QOperator& operator*=(cplx s) {
    m_ *= s;
    return *this;
  }
  friend QOperator operator+(QOperator a, const QOperator& b) { return a += b; }
  friend QOperator operator-(QOperator a, const QOperator& b) { return a -= b; }
  friend QOperator operator*(cplx s, QOperator a) { return a *= s; }
  friend QOperator operator*(const QOperator& a, const QOperator& b);

 private:
  CMatrix m_;
  Space space_;
};

/// Hermitian, unit-trace, positive semidefinite operator.
class DensityOp {
 public:
  static constexpr double kTolerance = 1e-10;
  /// Negative eigenvalues down to this value are clamped and renormalized.
  static constexpr double kClampLimit = -1e-8;

  /// Validates (and if needed clamps) `op`; throws std::invalid_argument or
  /// PhysicsError when the invariants cannot be met.
  explicit DensityOp(QOperator op);

  const QOperator& op() const { return op_; }
  const CMatrix& matrix() const { return op_.matrix(); }
  const Space& space() const { return op_.space(); }
  int dim() const { return op_.dim(); }
  double purity() const;

 private:
  QOperator op_;
};

struct EigenDecomposition {
  RVector values;   // ascending
  CMatrix vectors;  // orthonormal columns
};

QOperator identity(Space space);
QOperator kron(const QOperator& a, const QOperator& b);
QOperator commutator(const QOperator& a, const QOperator& b);
double max_abs(const CMatrix& m);

/// Throws std::invalid_argument if `a` is not Hermitian to 1e-10 (relative).
EigenDecomposition herm_eig(const QOperator& a);

/// exp(-i h t) with hbar = 1.
QOperator propagator(const QOperator& h, double t);

/// Tr over both phonon modes of an operator on the full space.
DensityOp partial_trace_modes(const DensityOp& rho);
CMatrix partial_trace_modes(const CMatrix& m, const HilbertDims& dims);

}  // namespace iontherm::qop
