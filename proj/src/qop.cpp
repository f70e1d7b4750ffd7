#include "iontherm/qop.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace iontherm::qop {

int Space::dim() const {
  if (!tagged()) return untagged;
  return std::max(spin, 1) * std::max(mode_x, 1) * std::max(mode_y, 1);
}

std::string Space::describe() const {
  if (!tagged()) return "plain(" + std::to_string(untagged) + ")";
  std::string s;
  auto add = [&](const char* name, int d) {
    if (d == 0) return;
    if (!s.empty()) s += " x ";
    s += std::string(name) + "(" + std::to_string(d) + ")";
  };
  add("spin", spin);
  add("mode_x", mode_x);
  add("mode_y", mode_y);
  return s.empty() ? "scalar" : s;
}

void HilbertDims::validate() const {
  if (spin_dim < 1 || fock_x < 1 || fock_y < 1)
    throw std::invalid_argument("HilbertDims: all dimensions must be >= 1");
}

QOperator::QOperator(CMatrix m, Space space) : m_(std::move(m)), space_(space) {
  if (m_.rows() != m_.cols()) throw std::invalid_argument("QOperator: matrix must be square");
  if (m_.rows() != space_.dim()) {
    std::ostringstream msg;
    msg << "QOperator: matrix dimension " << m_.rows() << " does not match space "
        << space_.describe();
    throw std::invalid_argument(msg.str());
  }
}

bool QOperator::is_hermitian(double tol) const {
  const double scale = std::max(1.0, max_abs(m_));
  return max_abs(m_ - m_.adjoint()) <= tol * scale;
}

QOperator& QOperator::operator+=(const QOperator& o) {
  if (!(space_ == o.space_)) throw std::invalid_argument("QOperator: adding operators on different spaces");
  m_ += o.m_;
  return *this;
}

QOperator& QOperator::operator-=(const QOperator& o) {
  if (!(space_ == o.space_)) throw std::invalid_argument("QOperator: subtracting operators on different spaces");
  m_ -= o.m_;
  return *this;
}

QOperator operator*(const QOperator& a, const QOperator& b) {
  if (!(a.space_ == b.space_)) throw std::invalid_argument("QOperator: multiplying operators on different spaces");
  return {a.m_ * b.m_, a.space_};
}

DensityOp::DensityOp(QOperator op) : op_(std::move(op)) {
  const CMatrix& m = op_.matrix();
  if (!op_.is_hermitian(kTolerance)) throw std::invalid_argument("DensityOp: operator is not Hermitian");
  const cplx tr = m.trace();
  if (std::abs(tr - 1.0) > kTolerance) {
    std::ostringstream msg;
    msg << "DensityOp: trace " << tr.real() << " differs from 1";
    throw std::invalid_argument(msg.str());
  }

  const bool diagonal = max_abs(m - CMatrix(m.diagonal().asDiagonal())) == 0.0;
  double min_eig;
  if (diagonal) {
    min_eig = m.diagonal().real().minCoeff();
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
    min_eig = es.eigenvalues().minCoeff();
  }
  if (min_eig >= 0.0) return;
  if (min_eig < kClampLimit) {
    std::ostringstream msg;
    msg << "DensityOp: minimum eigenvalue " << min_eig << " is not positive semidefinite";
    throw PhysicsError(msg.str());
  }
  if (min_eig >= -kTolerance) return;

  // Clamp the small negative tail and renormalize.
  CMatrix fixed;
  if (diagonal) {
    RVector d = m.diagonal().real().cwiseMax(0.0);
    fixed = (d / d.sum()).cast<cplx>().asDiagonal();
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
    RVector d = es.eigenvalues().cwiseMax(0.0);
    d /= d.sum();
    fixed = es.eigenvectors() * d.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  }
  op_ = QOperator(std::move(fixed), op_.space());
}

double DensityOp::purity() const { return (matrix() * matrix()).trace().real(); }

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

QOperator identity(Space space) {
  const int d = space.dim();
  return {CMatrix::Identity(d, d), space};
}

QOperator kron(const QOperator& a, const QOperator& b) {
  const Space& sa = a.space();
  const Space& sb = b.space();
  Space out;
  if (!sa.tagged() || !sb.tagged()) {
    out = Space::plain(sa.dim() * sb.dim());
  } else {
    // The last factor of a must precede the first factor of b.
    auto last = [](const Space& s) { return s.mode_y ? 2 : s.mode_x ? 1 : s.spin ? 0 : -1; };
    auto first = [](const Space& s) { return s.spin ? 0 : s.mode_x ? 1 : s.mode_y ? 2 : 3; };
    if (last(sa) >= first(sb)) {
      throw std::invalid_argument("kron: factor ordering violates spin (x) mode_x (x) mode_y: " +
                                  sa.describe() + " then " + sb.describe());
    }
    out = {sa.spin + sb.spin, sa.mode_x + sb.mode_x, sa.mode_y + sb.mode_y, 0};
  }
  const CMatrix& ma = a.matrix();
  const CMatrix& mb = b.matrix();
  const Eigen::Index ra = ma.rows(), rb = mb.rows();
  CMatrix m(ra * rb, ra * rb);
  for (Eigen::Index i = 0; i < ra; ++i)
    for (Eigen::Index j = 0; j < ra; ++j) m.block(i * rb, j * rb, rb, rb) = ma(i, j) * mb;
  return {std::move(m), out};
}

QOperator commutator(const QOperator& a, const QOperator& b) { return a * b - b * a; }

EigenDecomposition herm_eig(const QOperator& a) {
  if (!a.is_hermitian(1e-10)) throw std::invalid_argument("herm_eig: operator is not Hermitian");
  // Symmetrize so round-off asymmetry never reaches the solver.
  const CMatrix h = 0.5 * (a.matrix() + a.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success) throw PhysicsError("herm_eig: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

QOperator propagator(const QOperator& h, double t) {
  const EigenDecomposition ed = herm_eig(h);
  CVector phases(ed.values.size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) phases(k) = std::exp(cplx(0.0, -ed.values(k) * t));
  return {ed.vectors * phases.asDiagonal() * ed.vectors.adjoint(), h.space()};
}

CMatrix partial_trace_modes(const CMatrix& m, const HilbertDims& dims) {
  if (m.rows() != dims.total() || m.cols() != dims.total())
    throw std::invalid_argument("partial_trace_modes: dimension mismatch");
  const int ds = dims.spin_dim;
  const int dp = dims.phonon_dim();
  CMatrix out = CMatrix::Zero(ds, ds);
  for (int a = 0; a < ds; ++a)
    for (int b = 0; b < ds; ++b) out(a, b) = m.block(a * dp, b * dp, dp, dp).trace();
  return out;
}

DensityOp partial_trace_modes(const DensityOp& rho) {
  const Space& s = rho.space();
  if (!s.tagged() || s.spin == 0 || s.mode_x == 0 || s.mode_y == 0)
    throw std::invalid_argument("partial_trace_modes: expected an operator on spin (x) mode_x (x) mode_y, got " +
                                s.describe());
  const HilbertDims dims{s.spin, s.mode_x, s.mode_y};
  return DensityOp(QOperator(partial_trace_modes(rho.matrix(), dims), Space::spin_only(s.spin)));
}

}  // namespace iontherm::qop
