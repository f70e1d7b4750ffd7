#include "iontherm/crystal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace iontherm::crystal {

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

RMatrix force_jacobian(const std::vector<double>& u) {
  const int n = static_cast<int>(u.size());
  RMatrix jac = RMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    jac(i, i) = -1.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double c = 2.0 / std::pow(std::abs(u[i] - u[j]), 3);
      jac(i, i) -= c;
      jac(i, j) = c;
    }
  }
  return jac;
}

}  // namespace

std::vector<double> axial_forces(const std::vector<double>& u) {
  const std::size_t n = u.size();
  std::vector<double> f(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = -u[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = u[i] - u[j];
      s += (d > 0 ? 1.0 : -1.0) / (d * d);
    }
    f[i] = s;
  }
  return f;
}

ChainGeometry solve_equilibrium(int n_ions, double tolerance, int max_iterations) {
  if (n_ions < 1) throw std::invalid_argument("solve_equilibrium: n_ions must be >= 1");

  ChainGeometry geom;
  geom.n_ions = n_ions;
  if (n_ions == 1) {
    geom.positions = {0.0};
    return geom;
  }

  // Spacing fit for small chains (~2.0 N^-0.56); Newton takes it from there.
  const double spacing = 2.0 * std::pow(static_cast<double>(n_ions), -0.56);
  std::vector<double> u(n_ions);
  for (int i = 0; i < n_ions; ++i) u[i] = spacing * (i - 0.5 * (n_ions - 1));

  double res = max_abs(axial_forces(u));
  for (int it = 0; it < max_iterations && res > tolerance; ++it) {
    const std::vector<double> f = axial_forces(u);
    const RVector rhs = Eigen::Map<const RVector>(f.data(), n_ions);
    const RVector step = force_jacobian(u).partialPivLu().solve(-rhs);

    // Backtrack until the ordering survives and the residual drops.
    double damping = 1.0;
    std::vector<double> trial(n_ions);
    double trial_res = res;
    for (int k = 0; k < 40; ++k) {
      for (int i = 0; i < n_ions; ++i) trial[i] = u[i] + damping * step(i);
      const bool ordered = std::is_sorted(trial.begin(), trial.end()) &&
                           std::adjacent_find(trial.begin(), trial.end()) == trial.end();
      if (ordered) {
        trial_res = max_abs(axial_forces(trial));
        if (trial_res < res) break;
      }
      damping *= 0.5;
    }
    if (trial_res >= res) break;
    u = trial;
    res = trial_res;
    geom.residual_history.push_back(res);
  }

  // Enforce mirror symmetry exactly.
  for (int i = 0; i < n_ions / 2; ++i) {
    const double a = 0.5 * (u[n_ions - 1 - i] - u[i]);
    u[i] = -a;
    u[n_ions - 1 - i] = a;
  }
  if (n_ions % 2 == 1) u[n_ions / 2] = 0.0;
  res = max_abs(axial_forces(u));

  if (res > std::max(tolerance, 1e-10)) {
    std::ostringstream msg;
    msg << "solve_equilibrium: no convergence for N=" << n_ions
        << ", residual achieved " << res;
    throw PhysicsError(msg.str());
  }
  geom.positions = std::move(u);
  geom.residual = res;
  return geom;
}

RMatrix transverse_spring_matrix(const ChainGeometry& geometry, double anisotropy) {
  const int n = geometry.n_ions;
  const auto& u = geometry.positions;
  const double eps2 = anisotropy * anisotropy;
  RMatrix k = RMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double c = eps2 / std::pow(std::abs(u[i] - u[j]), 3);
      k(i, i) -= c;
      k(i, j) = c;
    }
  }
  return k;
}

ModeSpectrum transverse_spectrum(const ChainGeometry& geometry, double anisotropy,
                                 Axis axis) {
  if (geometry.n_ions < 1 || static_cast<int>(geometry.positions.size()) != geometry.n_ions)
    throw std::invalid_argument("transverse_spectrum: inconsistent geometry");
  if (!(anisotropy >= 0.0)) throw std::invalid_argument("transverse_spectrum: anisotropy must be >= 0");

  ModeSpectrum spec;
  spec.axis = axis;
  spec.anisotropy = anisotropy;
  spec.spring_matrix = transverse_spring_matrix(geometry, anisotropy);

  Eigen::SelfAdjointEigenSolver<RMatrix> es(spec.spring_matrix);
  const int n = geometry.n_ions;
  // Eigen returns ascending order; we want descending (c.m. first).
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = n - 1 - i;
  const RVector& vals = es.eigenvalues();
  const RMatrix& vecs = es.eigenvectors();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (vals(a) != vals(b)) return vals(a) > vals(b);
    for (int i = 0; i < n; ++i)
      if (vecs(i, a) != vecs(i, b)) return vecs(i, a) < vecs(i, b);
    return false;
  });

  spec.eigenvalues.resize(n);
  spec.eigenvectors.resize(n, n);
  for (int m = 0; m < n; ++m) {
    spec.eigenvalues(m) = vals(order[m]);
    RVector v = vecs.col(order[m]);
    // Sign convention: first nonzero component positive.
    for (int i = 0; i < n; ++i) {
      if (std::abs(v(i)) > 1e-12) {
        if (v(i) < 0) v = -v;
        break;
      }
    }
    spec.eigenvectors.col(m) = v;
  }

  for (int m = 0; m < n; ++m) {
    if (spec.eigenvalues(m) <= 0.0) {
      std::ostringstream msg;
      msg << "zigzag instability: transverse mode " << (m + 1) << " has lambda = "
          << spec.eigenvalues(m) << " at anisotropy " << anisotropy;
      throw PhysicsError(msg.str());
    }
  }
  return spec;
}

double ModeSpectrum::frequency(int mode) const { return std::sqrt(eigenvalues(mode)); }

double ModeSpectrum::mode_gap() const {
  if (eigenvalues.size() < 2) return 0.0;
  return frequency(0) - frequency(1);
}

}  // namespace iontherm::crystal
