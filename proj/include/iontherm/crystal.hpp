#pragma once

// Linear Coulomb crystal: equilibrium positions and transverse normal modes.
//
// Everything here is dimensionless. Positions are in units of
// l = (e^2 / (4 pi eps0 m omega_z^2))^(1/3) and eigenvalues of the
// transverse spring matrix are in units of omega_alpha^2, so the mode
// frequencies are omega_alpha * sqrt(lambda_n).

#include <vector>

#include "iontherm/core.hpp"

namespace iontherm::crystal {

enum class Axis { x, y };

struct ChainGeometry {
  int n_ions = 0;
  std::vector<double> positions;  // ascending, symmetric about 0
  double residual = 0.0;          // max |force| at the returned positions
  std::vector<double> residual_history;  // max |force| after each Newton step
};

struct ModeSpectrum {
  Axis axis = Axis::x;
  double anisotropy = 0.0;   // omega_z / omega_alpha
  RVector eigenvalues;       // descending; eigenvalues(0) is the c.m. mode
  RMatrix eigenvectors;      // column n is mode n, component i is ion i
  RMatrix spring_matrix;

  /// Mode frequency in units of omega_alpha.
  double frequency(int mode) const;

  /// omega_alpha - omega_alpha,2 in units of omega_alpha (0 for one ion).
  double mode_gap() const;
};

/// Solves the axial force balance  u_i = sum_{j != i} sign(u_i - u_j)/(u_i - u_j)^2
/// by damped Newton iteration from a quasi-uniform start.
/// Throws PhysicsError when the residual stays above `tolerance`.
ChainGeometry solve_equilibrium(int n_ions, double tolerance = 1e-12,
                                int max_iterations = 200);

/// Net dimensionless axial force on each ion.
std::vector<double> axial_forces(const std::vector<double>& positions);

/// Transverse spring matrix K (units of omega_alpha^2) for anisotropy
/// omega_z/omega_alpha.
RMatrix transverse_spring_matrix(const ChainGeometry& geometry, double anisotropy);

/// Diagonalizes the transverse spring matrix. Throws PhysicsError naming the
/// first mode with lambda <= 0 (zigzag instability).
ModeSpectrum transverse_spectrum(const ChainGeometry& geometry, double anisotropy,
                                 Axis axis = Axis::x);

}  // namespace iontherm::crystal
