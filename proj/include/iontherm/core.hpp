#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace iontherm {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

// CODATA 2018 exact/recommended values, SI.
inline constexpr double kHbar = 1.054571817e-34;      // J s
inline constexpr double kBoltzmann = 1.380649e-23;    // J/K
inline constexpr double kHbarOverKb = kHbar / kBoltzmann;  // K s

/// Raised when the physics cannot be computed as requested: solver
/// non-convergence, insufficient Fock truncation, unstable crystal.
/// The CLI maps it to exit code 2; bad arguments use std::invalid_argument
/// and map to exit code 1.
class PhysicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace iontherm
