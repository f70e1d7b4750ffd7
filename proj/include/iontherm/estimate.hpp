#pragma once

// Shot simulation, maximum-likelihood thermometry and Monte Carlo checks of
// the Cramer-Rao bound.
//
// Random numbers: std::mt19937_64 (fully specified by the C++ standard)
// seeded per trial with SplitMix64(SplitMix64(seed) + trial index). Uniform doubles are
// (x >> 11) * 2^-53 and categorical draws use inverse-CDF search, so records
// are reproducible across standard libraries.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "iontherm/fisher.hpp"

namespace iontherm::estimate {

struct ShotRecord {
  std::vector<std::int64_t> counts;  // per outcome (Dicke projector)
  std::int64_t shots = 0;
  std::uint64_t seed = 0;
};

struct EstimateResult {
  double T_hat = 0.0;
  double log_likelihood = 0.0;
  double bracket_lo = 0.0, bracket_hi = 0.0;
  double score = 0.0;  // d log L / dT at T_hat
  bool converged = false;
  std::string note;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);
double uniform01(std::mt19937_64& rng);

/// Multinomial draw of `shots` outcomes. Throws std::invalid_argument when p
/// has negative entries or does not sum to 1 within 1e-8.
ShotRecord sample_shots(const RVector& p, std::int64_t shots, std::uint64_t seed);

double log_likelihood(const ShotRecord& record, const RVector& p);

/// Maximizes the multinomial likelihood over [lo, hi] (Brent in log T, then a
/// root polish of the score). A maximum on the bracket edge or a flat
/// likelihood is reported with converged = false. Two-outcome models must be
/// monotone in T on the bracket (std::invalid_argument otherwise).
EstimateResult mle_temperature(const ShotRecord& record, const fisher::ProbModel& model, double lo, double hi);

struct CrbExperimentConfig {
  double T_true = 0.0;
  std::int64_t shots = 10000;
  int trials = 200;
  std::uint64_t seed = 0;
  double bracket_lo = 0.0;  // 0: T_true / 10
  double bracket_hi = 0.0;  // 0: 10 T_true
  int bootstrap = 1000;
  double cost_cap = 2e8;  // shots * trials

  void validate() const;
};

struct TrialOutcome {
  int index = 0;
  std::uint64_t seed = 0;
  double T_hat = 0.0;
  bool converged = false;
};

struct CrbReport {
  std::vector<TrialOutcome> trials;
  int converged = 0;
  double fisher_q = 0.0;
  double fisher_cl = 0.0;
  double crb = 0.0;       // 1 / (nu F_q), K^2
  double mean = 0.0;
  double variance = 0.0;  // unbiased, converged trials only
  double bias = 0.0;
  double ratio = 0.0;     // variance / crb
  double ratio_ci_lo = 0.0, ratio_ci_hi = 0.0;  // 95% bootstrap percentile
  double chi2_statistic = 0.0;  // (n-1) s^2 / crb
  double chi2_critical = 0.0;   // 1% lower quantile of chi^2_{n-1}
  bool bound_respected = false;  // chi2_statistic >= chi2_critical
};

/// Repeated MLE from simulated records at T_true; F_q comes from `rho`, the
/// measured distribution from `prob`. Throws std::invalid_argument when the
/// cost cap is exceeded.
CrbReport crb_experiment(const CrbExperimentConfig& cfg, const fisher::ProbModel& prob,
                         const fisher::DensityModel& rho);

}  // namespace iontherm::estimate
