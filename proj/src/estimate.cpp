#include "iontherm/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

namespace iontherm::estimate {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) { return splitmix64(splitmix64(seed) + trial); }

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

namespace {

void check_distribution(const RVector& p, const char* who) {
  if (p.size() == 0) throw std::invalid_argument(std::string(who) + ": empty probability vector");
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (!(p(i) >= -1e-12) || !std::isfinite(p(i)))
      throw std::invalid_argument(std::string(who) + ": probabilities must be finite and >= 0");
  if (std::abs(p.sum() - 1.0) > 1e-8) {
    std::ostringstream msg;
    msg << who << ": probabilities sum to " << p.sum();
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

ShotRecord sample_shots(const RVector& p, std::int64_t shots, std::uint64_t seed) {
  check_distribution(p, "sample_shots");
  if (shots < 1) throw std::invalid_argument("sample_shots: number of shots must be >= 1");
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) cdf[i] = acc += std::max(p(i), 0.0);
  for (double& c : cdf) c /= acc;

  ShotRecord r;
  r.counts.assign(p.size(), 0);
  r.shots = shots;
  r.seed = seed;
  std::mt19937_64 rng(seed);
  for (std::int64_t s = 0; s < shots; ++s) {
    const double u = uniform01(rng);
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto k = std::min<std::ptrdiff_t>(it - cdf.begin(), p.size() - 1);
    ++r.counts[k];
  }
  return r;
}

double log_likelihood(const ShotRecord& record, const RVector& p) {
  if (static_cast<Eigen::Index>(record.counts.size()) != p.size())
    throw std::invalid_argument("log_likelihood: record and model have different outcome counts");
  double l = 0.0;
  for (std::size_t i = 0; i < record.counts.size(); ++i)
    if (record.counts[i] > 0) l += record.counts[i] * std::log(std::max(p(i), 1e-300));
  return l;
}

EstimateResult mle_temperature(const ShotRecord& record, const fisher::ProbModel& model, double lo, double hi) {
  if (!(lo > 0) || !(hi > lo)) throw std::invalid_argument("mle_temperature: bracket must satisfy 0 < lo < hi");
  EstimateResult res;
  res.bracket_lo = lo;
  res.bracket_hi = hi;
  auto loglik = [&](double T) { return log_likelihood(record, model(T)); };

  // Coarse scan: monotonicity precondition and flatness.
  constexpr int kScan = 33;
  std::vector<double> scan_l(kScan);
  int up = 0, down = 0;
  double prev = 0.0;
  for (int i = 0; i < kScan; ++i) {
    const double T = lo * std::pow(hi / lo, static_cast<double>(i) / (kScan - 1));
    const RVector p = model(T);
    scan_l[i] = log_likelihood(record, p);
    if (p.size() == 2) {
      if (i > 0 && p(0) > prev + 1e-12) ++up;
      if (i > 0 && p(0) < prev - 1e-12) ++down;
      prev = p(0);
    }
  }
  if (up > 0 && down > 0)
    throw std::invalid_argument("mle_temperature: two-outcome model is not monotone in T on the bracket");
  const auto [mn, mx] = std::minmax_element(scan_l.begin(), scan_l.end());
  if (*mx - *mn <= 1e-9 * std::max(1.0, std::abs(*mx))) {
    res.T_hat = std::sqrt(lo * hi);
    res.log_likelihood = loglik(res.T_hat);
    res.note = "flat likelihood";
    return res;
  }

  const double a = std::log(lo), b = std::log(hi);
  boost::uintmax_t iters = 200;
  const auto best = boost::math::tools::brent_find_minima([&](double u) { return -loglik(std::exp(u)); }, a, b, 45,
                                                          iters);
  double T = std::exp(best.first);

  auto score = [&](double x) {
    const double h = 1e-6 * x;
    return (loglik(x + h) - loglik(x - h)) / (2.0 * h);
  };
  const double edge = 1e-4 * (b - a);
  if (best.first - a < edge || b - best.first < edge) {
    res.T_hat = T;
    res.log_likelihood = loglik(T);
    res.score = score(T);
    res.note = "maximum at bracket edge";
    return res;
  }

  // Polish on the score where it changes sign around the Brent estimate.
  const double pl = std::max(lo, T * (1 - 1e-3)), ph = std::min(hi, T * (1 + 1e-3));
  if (score(pl) * score(ph) < 0) {
    boost::uintmax_t it2 = 100;
    const auto r = boost::math::tools::toms748_solve(score, pl, ph, boost::math::tools::eps_tolerance<double>(44), it2);
    const double cand = 0.5 * (r.first + r.second);
    if (loglik(cand) >= loglik(T)) T = cand;
  }
  // A plateau reaching the bracket edge (e.g. every shot in one outcome) is not an interior maximum.
  const double l_best = loglik(T), tie = 1e-9 * std::max(1.0, std::abs(l_best));
  for (const double e : {lo, hi})
    if (loglik(e) >= l_best - tie) {
      res.T_hat = e;
      res.log_likelihood = loglik(e);
      res.score = score(e);
      res.note = "maximum at bracket edge";
      return res;
    }
  res.T_hat = T;
  res.log_likelihood = l_best;
  res.score = score(T);
  // Scale-free: a relative change dT/T moves log L by score * T * dT/T.
  res.converged = std::abs(res.score * T) < 1e-3 * std::max<double>(1.0, std::sqrt(static_cast<double>(record.shots)));
  if (!res.converged) res.note = "score not small at the maximum";
  return res;
}

void CrbExperimentConfig::validate() const {
  if (!(T_true > 0)) throw std::invalid_argument("crb_experiment: T must be > 0");
  if (shots < 1 || trials < 2) throw std::invalid_argument("crb_experiment: need shots >= 1 and trials >= 2");
  if (static_cast<double>(shots) * trials > cost_cap) {
    std::ostringstream msg;
    msg << "crb_experiment: shots * trials = " << static_cast<double>(shots) * trials << " exceeds the cost cap "
        << cost_cap;
    throw std::invalid_argument(msg.str());
  }
  if (bootstrap < 0) throw std::invalid_argument("crb_experiment: bootstrap must be >= 0");
  const double lo = bracket_lo > 0 ? bracket_lo : T_true / 10;
  const double hi = bracket_hi > 0 ? bracket_hi : T_true * 10;
  if (!(lo < T_true && T_true < hi)) throw std::invalid_argument("crb_experiment: bracket must contain T");
}

namespace {

std::pair<double, double> mean_var(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= v.size();
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, v.size() > 1 ? s / (v.size() - 1) : 0.0};
}

}  // namespace

CrbReport crb_experiment(const CrbExperimentConfig& cfg, const fisher::ProbModel& prob,
                         const fisher::DensityModel& rho) {
  cfg.validate();
  const double lo = cfg.bracket_lo > 0 ? cfg.bracket_lo : cfg.T_true / 10;
  const double hi = cfg.bracket_hi > 0 ? cfg.bracket_hi : cfg.T_true * 10;

  CrbReport rep;
  rep.fisher_q = fisher::qfi(rho, cfg.T_true).total;
  rep.fisher_cl = fisher::classical_fisher(prob, cfg.T_true);
  rep.crb = fisher::crb(rep.fisher_q, static_cast<double>(cfg.shots));

  const RVector p = prob(cfg.T_true);
  std::vector<double> est;
  for (int i = 0; i < cfg.trials; ++i) {
    TrialOutcome t;
    t.index = i;
    t.seed = trial_seed(cfg.seed, i);
    const ShotRecord rec = sample_shots(p, cfg.shots, t.seed);
    const EstimateResult e = mle_temperature(rec, prob, lo, hi);
    t.T_hat = e.T_hat;
    t.converged = e.converged;
    if (e.converged) est.push_back(e.T_hat);
    rep.trials.push_back(t);
  }
  rep.converged = static_cast<int>(est.size());
  if (est.size() < 2) return rep;

  std::tie(rep.mean, rep.variance) = mean_var(est);
  rep.bias = rep.mean - cfg.T_true;
  rep.ratio = rep.variance / rep.crb;

  if (cfg.bootstrap > 0) {
    std::mt19937_64 rng(trial_seed(cfg.seed, static_cast<std::uint64_t>(cfg.trials)));
    std::vector<double> ratios(cfg.bootstrap), sample(est.size());
    for (int b = 0; b < cfg.bootstrap; ++b) {
      for (double& x : sample) x = est[std::min(est.size() - 1, static_cast<std::size_t>(uniform01(rng) * est.size()))];
      ratios[b] = mean_var(sample).second / rep.crb;
    }
    std::sort(ratios.begin(), ratios.end());
    rep.ratio_ci_lo = ratios[static_cast<std::size_t>(0.025 * (cfg.bootstrap - 1))];
    rep.ratio_ci_hi = ratios[static_cast<std::size_t>(0.975 * (cfg.bootstrap - 1))];
  }

  const double dof = static_cast<double>(est.size() - 1);
  rep.chi2_statistic = dof * rep.variance / rep.crb;
  rep.chi2_critical = boost::math::quantile(boost::math::chi_squared(dof), 0.01);
  rep.bound_respected = rep.chi2_statistic >= rep.chi2_critical;
  return rep;
}

}  // namespace iontherm::estimate
