#include "iontherm/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace iontherm::protocol {

using model::EffectiveKind;
using qop::QOperator;
using qop::Space;

void RamseyConfig::validate() const {
  trap.validate();
  thermal.validate();
  if (!(duration >= 0.0) || !std::isfinite(duration))
    throw std::invalid_argument("RamseyConfig: duration must be finite and >= 0");
  if (!std::isfinite(pulse_phase)) throw std::invalid_argument("RamseyConfig: pulse phase must be finite");
  if (initial_spin == InitialSpin::EqualSuperposition && trap.spin().twice() != 1)
    throw std::invalid_argument("RamseyConfig: EqualSuperposition is only defined for j = 1/2; use PolarizedX");
}

SpinState::SpinState(const CMatrix& m) : rho(QOperator(m, Space::spin_only(static_cast<int>(m.rows())))) {}

double max_squeezing(const RamseyConfig& cfg, double t_max) {
  const auto& tr = cfg.trap;
  const double n = tr.n_ions;
  const double j = tr.spin().value();
  double coeff = 0.0;
  switch (cfg.kind) {
    case EffectiveKind::BeamSplitter:
      return 0.0;
    case EffectiveKind::TwoModeSqueezing:
      coeff = std::abs(tr.theta()) / n;
      break;
    case EffectiveKind::Effective:
    case EffectiveKind::FullSideband:
      if (tr.delta_x == 0.0 || tr.delta_y == 0.0) return 0.0;
      coeff = std::abs(2.0 * tr.g * tr.g * (tr.delta_x - tr.delta_y) / (n * tr.delta_x * tr.delta_y));
      break;
  }
  return coeff * j * t_max;
}

int squeezing_allowance(double r) {
  if (r < 1e-12) return 0;
  const double t = std::tanh(r);
  return static_cast<int>(std::ceil(std::log(kSqueezeTail) / std::log(t * t)));
}

model::ThermalSpec thermal_for(const RamseyConfig& cfg, double nbar_x, double nbar_y, double t_max) {
  const int extra = squeezing_allowance(max_squeezing(cfg, t_max));
  return {nbar_x, nbar_y, model::fock_cutoff(cfg.kind, nbar_x) + extra, model::fock_cutoff(cfg.kind, nbar_y) + extra};
}

CVector initial_spin_vector(InitialSpin kind, model::SpinLength j) {
  const int d = j.dim();
  if (kind == InitialSpin::EqualSuperposition && j.twice() != 1)
    throw std::invalid_argument("initial_spin_state: EqualSuperposition requires j = 1/2");
  // Binomial amplitudes sqrt((2j)! / (2^{2j} (j+m)! (j-m)!)); for j = 1/2 this is (1,1)/sqrt2 as well.
  const int n = j.twice();
  CVector v(d);
  for (int k = 0; k < d; ++k) {
    const double log_w = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0);
    v(k) = std::exp(0.5 * log_w);
  }
  return v / v.norm();
}

SpinState initial_spin_state(InitialSpin kind, model::SpinLength j) {
  const CVector v = initial_spin_vector(kind, j);
  return SpinState(CMatrix(v * v.adjoint()));
}

CMatrix pulse_rotation(model::SpinLength j, double phi) {
  const model::SpinOperators js = model::collective_spin(j);
  const QOperator gen = cplx(std::cos(phi)) * js.jy + cplx(std::sin(phi)) * js.jx;
  return qop::propagator(gen, -0.5 * kPi).matrix();
}

SpinState pi_half_pulse(const SpinState& state, double phi) {
  const int d = state.dim();
  const CMatrix r = pulse_rotation(model::SpinLength(d - 1), phi);
  return SpinState(CMatrix(r * state.rho.matrix() * r.adjoint()));
}

SpinObservables spin_observables(const SpinState& state) {
  const CMatrix& m = state.rho.matrix();
  return {m.diagonal().real(), m};
}

RamseyEvolution::RamseyEvolution(const RamseyConfig& cfg) : dims_(cfg.dims()), j_(cfg.trap.spin()) {
  cfg.validate();
  const model::SparseOp h = model::hamiltonian_sparse(cfg.kind, cfg.trap, dims_);
  const CVector psi = initial_spin_vector(cfg.initial_spin, j_);
  const int ds = dims_.spin_dim;
  const int dp = dims_.phonon_dim();

  // Keep the Fock pairs that carry weight at the configured occupations.
  for (int nx = 0; nx <= cfg.thermal.n_max_x; ++nx)
    for (int ny = 0; ny <= cfg.thermal.n_max_y; ++ny) components_.emplace_back(nx, ny);
  {
    const RVector w = weights(cfg.thermal.nbar_x, cfg.thermal.nbar_y);
    std::vector<std::pair<int, int>> kept;
    for (std::size_t c = 0; c < components_.size(); ++c)
      if (w(c) >= kWeightFloor) kept.push_back(components_[c]);
    components_ = std::move(kept);
  }

  // Connected blocks of H reachable from the seeded states.
  std::vector<int> block_of(dims_.total(), -1);
  std::vector<std::vector<std::pair<int, cplx>>> seeds_of_comp(components_.size());
  for (std::size_t c = 0; c < components_.size(); ++c) {
    const auto [nx, ny] = components_[c];
    for (int a = 0; a < ds; ++a)
      if (psi(a) != 0.0) seeds_of_comp[c].emplace_back(dims_.index(a, nx, ny), psi(a));
  }
  for (const auto& seeds : seeds_of_comp) {
    for (const auto& [start, amp] : seeds) {
      (void)amp;
      if (block_of[start] >= 0) continue;
      const int id = static_cast<int>(blocks_.size());
      Block blk;
      std::deque<int> queue{start};
      block_of[start] = id;
      while (!queue.empty()) {
        const int r = queue.front();
        queue.pop_front();
        blk.rows.push_back(r);
        for (model::SparseOp::InnerIterator it(h, r); it; ++it) {
          const int col = static_cast<int>(it.col());
          if (block_of[col] < 0) {
            block_of[col] = id;
            queue.push_back(col);
          }
        }
        if (static_cast<int>(blk.rows.size()) > kMaxDenseBlock) {
          std::ostringstream msg;
          msg << "RamseyEvolution: a Hamiltonian block exceeds " << kMaxDenseBlock
              << " states; reduce the Fock truncation or the evolution time";
          throw PhysicsError(msg.str());
        }
      }
      std::sort(blk.rows.begin(), blk.rows.end());
      blocks_.push_back(std::move(blk));
    }
  }

  std::vector<int> local(dims_.total(), -1);
  for (Block& blk : blocks_) {
    const int n = static_cast<int>(blk.rows.size());
    for (int k = 0; k < n; ++k) local[blk.rows[k]] = k;
    CMatrix hb = CMatrix::Zero(n, n);
    bool tridiagonal = true;
    for (int k = 0; k < n; ++k) {
      for (model::SparseOp::InnerIterator it(h, blk.rows[k]); it; ++it) {
        const int l = local[it.col()];
        hb(k, l) = it.value();
        if (std::abs(l - k) > 1) tridiagonal = false;
      }
    }
    if (tridiagonal && n > 1) {
      // Gauge the off-diagonals real: H = G T G^dagger with T real symmetric.
      RVector diag = hb.diagonal().real();
      RVector sub(n - 1);
      blk.gauge.resize(n);
      blk.gauge(0) = 1.0;
      for (int k = 0; k + 1 < n; ++k) {
        const cplx e = hb(k + 1, k);
        sub(k) = std::abs(e);
        blk.gauge(k + 1) = sub(k) > 0 ? blk.gauge(k) * e / sub(k) : blk.gauge(k);
      }
      const double shift = diag(0);
      const RVector rel = diag.array() - shift;
      int id = -1;
      for (std::size_t q = 0; q < spectra_.size() && id < 0; ++q)
        if (spectra_[q].sub.size() == sub.size() && spectra_[q].sub == sub && spectra_[q].diag_rel == rel)
          id = static_cast<int>(q);
      if (id < 0) {
        Spectrum sp;
        sp.diag_rel = rel;
        sp.sub = sub;
        RVector d = rel, e = sub;
        Eigen::SelfAdjointEigenSolver<RMatrix> es;
        es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
        if (es.info() != Eigen::Success) throw PhysicsError("RamseyEvolution: tridiagonal eigensolver failed");
        sp.values = es.eigenvalues();
        sp.q = es.eigenvectors();
        id = static_cast<int>(spectra_.size());
        spectra_.push_back(std::move(sp));
      }
      blk.spectrum = id;
      blk.energies = spectra_[id].values.array() + shift;
    } else {
      const qop::EigenDecomposition ed = qop::herm_eig(QOperator(hb, Space::plain(n)));
      blk.energies = ed.values;
      blk.vectors = ed.vectors;
    }
  }

  // Project each component's initial vector onto the blocks it touches.
  std::vector<std::vector<int>> comp_local_col(components_.size());
  for (std::size_t c = 0; c < components_.size(); ++c) {
    std::unordered_map<int, CVector> parts;
    for (const auto& [row, amp] : seeds_of_comp[c]) {
      const int b = block_of[row];
      auto it = parts.find(b);
      if (it == parts.end()) it = parts.emplace(b, CVector::Zero(blocks_[b].rows.size())).first;
      it->second(local[row]) += amp;
    }
    for (auto& [b, vec] : parts) {
      Block& blk = blocks_[b];
      blk.comps.push_back(static_cast<int>(c));
      const Eigen::Index col = blk.coeffs.cols();
      blk.coeffs.conservativeResize(blk.rows.size(), col + 1);
      if (blk.spectrum >= 0) {
        const CVector g = blk.gauge.conjugate().cwiseProduct(vec);
        const RMatrix& q = spectra_[blk.spectrum].q;
        blk.coeffs.col(col) = (q.transpose() * g.real()).cast<cplx>() + cplx(0, 1) * (q.transpose() * g.imag()).cast<cplx>();
      } else {
        blk.coeffs.col(col) = blk.vectors.adjoint() * vec;
      }
    }
  }

  for (std::size_t b = 0; b < blocks_.size(); ++b)
    if (blocks_[b].spectrum >= 0) spectra_[blocks_[b].spectrum].members.push_back(static_cast<int>(b));

  // Row pairs sharing a phonon state, for every ordered pair of blocks with a common component.
  const int nb = static_cast<int>(blocks_.size());
  std::vector<std::unordered_map<int, std::vector<std::pair<int, int>>>> by_phonon(nb);
  for (int b = 0; b < nb; ++b)
    for (int k = 0; k < static_cast<int>(blocks_[b].rows.size()); ++k) {
      const int g = blocks_[b].rows[k];
      by_phonon[b][g % dp].emplace_back(k, g / dp);
    }
  for (int a = 0; a < nb; ++a) {
    for (int b = 0; b < nb; ++b) {
      BlockPair bp{a, b, {}, {}, {}};
      const auto& ca = blocks_[a].comps;
      const auto& cb = blocks_[b].comps;
      for (std::size_t x = 0; x < ca.size(); ++x)
        for (std::size_t y = 0; y < cb.size(); ++y)
          if (ca[x] == cb[y]) {
            bp.comps.emplace_back(static_cast<int>(x), static_cast<int>(y));
            bp.comp_ids.push_back(ca[x]);
          }
      if (bp.comps.empty()) continue;
      for (int k = 0; k < static_cast<int>(blocks_[a].rows.size()); ++k) {
        const int g = blocks_[a].rows[k];
        const auto it = by_phonon[b].find(g % dp);
        if (it == by_phonon[b].end()) continue;
        for (const auto& [l, spin_b] : it->second) bp.rows.push_back({k, l, (g / dp) * ds + spin_b});
      }
      if (!bp.rows.empty()) pairs_.push_back(std::move(bp));
    }
  }
}

RVector RamseyEvolution::weights(double nbar_x, double nbar_y) const {
  auto mode = [](double nbar, int n_max) {
    RVector p(n_max + 1);
    for (int n = 0; n <= n_max; ++n) p(n) = model::thermal_probability(nbar, n);
    return RVector(p / p.sum());
  };
  const RVector px = mode(nbar_x, dims_.fock_x - 1);
  const RVector py = mode(nbar_y, dims_.fock_y - 1);
  RVector w(components_.size());
  for (std::size_t c = 0; c < components_.size(); ++c) w(c) = px(components_[c].first) * py(components_[c].second);
  return w;
}

CMatrix RamseyEvolution::spin_density(double t, double nbar_x, double nbar_y) const {
  if (!(nbar_x >= 0) || !(nbar_y >= 0)) throw std::invalid_argument("spin_density: occupations must be >= 0");
  if (model::thermal_tail(nbar_x, dims_.fock_x - 1) >= model::ThermalSpec::kTailTolerance ||
      model::thermal_tail(nbar_y, dims_.fock_y - 1) >= model::ThermalSpec::kTailTolerance) {
    std::ostringstream msg;
    msg << "spin_density: occupations (" << nbar_x << ", " << nbar_y
        << ") exceed the Fock truncation this evolution was built for";
    throw PhysicsError(msg.str());
  }
  RVector w = weights(nbar_x, nbar_y);
  const double kept = w.sum();
  if (1.0 - kept > 1e-10) {
    std::ostringstream msg;
    msg << "spin_density: thermal weight " << 1.0 - kept
        << " lies outside the propagated components; build the evolution at the larger occupation";
    throw PhysicsError(msg.str());
  }
  w /= kept;

  std::vector<CMatrix> psi(blocks_.size());
  auto evolved_coeffs = [&](const Block& blk) {
    CVector phase(blk.energies.size());
    for (Eigen::Index k = 0; k < phase.size(); ++k) phase(k) = std::exp(cplx(0.0, -blk.energies(k) * t));
    return CMatrix(phase.asDiagonal() * blk.coeffs);
  };
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const Block& blk = blocks_[b];
    if (blk.comps.empty() || blk.spectrum >= 0) continue;
    psi[b].noalias() = blk.vectors * evolved_coeffs(blk);
  }
  // Shared spectra: one real product for all member blocks.
  for (const Spectrum& sp : spectra_) {
    Eigen::Index cols = 0;
    for (int b : sp.members) cols += blocks_[b].coeffs.cols();
    if (cols == 0) continue;
    const Eigen::Index n = sp.q.rows();
    RMatrix x(n, 2 * cols);
    Eigen::Index off = 0;
    for (int b : sp.members) {
      const CMatrix c = evolved_coeffs(blocks_[b]);
      x.middleCols(off, c.cols()) = c.real();
      x.middleCols(cols + off, c.cols()) = c.imag();
      off += c.cols();
    }
    const RMatrix y = sp.q * x;
    off = 0;
    for (int b : sp.members) {
      const Eigen::Index k = blocks_[b].coeffs.cols();
      CMatrix out(n, k);
      out.real() = y.middleCols(off, k);
      out.imag() = y.middleCols(cols + off, k);
      psi[b] = blocks_[b].gauge.asDiagonal() * out;
      off += k;
    }
  }

  const int ds = dims_.spin_dim;
  std::vector<cplx> acc(ds * ds, 0.0);
  for (const BlockPair& bp : pairs_) {
    const CMatrix& pa = psi[bp.a];
    const CMatrix& pb = psi[bp.b];
    for (std::size_t q = 0; q < bp.comps.size(); ++q) {
      const double wc = w(bp.comp_ids[q]);
      if (wc == 0.0) continue;
      const cplx* ca = pa.col(bp.comps[q].first).data();
      const cplx* cb = pb.col(bp.comps[q].second).data();
      for (const RowPair& rp : bp.rows) acc[rp.spin_pair] += wc * ca[rp.i] * std::conj(cb[rp.j]);
    }
  }
  CMatrix rho(ds, ds);
  for (int a = 0; a < ds; ++a)
    for (int b = 0; b < ds; ++b) rho(a, b) = acc[a * ds + b];
  return 0.5 * (rho + rho.adjoint());
}

SpinState RamseyEvolution::state(double t, double nbar_x, double nbar_y, double phi) const {
  const CMatrix r = pulse_rotation(j_, phi);
  return SpinState(CMatrix(r * spin_density(t, nbar_x, nbar_y) * r.adjoint()));
}

int RamseyEvolution::largest_block() const {
  int m = 0;
  for (const Block& b : blocks_) m = std::max(m, static_cast<int>(b.rows.size()));
  return m;
}

SpinState run_ramsey(const RamseyConfig& cfg) {
  const RamseyEvolution evo(cfg);
  return evo.state(cfg.duration, cfg.thermal.nbar_x, cfg.thermal.nbar_y, cfg.pulse_phase);
}

std::vector<SpinState> run_ramsey_series(const RamseyConfig& cfg, const std::vector<double>& times) {
  const RamseyEvolution evo(cfg);
  std::vector<SpinState> out;
  out.reserve(times.size());
  for (double t : times) {
    if (!(t >= 0.0)) throw std::invalid_argument("run_ramsey_series: times must be >= 0");
    out.push_back(evo.state(t, cfg.thermal.nbar_x, cfg.thermal.nbar_y, cfg.pulse_phase));
  }
  return out;
}

SpinState run_ramsey_dense(const RamseyConfig& cfg, bool pulse_first) {
  cfg.validate();
  const qop::HilbertDims dims = cfg.dims();
  if (dims.total() > 4000) throw std::invalid_argument("run_ramsey_dense: space too large for the dense reference");
  const model::SpinLength j = cfg.trap.spin();
  const QOperator h = model::hamiltonian(cfg.kind, cfg.trap, dims);
  const CMatrix u = qop::propagator(h, cfg.duration).matrix();

  const SpinState s0 = initial_spin_state(cfg.initial_spin, j);
  const qop::DensityOp th = model::thermal_state(cfg.thermal);
  const QOperator rho0 = qop::kron(s0.rho.op(), th.op());
  CMatrix rho = u * rho0.matrix() * u.adjoint();
  const CMatrix r = pulse_rotation(j, cfg.pulse_phase);
  if (pulse_first) {
    const QOperator rf = qop::kron(QOperator(r, Space::spin_only(j.dim())),
                                   qop::identity(Space::modes(dims.fock_x, dims.fock_y)));
    rho = rf.matrix() * rho * rf.matrix().adjoint();
    return SpinState(qop::partial_trace_modes(rho, dims));
  }
  const CMatrix red = qop::partial_trace_modes(rho, dims);
  return SpinState(CMatrix(r * red * r.adjoint()));
}

TruncationCertificate certify_truncation(const RamseyConfig& cfg, const std::vector<double>& times,
                                         double tolerance) {
  RamseyConfig wider = cfg;
  wider.thermal.n_max_x += 5;
  wider.thermal.n_max_y += 5;
  const auto base = run_ramsey_series(cfg, times);
  const auto more = run_ramsey_series(wider, times);
  TruncationCertificate cert{cfg.thermal.n_max_x, cfg.thermal.n_max_y, 0.0, false};
  for (std::size_t k = 0; k < times.size(); ++k) {
    const RVector d = spin_observables(base[k]).populations - spin_observables(more[k]).populations;
    cert.max_population_change = std::max(cert.max_population_change, d.cwiseAbs().maxCoeff());
  }
  cert.certified = cert.max_population_change < tolerance;
  return cert;
}

}  // namespace iontherm::protocol
