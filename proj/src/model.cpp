#include "iontherm/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace iontherm::model {

using qop::HilbertDims;
using qop::QOperator;
using qop::Space;

SpinLength::SpinLength(int twice_j) : twice_(twice_j) {
  if (twice_j < 1) throw std::invalid_argument("SpinLength: 2j must be an integer >= 1");
}

std::string to_string(EffectiveKind kind) {
  switch (kind) {
    case EffectiveKind::FullSideband: return "full";
    case EffectiveKind::Effective: return "effective";
    case EffectiveKind::BeamSplitter: return "bs";
    case EffectiveKind::TwoModeSqueezing: return "tms";
  }
  return "?";
}

EffectiveKind parse_kind(const std::string& name) {
  if (name == "full" || name == "FullSideband") return EffectiveKind::FullSideband;
  if (name == "effective" || name == "Effective") return EffectiveKind::Effective;
  if (name == "bs" || name == "BeamSplitter") return EffectiveKind::BeamSplitter;
  if (name == "tms" || name == "TwoModeSqueezing") return EffectiveKind::TwoModeSqueezing;
  throw std::invalid_argument("unknown interaction kind '" + name + "' (expected bs, tms, full, effective)");
}

void TrapConfig::validate() const {
  if (n_ions < 1) throw std::invalid_argument("TrapConfig: n_ions must be >= 1");
  if (!(omega_x > 0) || !(omega_y > 0)) throw std::invalid_argument("TrapConfig: omega_x, omega_y must be > 0");
  if (!(g > 0)) throw std::invalid_argument("TrapConfig: g must be > 0");
  if (!std::isfinite(delta_x) || !std::isfinite(delta_y))
    throw std::invalid_argument("TrapConfig: detunings must be finite");
}

bool TrapConfig::in_dispersive_regime() const {
  auto ok = [&](double delta, double omega) {
    return std::abs(delta) < 0.1 * omega && std::abs(delta) >= 10.0 * g;
  };
  return ok(delta_x, omega_x) && ok(delta_y, omega_y);
}

double TrapConfig::theta() const {
  if (delta_x == 0.0) throw std::invalid_argument("TrapConfig: theta undefined for delta_x = 0");
  return 4.0 * g * g / delta_x;
}

ThermalSpec ThermalSpec::from_temperature(double temperature, double omega_x, double omega_y,
                                          int n_max_x, int n_max_y) {
  return {nbar_from_temperature(temperature, omega_x), nbar_from_temperature(temperature, omega_y),
          n_max_x, n_max_y};
}

void ThermalSpec::validate() const {
  if (!(nbar_x >= 0) || !(nbar_y >= 0)) throw std::invalid_argument("ThermalSpec: occupations must be >= 0");
  if (n_max_x < 1 || n_max_y < 1) throw std::invalid_argument("ThermalSpec: n_max must be >= 1");
  auto check = [](double nbar, int n_max, const char* axis) {
    const double tail = thermal_tail(nbar, n_max);
    if (tail >= kTailTolerance) {
      std::ostringstream msg;
      msg << "thermal tail of mode " << axis << " is " << tail << " at n_max=" << n_max
          << " (nbar=" << nbar << "); use n_max >= " << minimal_fock_cutoff(nbar);
      throw PhysicsError(msg.str());
    }
  };
  check(nbar_x, n_max_x, "x");
  check(nbar_y, n_max_y, "y");
}

SpinOperators collective_spin(SpinLength j) {
  const int d = j.dim();
  const double jv = j.value();
  CMatrix jp = CMatrix::Zero(d, d);  // J+ in the basis m = j, j-1, ..., -j
  CMatrix jz = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const double m = j.m(k);
    jz(k, k) = m;
    if (k > 0) jp(k - 1, k) = std::sqrt(jv * (jv + 1) - m * (m + 1));
  }
  const CMatrix jm = jp.adjoint();
  const Space s = Space::spin_only(d);
  return {QOperator(0.5 * (jp + jm), s), QOperator(cplx(0, -0.5) * (jp - jm), s), QOperator(jz, s)};
}

LadderOps mode_ops(int n_max, Mode mode) {
  if (n_max < 1) throw std::invalid_argument("mode_ops: n_max must be >= 1");
  const int d = n_max + 1;
  CMatrix a = CMatrix::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  const Space s = mode == Mode::x ? Space::mode_x_only(d) : Space::mode_y_only(d);
  return {QOperator(a, s), QOperator(a.adjoint(), s)};
}

double thermal_probability(double nbar, int n) {
  if (nbar == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(n * std::log(nbar / (1.0 + nbar)) - std::log1p(nbar));
}

double thermal_tail(double nbar, int n_max) {
  if (nbar == 0.0) return 0.0;
  return std::exp((n_max + 1) * std::log(nbar / (1.0 + nbar)));
}

int minimal_fock_cutoff(double nbar, double tol) {
  if (!(nbar >= 0)) throw std::invalid_argument("minimal_fock_cutoff: nbar must be >= 0");
  if (nbar == 0.0) return 1;
  const double n = std::log(tol) / std::log(nbar / (1.0 + nbar)) - 1.0;
  int n_max = std::max(1, static_cast<int>(std::floor(n)));
  while (thermal_tail(nbar, n_max) >= tol) ++n_max;
  while (n_max > 1 && thermal_tail(nbar, n_max - 1) < tol) --n_max;
  return n_max;
}

int fock_cutoff(EffectiveKind kind, double nbar) {
  return minimal_fock_cutoff(nbar) + (kind == EffectiveKind::TwoModeSqueezing ? 15 : 5);
}

double nbar_from_temperature(double temperature, double omega) {
  if (!(temperature > 0) || !(omega > 0))
    throw std::invalid_argument("nbar_from_temperature: T and omega must be > 0");
  return 1.0 / std::expm1(kHbarOverKb * omega / temperature);
}

double temperature_from_nbar(double nbar, double omega) {
  if (!(nbar > 0) || !(omega > 0)) throw std::invalid_argument("temperature_from_nbar: nbar and omega must be > 0");
  return kHbarOverKb * omega / std::log1p(1.0 / nbar);
}

namespace {

struct Move {
  int dx, dy;
  double amp;
};

// Phonon-side operators as transition lists from |nx, ny>.
using PhononOp = std::function<void(int nx, int ny, std::vector<Move>& out)>;

double sq(int n) { return std::sqrt(static_cast<double>(n)); }

const PhononOp kQuadratureX = [](int nx, int, std::vector<Move>& out) {
  if (nx > 0) out.push_back({-1, 0, sq(nx)});
  out.push_back({+1, 0, sq(nx + 1)});
};
const PhononOp kQuadratureY = [](int, int ny, std::vector<Move>& out) {
  if (ny > 0) out.push_back({0, -1, sq(ny)});
  out.push_back({0, +1, sq(ny + 1)});
};
// a_x^dag a_y - a_x a_y^dag
const PhononOp kExchange = [](int nx, int ny, std::vector<Move>& out) {
  if (ny > 0) out.push_back({+1, -1, sq(nx + 1) * sq(ny)});
  if (nx > 0) out.push_back({-1, +1, -sq(nx) * sq(ny + 1)});
};
// a_x^dag a_y^dag - a_x a_y
const PhononOp kPairs = [](int nx, int ny, std::vector<Move>& out) {
  out.push_back({+1, +1, sq(nx + 1) * sq(ny + 1)});
  if (nx > 0 && ny > 0) out.push_back({-1, -1, -sq(nx) * sq(ny)});
};
const PhononOp kIdentity = [](int, int, std::vector<Move>& out) { out.push_back({0, 0, 1.0}); };

class SparseBuilder {
 public:
  explicit SparseBuilder(const HilbertDims& dims) : dims_(dims) {}

  void add(const CMatrix& spin, const PhononOp& phonon, cplx coeff) {
    std::vector<Move> moves;
    for (int nx = 0; nx < dims_.fock_x; ++nx) {
      for (int ny = 0; ny < dims_.fock_y; ++ny) {
        moves.clear();
        phonon(nx, ny, moves);
        for (const Move& mv : moves) {
          const int mx = nx + mv.dx, my = ny + mv.dy;
          if (mx < 0 || my < 0 || mx >= dims_.fock_x || my >= dims_.fock_y) continue;
          for (int a = 0; a < dims_.spin_dim; ++a)
            for (int b = 0; b < dims_.spin_dim; ++b) {
              const cplx s = spin(a, b);
              if (s == 0.0) continue;
              triplets_.emplace_back(dims_.index(a, mx, my), dims_.index(b, nx, ny), coeff * s * mv.amp);
            }
        }
      }
    }
  }

  void add_phonon_diagonal(double delta_x, double delta_y) {
    for (int a = 0; a < dims_.spin_dim; ++a)
      for (int nx = 0; nx < dims_.fock_x; ++nx)
        for (int ny = 0; ny < dims_.fock_y; ++ny) {
          const double e = delta_x * nx + delta_y * ny;
          if (e != 0.0) triplets_.emplace_back(dims_.index(a, nx, ny), dims_.index(a, nx, ny), e);
        }
  }

  SparseOp build() const {
    SparseOp h(dims_.total(), dims_.total());
    h.setFromTriplets(triplets_.begin(), triplets_.end());
    h.prune(cplx(0.0));
    return h;
  }

 private:
  HilbertDims dims_;
  std::vector<Eigen::Triplet<cplx>> triplets_;
};

bool nearly_equal(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

SparseOp hamiltonian_sparse(EffectiveKind kind, const TrapConfig& cfg, const HilbertDims& dims) {
  cfg.validate();
  dims.validate();
  const SpinLength j = cfg.spin();
  if (dims.spin_dim != j.dim()) {
    std::ostringstream msg;
    msg << "hamiltonian: spin_dim " << dims.spin_dim << " does not match the j = N/2 sector of "
        << cfg.n_ions << " ions (expected " << j.dim() << ")";
    throw std::invalid_argument(msg.str());
  }
  if (dims.fock_x < 2 || dims.fock_y < 2) throw std::invalid_argument("hamiltonian: Fock truncation must be >= 1");

  const SpinOperators js = collective_spin(j);
  const CMatrix& jx = js.jx.matrix();
  const CMatrix& jy = js.jy.matrix();
  const CMatrix& jz = js.jz.matrix();
  const double n = cfg.n_ions;
  const double g2 = cfg.g * cfg.g;
  const cplx i(0.0, 1.0);

  SparseBuilder b(dims);
  b.add_phonon_diagonal(cfg.delta_x, cfg.delta_y);

  switch (kind) {
    case EffectiveKind::FullSideband: {
      const double c = 2.0 * cfg.g / std::sqrt(n);
      b.add(jx, kQuadratureX, c);
      b.add(jy, kQuadratureY, c);
      break;
    }
    case EffectiveKind::Effective: {
      if (cfg.delta_x == 0.0 || cfg.delta_y == 0.0)
        throw std::invalid_argument("hamiltonian(effective): detunings must be nonzero");
      // Second-order elimination of exp(-S) with S = sum 2g/(delta sqrt N) J (a - a^dag).
      b.add(jx * jx, kIdentity, -4.0 * g2 / (n * cfg.delta_x));
      b.add(jy * jy, kIdentity, -4.0 * g2 / (n * cfg.delta_y));
      const cplx c = 2.0 * i * g2 / (n * cfg.delta_x * cfg.delta_y);
      b.add(jz, kExchange, c * (cfg.delta_x + cfg.delta_y));
      b.add(jz, kPairs, -c * (cfg.delta_x - cfg.delta_y));
      break;
    }
    case EffectiveKind::BeamSplitter: {
      if (!nearly_equal(cfg.delta_x, cfg.delta_y))
        throw std::invalid_argument("hamiltonian(bs): requires delta_x = delta_y");
      const double rate = cfg.theta() / n;
      b.add(jz * jz, kIdentity, rate);
      b.add(jz, kExchange, i * rate);
      break;
    }
    case EffectiveKind::TwoModeSqueezing: {
      if (!nearly_equal(cfg.delta_x, -cfg.delta_y))
        throw std::invalid_argument("hamiltonian(tms): requires delta_x = -delta_y");
      const double rate = cfg.theta() / n;
      b.add(jx * jx - jy * jy, kIdentity, -rate);
      b.add(jz, kPairs, i * rate);
      break;
    }
  }
  return b.build();
}

QOperator hamiltonian(EffectiveKind kind, const TrapConfig& cfg, const HilbertDims& dims) {
  return {CMatrix(hamiltonian_sparse(kind, cfg, dims)), dims.space()};
}

QOperator phonon_hamiltonian(const TrapConfig& cfg, const HilbertDims& dims) {
  SparseBuilder b(dims);
  b.add_phonon_diagonal(cfg.delta_x, cfg.delta_y);
  return {CMatrix(b.build()), dims.space()};
}

qop::DensityOp thermal_state(const ThermalSpec& spec) {
  spec.validate();
  auto weights = [](double nbar, int n_max) {
    RVector w(n_max + 1);
    for (int n = 0; n <= n_max; ++n) w(n) = thermal_probability(nbar, n);
    return RVector(w / w.sum());
  };
  const RVector wx = weights(spec.nbar_x, spec.n_max_x);
  const RVector wy = weights(spec.nbar_y, spec.n_max_y);
  const int dx = spec.n_max_x + 1, dy = spec.n_max_y + 1;
  CVector diag(dx * dy);
  for (int nx = 0; nx < dx; ++nx)
    for (int ny = 0; ny < dy; ++ny) diag(nx * dy + ny) = wx(nx) * wy(ny);
  return qop::DensityOp(QOperator(CMatrix(diag.asDiagonal()), Space::modes(dx, dy)));
}

}  // namespace iontherm::model
