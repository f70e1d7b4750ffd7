#include <doctest.h>

#include <cmath>

#include "iontherm/model.hpp"

using namespace iontherm;
using namespace iontherm::model;

TEST_CASE("collective spin algebra") {
  for (int tj = 1; tj <= 4; ++tj) {
    const SpinLength j(tj);
    const auto s = collective_spin(j);
    const CMatrix& x = s.jx.matrix();
    const CMatrix& y = s.jy.matrix();
    const CMatrix& z = s.jz.matrix();
    CHECK(qop::max_abs(x * y - y * x - cplx(0, 1) * z) < 1e-12);
    const CMatrix j2 = x * x + y * y + z * z;
    const double jj = j.value() * (j.value() + 1);
    CHECK(qop::max_abs(j2 - jj * CMatrix::Identity(j.dim(), j.dim())) < 1e-12);
    CHECK(z(0, 0).real() == doctest::Approx(j.value()));
  }
}

TEST_CASE("ladder operators") {
  const auto l = mode_ops(6);
  const CMatrix n = l.a_dagger.matrix() * l.a.matrix();
  for (int k = 0; k <= 6; ++k) CHECK(n(k, k).real() == doctest::Approx(k));
  CHECK(qop::max_abs(l.a_dagger.matrix() - l.a.matrix().adjoint()) == 0.0);
}

TEST_CASE("thermal occupations") {
  const double w = 4e6, T = 7e-6;
  const double nb = nbar_from_temperature(T, w);
  CHECK(nb == doctest::Approx(1.0 / (std::exp(kHbar * w / (kBoltzmann * T)) - 1.0)).epsilon(1e-12));
  CHECK(temperature_from_nbar(nb, w) == doctest::Approx(T).epsilon(1e-12));
  double sum = 0, mean = 0;
  for (int n = 0; n < 400; ++n) {
    sum += thermal_probability(0.7, n);
    mean += n * thermal_probability(0.7, n);
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mean == doctest::Approx(0.7).epsilon(1e-12));
  const int c = minimal_fock_cutoff(0.7);
  CHECK(thermal_tail(0.7, c) < 1e-10);
  CHECK(thermal_tail(0.7, c - 1) >= 1e-10);
  CHECK(fock_cutoff(EffectiveKind::TwoModeSqueezing, 0.7) == c + 15);
  CHECK(fock_cutoff(EffectiveKind::BeamSplitter, 0.7) == c + 5);
}

TEST_CASE("insufficient truncation is a physics error") {
  ThermalSpec s{2.0, 2.0, 5, 5};
  CHECK_THROWS_AS(s.validate(), PhysicsError);
  CHECK_THROWS_AS(thermal_state(s), PhysicsError);
  ThermalSpec ok{0.1, 0.2, minimal_fock_cutoff(0.1), minimal_fock_cutoff(0.2)};
  const auto rho = thermal_state(ok);
  CHECK(rho.matrix().trace().real() == doctest::Approx(1.0));
}

TEST_CASE("Hamiltonians are Hermitian and respect their symmetries") {
  TrapConfig cfg;
  cfg.n_ions = 2;
  const qop::HilbertDims dims{3, 5, 5};
  const auto js = collective_spin(cfg.spin());
  const auto ax = mode_ops(4, Mode::x), ay = mode_ops(4, Mode::y);
  const qop::QOperator idm = qop::identity(qop::Space::mode_x_only(5));
  const CMatrix nx = qop::kron(qop::identity(qop::Space::spin_only(3)),
                               qop::kron(ax.a_dagger * ax.a, qop::identity(qop::Space::mode_y_only(5))))
                         .matrix();
  const CMatrix ny = qop::kron(qop::identity(qop::Space::spin_only(3)), qop::kron(idm, ay.a_dagger * ay.a)).matrix();
  const CMatrix jz = qop::kron(js.jz, qop::identity(qop::Space::modes(5, 5))).matrix();

  const auto hb = hamiltonian(EffectiveKind::BeamSplitter, cfg, dims);
  CHECK(hb.is_hermitian());
  CHECK(qop::max_abs(hb.matrix() * jz - jz * hb.matrix()) < 1e-9);
  // Exchange conserves n_x + n_y (truncation edges included, since both modes share n_max).
  const CMatrix ntot = nx + ny;
  CHECK(qop::max_abs(hb.matrix() * ntot - ntot * hb.matrix()) < 1e-9);

  TrapConfig tms = cfg;
  tms.delta_y = -tms.delta_x;
  const auto ht = hamiltonian(EffectiveKind::TwoModeSqueezing, tms, dims);
  CHECK(ht.is_hermitian());
  const CMatrix ndiff = nx - ny;
  CHECK(qop::max_abs(ht.matrix() * ndiff - ndiff * ht.matrix()) < 1e-9);

  CHECK(hamiltonian(EffectiveKind::FullSideband, cfg, dims).is_hermitian());
  CHECK(hamiltonian(EffectiveKind::Effective, cfg, dims).is_hermitian());
}

TEST_CASE("effective Hamiltonian reduces to the beam splitter and squeezing limits") {
  for (int ions : {1, 2, 3}) {
    TrapConfig cfg;
    cfg.n_ions = ions;
    const SpinLength j = cfg.spin();
    const qop::HilbertDims dims{j.dim(), 4, 4};
    const double theta = cfg.theta();
    // -(4g^2/(N delta)) (Jx^2 + Jy^2) = (theta/N) Jz^2 - (theta/N) j(j+1)
    const CMatrix diff = hamiltonian(EffectiveKind::Effective, cfg, dims).matrix() -
                         hamiltonian(EffectiveKind::BeamSplitter, cfg, dims).matrix();
    const double shift = -theta / ions * j.value() * (j.value() + 1);
    CHECK(qop::max_abs(diff - shift * CMatrix::Identity(dims.total(), dims.total())) < 1e-6);

    cfg.delta_y = -cfg.delta_x;
    const CMatrix d2 = hamiltonian(EffectiveKind::Effective, cfg, dims).matrix() -
                       hamiltonian(EffectiveKind::TwoModeSqueezing, cfg, dims).matrix();
    CHECK(qop::max_abs(d2) < 1e-6);
  }
}

TEST_CASE("kind constraints") {
  TrapConfig cfg;
  cfg.delta_y = 2 * cfg.delta_x;
  CHECK_THROWS_AS(hamiltonian(EffectiveKind::BeamSplitter, cfg, {2, 3, 3}), std::invalid_argument);
  CHECK_THROWS_AS(hamiltonian(EffectiveKind::TwoModeSqueezing, cfg, {2, 3, 3}), std::invalid_argument);
  CHECK_THROWS_AS(hamiltonian(EffectiveKind::BeamSplitter, TrapConfig{}, {3, 3, 3}), std::invalid_argument);
  CHECK(parse_kind("tms") == EffectiveKind::TwoModeSqueezing);
  CHECK_THROWS_AS(parse_kind("nope"), std::invalid_argument);
  TrapConfig def;
  CHECK(def.in_dispersive_regime());
}
