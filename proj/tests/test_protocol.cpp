#include <doctest.h>

#include <cmath>

#include "iontherm/closedform.hpp"
#include "iontherm/protocol.hpp"

using namespace iontherm;
using namespace iontherm::protocol;
using model::EffectiveKind;

namespace {

RamseyConfig small(EffectiveKind kind, int ions, double nbar, int n_max, double theta_t) {
  RamseyConfig c;
  c.kind = kind;
  c.trap.n_ions = ions;
  if (kind == EffectiveKind::TwoModeSqueezing) c.trap.delta_y = -c.trap.delta_x;
  c.initial_spin = ions == 1 ? InitialSpin::EqualSuperposition : InitialSpin::PolarizedX;
  c.thermal = {nbar, nbar, n_max, n_max};
  c.duration = theta_t / std::abs(c.trap.theta());
  return c;
}

}  // namespace

TEST_CASE("pi/2 pulse on one spin") {
  for (double phi : {0.0, 0.4, kPi / 3, 2.0}) {
    const CMatrix r = pulse_rotation(model::SpinLength(1), phi);
    const cplx e = std::exp(cplx(0, phi));
    CMatrix expect(2, 2);
    expect << 1.0, e, -std::conj(e), 1.0;
    expect /= std::sqrt(2.0);
    CHECK(qop::max_abs(r - expect) < 1e-14);
  }
}

TEST_CASE("initial states") {
  const CVector v = initial_spin_vector(InitialSpin::PolarizedX, model::SpinLength(2));
  CHECK(std::abs(v(0)) == doctest::Approx(0.5));
  CHECK(std::abs(v(1)) == doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS_AS(initial_spin_vector(InitialSpin::EqualSuperposition, model::SpinLength(2)), std::invalid_argument);
}

TEST_CASE("block engine reproduces the dense reference") {
  for (auto kind : {EffectiveKind::BeamSplitter, EffectiveKind::TwoModeSqueezing, EffectiveKind::FullSideband,
                    EffectiveKind::Effective}) {
    for (int ions : {1, 2}) {
      RamseyConfig c = small(kind, ions, 0.02, 7, 1.3);
      if (kind == EffectiveKind::Effective) c.trap.delta_y = 1.3 * c.trap.delta_x;
      c.pulse_phase = 0.3;
      const CMatrix fast = run_ramsey(c).rho.matrix();
      const CMatrix dense = run_ramsey_dense(c).rho.matrix();
      const CMatrix first = run_ramsey_dense(c, true).rho.matrix();
      CHECK(qop::max_abs(fast - dense) < 1e-10);
      CHECK(qop::max_abs(first - dense) < 1e-10);
    }
  }
}

TEST_CASE("beam splitter engine equals the closed forms") {
  RamseyConfig c = small(EffectiveKind::BeamSplitter, 1, 0.15, model::fock_cutoff(EffectiveKind::BeamSplitter, 0.15),
                         4 * kPi);
  const double theta = c.trap.theta();
  const RamseyEvolution ev(c);
  for (double x : {0.0, 0.7, kPi, 5.0, 10.0})
    for (double phi : {0.0, 1.1}) {
      const CMatrix r = ev.state(x / theta, 0.15, 0.15, phi).rho.matrix();
      CHECK(qop::max_abs(r - closedform::spin_density_bs(x, 0.15, phi)) < 1e-10);
    }

  RamseyConfig c2 = small(EffectiveKind::BeamSplitter, 2, 0.1, model::fock_cutoff(EffectiveKind::BeamSplitter, 0.1),
                          4 * kPi);
  const RamseyEvolution e2(c2);
  for (double x : {0.3, kPi, 7.0})
    CHECK(qop::max_abs(e2.state(x / theta, 0.1, 0.1, 0.0).rho.matrix() - closedform::spin_density_j1(x, 0.1)) < 1e-10);
}

TEST_CASE("one engine serves a temperature sweep") {
  RamseyConfig c = small(EffectiveKind::BeamSplitter, 1, 0.3, model::fock_cutoff(EffectiveKind::BeamSplitter, 0.3),
                         kPi);
  const RamseyEvolution ev(c);
  const double t = c.duration;
  for (double n : {0.01, 0.1, 0.3})
    CHECK(ev.state(t, n, n, 0.0).rho.matrix()(0, 0).real() == doctest::Approx(closedform::p_up_bs(kPi, n, 0.0)));
  CHECK_THROWS_AS(ev.state(t, 3.0, 3.0, 0.0), PhysicsError);
}

TEST_CASE("squeezing keeps the spin diagonal") {
  RamseyConfig c = small(EffectiveKind::TwoModeSqueezing, 1, 0.05, 0, 2.0);
  c.thermal = thermal_for(c, 0.05, 0.05, c.duration);
  const RamseyEvolution ev(c);
  const double theta = std::abs(c.trap.theta());
  for (double x : {0.5, 1.0, 2.0}) {
    const CMatrix r = ev.state(x / theta, 0.05, 0.05, 0.0).rho.matrix();
    CHECK(std::abs(r(0, 1)) < 1e-10);
    CHECK(r(0, 0).real() == doctest::Approx(closedform::p_up_tms(x, 0.05)).epsilon(1e-8));
  }
}

TEST_CASE("truncation certificate") {
  RamseyConfig c = small(EffectiveKind::FullSideband, 1, 0.05, model::fock_cutoff(EffectiveKind::FullSideband, 0.05),
                         kPi);
  const auto cert = certify_truncation(c, {c.duration * 0.5, c.duration});
  CHECK(cert.certified);
  CHECK(cert.max_population_change < 1e-6);
}

TEST_CASE("configuration errors") {
  RamseyConfig c = small(EffectiveKind::BeamSplitter, 2, 0.1, 10, 1.0);
  c.initial_spin = InitialSpin::EqualSuperposition;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  RamseyConfig d = small(EffectiveKind::BeamSplitter, 1, 0.1, 10, 1.0);
  d.duration = -1;
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}
