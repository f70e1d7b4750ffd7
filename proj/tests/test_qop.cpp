#include <doctest.h>

#include "iontherm/qop.hpp"

using namespace iontherm;
using namespace iontherm::qop;

namespace {

CMatrix random_hermitian(int d, unsigned seed) {
  std::srand(seed);
  CMatrix a = CMatrix::Random(d, d);
  return a + a.adjoint();
}

}  // namespace

TEST_CASE("kron and partial trace") {
  CMatrix s(2, 2);
  s << 0.7, cplx(0.1, 0.2), cplx(0.1, -0.2), 0.3;
  CMatrix m = CMatrix::Zero(6, 6);
  m.diagonal() << 0.1, 0.2, 0.3, 0.15, 0.15, 0.1;
  const QOperator rho = kron(QOperator(s, Space::spin_only(2)), QOperator(m, Space::modes(2, 3)));
  CHECK(rho.space() == Space{2, 2, 3, 0});
  const CMatrix r = partial_trace_modes(rho.matrix(), HilbertDims{2, 2, 3});
  CHECK(max_abs(r - s) < 1e-15);
}

TEST_CASE("propagator is unitary and matches the eigen route") {
  const CMatrix h = random_hermitian(5, 7);
  const QOperator u = propagator(QOperator(h, Space::plain(5)), 0.37);
  CHECK(max_abs(u.matrix() * u.matrix().adjoint() - CMatrix::Identity(5, 5)) < 1e-13);
  // d/dt U = -i H U
  const double dt = 1e-6;
  const CMatrix du = (propagator(QOperator(h, Space::plain(5)), 0.37 + dt).matrix() -
                      propagator(QOperator(h, Space::plain(5)), 0.37 - dt).matrix()) /
                     (2 * dt);
  CHECK(max_abs(du - cplx(0, -1) * h * u.matrix()) < 1e-7);
}

TEST_CASE("herm_eig rejects non-Hermitian input") {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 1) = 1.0;
  CHECK_THROWS_AS(herm_eig(QOperator(a, Space::plain(2))), std::invalid_argument);
  const auto e = herm_eig(QOperator(random_hermitian(4, 3), Space::plain(4)));
  for (int i = 1; i < 4; ++i) CHECK(e.values(i) >= e.values(i - 1));
}

TEST_CASE("density operator invariants") {
  CMatrix good(2, 2);
  good << 0.5, 0.5, 0.5, 0.5;
  CHECK(DensityOp(QOperator(good, Space::spin_only(2))).purity() == doctest::Approx(1.0));
  CMatrix bad_trace = good * 2.0;
  CHECK_THROWS(DensityOp(QOperator(bad_trace, Space::spin_only(2))));
  CMatrix negative(2, 2);
  negative << 1.2, 0, 0, -0.2;
  CHECK_THROWS(DensityOp(QOperator(negative, Space::spin_only(2))));
}
