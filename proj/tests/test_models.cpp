#include <cmath>

#include "doctest.h"
#include "ptqm/models.hpp"
#include "ptqm/phases.hpp"

using namespace ptqm;

TEST_CASE("truncated ladder operators") {
  const FockOps ops = build_fock_ops(6);
  CHECK(ops.a(2, 3) == Complex(std::sqrt(3.0), 0.0));
  CHECK((ops.adag - ops.a.adjoint()).norm() == 0.0);
  const CMatrix comm = ops.a * ops.adag - ops.adag * ops.a;
  CHECK((comm.topLeftCorner(5, 5) - CMatrix::Identity(5, 5)).norm() < 1e-14);
  CHECK(comm(5, 5).real() == doctest::Approx(-5.0));
  CHECK(ops.number(4, 4).real() == doctest::Approx(4.0));
}

TEST_CASE("coherent states") {
  const Complex z(0.3, -0.4), w(-0.2, 0.1);
  const CVector a = coherent_state(z, 40), b = coherent_state(w, 40);
  CHECK(a.norm() == doctest::Approx(1.0));
  const Complex expect = std::exp(-0.5 * std::norm(z) - 0.5 * std::norm(w) + std::conj(z) * w);
  CHECK(std::abs(a.dot(b) - expect) < 1e-12);
  const FockOps ops = build_fock_ops(40);
  CHECK((ops.a * a - z * a).head(39).norm() < 1e-12);
}

TEST_CASE("truncation error names the required size") {
  try {
    coherent_state(3.0, 10);
    FAIL("expected TruncationError");
  } catch (const TruncationError& e) {
    CHECK(e.required_truncation() == required_truncation(3.0, Tolerances{}.trunc));
    CHECK(coherent_tail_mass(3.0, e.required_truncation()) <= 1e-12);
    CHECK(coherent_tail_mass(3.0, e.required_truncation() - 1) > 1e-12);
  }
}

TEST_CASE("exponentials of ladder operators") {
  const Complex c(0.4, 0.2);
  const CMatrix e = exp_creation(c, 12);
  CHECK((e * exp_creation(-c, 12) - CMatrix::Identity(12, 12)).norm() < 1e-13);
  for (int k = 0; k < 12; ++k) {
    CHECK(std::abs(e(k, 0) - std::pow(c, k) / std::sqrt(std::tgamma(k + 1.0))) < 1e-14);
  }
  CHECK((exp_annihilation(c, 12) - exp_creation(std::conj(c), 12).adjoint()).norm() < 1e-15);
}

TEST_CASE("displacement of the vacuum is a coherent state") {
  const FockOps ops = build_fock_ops(50);
  const Complex z(0.5, 0.7);
  const CMatrix d = displacement(z, ops);
  CHECK((d.col(0) - coherent_state(z, 50)).norm() < 1e-10);
  CHECK((d.adjoint() * d - CMatrix::Identity(50, 50)).norm() < 1e-10);
}

TEST_CASE("oscillator kinematics") {
  const OscillatorModel m;
  CHECK(m.tau() == doctest::Approx(2.0 * kPi));
  CHECK(std::abs(m.z(0.0)) < 1e-15);
  CHECK(std::abs(m.z(m.tau())) < 1e-14);
  // The z loop is a circle of radius Ω_D/δ.
  CHECK(std::abs(m.loop_area()) == doctest::Approx(kPi * 0.09).epsilon(1e-7));
  CHECK(m.accumulated_phase(m.tau()) == doctest::Approx(2.0 * m.loop_area()).epsilon(1e-7));
}

TEST_CASE("propagator") {
  const OscillatorModel m(OscillatorParams{40, 0.3, 1.0, 0.0});
  CHECK((m.propagator(0.0) - CMatrix::Identity(40, 40)).norm() < 1e-13);

  // First order in z: I - z a† - z* a.
  const double t = 1e-4;
  const Complex z = m.z(t);
  const CMatrix first = CMatrix::Identity(40, 40) - z * m.ops().adag - std::conj(z) * m.ops().a;
  CHECK((m.propagator(t) - first).cwiseAbs().maxCoeff() < 1e-7);

  const CVector psi0 = coherent_state(0.0, 40);
  const ParameterPath path = m.pt_path();
  const EvolutionRecord r = evolve(m.pt_hamiltonian(), m.metric(), path, {psi0, path(0.0)}, 1500);
  for (std::size_t k : {std::size_t{300}, std::size_t{900}, r.size() - 1}) {
    CHECK((r.states[k].vec - m.propagator(r.times[k]) * psi0).norm() < 1e-8);
  }
  // One full loop: e^{iγ} on the initial ray.
  CHECK((m.propagator(m.tau()) * psi0 - std::exp(kI * 2.0 * m.loop_area()) * psi0).norm() < 1e-6);
}

TEST_CASE("picture map carries PT states to the Hermitian picture") {
  const OscillatorModel m(OscillatorParams{40, 0.3, 1.0, 0.0});
  const CVector psi0 = coherent_state(0.0, 40);
  const ParameterPath hp = m.hermitian_path();
  const EvolutionRecord r =
      evolve(m.hermitian_family(), MetricFamily::identity(40), hp, {psi0, hp(0.0)}, 1500);
  const double t = r.times[700];
  const CVector pt = m.propagator(t) * psi0;
  CHECK((m.picture_map(pt, t) - r.states[700].vec).norm() < 1e-7);
  CHECK((m.hermitian_picture_hamiltonian(t) - m.drive_hamiltonian(t)).norm() < 1e-12);
}

TEST_CASE("oscillator section and tilde partner") {
  const OscillatorModel m(OscillatorParams{40, 0.3, 1.0, 0.0});
  const StateSection s = m.section();
  const Point p{{0.1, -0.2, 0.15, 0.05}};
  const CVector phi = s.state(p);
  const CMatrix w = m.metric().matrix(s.params(p));
  CHECK((s.tilde(p) - w * phi).norm() < 1e-10);
  CHECK(std::abs(phi.dot(w * phi) - 1.0) < 1e-10);
  CHECK_THROWS_AS(m.check_trust(Complex(3.0, 0.0), Complex(2.0, 0.0)), TruncationError);
}

TEST_CASE("two-level model") {
  CHECK_THROWS_AS(two_level_model(0.3, 0.5), PreconditionError);
  const TwoLevelModel m = two_level_model();
  const Point p{{0.9, 0.4, 0.5}};
  const CMatrix h = m.hamiltonian(p);
  const Eigen::ComplexEigenSolver<CMatrix> es(h);
  for (Index k = 0; k < 2; ++k) CHECK(std::abs(es.eigenvalues()(k).imag()) < 1e-12);
  const CVector v = m.section.state(p);
  const double e = std::sqrt(0.81 + 0.16 - 0.25);
  CHECK((h * v - e * v).norm() < 1e-12);
  CHECK((two_level_hamiltonian(1.0, 0.2) - two_level_hamiltonian(1.0, 0.0, 0.2)).norm() == 0.0);
}

TEST_CASE("spin field loop") {
  const ParameterPath p = spin_field_loop(2.0, 0.5, 3.0);
  CHECK(p.closed());
  CHECK(p(1.1).norm() == doctest::Approx(2.0));
  CHECK(p(1.1)(2) == doctest::Approx(2.0 * std::cos(0.5)));
  const CMatrix h = spin_half_hamiltonian()(p(0.4));
  CHECK((h - h.adjoint()).norm() < 1e-15);
}
