#include "ptqm/models.hpp"

#include <cmath>
#include <sstream>

namespace ptqm {

FockOps build_fock_ops(Index n) {
  if (n < 2) throw PreconditionError("Fock truncation must be at least 2");
  FockOps ops;
  ops.n = n;
  ops.a = CMatrix::Zero(n, n);
  for (Index k = 1; k < n; ++k) ops.a(k - 1, k) = std::sqrt(static_cast<double>(k));
  ops.adag = ops.a.adjoint();
  ops.number = ops.adag * ops.a;
  return ops;
}

double coherent_tail_mass(double amplitude, Index n) {
  const double x = amplitude * amplitude;
  if (x == 0.0) return 0.0;
  double sum = 0.0;
  for (Index k = n; k < n + 2000; ++k) {
    const double term = std::exp(-x + k * std::log(x) - std::lgamma(k + 1.0));
    sum += term;
    if (k > x && term < 1e-18 * sum) break;
  }
  return sum;
}

Index required_truncation(double amplitude, double tol) {
  Index n = 2;
  while (coherent_tail_mass(amplitude, n) > tol) ++n;
  return n;
}

namespace {

void require_reach(double amplitude, Index n, double tol, const char* what) {
  const double tail = coherent_tail_mass(amplitude, n);
  if (tail > tol) {
    const Index need = required_truncation(amplitude, tol);
    std::ostringstream os;
    os << what << ": amplitude " << amplitude << " leaves tail mass " << tail << " beyond N = " << n
       << "; use N >= " << need;
    throw TruncationError(os.str(), static_cast<long>(need));
  }
}

/// a† M on the truncation, row shift: (a† M)(m, ·) = √m M(m-1, ·).
CMatrix raise(const CMatrix& m) {
  CMatrix out = CMatrix::Zero(m.rows(), m.cols());
  for (Index r = 1; r < m.rows(); ++r) out.row(r) = std::sqrt(static_cast<double>(r)) * m.row(r - 1);
  return out;
}

}  // namespace

CVector coherent_state(Complex z, Index n, double tol_trunc) {
  if (n < 1) throw PreconditionError("coherent_state: empty truncation");
  require_reach(std::abs(z), n, tol_trunc, "coherent_state");
  CVector v(n);
  v(0) = std::exp(-0.5 * std::norm(z));
  for (Index k = 1; k < n; ++k) v(k) = v(k - 1) * z / std::sqrt(static_cast<double>(k));
  return v;
}

CMatrix exp_creation(Complex c, Index n) {
  CMatrix m = CMatrix::Zero(n, n);
  for (Index k = 0; k < n; ++k) {
    m(k, k) = 1.0;
    for (Index j = 1; k + j < n; ++j) {
      m(k + j, k) = m(k + j - 1, k) * c * std::sqrt(static_cast<double>(k + j)) / static_cast<double>(j);
    }
  }
  return m;
}

CMatrix exp_annihilation(Complex c, Index n) { return exp_creation(std::conj(c), n).adjoint(); }

CMatrix displacement(Complex z, const FockOps& ops) {
  const CMatrix h = -kI * (z * ops.adag - std::conj(z) * ops.a);  // Hermitian
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const CVector phases = (kI * es.eigenvalues().cast<Complex>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// --- oscillator ------------------------------------------------------------------

OscillatorModel::OscillatorModel(OscillatorParams p, const Tolerances& tol)
    : p_(p), ops_(build_fock_ops(p.n)), tol_(tol) {
  if (!(p_.delta > 0.0)) throw PreconditionError("detuning must be positive");
  const double reach = 3.0 * 2.0 * std::abs(p_.omega_d / p_.delta);  // |2z| + |z| at max |z|
  require_reach(reach, p_.n, tol_.trunc, "oscillator loop");
}

double OscillatorModel::tau() const { return 2.0 * kPi / p_.delta; }

Complex OscillatorModel::z(double t) const {
  return kI * p_.omega_d * (std::polar(1.0, -p_.delta * t) - 1.0) * std::polar(1.0, p_.phi_l) / p_.delta;
}

Complex OscillatorModel::z_dot(double t) const {
  return p_.omega_d * std::polar(1.0, -p_.delta * t + p_.phi_l);
}

double OscillatorModel::accumulated_phase(double t) const {
  const double r = p_.omega_d / p_.delta;
  return -r * r * (p_.delta * t - std::sin(p_.delta * t));
}

double OscillatorModel::loop_area(int vertices) const {
  double twice = 0.0;
  for (int k = 0; k < vertices; ++k) {
    const Complex a = z(tau() * k / vertices), b = z(tau() * (k + 1) / vertices);
    twice += a.real() * b.imag() - b.real() * a.imag();
  }
  return 0.5 * twice;
}

MetricFamily OscillatorModel::metric() const {
  const Index n = p_.n;
  auto factor = [n](const Point& l) { return exp_creation(2.0 * Complex(l(0), l(1)), n); };
  auto factor_grad = [n](const Point& l, Index mu) -> CMatrix {
    // ∂B/∂x = 2a†B, ∂B/∂y = 2i a†B
    const CMatrix up = raise(exp_creation(2.0 * Complex(l(0), l(1)), n));
    return (mu == 0 ? Complex(2.0, 0.0) : Complex(0.0, 2.0)) * up;
  };
  return MetricFamily::factored(n, factor, factor_grad, true);
}

HamiltonianFamily OscillatorModel::pt_hamiltonian() const { return HamiltonianFamily::zero(p_.n); }

ParameterPath OscillatorModel::pt_path() const {
  auto self = *this;
  return ParameterPath(
      2,
      [self](double t) -> Point {
        const Complex v = self.z(t);
        return Point{{v.real(), v.imag()}};
      },
      tau(), true,
      [self](double t) -> Point {
        const Complex v = self.z_dot(t);
        return Point{{v.real(), v.imag()}};
      });
}

CMatrix OscillatorModel::hermitian_picture_hamiltonian(double t) const {
  const Complex zd = z_dot(t);
  return kI * (zd * ops_.adag - std::conj(zd) * ops_.a);
}

CMatrix OscillatorModel::drive_hamiltonian(double t) const {
  const Complex e = std::polar(1.0, -p_.delta * t + p_.phi_l);
  return kI * p_.omega_d * (ops_.adag * e - ops_.a * std::conj(e));
}

HamiltonianFamily OscillatorModel::hermitian_family() const {
  const FockOps ops = ops_;
  const double omega = p_.omega_d;
  const Complex drive_phase = std::polar(1.0, p_.phi_l);
  return HamiltonianFamily(p_.n, [ops, omega, drive_phase](const Point& l) -> CMatrix {
    const Complex e = Complex(l(0), -l(1)) * drive_phase;  // e^{-iδt + iφ_L}
    return kI * omega * (ops.adag * e - ops.a * std::conj(e));
  });
}

ParameterPath OscillatorModel::hermitian_path() const {
  const double d = p_.delta;
  return ParameterPath(
      2, [d](double t) -> Point { return Point{{std::cos(d * t), std::sin(d * t)}}; }, tau(), true,
      [d](double t) -> Point { return Point{{-d * std::sin(d * t), d * std::cos(d * t)}}; });
}

void OscillatorModel::check_trust(Complex z1, Complex z2) const {
  require_reach(2.0 * std::abs(z1) + std::abs(z2), p_.n, tol_.trunc, "oscillator section");
}

CVector OscillatorModel::picture_map(const CVector& psi, double t) const {
  const Complex zt = z(t);
  check_trust(zt, 0.0);
  return exp_creation(2.0 * zt, p_.n) * psi;
}

CMatrix OscillatorModel::propagator(double t) const {
  const Complex zt = z(t);
  return std::polar(1.0, accumulated_phase(t)) * exp_creation(-2.0 * zt, p_.n) * displacement(zt, ops_);
}

StateSection OscillatorModel::section() const {
  StateSection s;
  s.dim_coords = 4;
  s.dim_params = 2;
  s.metric = metric();
  const auto self = *this;
  const Index n = p_.n;
  s.state = [self, n](const Point& l) -> CVector {
    const Complex z1(l(0), l(1)), z2(l(2), l(3));
    self.check_trust(z1, z2);
    return exp_creation(-2.0 * z1, n) * coherent_state(z2, n, 1.0);
  };
  s.tilde_state = [self, n](const Point& l) -> CVector {
    const Complex z1(l(0), l(1)), z2(l(2), l(3));
    self.check_trust(z1, z2);
    return exp_annihilation(2.0 * std::conj(z1), n) * coherent_state(z2, n, 1.0);
  };
  return s;
}

ParameterPath OscillatorModel::section_loop() const {
  auto self = *this;
  return ParameterPath(
      4,
      [self](double t) -> Point {
        const Complex v = self.z(t);
        return Point{{v.real(), v.imag(), v.real(), v.imag()}};
      },
      tau(), true,
      [self](double t) -> Point {
        const Complex v = self.z_dot(t);
        return Point{{v.real(), v.imag(), v.real(), v.imag()}};
      });
}

// --- two-level -------------------------------------------------------------------

namespace {

void require_unbroken(double coupling, double gamma_pt) {
  if (!(coupling > std::abs(gamma_pt))) {
    std::ostringstream os;
    os << "broken PT symmetry: coupling " << coupling << " must exceed |γ| = " << std::abs(gamma_pt)
       << " for a real spectrum";
    throw PreconditionError(os.str());
  }
}

}  // namespace

CMatrix two_level_hamiltonian(double s, double gamma_pt) { return two_level_hamiltonian(s, 0.0, gamma_pt); }

CMatrix two_level_hamiltonian(double x, double y, double gamma_pt) {
  CMatrix h(2, 2);
  h << kI * gamma_pt, Complex(x, -y), Complex(x, y), -kI * gamma_pt;
  return h;
}

CMatrix two_level_metric(double s, double gamma_pt) { return two_level_metric(s, 0.0, gamma_pt); }

CMatrix two_level_metric(double x, double y, double gamma_pt) {
  require_unbroken(std::hypot(x, y), gamma_pt);
  // Rows of R^{-1} are the left eigenvectors; W = Σ|Φ_n><Φ_n| = (R R^†)^{-1}.
  Eigen::ComplexEigenSolver<CMatrix> es(two_level_hamiltonian(x, y, gamma_pt));
  CMatrix r = es.eigenvectors();
  r.colwise().normalize();
  const CMatrix left = r.inverse();
  const CMatrix w = left.adjoint() * left;
  return 0.5 * (w + w.adjoint());
}

std::pair<HamiltonianFamily, MetricFamily> two_level_model(double s, double gamma_pt) {
  require_unbroken(s, gamma_pt);
  return {HamiltonianFamily::constant(two_level_hamiltonian(s, gamma_pt)),
          MetricFamily::constant(two_level_metric(s, gamma_pt))};
}

TwoLevelModel two_level_model() {
  TwoLevelModel m;
  m.hamiltonian =
      HamiltonianFamily(2, [](const Point& l) { return two_level_hamiltonian(l(0), l(1), l(2)); });
  m.metric = MetricFamily(2, [](const Point& l) { return two_level_metric(l(0), l(1), l(2)); });
  m.section.dim_coords = 3;
  m.section.dim_params = 3;
  m.section.metric = m.metric;
  m.section.state = [](const Point& l) -> CVector {
    const Complex kappa(l(0), l(1));
    const double g = l(2);
    require_unbroken(std::abs(kappa), g);
    const double e = std::sqrt(std::norm(kappa) - g * g);
    CVector v(2);
    v << std::conj(kappa), Complex(e, -g);
    const double norm2 = v.dot(two_level_metric(l(0), l(1), g) * v).real();
    return v / std::sqrt(norm2);
  };
  return m;
}

ParameterPath circle_path(const Point& center, double radius, double tau, Index axis0, Index axis1) {
  const double w = 2.0 * kPi / tau;
  return ParameterPath(
      center.size(),
      [=](double t) -> Point {
        Point p = center;
        p(axis0) += radius * std::cos(w * t);
        p(axis1) += radius * std::sin(w * t);
        return p;
      },
      tau, true,
      [=](double t) -> Point {
        Point v = Point::Zero(center.size());
        v(axis0) = -radius * w * std::sin(w * t);
        v(axis1) = radius * w * std::cos(w * t);
        return v;
      });
}

// --- spin-½ ----------------------------------------------------------------------

HamiltonianFamily spin_half_hamiltonian() {
  return HamiltonianFamily(2, [](const Point& l) -> CMatrix {
    CMatrix h(2, 2);
    h << l(2), Complex(l(0), -l(1)), Complex(l(0), l(1)), -l(2);
    return 0.5 * h;
  });
}

ParameterPath spin_field_loop(double b, double theta, double tau) {
  const double w = 2.0 * kPi / tau;
  return ParameterPath(
      3,
      [=](double t) -> Point {
        return Point{{b * std::sin(theta) * std::cos(w * t), b * std::sin(theta) * std::sin(w * t),
                      b * std::cos(theta)}};
      },
      tau, true,
      [=](double t) -> Point {
        return Point{{-b * w * std::sin(theta) * std::sin(w * t), b * w * std::sin(theta) * std::cos(w * t),
                      0.0}};
      });
}

StateSection bloch_section() {
  StateSection s;
  s.dim_coords = 2;
  s.dim_params = 0;
  s.metric = MetricFamily::identity(2);
  s.state = [](const Point& l) -> CVector {
    CVector v(2);
    v << std::cos(0.5 * l(0)), std::polar(std::sin(0.5 * l(0)), l(1));
    return v;
  };
  s.tilde_state = s.state;
  return s;
}

StateSection bloch_section_planar() {
  StateSection s;
  s.dim_coords = 2;
  s.dim_params = 0;
  s.metric = MetricFamily::identity(2);
  s.state = [](const Point& l) -> CVector {
    const double theta = l.norm();
    // sin(θ/2)/θ, with its series near the pole
    const double k = theta < 1e-4 ? 0.5 - theta * theta / 48.0 : std::sin(0.5 * theta) / theta;
    CVector v(2);
    v << std::cos(0.5 * theta), k * Complex(l(0), l(1));
    return v;
  };
  s.tilde_state = s.state;
  return s;
}

}  // namespace ptqm
