#include "ptqm/geometry.hpp"

#include <cmath>
#include <sstream>

#include "ptqm/numerics.hpp"

namespace ptqm {

CVector StateSection::tilde(const Point& lambda) const {
  if (tilde_state) return tilde_state(lambda);
  return metric.at(params(lambda)).tilde(state(lambda));
}

StateSection regauge(const StateSection& section, std::function<double(const Point&)> theta) {
  StateSection out = section;
  auto base = section.state;
  out.state = [base, theta](const Point& l) -> CVector { return base(l) * std::polar(1.0, theta(l)); };
  if (section.tilde_state) {
    auto base_tilde = section.tilde_state;
    out.tilde_state = [base_tilde, theta](const Point& l) -> CVector {
      return base_tilde(l) * std::polar(1.0, theta(l));
    };
  }
  return out;
}

namespace {

void check_point(const StateSection& section, const Point& point) {
  if (!section.state) throw StructuralError("section has no state callback");
  if (point.size() != section.dim_coords) throw StructuralError("point has the wrong number of coordinates");
  if (section.dim_params > section.dim_coords) throw StructuralError("more metric parameters than coordinates");
}

/// (φ, φ̃) stacked, with the normalization checked.
CVector stacked(const StateSection& section, const Point& p, const Tolerances& tol) {
  const CVector phi = section.state(p);
  const CVector phi_tilde = section.tilde(p);
  const double drift = std::abs(phi_tilde.dot(phi) - 1.0);
  if (drift > tol.norm) {
    std::ostringstream os;
    os << "section is not W-normalized near the evaluation point (|<φ̃|φ> - 1| = " << drift << ")";
    throw ValidationError(os.str(), drift);
  }
  CVector out(2 * phi.size());
  out << phi, phi_tilde;
  return out;
}

}  // namespace

SectionJet section_jet(const StateSection& section, const Point& point, const Tolerances& tol) {
  check_point(section, point);
  SectionJet jet;
  jet.point = point;
  const CVector center = stacked(section, point, tol);
  const Index n = center.size() / 2;
  jet.phi = center.head(n);
  jet.phi_tilde = center.tail(n);
  auto f = [&](const Point& p) { return stacked(section, p, tol); };
  for (Index mu = 0; mu < section.dim_coords; ++mu) {
    const CVector d = richardson_derivative(f, point, mu, section.fd_step);
    jet.d_phi.push_back(d.head(n));
    jet.d_phi_tilde.push_back(d.tail(n));
  }
  return jet;
}

RVector connection(const SectionJet& jet) {
  const Index m = static_cast<Index>(jet.d_phi.size());
  RVector a(m);
  for (Index mu = 0; mu < m; ++mu) a(mu) = jet.phi_tilde.dot(jet.d_phi[mu]).imag();
  return a;
}

RMatrix curvature(const SectionJet& jet) {
  const Index m = static_cast<Index>(jet.d_phi.size());
  RMatrix omega(m, m);
  for (Index mu = 0; mu < m; ++mu) {
    for (Index nu = 0; nu < m; ++nu) {
      omega(mu, nu) =
          0.5 * (jet.d_phi_tilde[mu].dot(jet.d_phi[nu]) + jet.d_phi[mu].dot(jet.d_phi_tilde[nu])).imag();
    }
  }
  return (0.5 * (omega - omega.transpose())).eval();
}

CMatrix qgt(const SectionJet& jet) {
  const Index m = static_cast<Index>(jet.d_phi.size());
  // a_μ = <φ̃|∂_μφ>, b_μ = <φ|∂_μφ̃>
  CVector a(m), b(m);
  for (Index mu = 0; mu < m; ++mu) {
    a(mu) = jet.phi_tilde.dot(jet.d_phi[mu]);
    b(mu) = jet.phi.dot(jet.d_phi_tilde[mu]);
  }
  CMatrix q(m, m);
  for (Index mu = 0; mu < m; ++mu) {
    for (Index nu = 0; nu < m; ++nu) {
      q(mu, nu) = 0.5 * (jet.d_phi_tilde[mu].dot(jet.d_phi[nu]) - std::conj(b(mu)) * a(nu) +
                         jet.d_phi[mu].dot(jet.d_phi_tilde[nu]) - std::conj(a(mu)) * b(nu));
    }
  }
  return q;
}

RMatrix metric_tensor(const SectionJet& jet) {
  const RMatrix g = qgt(jet).real();
  return (0.5 * (g + g.transpose())).eval();
}

RVector connection(const StateSection& section, const Point& point, const Tolerances& tol) {
  return connection(section_jet(section, point, tol));
}

RMatrix curvature(const StateSection& section, const Point& point, const Tolerances& tol) {
  return curvature(section_jet(section, point, tol));
}

RMatrix metric_tensor(const StateSection& section, const Point& point, const Tolerances& tol) {
  return metric_tensor(section_jet(section, point, tol));
}

CMatrix qgt(const StateSection& section, const Point& point, const Tolerances& tol) {
  return qgt(section_jet(section, point, tol));
}

GeometricTensors tensors(const StateSection& section, const Point& point, const Tolerances& tol) {
  const SectionJet jet = section_jet(section, point, tol);
  GeometricTensors t;
  t.point = point;
  t.A = connection(jet);
  t.Omega = curvature(jet);
  t.Q = qgt(jet);
  t.g = metric_tensor(jet);
  const RVector ev = Eigen::SelfAdjointEigenSolver<RMatrix>(t.g, Eigen::EigenvaluesOnly).eigenvalues();
  t.degenerate_directions = (ev.array().abs() <= tol.tensor).count();
  return t;
}

RMatrix curvature_from_connection(const StateSection& section, const Point& point,
                                  const Tolerances& tol) {
  check_point(section, point);
  const Index m = section.dim_coords;
  RMatrix dA(m, m);  // dA(μ, ν) = ∂_μ A_ν
  // The outer step is kept well above the inner one so the nested
  // differences do not interfere.
  const double h = std::max(1e-3, 10.0 * section.fd_step);
  for (Index mu = 0; mu < m; ++mu) {
    dA.row(mu) = richardson_derivative([&](const Point& p) { return connection(section, p, tol); },
                                       point, mu, h)
                     .transpose();
  }
  return 0.5 * (dA - dA.transpose());
}

double smoothness_probe(const StateSection& section, const Point& point) {
  check_point(section, point);
  const double h = section.fd_step;
  double worst = 0.0;
  for (Index mu = 0; mu < section.dim_coords; ++mu) {
    auto at = [&](double s) {
      Point p = point;
      p(mu) += s;
      return section.state(p);
    };
    const CVector f0 = at(0.0), fp = at(h), fm = at(-h), fp2 = at(2 * h), fm2 = at(-2 * h);
    const CVector central = (fp - fm) / (2 * h);
    const CVector central2 = (fp2 - fm2) / (4 * h);
    const CVector forward = (-3.0 * f0 + 4.0 * fp - fp2) / (2 * h);
    const double estimate = std::max((central - central2).norm(), 1e-8);
    worst = std::max(worst, (central - forward).norm() / estimate);
  }
  return worst;
}

// --- fidelity ----------------------------------------------------------------------

FidelityResult fidelity(const BiDensity& rho, const BiDensity& sigma, const MetricFamily& metric,
                        const Tolerances& tol) {
  if (rho.mat.rows() != sigma.mat.rows() || rho.mat.rows() != metric.dim()) {
    throw StructuralError("fidelity: dimension mismatch");
  }
  FidelityResult r;
  r.value = std::sqrt(std::abs((rho.mat * sigma.mat).trace()));

  Eigen::SelfAdjointEigenSolver<CMatrix> es(metric.matrix(rho.lambda));
  const RVector d = es.eigenvalues();
  if (d.minCoeff() <= 0.0) throw ValidationError("fidelity: metric is not positive-definite", d.minCoeff());
  const CMatrix& v = es.eigenvectors();
  const CMatrix s = v * d.cwiseSqrt().asDiagonal() * v.adjoint();
  const CMatrix s_inv = v * d.cwiseSqrt().cwiseInverse().asDiagonal() * v.adjoint();
  CMatrix rho_h = s * rho.mat * s_inv;
  rho_h = (0.5 * (rho_h + rho_h.adjoint())).eval();
  const CMatrix sigma_h = s * sigma.mat * s_inv;

  Eigen::SelfAdjointEigenSolver<CMatrix> er(rho_h);
  const RVector root = er.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const CMatrix rho_root = er.eigenvectors() * root.asDiagonal() * er.eigenvectors().adjoint();
  const CMatrix x = rho_root * sigma_h * rho_root;
  const RVector sv = Eigen::JacobiSVD<CMatrix>(x).singularValues();
  const double cut = 1e-10 * std::max(sv(0), 1e-300);
  for (Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > cut) r.operator_route += std::sqrt(sv(k));
  }
  r.discrepancy = std::abs(r.value - r.operator_route);
  if (r.discrepancy > 100.0 * tol.fid) {
    std::ostringstream os;
    os << "fidelity routes disagree by " << r.discrepancy;
    throw ConsistencyError(os.str(), r.discrepancy);
  }
  return r;
}

// --- causal structure ------------------------------------------------------------

double line_element(const StateSection& section, const Point& point, const Point& d_lambda,
                    const Tolerances& tol) {
  if (d_lambda.isZero(0.0)) return 0.0;
  return d_lambda.dot(metric_tensor(section, point, tol) * d_lambda);
}

std::string to_string(Causal c) {
  switch (c) {
    case Causal::spacelike: return "spacelike";
    case Causal::lightlike: return "lightlike";
    case Causal::timelike: return "timelike";
  }
  return "?";
}

std::vector<ClassifiedSample> classify_evolution(const StateSection& section,
                                                 const ParameterPath& curve, int samples,
                                                 const Tolerances& tol) {
  if (samples < 1) throw PreconditionError("classification needs at least one sample");
  if (curve.dim_params() != section.dim_coords) throw StructuralError("curve and section differ in dimension");
  std::vector<ClassifiedSample> out;
  out.reserve(static_cast<std::size_t>(samples));
  const double h = 1e-5 * curve.tau();
  for (int k = 0; k < samples; ++k) {
    ClassifiedSample s;
    s.t = curve.tau() * k / samples;
    const Point v = curve.velocity(s.t, h);
    s.tangent_norm2 = v.squaredNorm();
    s.ds2 = s.tangent_norm2 == 0.0 ? 0.0 : v.dot(metric_tensor(section, curve(s.t), tol) * v);
    if (std::abs(s.ds2) <= tol.light * s.tangent_norm2) {
      s.tag = Causal::lightlike;
    } else {
      s.tag = s.ds2 < 0.0 ? Causal::timelike : Causal::spacelike;
    }
    out.push_back(s);
  }
  return out;
}

double parallel_transport_residual(std::span<const double> times,
                                   std::span<const PhysicalState> states,
                                   const MetricFamily& metric) {
  if (times.size() != states.size()) throw StructuralError("times and states differ in length");
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < states.size(); ++k) {
    const CVector& a = states[k].vec;
    const CVector& b = states[k + 1].vec;
    const CMatrix w_mean = 0.5 * (metric.matrix(states[k].lambda) + metric.matrix(states[k + 1].lambda));
    const Complex c = a.dot(w_mean * b);
    worst = std::max(worst, std::abs(c.imag()) / (times[k + 1] - times[k]));
  }
  return worst;
}

double parallel_transport_residual(const EvolutionRecord& record, const MetricFamily& metric) {
  return parallel_transport_residual(record.times, record.states, metric);
}

// --- loop and surface integrals --------------------------------------------------

double loop_integral_connection(const StateSection& section, const ParameterPath& loop, int panels,
                                const Tolerances& tol) {
  if (!loop.closed()) throw PreconditionError("loop integral needs a closed loop");
  if (loop.dim_params() != section.dim_coords) throw StructuralError("loop and section differ in dimension");
  if (panels < 1) throw PreconditionError("need at least one panel");
  std::vector<double> x, w;
  gauss_legendre(4, x, w);
  const double width = loop.tau() / panels;
  const double h = 1e-5 * loop.tau();
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    for (std::size_t q = 0; q < x.size(); ++q) {
      const double t = width * (p + x[q]);
      sum += width * w[q] * connection(section, loop(t), tol).dot(loop.velocity(t, h));
    }
  }
  return wrap_phase(-sum);
}

Patch cone_patch(const ParameterPath& loop, const Point& apex) {
  return [loop, apex](double u, double v) -> Point { return apex + u * (loop(v * loop.tau()) - apex); };
}

double surface_integral_curvature(const StateSection& section, const Patch& patch, int n,
                                  const Tolerances& tol) {
  if (n < 1) throw PreconditionError("need at least one quadrature node");
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  const double h = 1e-4;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = x[i], v = x[j];
      const Point du = (patch(u + h, v) - patch(u - h, v)) / (2 * h);
      const Point dv = (patch(u, v + h) - patch(u, v - h)) / (2 * h);
      if (du.isZero(1e-14) || dv.isZero(1e-14)) continue;
      const RMatrix omega = curvature(section, patch(u, v), tol);
      sum += w[i] * w[j] * 2.0 * du.dot(omega * dv);
    }
  }
  return wrap_phase(-sum);
}

ParameterPath square_loop(const Point& corner, Index mu, Index nu, double h) {
  const Index m = corner.size();
  Point eu = Point::Zero(m), ev = Point::Zero(m);
  eu(mu) = 1.0;
  ev(nu) = 1.0;
  auto side = [](double t) { return std::min(3, static_cast<int>(std::floor(t))); };
  auto map = [=](double t) -> Point {
    const int k = side(t);
    const double s = t - k;
    switch (k) {
      case 0: return corner + h * s * eu;
      case 1: return corner + h * eu + h * s * ev;
      case 2: return corner + h * (1 - s) * eu + h * ev;
      default: return corner + h * (1 - s) * ev;
    }
  };
  auto velocity = [=](double t) -> Point {
    switch (side(t)) {
      case 0: return h * eu;
      case 1: return h * ev;
      case 2: return -h * eu;
      default: return -h * ev;
    }
  };
  return ParameterPath(m, map, 4.0, true, velocity);
}

}  // namespace ptqm
