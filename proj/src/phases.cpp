#include "ptqm/phases.hpp"

#include <cmath>
#include <sstream>

#include "ptqm/numerics.hpp"

namespace ptqm {

namespace {

void require_cyclic(const EvolutionRecord& record, const MetricFamily& metric,
                    const Tolerances& tol, double* alpha = nullptr) {
  const CyclicityReport c = detect_cyclic(record, metric, tol);
  if (!c.cyclic) {
    std::ostringstream os;
    os << "record is not cyclic (max |ρ(τ) - ρ(0)| = " << c.density_mismatch << ")";
    throw PreconditionError(os.str());
  }
  if (alpha) *alpha = c.alpha;
}

std::vector<LocalMetric> metrics_along(const EvolutionRecord& record, const MetricFamily& metric,
                                       const Tolerances& tol) {
  std::vector<LocalMetric> out;
  out.reserve(record.size());
  for (const PhysicalState& s : record.states) out.push_back(metric.at(s.lambda, tol));
  return out;
}

std::vector<CVector> vectors(const EvolutionRecord& record) {
  std::vector<CVector> v;
  v.reserve(record.size());
  for (const PhysicalState& s : record.states) v.push_back(s.vec);
  return v;
}

void check_resolution(const std::vector<CVector>& v, const std::vector<LocalMetric>& w) {
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    const double step = std::abs(std::arg(w[k].inner(v[k], v[k + 1])));
    if (step > 0.5 * kPi) {
      std::ostringstream os;
      os << "phase advances by " << step << " rad between samples " << k << " and " << k + 1
         << "; refine the time grid";
      throw ResolutionError(os.str());
    }
  }
}

/// -Im ∫ <<v|v̇>> dt, normalized sample by sample.
double minus_im_connection_integral(const std::vector<double>& t, const std::vector<CVector>& v,
                                    const std::vector<LocalMetric>& w) {
  const std::vector<CVector> dv = grid_derivative(t, v);
  std::vector<double> f(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) f[k] = w[k].inner(v[k], dv[k]).imag() / w[k].norm2(v[k]);
  return -integrate(t, f);
}

/// φ_a,k = e^{-i α k / N} ψ_k
std::vector<CVector> single_valued_gauge(const EvolutionRecord& record, double alpha) {
  std::vector<CVector> v = vectors(record);
  const double n = static_cast<double>(v.size() - 1);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] *= std::polar(1.0, -alpha * static_cast<double>(k) / n);
  return v;
}

}  // namespace

double dynamical_phase(const EvolutionRecord& record, const HamiltonianFamily& h,
                       const MetricFamily& metric, const Tolerances& tol) {
  require_cyclic(record, metric, tol);
  if (h.is_zero()) return 0.0;
  std::vector<double> f(record.size());
  for (std::size_t k = 0; k < record.size(); ++k) {
    const PhysicalState& s = record.states[k];
    const LocalMetric w = metric.at(s.lambda, tol);
    f[k] = w.inner(s.vec, h(s.lambda) * s.vec).real() / w.norm2(s.vec);
  }
  return -integrate(record.times, f);
}

double geometric_phase_gauge_split(const EvolutionRecord& record, const MetricFamily& metric,
                                   const Tolerances& tol) {
  double alpha = 0.0;
  require_cyclic(record, metric, tol, &alpha);
  const auto w = metrics_along(record, metric, tol);
  const std::vector<CVector> phi = single_valued_gauge(record, alpha);
  check_resolution(phi, w);
  return wrap_phase(minus_im_connection_integral(record.times, phi, w));
}

double geometric_phase_gauge_invariant(const EvolutionRecord& record, const MetricFamily& metric,
                                       const Tolerances& tol) {
  require_cyclic(record, metric, tol);
  const auto w = metrics_along(record, metric, tol);
  const std::vector<CVector> v = vectors(record);
  check_resolution(v, w);
  const double boundary = std::arg(w.front().inner(v.front(), v.back()));
  return wrap_phase(boundary + minus_im_connection_integral(record.times, v, w));
}

namespace {

/// tr[ρ_0 Π_k (I + ρ_{k+1} - ρ_k)] for a curve given through an accessor.
template <class Density>
Complex ordered_product_trace(std::size_t n, Density&& rho, const Tolerances& tol) {
  if (n < 2) throw PreconditionError("kinematic phase needs at least two densities");
  const CMatrix rho0 = rho(0);
  const CMatrix rho_end = rho(n - 1);
  if (rho0.rows() != rho_end.rows()) throw StructuralError("densities differ in dimension");
  const double gap = (rho_end - rho0).cwiseAbs().maxCoeff();
  if (gap > tol.cyclic) {
    std::ostringstream os;
    os << "density curve is open (max |ρ_N - ρ_0| = " << gap << ")";
    throw PreconditionError(os.str());
  }
  // ρ_0 = u r / ρ_0(i, j) for a pivot column j and pivot row i; then
  // tr[ρ_0 Π] = r Π u / ρ_0(i, j).
  Index j = 0, i = 0;
  rho0.colwise().norm().maxCoeff(&j);
  const CVector u = rho0.col(j);
  u.cwiseAbs().maxCoeff(&i);
  const Complex pivot = rho0(i, j);
  CVector x = u;
  CMatrix prev = rho0;
  for (std::size_t k = 1; k < n; ++k) {
    CMatrix next = rho(k);
    x += (next - prev) * x;
    prev = std::move(next);
  }
  return (rho0.row(i) * x)(0) / pivot;
}

/// The ordered product along ρ and along the adjoint curve ρ^† = |ψ̃><ψ|,
/// which carries the metric on the other side of each step. Their phases
/// are averaged; the one-sided metric errors cancel at second order on any
/// grid. Returns the averaged phase and the smaller of the two moduli.
template <class Density>
std::pair<double, double> kinematic_average(std::size_t n, Density&& rho, const Tolerances& tol) {
  const Complex a = ordered_product_trace(n, rho, tol);
  const Complex b = ordered_product_trace(n, [&](std::size_t k) { return CMatrix(rho(k).adjoint()); }, tol);
  const double scale = std::min(std::abs(a), std::abs(b));
  if (scale == 0.0) return {0.0, 0.0};
  const double pa = std::arg(a);
  return {wrap_phase(pa + 0.5 * wrap_phase(std::arg(b) - pa)), scale};
}

}  // namespace

double geometric_phase_kinematic(std::span<const BiDensity> densities, const Tolerances& tol) {
  const auto [phase, scale] = kinematic_average(
      densities.size(), [&](std::size_t k) -> const CMatrix& { return densities[k].mat; }, tol);
  if (scale == 0.0) throw ConsistencyError("ordered product has vanishing trace", 0.0);
  return phase;
}

double geometric_phase_kinematic(const EvolutionRecord& record, const MetricFamily& metric,
                                 const Tolerances& tol) {
  const auto [phase, scale] = kinematic_average(
      record.size(), [&](std::size_t k) { return record.density(k, metric).mat; }, tol);
  if (scale == 0.0) throw ConsistencyError("ordered product has vanishing trace", 0.0);
  return phase;
}

double geometric_phase_bargmann(const EvolutionRecord& record, const MetricFamily& metric,
                                const Tolerances& tol) {
  require_cyclic(record, metric, tol);
  const auto w = metrics_along(record, metric, tol);
  const auto& s = record.states;
  // Average of the invariant and its mirror <ψ_0|ψ̃_N> Π <ψ_{k+1}|ψ̃_k>; the
  // one-sided metric errors cancel at second order on any grid.
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const double fwd = std::arg(w[k + 1].inner(s[k + 1].vec, s[k].vec));
    const double mirror = std::arg(w[k].inner(s[k + 1].vec, s[k].vec));
    if (std::max(std::abs(fwd), std::abs(mirror)) > 0.5 * kPi) {
      std::ostringstream os;
      os << "Bargmann factor " << k << " turns by " << fwd << " rad; refine the time grid";
      throw ResolutionError(os.str());
    }
    acc += 0.5 * (fwd + mirror);
  }
  acc += 0.5 * (std::arg(w.front().inner(s.front().vec, s.back().vec)) +
                std::arg(w.back().inner(s.front().vec, s.back().vec)));
  return wrap_phase(acc);
}

std::vector<CVector> parallel_transport_gauge(const EvolutionRecord& record,
                                              const MetricFamily& metric) {
  const auto w = metrics_along(record, metric, Tolerances{});
  std::vector<CVector> phi;
  phi.reserve(record.size());
  phi.push_back(record.states.front().vec);
  for (std::size_t k = 0; k + 1 < record.size(); ++k) {
    const CVector& next = record.states[k + 1].vec;
    const Complex c = 0.5 * (w[k].inner(phi[k], next) + w[k + 1].inner(phi[k], next));
    if (std::abs(c) == 0.0) throw ResolutionError("consecutive states are orthogonal");
    phi.push_back(next * (std::conj(c) / std::abs(c)));
  }
  return phi;
}

double geometric_phase_holonomy(const EvolutionRecord& record, const MetricFamily& metric,
                                const Tolerances& tol) {
  require_cyclic(record, metric, tol);
  const std::vector<CVector> phi = parallel_transport_gauge(record, metric);
  const LocalMetric w0 = metric.at(record.states.front().lambda, tol);
  return std::arg(w0.inner(phi.front(), phi.back()));
}

GarrisonWright gw_phases(const EvolutionRecord& record, const HamiltonianFamily& h,
                         const MetricFamily& metric, const Tolerances& tol) {
  double alpha = 0.0;
  require_cyclic(record, metric, tol, &alpha);
  const auto w = metrics_along(record, metric, tol);
  const std::vector<CVector> phi = single_valued_gauge(record, alpha);
  const std::vector<CVector> dphi = grid_derivative(record.times, phi);
  std::vector<Point> lambdas;
  lambdas.reserve(record.size());
  for (const PhysicalState& s : record.states) lambdas.push_back(s.lambda);
  const std::vector<Point> velocity = grid_derivative(record.times, lambdas);

  const std::size_t n = record.size();
  std::vector<Complex> energy(n), gauge(n), connection(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Point& lam = lambdas[k];
    const double norm = w[k].norm2(phi[k]);
    // <<φ|Kφ>> = -½ φ^† Ẇ φ
    const double kexp =
        velocity[k].isZero(0.0)
            ? 0.0
            : -0.5 * phi[k].dot(metric.directional_apply(lam, velocity[k], phi[k])).real() / norm;
    const Complex hexp = h.is_zero() ? Complex{} : w[k].inner(phi[k], h(lam) * phi[k]) / norm;
    energy[k] = hexp + kI * kexp;
    gauge[k] = kI * kexp;
    connection[k] = w[k].inner(phi[k], dphi[k]) / norm;
  }
  GarrisonWright gw;
  gw.beta = -integrate(record.times, energy);
  gw.gamma = kI * integrate(record.times, connection);
  gw.gauge_term = -integrate(record.times, gauge);
  return gw;
}

bool PhaseReport::passed(const Tolerances& tol) const {
  return decomposition_residual <= tol.phase && gw_decomposition_residual <= tol.phase &&
         gw_identity_residual <= tol.phase && route_spread <= tol.phase &&
         holonomy_transport_residual <= tol.pt && kinematic_scale > 0.0;
}

namespace {

double complex_phase_gap(Complex a, Complex b) {
  return phase_distance(a.real(), b.real()) + std::abs(a.imag() - b.imag());
}

}  // namespace

PhaseReport phase_report(const EvolutionRecord& record, const HamiltonianFamily& h,
                         const MetricFamily& metric, const Tolerances& tol) {
  PhaseReport rep;
  require_cyclic(record, metric, tol, &rep.alpha);
  rep.beta = dynamical_phase(record, h, metric, tol);
  rep.gamma_routes[route::kGaugeSplit] = geometric_phase_gauge_split(record, metric, tol);
  rep.gamma_routes[route::kGaugeInvariant] = geometric_phase_gauge_invariant(record, metric, tol);
  rep.gamma_routes[route::kBargmann] = geometric_phase_bargmann(record, metric, tol);
  rep.gamma_routes[route::kHolonomy] = geometric_phase_holonomy(record, metric, tol);

  const auto [kin_phase, kin_scale] = kinematic_average(
      record.size(), [&](std::size_t k) { return record.density(k, metric).mat; }, tol);
  rep.kinematic_scale = kin_scale;
  rep.gamma_routes[route::kKinematic] = kin_phase;

  rep.gamma = rep.gamma_routes[route::kGaugeSplit];
  for (const auto& [na, a] : rep.gamma_routes) {
    for (const auto& [nb, b] : rep.gamma_routes) rep.route_spread = std::max(rep.route_spread, phase_distance(a, b));
  }
  rep.decomposition_residual = phase_distance(rep.alpha, rep.beta + rep.gamma);

  const GarrisonWright gw = gw_phases(record, h, metric, tol);
  rep.gw_beta = gw.beta;
  rep.gw_gamma = gw.gamma;
  rep.gauge_term = gw.gauge_term;
  rep.gw_decomposition_residual = complex_phase_gap(Complex(rep.alpha, 0.0), gw.beta + gw.gamma);
  rep.gw_identity_residual =
      std::max(complex_phase_gap(Complex(rep.gamma, 0.0) - gw.gamma, gw.gauge_term),
               complex_phase_gap(gw.beta - rep.beta, gw.gauge_term));
  if (std::abs(rep.gamma) > tol.phase) rep.eta = gw.beta.real() / rep.gamma;

  const std::vector<CVector> phi_b = parallel_transport_gauge(record, metric);
  const auto w = metrics_along(record, metric, tol);
  for (std::size_t k = 0; k + 1 < phi_b.size(); ++k) {
    const double dt = record.times[k + 1] - record.times[k];
    const Complex c = 0.5 * (w[k].inner(phi_b[k], phi_b[k + 1]) + w[k + 1].inner(phi_b[k], phi_b[k + 1]));
    rep.holonomy_transport_residual = std::max(rep.holonomy_transport_residual, std::abs(c.imag()) / dt);
  }
  return rep;
}

}  // namespace ptqm
