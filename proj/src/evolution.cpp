#include "ptqm/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ptqm/numerics.hpp"

namespace ptqm {

// --- ParameterPath -------------------------------------------------------------

ParameterPath::ParameterPath(Index dim_params, Map map, double tau, bool closed, Map velocity,
                             const Tolerances& tol)
    : dim_(dim_params), map_(std::move(map)), velocity_(std::move(velocity)), tau_(tau),
      closed_(closed) {
  if (!(tau > 0.0)) throw PreconditionError("path duration must be positive");
  if (!map_) throw StructuralError("path needs a map callback");
  const Point start = map_(0.0);
  if (start.size() != dim_) throw StructuralError("path map returned a point of the wrong size");
  if (closed_) {
    const double gap = (map_(tau_) - start).norm();
    if (gap > tol.path) {
      std::ostringstream os;
      os << "path flagged closed but |λ_τ - λ_0| = " << gap;
      throw PreconditionError(os.str());
    }
  }
}

ParameterPath ParameterPath::constant(const Point& lambda, double tau) {
  const Index m = lambda.size();
  return ParameterPath(
      m, [lambda](double) { return lambda; }, tau, true,
      [m](double) -> Point { return Point::Zero(m); });
}

Point ParameterPath::operator()(double t) const { return map_(t); }

Point ParameterPath::velocity(double t, double h) const {
  if (velocity_) return velocity_(t);
  return (map_(t + h) - map_(t - h)) / (2.0 * h);
}

ParameterPath ParameterPath::reparametrized(std::function<double(double)> warp,
                                            std::function<double(double)> warp_rate) const {
  ParameterPath out = *this;
  auto map = map_;
  out.map_ = [map, warp](double s) { return map(warp(s)); };
  if (velocity_) {
    auto vel = velocity_;
    out.velocity_ = [vel, warp, warp_rate](double s) -> Point { return vel(warp(s)) * warp_rate(s); };
  } else {
    out.velocity_ = {};
  }
  return out;
}

// --- EvolutionRecord -------------------------------------------------------------

BiDensity EvolutionRecord::density(std::size_t k, const MetricFamily& metric) const {
  const PhysicalState& s = states.at(k);
  return {s.vec * metric.at(s.lambda).tilde(s.vec).adjoint(), s.lambda};
}

double EvolutionRecord::max_norm_drift() const {
  double d = 0.0;
  for (double n : norms) d = std::max(d, std::abs(n - 1.0));
  return d;
}

std::vector<double> uniform_grid(double tau, int steps) {
  if (steps < 1) throw PreconditionError("need at least one step");
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) t[k] = tau * static_cast<double>(k) / steps;
  t.back() = tau;
  return t;
}

// --- gauge field -----------------------------------------------------------------

CVector gauge_field_apply(const LocalMetric& w, const MetricFamily& metric, const Point& lambda,
                          const Point& velocity, const CVector& psi) {
  if (velocity.isZero(0.0)) return CVector::Zero(psi.size());
  return -0.5 * w.solve(metric.directional_apply(lambda, velocity, psi));
}

CMatrix gauge_field(const MetricFamily& metric, const ParameterPath& path, double t, double fd_dt,
                    const Tolerances& tol) {
  if (t < 0.0 || t > path.tau()) throw PreconditionError("gauge_field: t outside [0, τ]");
  const Point lambda = path(t);
  const LocalMetric w = metric.at(lambda, tol);
  const Point v = path.velocity(t, fd_dt);
  return -0.5 * w.solve(metric.directional_derivative(lambda, v));
}

// --- integration -----------------------------------------------------------------

namespace {

struct Stage {
  Point lambda;
  Point velocity;
  std::optional<LocalMetric> metric;
};

class Generator {
 public:
  Generator(const HamiltonianFamily& h, const MetricFamily& metric, const ParameterPath& path,
            double fd_dt)
      : h_(h), metric_(metric), path_(path), fd_dt_(fd_dt) {}

  /// dψ/dt = -i H ψ + K ψ at time t; fills `stage` with the local metric.
  CVector operator()(double t, const CVector& psi, Stage& stage) const {
    stage.lambda = path_(t);
    stage.velocity = path_.velocity(t, fd_dt_);
    stage.metric.emplace(metric_.at(stage.lambda));
    CVector d = gauge_field_apply(*stage.metric, metric_, stage.lambda, stage.velocity, psi);
    if (!h_.is_zero()) d.noalias() += -kI * (h_(stage.lambda) * psi);
    return d;
  }

  CMatrix operator()(double t, const CMatrix& psi) const {
    const Point lambda = path_(t);
    const Point v = path_.velocity(t, fd_dt_);
    const LocalMetric w = metric_.at(lambda);
    CMatrix d = CMatrix::Zero(psi.rows(), psi.cols());
    if (!v.isZero(0.0)) d = -0.5 * w.solve(CMatrix(metric_.directional_derivative(lambda, v) * psi));
    if (!h_.is_zero()) d.noalias() += -kI * (h_(lambda) * psi);
    return d;
  }

 private:
  const HamiltonianFamily& h_;
  const MetricFamily& metric_;
  const ParameterPath& path_;
  double fd_dt_;
};

void check_dims(const HamiltonianFamily& h, const MetricFamily& metric, const ParameterPath& path,
                Index state_dim) {
  if (h.dim() != metric.dim()) throw StructuralError("Hamiltonian and metric dimensions differ");
  if (state_dim != metric.dim()) throw StructuralError("initial state has the wrong dimension");
  if (path.dim_params() <= 0) throw StructuralError("path has no parameters");
}

}  // namespace

EvolutionRecord evolve_on_grid(const HamiltonianFamily& h, const MetricFamily& metric,
                               const ParameterPath& path, const CVector& psi0,
                               std::span<const double> times) {
  check_dims(h, metric, path, psi0.size());
  if (times.size() < 2) throw PreconditionError("evolution grid needs at least two points");
  const double fd_dt = path.tau() / (10.0 * static_cast<double>(times.size() - 1));
  const Generator f(h, metric, path, fd_dt);

  EvolutionRecord rec;
  rec.times.assign(times.begin(), times.end());
  rec.states.reserve(times.size());
  rec.norms.reserve(times.size());

  CVector psi = psi0;
  Stage s1, scratch;
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double t = times[k];
    const double dt = times[k + 1] - t;
    if (!(dt > 0.0)) throw PreconditionError("evolution grid must be strictly increasing");
    const CVector k1 = f(t, psi, s1);
    rec.norms.push_back(s1.metric->norm2(psi));
    rec.states.push_back({psi, s1.lambda});
    const CVector k2 = f(t + 0.5 * dt, psi + 0.5 * dt * k1, scratch);
    const CVector k3 = f(t + 0.5 * dt, psi + 0.5 * dt * k2, scratch);
    const CVector k4 = f(t + dt, psi + dt * k3, scratch);
    psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  const Point last = path(times.back());
  rec.norms.push_back(metric.at(last).norm2(psi));
  rec.states.push_back({psi, last});
  return rec;
}

EvolutionRecord evolve(const HamiltonianFamily& h, const MetricFamily& metric,
                       const ParameterPath& path, const PhysicalState& psi0, int steps,
                       const EvolveOptions& options) {
  if (steps < 2) throw PreconditionError("evolve: need at least two steps");
  check_dims(h, metric, path, psi0.vec.size());
  const Point lambda0 = path(0.0);
  if (options.require_normalized) {
    const double n = metric.at(lambda0, options.tol).norm2(psi0.vec);
    if (std::abs(n - 1.0) > options.tol.norm) {
      std::ostringstream os;
      os << "initial state is not W-normalized (norm " << n << ")";
      throw ValidationError(os.str(), n);
    }
  }
  int n = steps;
  for (int attempt = 0;; ++attempt, n *= 2) {
    const std::vector<double> grid = uniform_grid(path.tau(), n);
    EvolutionRecord rec = evolve_on_grid(h, metric, path, psi0.vec, grid);
    double drift = 0.0;
    for (double x : rec.norms) drift = std::max(drift, std::abs(x - rec.norms.front()));
    if (drift <= options.tol.unitarity) return rec;
    if (attempt >= options.max_refinements) {
      if (drift <= 100.0 * options.tol.unitarity) {
        std::ostringstream os;
        os << "norm drift " << drift << " above tolerance after " << n << " steps";
        warn(os.str());
        return rec;
      }
      std::ostringstream os;
      os << "W-norm drift " << drift << " after " << n
         << " steps; use smaller steps or a larger truncation";
      throw IntegrationError(os.str(), drift);
    }
  }
}

CMatrix monodromy(const HamiltonianFamily& h, const MetricFamily& metric, const ParameterPath& path,
                  int steps) {
  check_dims(h, metric, path, metric.dim());
  if (steps < 2) throw PreconditionError("monodromy: need at least two steps");
  const std::vector<double> grid = uniform_grid(path.tau(), steps);
  const Generator f(h, metric, path, path.tau() / (10.0 * steps));
  CMatrix u = CMatrix::Identity(metric.dim(), metric.dim());
  for (int k = 0; k < steps; ++k) {
    const double t = grid[k];
    const double dt = grid[k + 1] - t;
    const CMatrix k1 = f(t, u);
    const CMatrix k2 = f(t + 0.5 * dt, CMatrix(u + 0.5 * dt * k1));
    const CMatrix k3 = f(t + 0.5 * dt, CMatrix(u + 0.5 * dt * k2));
    const CMatrix k4 = f(t + dt, CMatrix(u + dt * k3));
    u += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return u;
}

CVector cyclic_initial_state(const HamiltonianFamily& h, const MetricFamily& metric,
                             const ParameterPath& path, int steps, Index which) {
  if (!path.closed()) throw PreconditionError("cyclic states need a closed path");
  const CMatrix u = monodromy(h, metric, path, steps);
  Eigen::ComplexEigenSolver<CMatrix> es(u);
  if (es.info() != Eigen::Success) throw Error("eigendecomposition of U(τ) failed");
  const Index n = u.rows();
  if (which < 0 || which >= n) throw PreconditionError("cyclic state index out of range");
  std::vector<Index> order(n);
  for (Index i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::arg(es.eigenvalues()(a)) < std::arg(es.eigenvalues()(b));
  });
  const CVector v = es.eigenvectors().col(order[which]);
  return normalize(metric.at(path(0.0)), v);
}

CyclicityReport detect_cyclic(const EvolutionRecord& record, const MetricFamily& metric,
                              const Tolerances& tol) {
  if (record.size() < 2) throw PreconditionError("detect_cyclic: empty record");
  const PhysicalState& first = record.states.front();
  const PhysicalState& last = record.states.back();
  CyclicityReport rep;
  rep.path_mismatch = (last.lambda - first.lambda).norm();
  if (rep.path_mismatch > tol.path) {
    std::ostringstream os;
    os << "parameter path is not closed (|λ_τ - λ_0| = " << rep.path_mismatch << ")";
    throw PreconditionError(os.str());
  }
  const LocalMetric w = metric.at(first.lambda, tol);
  const CMatrix rho0 = first.vec * w.tilde(first.vec).adjoint();
  const CMatrix rho1 = last.vec * w.tilde(last.vec).adjoint();
  rep.density_mismatch = (rho1 - rho0).cwiseAbs().maxCoeff();
  rep.cyclic = rep.density_mismatch <= tol.cyclic;
  rep.alpha = std::arg(w.inner(first.vec, last.vec));
  return rep;
}

EvolutionRecord relabel_times(const EvolutionRecord& record, std::function<double(double)> map) {
  EvolutionRecord out = record;
  for (double& t : out.times) t = map(t);
  for (std::size_t k = 0; k + 1 < out.times.size(); ++k) {
    if (!(out.times[k + 1] > out.times[k])) throw PreconditionError("time relabeling must be increasing");
  }
  return out;
}

EvolutionRecord regauge(const EvolutionRecord& record, const std::function<double(double)>& theta) {
  EvolutionRecord out = record;
  for (std::size_t k = 0; k < out.size(); ++k) out.states[k].vec *= std::polar(1.0, theta(out.times[k]));
  return out;
}

}  // namespace ptqm
