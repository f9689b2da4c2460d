#include "ptqm/hilbert.hpp"

#include <iostream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>

namespace ptqm {

Tolerances Tolerances::scaled(double factor) const {
  Tolerances t = *this;
  for (double* v : {&t.herm, &t.pseudo, &t.norm, &t.idem, &t.trace, &t.rank, &t.unitarity,
                    &t.cyclic, &t.path, &t.phase, &t.tensor, &t.fid, &t.light, &t.pt, &t.trunc}) {
    *v *= factor;
  }
  return t;
}

namespace {

std::mutex g_warn_mutex;
WarningHandler g_warn_handler;

void default_warning(const std::string& message) {
  static std::set<std::string> seen;
  if (seen.insert(message).second) std::clog << "ptqm warning: " << message << '\n';
}

}  // namespace

void set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(g_warn_mutex);
  g_warn_handler = std::move(handler);
}

void warn(const std::string& message) {
  std::lock_guard lock(g_warn_mutex);
  if (g_warn_handler) {
    g_warn_handler(message);
  } else {
    default_warning(message);
  }
}

double min_hermitian_eigenvalue(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

namespace detail {

void require_positive_definite(const CMatrix& w, double tol_herm) {
  const double herm = hermiticity_residual(w);
  if (herm > tol_herm) {
    std::ostringstream os;
    os << "metric is not Hermitian (residual " << herm << ")";
    throw ValidationError(os.str(), herm);
  }
  Eigen::LLT<CMatrix> llt(w);
  if (llt.info() != Eigen::Success) {
    const double lo = min_hermitian_eigenvalue(w);
    std::ostringstream os;
    os << "metric is not positive-definite (smallest eigenvalue " << lo << ")";
    throw ValidationError(os.str(), lo);
  }
}

}  // namespace detail

// --- LocalMetric -----------------------------------------------------------

LocalMetric::LocalMetric(CMatrix w, const Tolerances& tol) : dim_(w.rows()) {
  if (w.rows() != w.cols()) throw StructuralError("metric must be square");
  const double herm = hermiticity_residual(w);
  if (herm > tol.herm) {
    std::ostringstream os;
    os << "metric is not Hermitian (residual " << herm << ")";
    throw ValidationError(os.str(), herm);
  }
  llt_.emplace(w);
  if (llt_->info() != Eigen::Success) {
    const double lo = min_hermitian_eigenvalue(w);
    std::ostringstream os;
    os << "metric is not positive-definite (smallest eigenvalue " << lo << ")";
    throw ValidationError(os.str(), lo);
  }
  w_ = std::move(w);
  const double cond = condition_estimate();
  if (cond > tol.cond_warn) {
    std::ostringstream os;
    os << "metric condition estimate " << cond << " exceeds " << tol.cond_warn;
    warn(os.str());
  }
}

LocalMetric LocalMetric::from_factor(CMatrix b, bool lower_triangular) {
  if (b.rows() != b.cols()) throw StructuralError("metric factor must be square");
  LocalMetric m;
  m.dim_ = b.rows();
  m.lower_ = lower_triangular;
  if (lower_triangular) {
    const double smallest = b.diagonal().cwiseAbs().minCoeff();
    if (!(smallest > 0.0)) throw ValidationError("metric factor is singular", smallest);
  } else {
    Eigen::FullPivLU<CMatrix> lu(b);
    if (!lu.isInvertible()) throw ValidationError("metric factor is singular", 0.0);
  }
  m.factor_ = std::move(b);
  return m;
}

const CMatrix& LocalMetric::matrix() const {
  if (!w_) w_ = factor_->adjoint() * *factor_;
  return *w_;
}

Complex LocalMetric::inner(const CVector& a, const CVector& b) const {
  if (a.size() != dim_ || b.size() != dim_) throw StructuralError("inner: dimension mismatch");
  if (factor_) return (*factor_ * a).dot(*factor_ * b);
  return a.dot(*w_ * b);
}

CVector LocalMetric::tilde(const CVector& v) const {
  if (v.size() != dim_) throw StructuralError("tilde: dimension mismatch");
  if (factor_) return factor_->adjoint() * (*factor_ * v);
  return *w_ * v;
}

CVector LocalMetric::solve(const CVector& y) const {
  if (y.size() != dim_) throw StructuralError("solve: dimension mismatch");
  if (llt_) return llt_->solve(y);
  if (lower_) {
    CVector x = factor_->triangularView<Eigen::Lower>().adjoint().solve(y);
    return factor_->triangularView<Eigen::Lower>().solve(x);
  }
  CVector x = factor_->adjoint().partialPivLu().solve(y);
  return factor_->partialPivLu().solve(x);
}

CMatrix LocalMetric::solve(const CMatrix& y) const {
  if (y.rows() != dim_) throw StructuralError("solve: dimension mismatch");
  if (llt_) return llt_->solve(y);
  if (lower_) {
    CMatrix x = factor_->triangularView<Eigen::Lower>().adjoint().solve(y);
    return factor_->triangularView<Eigen::Lower>().solve(x);
  }
  CMatrix x = factor_->adjoint().partialPivLu().solve(y);
  return factor_->partialPivLu().solve(x);
}

double LocalMetric::condition_estimate() const {
  if (llt_) {
    const double rc = llt_->rcond();
    return rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  }
  Eigen::JacobiSVD<CMatrix> svd(*factor_);
  const auto& s = svd.singularValues();
  const double r = s(0) / s(s.size() - 1);
  return r * r;
}

// --- MetricFamily ------------------------------------------------------------

MetricFamily::MetricFamily(Index dim, Eval eval, Grad grad, double fd_scale)
    : dim_(dim), eval_(std::move(eval)), grad_(std::move(grad)), fd_scale_(fd_scale) {
  if (dim <= 0) throw StructuralError("metric dimension must be positive");
  if (!eval_) throw StructuralError("metric family needs an evaluation callback");
}

MetricFamily MetricFamily::factored(Index dim, Eval factor, Grad factor_grad,
                                    bool lower_triangular, double fd_scale) {
  if (dim <= 0) throw StructuralError("metric dimension must be positive");
  if (!factor) throw StructuralError("factored metric needs a factor callback");
  MetricFamily m;
  m.dim_ = dim;
  m.factor_ = std::move(factor);
  m.factor_grad_ = std::move(factor_grad);
  m.lower_ = lower_triangular;
  m.fd_scale_ = fd_scale;
  return m;
}

MetricFamily MetricFamily::identity(Index dim) {
  return MetricFamily(
      dim, [dim](const Point&) -> CMatrix { return CMatrix::Identity(dim, dim); },
      [dim](const Point&, Index) -> CMatrix { return CMatrix::Zero(dim, dim); });
}

MetricFamily MetricFamily::constant(const CMatrix& w) {
  const Index n = w.rows();
  return MetricFamily(
      n, [w](const Point&) { return w; },
      [n](const Point&, Index) -> CMatrix { return CMatrix::Zero(n, n); });
}

CMatrix MetricFamily::matrix(const Point& lambda) const {
  if (factor_) {
    const CMatrix b = factor_(lambda);
    return b.adjoint() * b;
  }
  CMatrix w = eval_(lambda);
  if (w.rows() != dim_ || w.cols() != dim_) throw StructuralError("metric callback returned wrong size");
  return w;
}

LocalMetric MetricFamily::at(const Point& lambda, const Tolerances& tol) const {
  if (factor_) {
    CMatrix b = factor_(lambda);
    if (b.rows() != dim_ || b.cols() != dim_) throw StructuralError("metric factor has wrong size");
    return LocalMetric::from_factor(std::move(b), lower_);
  }
  return LocalMetric(matrix(lambda), tol);
}

double MetricFamily::fd_step(const Point& lambda, Index mu) const {
  return fd_scale_ * std::max(1.0, std::abs(lambda(mu)));
}

CMatrix MetricFamily::derivative(const Point& lambda, Index mu) const {
  if (mu < 0 || mu >= lambda.size()) throw StructuralError("derivative: coordinate out of range");
  if (factor_) {
    const CMatrix b = factor_(lambda);
    CMatrix db;
    if (factor_grad_) {
      db = factor_grad_(lambda, mu);
    } else {
      const double h = fd_step(lambda, mu);
      Point p = lambda, m = lambda;
      p(mu) += h;
      m(mu) -= h;
      db = (factor_(p) - factor_(m)) / (2.0 * h);
    }
    return db.adjoint() * b + b.adjoint() * db;
  }
  if (grad_) return grad_(lambda, mu);
  const double h = fd_step(lambda, mu);
  Point p = lambda, m = lambda;
  p(mu) += h;
  m(mu) -= h;
  return (eval_(p) - eval_(m)) / (2.0 * h);
}

CMatrix MetricFamily::factor_directional(const Point& lambda, const Point& v) const {
  CMatrix db = CMatrix::Zero(dim_, dim_);
  for (Index mu = 0; mu < v.size(); ++mu) {
    if (v(mu) == 0.0) continue;
    if (factor_grad_) {
      db += v(mu) * factor_grad_(lambda, mu);
    } else {
      const double h = fd_step(lambda, mu);
      Point p = lambda, m = lambda;
      p(mu) += h;
      m(mu) -= h;
      db += v(mu) * (factor_(p) - factor_(m)) / (2.0 * h);
    }
  }
  return db;
}

CVector MetricFamily::directional_apply(const Point& lambda, const Point& v,
                                        const CVector& psi) const {
  if (v.size() != lambda.size()) throw StructuralError("velocity/point size mismatch");
  if (factor_) {
    const CMatrix b = factor_(lambda);
    const CMatrix db = factor_directional(lambda, v);
    return db.adjoint() * (b * psi) + b.adjoint() * (db * psi);
  }
  return directional_derivative(lambda, v) * psi;
}

CMatrix MetricFamily::directional_derivative(const Point& lambda, const Point& v) const {
  if (v.size() != lambda.size()) throw StructuralError("velocity/point size mismatch");
  if (factor_) {
    const CMatrix b = factor_(lambda);
    const CMatrix db = factor_directional(lambda, v);
    return db.adjoint() * b + b.adjoint() * db;
  }
  CMatrix out = CMatrix::Zero(dim_, dim_);
  for (Index mu = 0; mu < v.size(); ++mu) {
    if (v(mu) != 0.0) out += v(mu) * derivative(lambda, mu);
  }
  return out;
}

// --- HamiltonianFamily -------------------------------------------------------

HamiltonianFamily HamiltonianFamily::zero(Index dim) {
  HamiltonianFamily h(dim, [dim](const Point&) -> CMatrix { return CMatrix::Zero(dim, dim); });
  h.zero_ = true;
  return h;
}

HamiltonianFamily HamiltonianFamily::constant(const CMatrix& m) {
  return HamiltonianFamily(m.rows(), [m](const Point&) { return m; });
}

CMatrix HamiltonianFamily::operator()(const Point& lambda) const {
  CMatrix h = eval_(lambda);
  if (h.rows() != dim_ || h.cols() != dim_) throw StructuralError("Hamiltonian callback returned wrong size");
  return h;
}

// --- states and densities ----------------------------------------------------

CVector tilde(const PhysicalState& state, const MetricFamily& metric) {
  if (state.vec.size() != metric.dim()) throw StructuralError("tilde: dimension mismatch");
  return metric.at(state.lambda).tilde(state.vec);
}

BiDensity bi_density(const PhysicalState& state, const MetricFamily& metric, const Tolerances& tol) {
  if (state.vec.size() != metric.dim()) throw StructuralError("bi_density: dimension mismatch");
  const LocalMetric w = metric.at(state.lambda, tol);
  const double n = w.norm2(state.vec);
  if (std::abs(n - 1.0) > tol.norm) {
    std::ostringstream os;
    os << "state is not W-normalized (norm " << n << ")";
    throw ValidationError(os.str(), n);
  }
  return {state.vec * w.tilde(state.vec).adjoint(), state.lambda};
}

BiDensityResiduals check_bi_density(const BiDensity& rho) {
  BiDensityResiduals r;
  r.idempotence = (rho.mat * rho.mat - rho.mat).cwiseAbs().maxCoeff();
  r.trace = std::abs(rho.mat.trace() - 1.0);
  Eigen::JacobiSVD<CMatrix> svd(rho.mat);
  const auto& s = svd.singularValues();
  r.second_singular_value = s.size() > 1 && s(0) > 0.0 ? s(1) / s(0) : 0.0;
  return r;
}

PseudoHermiticityReport check_pseudo_hermitian(const HamiltonianFamily& h,
                                               const MetricFamily& metric,
                                               const Point& lambda, double tol) {
  if (h.dim() != metric.dim()) throw StructuralError("Hamiltonian and metric dimensions differ");
  const CMatrix w = metric.matrix(lambda);
  const CMatrix hm = h(lambda);
  PseudoHermiticityReport rep;
  rep.residual = (w * hm - hm.adjoint() * w).cwiseAbs().maxCoeff();
  rep.passed = rep.residual <= tol;
  return rep;
}

CVector normalize(const LocalMetric& w, const CVector& v) {
  const double n = w.norm2(v);
  if (!(n > 0.0)) throw ValidationError("cannot normalize a null vector", n);
  return v / std::sqrt(n);
}

}  // namespace ptqm
