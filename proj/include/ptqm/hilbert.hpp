#pragma once

// Parameter-dependent physical Hilbert space: metric operators W(λ), the
// inner product <a|W|b>, tilde states W|ψ> and bi-densities |ψ><ψ̃|.

#include <functional>
#include <optional>
#include <string>

#include "ptqm/errors.hpp"
#include "ptqm/types.hpp"

namespace ptqm {

/// Receives non-fatal diagnostics (e.g. an ill-conditioned metric). The
/// default handler prints each distinct message once to stderr.
using WarningHandler = std::function<void(const std::string&)>;
void set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

/// Smallest eigenvalue of a Hermitian matrix.
double min_hermitian_eigenvalue(const CMatrix& m);

/// max |W - W^†|
template <class Derived>
double hermiticity_residual(const Eigen::MatrixBase<Derived>& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

namespace detail {
void require_positive_definite(const CMatrix& w, double tol_herm);
}

/// <<a|b>> = a^† W b. Throws StructuralError on mismatched sizes and
/// ValidationError (carrying the smallest eigenvalue) if W is not Hermitian
/// positive-definite.
template <class DW, class DA, class DB>
Complex physical_inner(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DA>& a,
                       const Eigen::MatrixBase<DB>& b, double tol_herm = Tolerances{}.herm) {
  if (w.rows() != w.cols() || a.size() != w.rows() || b.size() != w.rows()) {
    throw StructuralError("physical_inner: dimension mismatch");
  }
  detail::require_positive_definite(w.eval(), tol_herm);
  return a.dot(w * b);
}

/// W(λ) at one point, validated and factorized once. Either holds a Cholesky
/// factorization of W or, when the family is given in factored form
/// W = B^† B, the factor B itself.
class LocalMetric {
 public:
  /// Dense metric: validates Hermiticity and positive-definiteness.
  explicit LocalMetric(CMatrix w, const Tolerances& tol = {});
  /// Factored metric W = B^† B. `lower_triangular` enables triangular solves.
  static LocalMetric from_factor(CMatrix b, bool lower_triangular);

  Index dim() const { return dim_; }
  const CMatrix& matrix() const;
  bool factored() const { return factor_.has_value(); }

  Complex inner(const CVector& a, const CVector& b) const;
  double norm2(const CVector& a) const { return inner(a, a).real(); }
  /// W v
  CVector tilde(const CVector& v) const;
  /// W^{-1} y
  CVector solve(const CVector& y) const;
  CMatrix solve(const CMatrix& y) const;
  /// Estimate of cond(W) for dense metrics, from the Cholesky factor.
  double condition_estimate() const;

 private:
  LocalMetric() = default;

  Index dim_ = 0;
  mutable std::optional<CMatrix> w_;
  std::optional<Eigen::LLT<CMatrix>> llt_;
  std::optional<CMatrix> factor_;
  bool lower_ = false;
};

/// Smooth map λ ↦ W(λ).
class MetricFamily {
 public:
  using Eval = std::function<CMatrix(const Point&)>;
  using Grad = std::function<CMatrix(const Point&, Index)>;

  MetricFamily() = default;
  /// Dense family. Without `grad`, ∂_μW is taken by central differences
  /// with step fd_scale * max(1, |λ_μ|).
  MetricFamily(Index dim, Eval eval, Grad grad = {}, double fd_scale = 1e-5);

  /// Family given as W = B^† B with B(λ) invertible; `factor_grad` is ∂_μB.
  static MetricFamily factored(Index dim, Eval factor, Grad factor_grad = {},
                               bool lower_triangular = false, double fd_scale = 1e-5);
  static MetricFamily identity(Index dim);
  static MetricFamily constant(const CMatrix& w);

  Index dim() const { return dim_; }
  bool is_factored() const { return static_cast<bool>(factor_); }

  CMatrix matrix(const Point& lambda) const;
  LocalMetric at(const Point& lambda, const Tolerances& tol = {}) const;

  /// ∂_μ W(λ)
  CMatrix derivative(const Point& lambda, Index mu) const;
  /// (Σ_μ v^μ ∂_μ W(λ)) ψ without forming the full matrix when factored.
  CVector directional_apply(const Point& lambda, const Point& v, const CVector& psi) const;
  /// Σ_μ v^μ ∂_μ W(λ)
  CMatrix directional_derivative(const Point& lambda, const Point& v) const;

 private:
  CMatrix factor_directional(const Point& lambda, const Point& v) const;
  double fd_step(const Point& lambda, Index mu) const;

  Index dim_ = 0;
  Eval eval_;
  Grad grad_;
  Eval factor_;
  Grad factor_grad_;
  bool lower_ = false;
  double fd_scale_ = 1e-5;
};

/// Smooth map λ ↦ H(λ), expected to be pseudo-Hermitian w.r.t. W(λ).
class HamiltonianFamily {
 public:
  using Eval = std::function<CMatrix(const Point&)>;

  HamiltonianFamily() = default;
  HamiltonianFamily(Index dim, Eval eval) : dim_(dim), eval_(std::move(eval)) {}
  static HamiltonianFamily zero(Index dim);
  static HamiltonianFamily constant(const CMatrix& h);

  Index dim() const { return dim_; }
  bool is_zero() const { return zero_; }
  CMatrix operator()(const Point& lambda) const;

 private:
  Index dim_ = 0;
  Eval eval_;
  bool zero_ = false;
};

/// Vector attached to a parameter point.
struct PhysicalState {
  CVector vec;
  Point lambda;
};

/// ρ = |ψ><ψ̃| at a parameter point.
struct BiDensity {
  CMatrix mat;
  Point lambda;
};

struct BiDensityResiduals {
  double idempotence = 0.0;  // max |ρ² - ρ|
  double trace = 0.0;        // |tr ρ - 1|
  double second_singular_value = 0.0;  // relative to the largest
  bool ok(const Tolerances& tol) const {
    return idempotence <= tol.idem && trace <= tol.trace && second_singular_value <= tol.rank;
  }
};
BiDensityResiduals check_bi_density(const BiDensity& rho);

/// W(λ) ψ
CVector tilde(const PhysicalState& state, const MetricFamily& metric);

/// |ψ><ψ̃|. Throws ValidationError carrying the measured norm when
/// |<<ψ|ψ>> - 1| > tol.norm.
BiDensity bi_density(const PhysicalState& state, const MetricFamily& metric,
                     const Tolerances& tol = {});

struct PseudoHermiticityReport {
  double residual = 0.0;  // max |W H - H^† W|
  bool passed = false;
};
PseudoHermiticityReport check_pseudo_hermitian(const HamiltonianFamily& h,
                                               const MetricFamily& metric,
                                               const Point& lambda,
                                               double tol = Tolerances{}.pseudo);

/// Rescale a vector to unit norm in the W-inner product.
CVector normalize(const LocalMetric& w, const CVector& v);

}  // namespace ptqm
