#pragma once

// Metric-compatible evolution i∂t|ψ> = [H(λ_t) + iK(t)]|ψ> with the gauge
// field K = -½ W⁻¹ dW/dt along a parameter path.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ptqm/hilbert.hpp"

namespace ptqm {

/// t ↦ λ_t for t ∈ [0, τ].
class ParameterPath {
 public:
  using Map = std::function<Point(double)>;

  ParameterPath() = default;
  ParameterPath(Index dim_params, Map map, double tau, bool closed, Map velocity = {},
                const Tolerances& tol = {});

  static ParameterPath constant(const Point& lambda, double tau);

  Index dim_params() const { return dim_; }
  double tau() const { return tau_; }
  bool closed() const { return closed_; }
  bool has_velocity() const { return static_cast<bool>(velocity_); }

  Point operator()(double t) const;
  /// dλ/dt: analytic if supplied, else a central difference with step `h`.
  Point velocity(double t, double h) const;

  /// Same curve traversed on s ∈ [0, τ] with t = warp(s); `warp` must be
  /// monotone with warp(0) = 0, warp(τ) = τ, and `warp_rate` its derivative.
  ParameterPath reparametrized(std::function<double(double)> warp,
                               std::function<double(double)> warp_rate) const;

 private:
  Index dim_ = 0;
  Map map_;
  Map velocity_;
  double tau_ = 0.0;
  bool closed_ = false;
};

/// Samples of one evolution run on a time grid.
struct EvolutionRecord {
  std::vector<double> times;
  std::vector<PhysicalState> states;
  std::vector<double> norms;  // W(λ_k)-norm of each state

  std::size_t size() const { return times.size(); }
  double duration() const { return times.back() - times.front(); }
  /// ρ_k = |ψ_k><ψ̃_k|, built on demand.
  BiDensity density(std::size_t k, const MetricFamily& metric) const;
  double max_norm_drift() const;
};

/// K(t) = -½ W⁻¹(λ_t) Ẇ(λ_t), Ẇ = Σ λ̇^μ ∂_μW. `fd_dt` is the step for λ̇
/// when the path has no analytic velocity.
CMatrix gauge_field(const MetricFamily& metric, const ParameterPath& path, double t,
                    double fd_dt = 1e-5, const Tolerances& tol = {});

/// K ψ without forming K.
CVector gauge_field_apply(const LocalMetric& w, const MetricFamily& metric, const Point& lambda,
                          const Point& velocity, const CVector& psi);

struct EvolveOptions {
  Tolerances tol;
  /// Step doublings tried when the norm drift exceeds tol.unitarity.
  int max_refinements = 3;
  /// Check that ψ0 is W(λ_0)-normalized.
  bool require_normalized = true;
};

/// Classical RK4 on a uniform grid of `steps` intervals. If the W-norm drift
/// exceeds tol.unitarity the step count is doubled (up to max_refinements);
/// drift still above 100 × tol.unitarity raises IntegrationError. The returned
/// record is sampled on the grid actually used.
EvolutionRecord evolve(const HamiltonianFamily& h, const MetricFamily& metric,
                       const ParameterPath& path, const PhysicalState& psi0, int steps,
                       const EvolveOptions& options = {});

/// RK4 on an explicit increasing time grid, no refinement.
EvolutionRecord evolve_on_grid(const HamiltonianFamily& h, const MetricFamily& metric,
                               const ParameterPath& path, const CVector& psi0,
                               std::span<const double> times);

/// Propagate every basis vector over [0, τ]: the one-period evolution
/// operator U(τ).
CMatrix monodromy(const HamiltonianFamily& h, const MetricFamily& metric,
                  const ParameterPath& path, int steps);

/// W(λ_0)-normalized eigenvector of U(τ) whose evolution is exactly cyclic.
/// `which` selects among the eigenvectors ordered by eigenphase.
CVector cyclic_initial_state(const HamiltonianFamily& h, const MetricFamily& metric,
                             const ParameterPath& path, int steps, Index which = 0);

struct CyclicityReport {
  bool cyclic = false;
  double alpha = 0.0;            // arg <<ψ(0)|ψ(τ)>> in (-π, π]
  double density_mismatch = 0.0;  // max |ρ(τ) - ρ(0)|
  double path_mismatch = 0.0;     // |λ_τ - λ_0|
};

/// Throws PreconditionError when the record's parameter path is not closed.
CyclicityReport detect_cyclic(const EvolutionRecord& record, const MetricFamily& metric,
                              const Tolerances& tol = {});

/// Relabel a record's times through t ↦ s(t) (monotone). States are unchanged.
EvolutionRecord relabel_times(const EvolutionRecord& record, std::function<double(double)> map);

/// Multiply each recorded state by e^{iϑ(t_k)}.
EvolutionRecord regauge(const EvolutionRecord& record, const std::function<double(double)>& theta);

/// Uniform grid t_k = τ k / steps.
std::vector<double> uniform_grid(double tau, int steps);

}  // namespace ptqm
