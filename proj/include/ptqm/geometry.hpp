#pragma once

// Connection, curvature, metric tensor and quantum geometric tensor of a
// W-normalized state section over a coordinate chart.
//
// Wedge convention: a 2-form is Ω = Σ_{μ,ν} Ω_μν dλ^μ ∧ dλ^ν with the sum
// over all ordered pairs, and Ω_μν = ½(∂_μA_ν - ∂_νA_μ), so Ω = dA. The flux
// through a coordinate square of side h is therefore 2 Ω_μν h².

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ptqm/evolution.hpp"

namespace ptqm {

/// Smooth choice of state |φ(λ)> over a chart λ ∈ R^{dim_coords}. The metric
/// is evaluated on the first `dim_params` coordinates.
struct StateSection {
  using Eval = std::function<CVector(const Point&)>;

  Index dim_coords = 0;
  Index dim_params = 0;
  Eval state;
  /// |φ̃(λ)> = W(λ)|φ(λ)>. Optional: built from `metric` when empty.
  Eval tilde_state;
  MetricFamily metric;
  /// Finite-difference step for every coordinate.
  double fd_step = 1e-4;

  CVector eval(const Point& lambda) const { return state(lambda); }
  CVector tilde(const Point& lambda) const;
  Point params(const Point& lambda) const { return lambda.head(dim_params); }
};

/// φ → e^{iϑ(λ)} φ
StateSection regauge(const StateSection& section, std::function<double(const Point&)> theta);

/// Values and first derivatives of φ and φ̃ at one point.
struct SectionJet {
  Point point;
  CVector phi, phi_tilde;
  std::vector<CVector> d_phi, d_phi_tilde;
};

/// Richardson-extrapolated central differences. Throws ValidationError if
/// <φ̃|φ> deviates from 1 by more than tol.norm at any stencil point.
SectionJet section_jet(const StateSection& section, const Point& point, const Tolerances& tol = {});

struct GeometricTensors {
  Point point;
  RVector A;
  RMatrix Omega;
  RMatrix g;
  CMatrix Q;
  /// Eigenvalues of g with |value| ≤ tol.tensor.
  Index degenerate_directions = 0;
};

RVector connection(const SectionJet& jet);
RMatrix curvature(const SectionJet& jet);
RMatrix metric_tensor(const SectionJet& jet);
CMatrix qgt(const SectionJet& jet);

/// A_μ = Im<φ̃|∂_μφ>
RVector connection(const StateSection& section, const Point& point, const Tolerances& tol = {});
/// Ω_μν = ½ Im(<∂_μφ̃|∂_νφ> + <∂_μφ|∂_νφ̃>)
RMatrix curvature(const StateSection& section, const Point& point, const Tolerances& tol = {});
/// g = Re Q
RMatrix metric_tensor(const StateSection& section, const Point& point, const Tolerances& tol = {});
/// Q_μν = ½(<∂_μφ̃|∂_νφ> - <∂_μφ̃|φ><φ̃|∂_νφ> + (φ ↔ φ̃))
CMatrix qgt(const StateSection& section, const Point& point, const Tolerances& tol = {});
/// All four from a single jet.
GeometricTensors tensors(const StateSection& section, const Point& point, const Tolerances& tol = {});

/// ½(∂_μA_ν - ∂_νA_μ) by differencing connection(); an independent route to Ω.
RMatrix curvature_from_connection(const StateSection& section, const Point& point,
                                  const Tolerances& tol = {});

/// Maximum discrepancy between central and one-sided first differences of φ,
/// relative to the central-difference truncation estimate.
double smoothness_probe(const StateSection& section, const Point& point);

struct FidelityResult {
  double value = 0.0;           // overlap route
  double operator_route = 0.0;  // tr|ρ^{1/2}σρ^{1/2}|^{1/2}
  double discrepancy = 0.0;
};

/// Fidelity of two bi-densities. The operator route works in the
/// W^{1/2}(λ_ρ) picture where λ-adjoints become ordinary adjoints; the
/// overlap route is |<φ̃'|φ><φ̃|φ'>|^{1/2} = |tr ρσ|^{1/2}. Throws
/// ConsistencyError if the routes differ by more than 100 × tol.fid.
FidelityResult fidelity(const BiDensity& rho, const BiDensity& sigma, const MetricFamily& metric,
                        const Tolerances& tol = {});

/// ds² = g_μν dλ^μ dλ^ν
double line_element(const StateSection& section, const Point& point, const Point& d_lambda,
                     const Tolerances& tol = {});

enum class Causal { spacelike, lightlike, timelike };
std::string to_string(Causal c);

struct ClassifiedSample {
  double t = 0.0;
  double ds2 = 0.0;            // per unit dt²
  double tangent_norm2 = 0.0;  // |dλ/dt|²
  Causal tag = Causal::lightlike;
};

/// Sign of ds² along the curve's tangent at `samples` equally spaced times in
/// [0, τ]; lightlike when |ds²| ≤ tol.light × |dλ|².
std::vector<ClassifiedSample> classify_evolution(const StateSection& section,
                                                 const ParameterPath& curve, int samples,
                                                 const Tolerances& tol = {});

/// max_k |Im <φ_k|W̄_k|φ_{k+1}>| / Δt_k with W̄_k the mean of the metrics at
/// both samples. Zero for a parallel-transported sequence.
double parallel_transport_residual(std::span<const double> times,
                                   std::span<const PhysicalState> states,
                                   const MetricFamily& metric);
double parallel_transport_residual(const EvolutionRecord& record, const MetricFamily& metric);

/// -∮ A_μ dλ^μ mod 2π by composite four-point Gauss–Legendre on `panels`
/// equal pieces of [0, τ]. The loop lives in section coordinates.
double loop_integral_connection(const StateSection& section, const ParameterPath& loop,
                                int panels, const Tolerances& tol = {});

/// (u, v) ∈ [0,1]² ↦ λ
using Patch = std::function<Point(double, double)>;

/// Cone over a loop: λ(u, v) = c + u (loop(vτ) - c). Its boundary traverses
/// the loop with the same orientation.
Patch cone_patch(const ParameterPath& loop, const Point& apex);

/// -∬ Ω pulled back to the patch, mod 2π, on an n × n Gauss–Legendre grid.
double surface_integral_curvature(const StateSection& section, const Patch& patch, int n,
                                  const Tolerances& tol = {});

/// Closed square λ0 → λ0 + h e_μ → λ0 + h(e_μ + e_ν) → λ0 + h e_ν → λ0,
/// one side per unit time.
ParameterPath square_loop(const Point& corner, Index mu, Index nu, double h);

}  // namespace ptqm
