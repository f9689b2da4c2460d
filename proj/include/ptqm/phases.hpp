#pragma once

// Total, dynamical and geometric phases of a cyclic evolution record. The
// geometric phase is extracted along four independent routes; the
// Garrison–Wright split is provided for comparison.

#include <map>
#include <optional>
#include <span>
#include <string>

#include "ptqm/evolution.hpp"

namespace ptqm {

namespace route {
inline constexpr const char* kGaugeSplit = "gauge_split";
inline constexpr const char* kGaugeInvariant = "gauge_invariant";
inline constexpr const char* kKinematic = "kinematic";
inline constexpr const char* kBargmann = "kinematic_bargmann";
inline constexpr const char* kHolonomy = "holonomy";
}  // namespace route

struct PhaseReport {
  double alpha = 0.0;  // total phase
  double beta = 0.0;   // dynamical
  double gamma = 0.0;  // geometric (gauge-split route)
  std::map<std::string, double> gamma_routes;
  /// Garrison–Wright dynamical and geometric phases. They are complex in
  /// general; only their sum is guaranteed real.
  Complex gw_beta{};
  Complex gw_gamma{};
  /// -∫<<φ_a|iKφ_a>> dt, the term moved between the two splits.
  Complex gauge_term{};
  /// Re(gw_beta)/gamma when gamma is not ~0.
  std::optional<double> eta;

  double decomposition_residual = 0.0;     // |α - β - γ| mod 2π
  double gw_decomposition_residual = 0.0;  // |α - gw_β - gw_γ| mod 2π (complex)
  double gw_identity_residual = 0.0;       // max of the three-way identity gaps
  double route_spread = 0.0;               // max pairwise distance mod 2π
  double holonomy_transport_residual = 0.0;
  double kinematic_scale = 0.0;  // |tr[ρ0 T e^{∫ρ̇}]|, positive for a valid curve

  bool passed(const Tolerances& tol) const;
};

/// β = -∫ <<ψ|Hψ>> dt
double dynamical_phase(const EvolutionRecord& record, const HamiltonianFamily& h,
                       const MetricFamily& metric, const Tolerances& tol = {});

/// γ from the auxiliary single-valued gauge φ_a = e^{-if}ψ with f linear in
/// the grid index and f(τ) - f(0) = α.
double geometric_phase_gauge_split(const EvolutionRecord& record, const MetricFamily& metric,
                                   const Tolerances& tol = {});

/// γ = arg<<ψ(0)|ψ(τ)>> - Im ∫ <<ψ|ψ̇>> dt on the recorded states.
double geometric_phase_gauge_invariant(const EvolutionRecord& record, const MetricFamily& metric,
                                       const Tolerances& tol = {});

/// γ = arg tr[ρ_0 T e^{∫ρ̇}], the time-ordered exponential as the ordered
/// product Π_k (I + ρ_{k+1} - ρ_k), averaged with the same product along
/// ρ^†. `densities` must form a closed curve.
double geometric_phase_kinematic(std::span<const BiDensity> densities, const Tolerances& tol = {});
/// Same, building the densities from the record on the fly.
double geometric_phase_kinematic(const EvolutionRecord& record, const MetricFamily& metric,
                                 const Tolerances& tol = {});

/// Bargmann-invariant discretization, arg[<ψ̃_0|ψ_N> Π_k <ψ̃_{k+1}|ψ_k>]
/// averaged with its mirror arg[<ψ_0|ψ̃_N> Π_k <ψ_{k+1}|ψ̃_k>], accumulated
/// term by term.
double geometric_phase_bargmann(const EvolutionRecord& record, const MetricFamily& metric,
                                const Tolerances& tol = {});

/// Parallel-transported gauge φ_b: each sample's phase is fixed so that
/// <φ_b,k| W̄ |φ_b,k+1> is real positive, with W̄ the mean of the two metrics.
std::vector<CVector> parallel_transport_gauge(const EvolutionRecord& record,
                                              const MetricFamily& metric);

/// γ = arg <<φ_b(0)|φ_b(τ)>>_{λ_0}
double geometric_phase_holonomy(const EvolutionRecord& record, const MetricFamily& metric,
                                const Tolerances& tol = {});

struct GarrisonWright {
  Complex beta;        // -∫<<φ_a|(H + iK)φ_a>> dt
  Complex gamma;       // i∫<<φ_a|φ̇_a>> dt
  Complex gauge_term;  // -∫<<φ_a|iKφ_a>> dt
};
/// K is rebuilt from the metric and the recorded parameter trajectory.
GarrisonWright gw_phases(const EvolutionRecord& record, const HamiltonianFamily& h,
                         const MetricFamily& metric, const Tolerances& tol = {});

/// Every phase and every route, with their consistency residuals.
PhaseReport phase_report(const EvolutionRecord& record, const HamiltonianFamily& h,
                         const MetricFamily& metric, const Tolerances& tol = {});

}  // namespace ptqm
