#pragma once

// Built-in model families: the driven oscillator with a parameter-dependent
// metric (and its Hermitian-picture twin), a two-level pseudo-Hermitian
// system, and a spin-½ in a rotating field with W = I.

#include "ptqm/geometry.hpp"

namespace ptqm {

struct FockOps {
  Index n = 0;
  CMatrix a, adag, number;
};

/// Truncated ladder operators on span{|0>, …, |n-1>}, a(k-1, k) = √k.
FockOps build_fock_ops(Index n);

/// Σ_{k≥n} |z|^{2k} e^{-|z|²} / k!
double coherent_tail_mass(double amplitude, Index n);
/// Smallest truncation whose coherent tail mass at `amplitude` is ≤ tol.
Index required_truncation(double amplitude, double tol);

/// Normalized |z> on n Fock levels. Throws TruncationError when the tail mass
/// exceeds tol_trunc.
CVector coherent_state(Complex z, Index n, double tol_trunc = Tolerances{}.trunc);

/// e^{c a†} on the truncation, summed exactly (a† is nilpotent there):
/// entry (m, k) = c^{m-k} √(m!/k!) / (m-k)! for m ≥ k.
CMatrix exp_creation(Complex c, Index n);
/// e^{c a} = (e^{c* a†})^†
CMatrix exp_annihilation(Complex c, Index n);

/// D(z) = e^{z a† - z* a} on the truncation, by Hermitian eigendecomposition.
CMatrix displacement(Complex z, const FockOps& ops);

struct OscillatorParams {
  Index n = 60;
  double omega_d = 0.3;
  double delta = 1.0;
  double phi_l = 0.0;
};

/// Driven oscillator H(t) = iΩ_D(a† e^{-iδt+iφ_L} - a e^{iδt-iφ_L}) and its
/// PT-picture twin with H = 0 and W(z) = e^{2z* a} e^{2z a†}, where
/// z(t) = iΩ_D(e^{-iδt} - 1) e^{iφ_L} / δ. System parameters λ = (Re z, Im z).
class OscillatorModel {
 public:
  explicit OscillatorModel(OscillatorParams p = {}, const Tolerances& tol = {});

  const OscillatorParams& params() const { return p_; }
  const FockOps& ops() const { return ops_; }
  double tau() const;

  Complex z(double t) const;
  Complex z_dot(double t) const;
  /// ∫_0^t Im(z* ż) dt'
  double accumulated_phase(double t) const;
  /// Signed area enclosed by the z loop, by the shoelace formula on a fine
  /// polygon.
  double loop_area(int vertices = 20000) const;

  /// W(λ) = B^† B with B = e^{2z a†}, z = λ_0 + iλ_1.
  MetricFamily metric() const;
  HamiltonianFamily pt_hamiltonian() const;
  ParameterPath pt_path() const;

  /// h(t) = i(ż a† - ż* a)
  CMatrix hermitian_picture_hamiltonian(double t) const;
  /// The drive in its textbook form.
  CMatrix drive_hamiltonian(double t) const;
  /// The drive as a family over λ = (cos δt, sin δt) with W = I.
  HamiltonianFamily hermitian_family() const;
  ParameterPath hermitian_path() const;

  /// e^{2z(t) a†} ψ, the image of a PT-picture state. Throws
  /// TruncationError outside the trust radius.
  CVector picture_map(const CVector& psi, double t) const;
  /// PT-picture propagator from t = 0: e^{iγ(t)} e^{-2z a†} D(z).
  CMatrix propagator(double t) const;

  /// |φ(λ)> = e^{-2z¹ a†}|z²> with z¹ = λ_0 + iλ_1, z² = λ_2 + iλ_3, and its
  /// tilde partner e^{2z¹* a}|z²>.
  StateSection section() const;
  /// The evolving state's curve in section coordinates: z¹ = z² = z(t).
  ParameterPath section_loop() const;

  /// Throws TruncationError if |2z¹| + |z²| exceeds the truncation's reach.
  void check_trust(Complex z1, Complex z2) const;

 private:
  OscillatorParams p_;
  FockOps ops_;
  Tolerances tol_;
};

/// H = [[iγ, κ*], [κ, -iγ]] with κ = x + iy over λ = (x, y, γ), and the
/// metric built from its left eigenvectors, W = Σ_n |Φ_n><Φ_n|. Throws
/// PreconditionError when |κ| ≤ |γ| (complex spectrum). The textbook form
/// [[iγ, s], [s, -iγ]] is the slice y = 0.
struct TwoLevelModel {
  HamiltonianFamily hamiltonian;
  MetricFamily metric;
  /// Upper-branch eigenvector (κ*, E - iγ), W-normalized.
  StateSection section;
};
TwoLevelModel two_level_model();
/// H = [[iγ, s], [s, -iγ]] at a fixed point, as constant families.
std::pair<HamiltonianFamily, MetricFamily> two_level_model(double s, double gamma_pt);
CMatrix two_level_hamiltonian(double s, double gamma_pt);
CMatrix two_level_hamiltonian(double x, double y, double gamma_pt);
CMatrix two_level_metric(double s, double gamma_pt);
CMatrix two_level_metric(double x, double y, double gamma_pt);

/// Circle λ(t) = c + r(cos ωt, sin ωt) with ω = 2π/τ.
ParameterPath circle_path(const Point& center, double radius, double tau, Index axis0 = 0,
                          Index axis1 = 1);

/// Spin-½ in a field: H(λ) = ½ λ·σ, W = I.
HamiltonianFamily spin_half_hamiltonian();
/// Field of strength b precessing on a cone of half-angle θ about z.
ParameterPath spin_field_loop(double b, double theta, double tau);

/// (cos θ/2, e^{iϕ} sin θ/2) over (θ, ϕ), W = I.
StateSection bloch_section();
/// The same over (u, v) = θ(cos ϕ, sin ϕ), smooth at the north pole, so that
/// latitude circles are closed loops in the chart.
StateSection bloch_section_planar();

}  // namespace ptqm
