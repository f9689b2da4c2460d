#pragma once

// Grid quadrature, finite-difference stencils and phase bookkeeping.

#include <span>
#include <vector>

#include "ptqm/types.hpp"

namespace ptqm {

/// Reduce an angle to (-π, π].
double wrap_phase(double angle);

/// Distance between two angles on the circle, in [0, π].
double phase_distance(double a, double b);

/// True if every spacing equals the first to relative precision 1e-12.
bool is_uniform(std::span<const double> t);

/// ∫ f dt over the sample grid. Composite Simpson on uniform grids (with a
/// 3/8 panel when the interval count is odd), trapezoid otherwise.
double integrate(std::span<const double> t, std::span<const double> f);
Complex integrate(std::span<const double> t, std::span<const Complex> f);

/// Fornberg weights for the derivative of order `order` at `x0` from the
/// nodes `x`.
std::vector<double> fd_weights(double x0, std::span<const double> x, int order = 1);

/// d/dt of a sampled vector-valued curve at every grid point: five-point
/// (fourth-order) stencils, shifted inward at both ends.
std::vector<CVector> grid_derivative(std::span<const double> t, std::span<const CVector> y);
std::vector<Point> grid_derivative(std::span<const double> t, std::span<const Point> y);

/// Central difference of f along a coordinate direction with one level of
/// Richardson extrapolation: (4 D(h) - D(2h)) / 3.
template <class F>
auto richardson_derivative(F&& f, const Point& x, Index mu, double h) {
  auto central = [&](double step) {
    Point p = x, m = x;
    p(mu) += step;
    m(mu) -= step;
    return ((f(p) - f(m)) / (2.0 * step)).eval();
  };
  const auto d1 = central(h);
  const auto d2 = central(2.0 * h);
  return ((4.0 * d1 - d2) / 3.0).eval();
}

/// Gauss–Legendre nodes and weights on [0, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace ptqm
