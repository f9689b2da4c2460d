#include "ptqm/numerics.hpp"

#include <cmath>

#include "ptqm/errors.hpp"

namespace ptqm {

double wrap_phase(double angle) {
  double r = std::remainder(angle, 2.0 * kPi);  // [-π, π]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

double phase_distance(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * kPi)); }

bool is_uniform(std::span<const double> t) {
  if (t.size() < 3) return true;
  const double h = t[1] - t[0];
  for (std::size_t k = 1; k + 1 < t.size(); ++k) {
    if (std::abs((t[k + 1] - t[k]) - h) > 1e-12 * std::abs(h)) return false;
  }
  return true;
}

namespace {

template <class T>
T integrate_impl(std::span<const double> t, std::span<const T> f) {
  if (t.size() != f.size()) throw StructuralError("integrate: grid and samples differ in length");
  const std::size_t n = t.size();
  if (n < 2) return T{};
  const std::size_t intervals = n - 1;
  if (!is_uniform(t) || intervals < 2) {
    T s{};
    for (std::size_t k = 0; k + 1 < n; ++k) s += 0.5 * (t[k + 1] - t[k]) * (f[k] + f[k + 1]);
    return s;
  }
  const double h = t[1] - t[0];
  auto simpson = [&](std::size_t lo, std::size_t hi) {
    T s = f[lo] + f[hi];
    for (std::size_t k = lo + 1; k < hi; ++k) s += ((k - lo) % 2 == 1 ? 4.0 : 2.0) * f[k];
    return s * (h / 3.0);
  };
  if (intervals % 2 == 0) return simpson(0, n - 1);
  if (intervals == 3) return 3.0 * h / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]);
  const std::size_t m = n - 4;  // Simpson on [0, m], 3/8 rule on the last three intervals
  return simpson(0, m) + 3.0 * h / 8.0 * (f[m] + 3.0 * f[m + 1] + 3.0 * f[m + 2] + f[m + 3]);
}

template <class V>
std::vector<V> grid_derivative_impl(std::span<const double> t, std::span<const V> y) {
  if (t.size() != y.size()) throw StructuralError("grid_derivative: size mismatch");
  const std::size_t n = t.size();
  if (n < 2) throw PreconditionError("grid_derivative needs at least two samples");
  const std::size_t width = std::min<std::size_t>(5, n);
  std::vector<V> out(n);
  const bool uniform = is_uniform(t);
  std::vector<double> uniform_weights[5];
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t lo = k >= width / 2 ? k - width / 2 : 0;
    if (lo + width > n) lo = n - width;
    const std::size_t offset = k - lo;
    std::vector<double> w;
    if (uniform) {
      if (uniform_weights[offset].empty()) {
        std::vector<double> nodes(width);
        for (std::size_t j = 0; j < width; ++j) nodes[j] = static_cast<double>(j);
        uniform_weights[offset] = fd_weights(static_cast<double>(offset), nodes, 1);
      }
      const double h = t[1] - t[0];
      w = uniform_weights[offset];
      for (double& x : w) x /= h;
    } else {
      w = fd_weights(t[k], t.subspan(lo, width), 1);
    }
    V d = w[0] * y[lo];
    for (std::size_t j = 1; j < width; ++j) d += w[j] * y[lo + j];
    out[k] = std::move(d);
  }
  return out;
}

}  // namespace

double integrate(std::span<const double> t, std::span<const double> f) { return integrate_impl(t, f); }

Complex integrate(std::span<const double> t, std::span<const Complex> f) {
  return integrate_impl(t, f);
}

std::vector<double> fd_weights(double x0, std::span<const double> x, int order) {
  // Fornberg (1988), generation of finite difference formulas on arbitrary grids.
  const int n = static_cast<int>(x.size()) - 1;
  if (n < order) throw PreconditionError("fd_weights: not enough nodes for the derivative order");
  std::vector<std::vector<double>> c(n + 1, std::vector<double>(order + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i) w[i] = c[i][order];
  return w;
}

std::vector<CVector> grid_derivative(std::span<const double> t, std::span<const CVector> y) {
  return grid_derivative_impl(t, y);
}

std::vector<Point> grid_derivative(std::span<const double> t, std::span<const Point> y) {
  return grid_derivative_impl(t, y);
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw PreconditionError("gauss_legendre: need at least one node");
  // Golub–Welsch: eigenvalues of the symmetric Jacobi matrix.
  RMatrix j = RMatrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    j(k, k - 1) = b;
    j(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> es(j);
  nodes.resize(n);
  weights.resize(n);
  for (int k = 0; k < n; ++k) {
    nodes[k] = 0.5 * (es.eigenvalues()(k) + 1.0);
    const double v = es.eigenvectors()(0, k);
    weights[k] = v * v;  // 2 v² on [-1, 1], halved for [0, 1]
  }
}

}  // namespace ptqm
