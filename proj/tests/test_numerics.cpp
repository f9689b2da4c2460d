#include <cmath>

#include "doctest.h"
#include "ptqm/numerics.hpp"

using namespace ptqm;

TEST_CASE("phase wrapping") {
  CHECK(wrap_phase(3.0 * kPi) == doctest::Approx(kPi));
  CHECK(wrap_phase(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_phase(0.5 + 4.0 * kPi) == doctest::Approx(0.5));
  CHECK(phase_distance(kPi - 0.01, -kPi + 0.01) == doctest::Approx(0.02));
  CHECK(phase_distance(1.0, 1.0) == 0.0);
}

TEST_CASE("uniform grid detection") {
  const std::vector<double> u{0.0, 0.5, 1.0, 1.5};
  const std::vector<double> n{0.0, 0.5, 1.1, 1.5};
  CHECK(is_uniform(u));
  CHECK_FALSE(is_uniform(n));
}

TEST_CASE("Simpson is exact for cubics on even and odd interval counts") {
  for (int n : {4, 5, 7, 10}) {
    std::vector<double> t, f;
    for (int k = 0; k <= n; ++k) {
      const double x = 2.0 * k / n;
      t.push_back(x);
      f.push_back(x * x * x - x + 1.0);
    }
    CHECK(integrate(t, f) == doctest::Approx(4.0 - 2.0 + 2.0).epsilon(1e-13));
  }
}

TEST_CASE("trapezoid on a non-uniform grid") {
  const std::vector<double> t{0.0, 0.1, 0.5, 1.0};
  const std::vector<Complex> f{Complex(0, 0), Complex(0.1, 1), Complex(0.5, 1), Complex(1, 1)};
  const Complex v = integrate(t, f);
  CHECK(v.real() == doctest::Approx(0.5));
  CHECK(v.imag() == doctest::Approx(0.05 + 0.4 + 0.5));
}

TEST_CASE("Fornberg weights") {
  const std::vector<double> x{-1.0, 0.0, 1.0};
  const auto w1 = fd_weights(0.0, x, 1);
  CHECK(w1[0] == doctest::Approx(-0.5));
  CHECK(w1[1] == doctest::Approx(0.0));
  CHECK(w1[2] == doctest::Approx(0.5));
  const auto w2 = fd_weights(0.0, x, 2);
  CHECK(w2[0] == doctest::Approx(1.0));
  CHECK(w2[1] == doctest::Approx(-2.0));
}

TEST_CASE("grid derivative is fourth order") {
  auto err = [](int n) {
    std::vector<double> t;
    std::vector<Point> y;
    for (int k = 0; k <= n; ++k) {
      t.push_back(k * 1.0 / n);
      y.push_back(Point::Constant(1, std::sin(t.back())));
    }
    const auto d = grid_derivative(t, y);
    double e = 0.0;
    for (int k = 0; k <= n; ++k) e = std::max(e, std::abs(d[k](0) - std::cos(t[k])));
    return e;
  };
  const double ratio = err(20) / err(40);
  CHECK(ratio > 12.0);
  CHECK(ratio < 40.0);
}

TEST_CASE("Richardson derivative") {
  const Point x{{0.3, 1.2}};
  auto f = [](const Point& p) { return RVector::Constant(1, std::exp(p(0)) * std::sin(p(1))); };
  const RVector d = richardson_derivative(f, x, 1, 1e-3);
  CHECK(std::abs(d(0) - std::exp(0.3) * std::cos(1.2)) < 1e-11);
}

TEST_CASE("Gauss-Legendre integrates degree 2n-1 exactly") {
  std::vector<double> x, w;
  gauss_legendre(4, x, w);
  double s = 0.0, sw = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    s += w[k] * std::pow(x[k], 7);
    sw += w[k];
  }
  CHECK(s == doctest::Approx(1.0 / 8.0).epsilon(1e-14));
  CHECK(sw == doctest::Approx(1.0).epsilon(1e-14));
}
