#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace ptqm {

using Index = Eigen::Index;
using Complex = std::complex<double>;

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// A point in parameter space (or in a section chart): real coordinates.
using Point = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

/// Numerical thresholds shared by every module. All are overridable per
/// scenario; `scaled` multiplies each by a common factor.
struct Tolerances {
  double herm = 1e-10;
  double pseudo = 1e-10;
  double norm = 1e-8;
  double idem = 1e-10;
  double trace = 1e-10;
  double rank = 1e-8;
  double unitarity = 1e-8;
  double cyclic = 1e-6;
  double path = 1e-12;
  double phase = 1e-6;
  double tensor = 1e-6;
  double fid = 1e-8;
  double light = 1e-6;
  double pt = 1e-8;
  double trunc = 1e-12;
  double cond_warn = 1e8;

  Tolerances scaled(double factor) const;
};

}  // namespace ptqm
