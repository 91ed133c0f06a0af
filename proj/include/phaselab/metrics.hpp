#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "core_model.hpp"

namespace phaselab {

/// min over phase of ||e^{i phi} z - x||_2, which equals
/// sqrt(||z||^2 + ||x||^2 - 2 |<z, x>|).
inline double dist_modulo_phase(const Signal& z, const Signal& x) {
  detail::require_match(x.size(), z.size(), "dist_modulo_phase");
  // Align the phase and subtract; the expanded square loses half the digits
  // near z = x.
  const Complex inner = x.dot(z);
  const double mag = std::abs(inner);
  const Complex phase = mag > 0.0 ? inner / mag : Complex(1.0, 0.0);
  return (z - phase * x).norm();
}

/// ||Z - xx*||_F
inline double lifted_error(const HermitianMatrix& z, const Signal& x) {
  detail::require_match(z.dim(), x.size(), "lifted_error");
  return (z.matrix() - x * x.adjoint()).norm();
}

struct ErrorReport {
  double dist = 0.0;
  /// dist^2 / ||x||^2, or plain dist^2 when x = 0 (see `absolute`).
  double relative_mse = 0.0;
  double mae = 0.0;
  std::optional<double> lifted_frobenius;
  /// Set when ||x|| = 0 and relative_mse holds the absolute squared error.
  bool absolute = false;
};

inline ErrorReport evaluate(const Signal& z, const Signal& x, const HermitianMatrix* lifted = nullptr) {
  ErrorReport r;
  r.dist = dist_modulo_phase(z, x);
  r.mae = r.dist;
  const double energy = x.squaredNorm();
  if (energy > 0.0) {
    r.relative_mse = r.dist * r.dist / energy;
  } else {
    r.relative_mse = r.dist * r.dist;
    r.absolute = true;
  }
  if (lifted != nullptr) r.lifted_frobenius = lifted_error(*lifted, x);
  return r;
}

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// ||zz* - xx*||_F >= 1/2 max{dist(z, x) ||x||, dist(z, x)^2}.
inline InequalityCheck check_dis1(const Signal& z, const Signal& x) {
  detail::require_match(x.size(), z.size(), "check_dis1");
  InequalityCheck c;
  c.lhs = (z * z.adjoint() - x * x.adjoint()).norm();
  const double d = dist_modulo_phase(z, x);
  c.rhs = 0.5 * std::max(d * x.norm(), d * d);
  c.holds = c.lhs >= c.rhs - 1e-9;
  return c;
}

}  // namespace phaselab
