#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "core_model.hpp"
#include "ncvx.hpp"

namespace phaselab {

enum class PsdStepKind { lipschitz_estimate, fixed };

/// Projected gradient settings for the lifted least-squares problems.
struct PsdSolveConfig {
  int max_iters = 2500;
  double tol = 1e-7;  ///< relative iterate change in Frobenius norm
  PsdStepKind step = PsdStepKind::lipschitz_estimate;
  double fixed_step = 0.0;  ///< used when step == fixed
  int power_iters = 20;

  friend bool operator==(const PsdSolveConfig&, const PsdSolveConfig&) = default;

  void validate() const {
    if (max_iters < 1) throw std::invalid_argument("PsdSolveConfig: max_iters must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("PsdSolveConfig: tol must be > 0");
    if (step == PsdStepKind::fixed && !(fixed_step > 0.0)) throw std::invalid_argument("PsdSolveConfig: fixed step must be > 0");
    if (power_iters < 1) throw std::invalid_argument("PsdSolveConfig: power_iters must be >= 1");
  }
};

struct NuclearBallConfig {
  double radius = 0.0;  ///< tau = ||x|| ||h||
  int max_iters = 2500;
  double tol = 1e-7;
  int power_iters = 20;

  void validate() const {
    if (!(radius >= 0.0)) throw std::invalid_argument("NuclearBallConfig: radius must be >= 0");
    if (max_iters < 1) throw std::invalid_argument("NuclearBallConfig: max_iters must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("NuclearBallConfig: tol must be > 0");
    if (power_iters < 1) throw std::invalid_argument("NuclearBallConfig: power_iters must be >= 1");
  }
};

/// Frobenius-nearest PSD matrix: clamp negative eigenvalues to zero.
inline HermitianMatrix project_psd(const HermitianMatrix& a) {
  EigenDecomposition d = eig_hermitian(a);
  d.values = d.values.cwiseMax(0.0);
  return reconstruct(d);
}

/// sqrt(lambda_1) u_1 under the eigenvector phase convention of eig_hermitian.
inline Signal extract_rank1(const HermitianMatrix& z) {
  const EigenDecomposition d = eig_hermitian(z);
  if (d.values(0) < 0.0) throw std::invalid_argument("extract_rank1: top eigenvalue is negative");
  return std::sqrt(d.values(0)) * d.vectors.col(0);
}

/// Euclidean projection of a nonnegative vector onto {p >= 0, sum p <= tau}
/// by sort-and-threshold.
inline RealVector project_l1_ball_nonneg(const RealVector& v, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("project_l1_ball_nonneg: tau must be >= 0");
  RealVector clipped = v.cwiseMax(0.0);
  if (clipped.sum() <= tau) return clipped;
  if (tau == 0.0) return RealVector::Zero(v.size());
  std::vector<double> sorted(clipped.data(), clipped.data() + clipped.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - tau) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }
  return (clipped.array() - theta).cwiseMax(0.0).matrix();
}

inline double nuclear_norm(const ComplexMatrix& z) { return Eigen::JacobiSVD<ComplexMatrix>(z).singularValues().sum(); }

/// Projection onto the nuclear-norm ball of radius tau. Matrices already
/// inside the ball are returned unchanged.
inline ComplexMatrix project_nuclear_ball(const ComplexMatrix& z, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("project_nuclear_ball: tau must be >= 0");
  Eigen::JacobiSVD<ComplexMatrix> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericFailure("project_nuclear_ball: SVD failed", 0);
  const RealVector& sigma = svd.singularValues();
  if (sigma.sum() <= tau) return z;
  const RealVector p = project_l1_ball_nonneg(sigma, tau);
  return svd.matrixU() * p.cast<Complex>().asDiagonal() * svd.matrixV().adjoint();
}

namespace detail {

inline double frobenius(const HermitianMatrix& a) { return a.frobenius_norm(); }
inline double frobenius(const HermitianMatrix& a, const HermitianMatrix& b) { return (a.matrix() - b.matrix()).norm(); }
inline double frobenius(const ComplexMatrix& a) { return a.norm(); }
inline double frobenius(const ComplexMatrix& a, const ComplexMatrix& b) { return (a - b).norm(); }

/// Largest eigenvalue of a positive semidefinite normal operator by power
/// iteration from `start`, returned as a Rayleigh quotient.
template <class Matrix, class Normal>
double power_iteration(Matrix v, const Normal& normal, int iters) {
  double estimate = 0.0;
  for (int i = 0; i < iters; ++i) {
    const double norm = v.norm();
    if (norm == 0.0) return 0.0;
    v /= norm;
    Matrix w = normal(v);
    estimate = std::real((v.adjoint() * w).trace());
    v = std::move(w);
  }
  return estimate;
}

template <class Estimate, class Step, class Objective>
SolveTrace<Estimate> projected_gradient(Estimate z, int max_iters, double tol, const Step& step,
                                        const Objective& objective, const char* name) {
  SolveTrace<Estimate> trace;
  const double f0 = objective(z);
  trace.objective_history.push_back(f0);
  for (int t = 1; t <= max_iters; ++t) {
    Estimate next = step(z);
    const double f = objective(next);
    trace.objective_history.push_back(f);
    trace.iterations = t;
    if (!std::isfinite(f) || (f0 > 0.0 && f > 1e3 * f0)) {
      throw NumericFailure(std::string(name) + ": objective diverged", t, trace.objective_history);
    }
    const double zn = frobenius(z);
    const double change = zn > 0.0 ? frobenius(next, z) / zn : frobenius(next);
    z = std::move(next);
    if (change < tol) {
      trace.converged = true;
      break;
    }
  }
  trace.estimate = std::move(z);
  return trace;
}

}  // namespace detail

/// (1/2m) ||A(Z) - y||^2
inline double psd_objective(const Ensemble& e, const RealVector& y, const HermitianMatrix& z) {
  return 0.5 * (lifted_apply(e, z) - y).squaredNorm() / static_cast<double>(e.size());
}

/// Lipschitz constant of the gradient of psd_objective, lambda_max(A*A) / m.
inline double lifted_lipschitz(const Ensemble& e, int power_iters) {
  const auto normal = [&e](const ComplexMatrix& v) {
    return ComplexMatrix(lifted_adjoint(e, lifted_apply(e, HermitianMatrix(v))).matrix());
  };
  const Index n = e.dim();
  const ComplexMatrix start = ComplexMatrix::Identity(n, n);
  return detail::power_iteration(start, normal, power_iters) / static_cast<double>(e.size());
}

/// CVX-LS over the PSD cone by projected gradient, started from the
/// projection of (1/m) sum_k y_k phi_k phi_k*.
inline SolveTrace<HermitianMatrix> psd_ls_solve(const Ensemble& e, const RealVector& y, const PsdSolveConfig& cfg) {
  detail::require_observations(e, y);
  cfg.validate();
  const double m = static_cast<double>(e.size());
  const double step_size = cfg.step == PsdStepKind::fixed ? cfg.fixed_step : 1.0 / lifted_lipschitz(e, cfg.power_iters);
  const HermitianMatrix z0 = project_psd(lifted_adjoint(e, y) * (1.0 / m));
  const auto step = [&](const HermitianMatrix& z) {
    const HermitianMatrix grad = lifted_adjoint(e, lifted_apply(e, z) - y) * (1.0 / m);
    return project_psd(z - step_size * grad);
  };
  const auto objective = [&](const HermitianMatrix& z) { return psd_objective(e, y, z); };
  return detail::projected_gradient(z0, cfg.max_iters, cfg.tol, step, objective, "psd_ls_solve");
}

/// (1/2m) ||B(Z) - y||^2
inline double bilinear_objective(const BilinearEnsemble& b, const ComplexVector& y, const ComplexMatrix& z) {
  return 0.5 * (bilinear_apply(b, z) - y).squaredNorm() / static_cast<double>(b.size());
}

inline double bilinear_lipschitz(const BilinearEnsemble& b, int power_iters) {
  const auto normal = [&b](const ComplexMatrix& v) { return bilinear_adjoint(b, bilinear_apply(b, v)); };
  const Index n = b.dim();
  Rng rng(0x5eedULL);
  ComplexMatrix start(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) start(i, j) = rng.complex_normal();
  }
  return detail::power_iteration(start, normal, power_iters) / static_cast<double>(b.size());
}

/// Least squares over the nuclear-norm ball ||Z||_* <= tau by projected
/// gradient, started from the projection of (1/m) B*(y).
inline SolveTrace<ComplexMatrix> blinddeconv_solve(const BilinearEnsemble& b, const ComplexVector& y,
                                                   const NuclearBallConfig& cfg) {
  detail::require_match(b.size(), y.size(), "blinddeconv_solve observations");
  cfg.validate();
  const double m = static_cast<double>(b.size());
  const double lipschitz = bilinear_lipschitz(b, cfg.power_iters);
  const double step_size = lipschitz > 0.0 ? 1.0 / lipschitz : 0.0;
  const ComplexMatrix z0 = project_nuclear_ball(bilinear_adjoint(b, y) / m, cfg.radius);
  const auto step = [&](const ComplexMatrix& z) {
    const ComplexMatrix grad = bilinear_adjoint(b, bilinear_apply(b, z) - y) / m;
    return project_nuclear_ball(z - step_size * grad, cfg.radius);
  };
  const auto objective = [&](const ComplexMatrix& z) { return bilinear_objective(b, y, z); };
  return detail::projected_gradient(z0, cfg.max_iters, cfg.tol, step, objective, "blinddeconv_solve");
}

}  // namespace phaselab
