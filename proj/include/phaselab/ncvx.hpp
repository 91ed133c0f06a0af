#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "core_model.hpp"

namespace phaselab {

enum class StepKind { ramped, fixed };
enum class InitKind { spectral, truncated_spectral, prior_scaled };

inline std::string_view to_string(StepKind k) { return k == StepKind::ramped ? "ramped" : "fixed"; }

inline std::string_view to_string(InitKind k) {
  switch (k) {
    case InitKind::spectral:
      return "spectral";
    case InitKind::truncated_spectral:
      return "truncated_spectral";
    case InitKind::prior_scaled:
      return "prior_scaled";
  }
  return "unknown";
}

inline StepKind parse_step_kind(std::string_view s) {
  if (s == "ramped") return StepKind::ramped;
  if (s == "fixed") return StepKind::fixed;
  throw std::invalid_argument("unknown step rule: " + std::string(s));
}

inline InitKind parse_init_kind(std::string_view s) {
  if (s == "spectral") return InitKind::spectral;
  if (s == "truncated_spectral") return InitKind::truncated_spectral;
  if (s == "prior_scaled") return InitKind::prior_scaled;
  throw std::invalid_argument("unknown initialization: " + std::string(s));
}

/// Wirtinger flow settings. The step at iteration t is mu_t / ||z_0||^2 with
/// mu_t = min(1 - exp(-t / ramp_time), ramp_cap) for the ramped rule and
/// mu_t = fixed_step otherwise.
struct WfConfig {
  int max_iters = 2500;
  double tol = 1e-9;  ///< relative iterate change ||z_{t+1} - z_t|| / ||z_t||
  StepKind step = StepKind::ramped;
  double fixed_step = 0.1;
  double ramp_time = 330.0;
  double ramp_cap = 0.2;
  InitKind init = InitKind::spectral;
  double truncation_alpha = 3.0;  ///< keep y_k <= alpha^2 mean(y)
  double prior_low = 0.8;
  double prior_high = 1.2;
  std::optional<Index> sparsity;
  /// Sparse mode only: number of thresholded runs. Extra runs start from
  /// random s-subsets of the 2s largest marginals; the lowest objective wins.
  int restarts = 1;
  std::uint64_t restart_seed = 0;

  void validate(Index n) const {
    if (max_iters < 1) throw std::invalid_argument("WfConfig: max_iters must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("WfConfig: tol must be > 0");
    if (step == StepKind::fixed && !(fixed_step > 0.0)) throw std::invalid_argument("WfConfig: fixed step must be > 0");
    if (!(truncation_alpha > 0.0)) throw std::invalid_argument("WfConfig: truncation_alpha must be > 0");
    if (!(prior_low > 0.0 && prior_low <= prior_high)) throw std::invalid_argument("WfConfig: bad prior range");
    if (sparsity && (*sparsity < 1 || *sparsity > n)) throw std::invalid_argument("WfConfig: sparsity must lie in [1, n]");
    if (restarts < 1) throw std::invalid_argument("WfConfig: restarts must be >= 1");
  }

  friend bool operator==(const WfConfig&, const WfConfig&) = default;

  double step_size(int t, double z0_sq_norm) const {
    const double mu = step == StepKind::ramped ? std::min(1.0 - std::exp(-t / ramp_time), ramp_cap) : fixed_step;
    return mu / z0_sq_norm;
  }
};

template <class Estimate>
struct SolveTrace {
  Estimate estimate;
  int iterations = 0;
  std::vector<double> objective_history;  ///< entry 0 is the starting objective
  bool converged = false;
};

struct InitResult {
  Signal estimate;
  bool warning = false;
  std::string note;
};

namespace detail {

constexpr int kWarmupIters = 5;
constexpr double kMonotoneSlack = 1e-8;
constexpr int kMaxHalvings = 30;

inline void require_observations(const Ensemble& e, const RealVector& y) { require_match(e.size(), y.size(), "observations"); }

/// (1/m) sum_k y_k phi_k phi_k* over the kept indices.
inline HermitianMatrix weighted_covariance(const Ensemble& e, const RealVector& y, const std::vector<char>& keep) {
  RealVector w = y;
  for (Index k = 0; k < w.size(); ++k) {
    if (!keep[static_cast<std::size_t>(k)]) w(k) = 0.0;
  }
  HermitianMatrix cov = lifted_adjoint(e, w);
  return cov *= 1.0 / static_cast<double>(e.size());
}

/// Indices kept by the truncation rule y_k <= alpha^2 mean(y); infinite alpha keeps all.
inline std::vector<char> truncation_mask(const RealVector& y, double alpha) {
  std::vector<char> keep(static_cast<std::size_t>(y.size()), 1);
  if (std::isinf(alpha)) return keep;
  const double cutoff = alpha * alpha * y.mean();
  for (Index k = 0; k < y.size(); ++k) keep[static_cast<std::size_t>(k)] = y(k) <= cutoff ? 1 : 0;
  return keep;
}

inline Signal top_direction(const HermitianMatrix& cov) { return eig_hermitian(cov).vectors.col(0); }

inline InitResult spectral_from_mask(const Ensemble& e, const RealVector& y, const std::vector<char>& keep,
                                     const std::vector<Index>* support) {
  const Index n = e.dim();
  const double mean_y = y.mean();
  if (!(mean_y > 0.0)) return {Signal::Zero(n), true, "mean observation is not positive; returning zero signal"};
  const HermitianMatrix cov = weighted_covariance(e, y, keep);
  Signal z = Signal::Zero(n);
  if (support == nullptr) {
    z = top_direction(cov);
  } else {
    const Index s = static_cast<Index>(support->size());
    ComplexMatrix sub(s, s);
    for (Index i = 0; i < s; ++i) {
      for (Index j = 0; j < s; ++j) sub(i, j) = cov((*support)[i], (*support)[j]);
    }
    const Signal u = top_direction(HermitianMatrix(sub));
    for (Index i = 0; i < s; ++i) z((*support)[i]) = u(i);
  }
  return {std::sqrt(mean_y) * z, false, {}};
}

/// (1/m) sum_k y_k |phi_kj|^2 for every coordinate j.
inline RealVector marginals(const Ensemble& e, const RealVector& y) {
  return (y.transpose() * e.vectors.cwiseAbs2()).transpose() / static_cast<double>(e.size());
}

inline std::vector<char> init_mask(const RealVector& y, InitKind kind, double alpha) {
  return kind == InitKind::truncated_spectral ? truncation_mask(y, alpha)
                                              : std::vector<char>(static_cast<std::size_t>(y.size()), 1);
}

}  // namespace detail

/// sqrt(mean y) u_1 with u_1 the top eigenvector of (1/m) sum_k y_k phi_k phi_k*.
inline InitResult spectral_init(const Ensemble& e, const RealVector& y) {
  detail::require_observations(e, y);
  return detail::spectral_from_mask(e, y, std::vector<char>(static_cast<std::size_t>(y.size()), 1), nullptr);
}

/// Spectral initialization over the indices with y_k <= alpha^2 mean(y).
inline InitResult truncated_spectral_init(const Ensemble& e, const RealVector& y, double alpha = 3.0) {
  detail::require_observations(e, y);
  if (!(y.mean() > 0.0)) return spectral_init(e, y);
  const auto keep = detail::truncation_mask(y, alpha);
  if (std::none_of(keep.begin(), keep.end(), [](char c) { return c != 0; })) {
    auto out = spectral_init(e, y);
    out.warning = true;
    out.note = "truncation removed every observation; fell back to plain spectral initialization";
    return out;
  }
  return detail::spectral_from_mask(e, y, keep, nullptr);
}

/// s x, with s uniform on [low, high].
inline Signal prior_scaled_init(const Signal& x, double low, double high, std::uint64_t seed) {
  Rng rng(seed);
  return rng.uniform(low, high) * x;
}

/// Indices of the s largest-magnitude entries, ascending. Lower index wins ties.
inline std::vector<Index> top_support(const RealVector& magnitude, Index s) {
  std::vector<Index> order(static_cast<std::size_t>(magnitude.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return magnitude(i) > magnitude(j); });
  order.resize(static_cast<std::size_t>(s));
  std::sort(order.begin(), order.end());
  return order;
}

/// Zero all but the s largest-magnitude entries.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> hard_threshold(const Eigen::MatrixBase<Derived>& v, Index s) {
  if (s < 0 || s > v.size()) throw std::invalid_argument("hard_threshold: s out of range");
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>::Zero(v.size());
  const RealVector magnitude = v.cwiseAbs();
  for (Index j : top_support(magnitude, s)) out(j) = v(j);
  return out;
}

/// Spectral initialization restricted to the s coordinates with the largest
/// marginals (1/m) sum_k y_k |phi_kj|^2.
inline InitResult sparse_spectral_init(const Ensemble& e, const RealVector& y, Index s, InitKind kind,
                                       double alpha = 3.0) {
  detail::require_observations(e, y);
  if (s < 1 || s > e.dim()) throw std::invalid_argument("sparse_spectral_init: s must lie in [1, n]");
  if (kind == InitKind::prior_scaled) throw std::invalid_argument("sparse_spectral_init: prior_scaled needs a start point");
  if (!(y.mean() > 0.0)) return spectral_init(e, y);
  const auto support = top_support(detail::marginals(e, y), s);
  return detail::spectral_from_mask(e, y, detail::init_mask(y, kind, alpha), &support);
}

/// f(z) = (1/2m) ||Phi(z) - y||^2
inline double wf_objective(const Ensemble& e, const RealVector& y, const Signal& z) {
  return 0.5 * (phaseless_apply(e, z) - y).squaredNorm() / static_cast<double>(e.size());
}

/// Wirtinger gradient (1/m) sum_k (|<phi_k, z>|^2 - y_k) phi_k phi_k* z.
inline Signal wf_gradient(const Ensemble& e, const RealVector& y, const Signal& z) {
  const ComplexVector inner = measure(e, z);
  const RealVector residual = inner.cwiseAbs2() - y;
  return e.vectors.transpose() * (residual.cast<Complex>().cwiseProduct(inner)) / static_cast<double>(e.size());
}

/// Wirtinger flow from an explicit start point. With cfg.sparsity set, each
/// gradient step is followed by hard thresholding to s entries.
inline SolveTrace<Signal> wf_solve(const Ensemble& e, const RealVector& y, const WfConfig& cfg, const Signal& z0) {
  detail::require_observations(e, y);
  detail::require_match(e.dim(), z0.size(), "wf_solve start point");
  cfg.validate(e.dim());

  SolveTrace<Signal> trace;
  trace.estimate = cfg.sparsity ? Signal(hard_threshold(z0, *cfg.sparsity)) : z0;
  const double z0_sq = trace.estimate.squaredNorm();
  const double f0 = wf_objective(e, y, trace.estimate);
  trace.objective_history.push_back(f0);
  if (z0_sq == 0.0) {
    // The gradient vanishes at the origin.
    trace.converged = true;
    return trace;
  }

  Signal z = trace.estimate;
  double f_prev = f0;
  for (int t = 1; t <= cfg.max_iters; ++t) {
    const Signal grad = wf_gradient(e, y, z);
    double mu = cfg.step_size(t, z0_sq);
    Signal next;
    double f = 0.0;
    for (int halving = 0;; ++halving) {
      next = z - mu * grad;
      if (cfg.sparsity) next = hard_threshold(next, *cfg.sparsity);
      f = wf_objective(e, y, next);
      // Past the warm-up, halve the step until the objective does not rise.
      if (t <= detail::kWarmupIters || !(f > f_prev + detail::kMonotoneSlack)) break;
      if (halving == detail::kMaxHalvings) {
        next = z;
        f = f_prev;
        break;
      }
      mu *= 0.5;
    }
    f_prev = f;
    trace.objective_history.push_back(f);
    trace.iterations = t;
    if (!std::isfinite(f) || (f0 > 0.0 && f > 1e3 * f0)) {
      throw NumericFailure("wf_solve: objective diverged", t, trace.objective_history);
    }
    const double zn = z.norm();
    const double change = zn > 0.0 ? (next - z).norm() / zn : next.norm();
    z = std::move(next);
    if (change < cfg.tol) {
      trace.converged = true;
      break;
    }
  }
  trace.estimate = std::move(z);
  return trace;
}

/// Starting point chosen by cfg.init. prior_scaled needs the caller to supply
/// the start through the four-argument overload.
inline InitResult initialize(const Ensemble& e, const RealVector& y, const WfConfig& cfg) {
  if (cfg.sparsity) return sparse_spectral_init(e, y, *cfg.sparsity, cfg.init, cfg.truncation_alpha);
  switch (cfg.init) {
    case InitKind::spectral:
      return spectral_init(e, y);
    case InitKind::truncated_spectral:
      return truncated_spectral_init(e, y, cfg.truncation_alpha);
    case InitKind::prior_scaled:
      break;
  }
  throw std::invalid_argument("prior_scaled initialization needs an explicit start point");
}

inline SolveTrace<Signal> wf_solve(const Ensemble& e, const RealVector& y, const WfConfig& cfg) {
  detail::require_observations(e, y);
  cfg.validate(e.dim());
  return wf_solve(e, y, cfg, initialize(e, y, cfg).estimate);
}

/// Sparse NCVX-LS: support-restricted spectral start, then thresholded
/// Wirtinger flow. The estimate has at most s nonzero entries. With
/// cfg.restarts > 1 the thresholded runs from the other starts compete on
/// final objective; a diverging extra run is dropped.
inline SolveTrace<Signal> sparse_wf_solve(const Ensemble& e, const RealVector& y, const WfConfig& cfg) {
  if (!cfg.sparsity) throw std::invalid_argument("sparse_wf_solve: sparsity level is required");
  SolveTrace<Signal> best = wf_solve(e, y, cfg);
  if (cfg.restarts == 1 || !(y.mean() > 0.0)) return best;

  const Index n = e.dim();
  const Index s = *cfg.sparsity;
  const RealVector marginal = detail::marginals(e, y);
  std::vector<Index> pool = top_support(marginal, std::min(2 * s, n));
  const auto keep = detail::init_mask(y, cfg.init, cfg.truncation_alpha);
  Rng rng(cfg.restart_seed);
  for (int r = 1; r < cfg.restarts; ++r) {
    // Partial Fisher-Yates draw of s pool entries.
    for (Index i = 0; i < s; ++i) {
      const auto left = static_cast<double>(pool.size()) - static_cast<double>(i);
      const Index k = i + std::min(static_cast<Index>(rng.uniform() * left), static_cast<Index>(left) - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(k)]);
    }
    std::vector<Index> support(pool.begin(), pool.begin() + s);
    std::sort(support.begin(), support.end());
    const Signal z0 = detail::spectral_from_mask(e, y, keep, &support).estimate;
    try {
      SolveTrace<Signal> trace = wf_solve(e, y, cfg, z0);
      if (trace.objective_history.back() < best.objective_history.back()) best = std::move(trace);
    } catch (const NumericFailure&) {
    }
  }
  return best;
}

}  // namespace phaselab
