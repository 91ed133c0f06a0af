#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "core_model.hpp"

namespace phaselab {

enum class NoiseKind { noiseless, poisson, student_t, gaussian };

inline std::string_view to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::noiseless:
      return "noiseless";
    case NoiseKind::poisson:
      return "poisson";
    case NoiseKind::student_t:
      return "student_t";
    case NoiseKind::gaussian:
      return "gaussian";
  }
  return "unknown";
}

inline NoiseKind parse_noise_kind(std::string_view s) {
  if (s == "noiseless") return NoiseKind::noiseless;
  if (s == "poisson") return NoiseKind::poisson;
  if (s == "student_t") return NoiseKind::student_t;
  if (s == "gaussian") return NoiseKind::gaussian;
  throw std::invalid_argument("unknown noise kind: " + std::string(s));
}

/// Observation noise. For student_t, xi = scale * T_dof; for gaussian,
/// xi ~ N(0, sigma^2). Poisson noise is signal dependent and has no parameters.
struct NoiseModel {
  NoiseKind kind = NoiseKind::noiseless;
  double dof = 0.0;
  double scale = 1.0;
  double sigma = 0.0;

  static NoiseModel noiseless() { return {}; }
  static NoiseModel poisson() { return {NoiseKind::poisson}; }
  static NoiseModel student_t(double dof, double scale = 1.0) { return {NoiseKind::student_t, dof, scale, 0.0}; }
  static NoiseModel gaussian(double sigma) { return {NoiseKind::gaussian, 0.0, 1.0, sigma}; }

  bool additive() const noexcept { return kind == NoiseKind::student_t || kind == NoiseKind::gaussian; }

  void validate() const {
    if (kind == NoiseKind::student_t) {
      // Finite variance needs dof > 2.
      if (!(dof > 2.0)) throw std::invalid_argument("student_t noise requires dof > 2");
      if (!(scale >= 0.0)) throw std::invalid_argument("student_t scale must be >= 0");
    }
    if (kind == NoiseKind::gaussian && !(sigma >= 0.0)) throw std::invalid_argument("gaussian sigma must be >= 0");
  }

  /// One additive noise draw. Only valid for additive models.
  double draw_additive(Rng& rng) const {
    switch (kind) {
      case NoiseKind::student_t:
        return scale * rng.student_t(dof);
      case NoiseKind::gaussian:
        return sigma * rng.normal();
      default:
        throw std::logic_error("draw_additive on a non-additive noise model");
    }
  }
};

struct Observation {
  RealVector y;
  NoiseModel model;
  std::uint64_t seed = 0;
};

namespace detail {

inline RealVector corrupt(const RealVector& clean, const NoiseModel& model, std::uint64_t seed) {
  model.validate();
  Rng rng(seed);
  RealVector y = clean;
  switch (model.kind) {
    case NoiseKind::noiseless:
      break;
    case NoiseKind::poisson:
      for (Index k = 0; k < y.size(); ++k) {
        // The lifted operator can round a zero intensity to -1e-17.
        y(k) = static_cast<double>(rng.poisson(std::max(clean(k), 0.0)));
      }
      break;
    case NoiseKind::student_t:
    case NoiseKind::gaussian:
      for (Index k = 0; k < y.size(); ++k) y(k) += model.draw_additive(rng);
      break;
  }
  return y;
}

}  // namespace detail

/// y_k ~ Poisson(|<phi_k, x>|^2) or y_k = |<phi_k, x>|^2 + xi_k.
inline Observation observe(const Ensemble& e, const Signal& x, const NoiseModel& model, std::uint64_t seed) {
  return {detail::corrupt(phaseless_apply(e, x), model, seed), model, seed};
}

/// Same noise models applied to lifted measurements <phi_k phi_k*, X> of a PSD X.
inline Observation observe_lifted(const Ensemble& e, const HermitianMatrix& x, const NoiseModel& model,
                                  std::uint64_t seed) {
  return {detail::corrupt(lifted_apply(e, x), model, seed), model, seed};
}

/// y_k = b_k* x h* a_k + xi_k with real additive xi_k. Poisson counts are
/// undefined for complex measurements.
inline ComplexVector observe_bilinear(const BilinearEnsemble& b, const Signal& x, const Signal& h,
                                      const NoiseModel& model, std::uint64_t seed) {
  model.validate();
  if (model.kind == NoiseKind::poisson) {
    throw std::invalid_argument("poisson noise is not defined for bilinear measurements");
  }
  ComplexVector y = bilinear_apply(b, ComplexMatrix(x * h.adjoint()));
  if (model.additive()) {
    Rng rng(seed);
    for (Index k = 0; k < y.size(); ++k) y(k) += model.draw_additive(rng);
  }
  return y;
}

struct MomentNorms {
  double psi1 = 0.0;  ///< max_p ||xi||_{L_p} / p over p in {1, 2, 4, 8}
  double l4 = 0.0;    ///< (mean |xi|^4)^{1/4}
};

/// Moment norms of the Poisson residual xi = Poisson(|<phi, x>|^2) - |<phi, x>|^2
/// with phi drawn from `family`. The psi_1 norm has no finite-sample
/// estimator; the moment-growth maximum is used as its proxy.
inline MomentNorms empirical_moment_norms(const Signal& x, EnsembleFamily family, Index n_samples,
                                          std::uint64_t seed) {
  if (n_samples < 1000) throw std::invalid_argument("empirical_moment_norms needs at least 1000 samples");
  if (x.size() < 1) throw std::invalid_argument("empirical_moment_norms: empty signal");
  Rng design_rng(substream(seed, 0));
  Rng count_rng(substream(seed, 1));
  constexpr std::array<int, 4> orders{1, 2, 4, 8};
  std::array<double, 4> sums{};
  for (Index s = 0; s < n_samples; ++s) {
    Complex inner = 0.0;
    for (Index j = 0; j < x.size(); ++j) inner += std::conj(detail::draw_entry(design_rng, family)) * x(j);
    const double rate = std::norm(inner);
    const double xi = std::fabs(static_cast<double>(count_rng.poisson(rate)) - rate);
    const double xi2 = xi * xi;
    const double xi4 = xi2 * xi2;
    sums[0] += xi;
    sums[1] += xi2;
    sums[2] += xi4;
    sums[3] += xi4 * xi4;
  }
  MomentNorms out;
  for (std::size_t i = 0; i < orders.size(); ++i) {
    const double norm = std::pow(sums[i] / static_cast<double>(n_samples), 1.0 / orders[i]);
    out.psi1 = std::max(out.psi1, norm / orders[i]);
    if (orders[i] == 4) out.l4 = norm;
  }
  return out;
}

}  // namespace phaselab
