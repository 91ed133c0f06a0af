#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "core_model.hpp"
#include "cvx.hpp"
#include "metrics.hpp"
#include "noise.hpp"

namespace phaselab {

/// M = zz* - xx* (ncvx pair) or M = Z - xx* with Z PSD (cvx pair).
struct AdmissibleSample {
  enum class Origin { ncvx_pair, cvx_pair };

  HermitianMatrix m;
  Origin origin = Origin::ncvx_pair;

  static AdmissibleSample ncvx(const Signal& z, const Signal& x) {
    detail::require_match(x.size(), z.size(), "AdmissibleSample::ncvx");
    return {HermitianMatrix::outer(z) - HermitianMatrix::outer(x), Origin::ncvx_pair};
  }

  /// Throws when Z has an eigenvalue below -1e-9 max(1, ||Z||_op).
  static AdmissibleSample cvx(const HermitianMatrix& z, const Signal& x) {
    detail::require_match(z.dim(), x.size(), "AdmissibleSample::cvx");
    const RealVector values = eig_hermitian(z).values;
    const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    if (values(values.size() - 1) < -1e-9 * scale) throw std::invalid_argument("AdmissibleSample::cvx: Z is not PSD");
    return {z - HermitianMatrix::outer(x), Origin::cvx_pair};
  }
};

enum class AdmissibleCell { ncvx, cvx1, cvx2 };

struct NegativeEigenCount {
  int count = 0;
  bool holds = false;
};

/// Counts eigenvalues below -1e-9 ||M||_op; a cvx sample has at most one.
inline NegativeEigenCount check_negative_eigs(const AdmissibleSample& s) {
  if (s.origin != AdmissibleSample::Origin::cvx_pair) {
    throw std::invalid_argument("check_negative_eigs: needs a cvx sample");
  }
  const RealVector values = eig_hermitian(s.m).values;
  const double cutoff = -1e-9 * values.cwiseAbs().maxCoeff();
  NegativeEigenCount out;
  for (Index i = 0; i < values.size(); ++i) out.count += values(i) < cutoff ? 1 : 0;
  out.holds = out.count <= 1;
  return out;
}

namespace detail {

/// cvx1 when -lambda_n > (1/2) sum_{i<n} lambda_i, cvx2 otherwise.
inline AdmissibleCell cvx_cell(const RealVector& descending) {
  const Index n = descending.size();
  const double head = descending.head(n - 1).sum();
  return -descending(n - 1) > 0.5 * head ? AdmissibleCell::cvx1 : AdmissibleCell::cvx2;
}

inline Signal gaussian_vector(Index n, Rng& rng) {
  Signal v(n);
  for (Index j = 0; j < n; ++j) v(j) = rng.complex_normal();
  return v;
}

inline HermitianMatrix gaussian_hermitian(Index n, Rng& rng) {
  ComplexMatrix g(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) g(i, j) = rng.complex_normal();
  }
  return HermitianMatrix(g);
}

}  // namespace detail

inline AdmissibleCell classify(const AdmissibleSample& s) {
  if (s.origin == AdmissibleSample::Origin::ncvx_pair) return AdmissibleCell::ncvx;
  return detail::cvx_cell(eig_hermitian(s.m).values);
}

struct LowRankCheck {
  AdmissibleCell cell = AdmissibleCell::ncvx;
  double nuclear = 0.0;
  double frobenius = 0.0;
  /// sqrt(2) on ncvx, 3 on cvx1; cvx2 carries no bound and always holds.
  double factor = 0.0;
  bool holds = false;
};

inline LowRankCheck check_lowrank_bounds(const AdmissibleSample& s) {
  const RealVector values = eig_hermitian(s.m).values;
  LowRankCheck out;
  out.cell = s.origin == AdmissibleSample::Origin::ncvx_pair ? AdmissibleCell::ncvx : detail::cvx_cell(values);
  out.nuclear = values.cwiseAbs().sum();
  out.frobenius = values.norm();
  switch (out.cell) {
    case AdmissibleCell::ncvx:
      out.factor = M_SQRT2;
      break;
    case AdmissibleCell::cvx1:
      out.factor = 3.0;
      break;
    case AdmissibleCell::cvx2:
      out.factor = std::numeric_limits<double>::infinity();
      break;
  }
  out.holds = out.cell == AdmissibleCell::cvx2 || out.nuclear <= out.factor * out.frobenius + 1e-9;
  return out;
}

/// If ||Z - xx*||_F <= eta ||x||^2 then dist(z, x) <= (1 + 2 sqrt 2) eta ||x||
/// for z = sqrt(lambda_1) u_1. Checked at the smallest admissible eta.
inline InequalityCheck check_dis2(const HermitianMatrix& z, const Signal& x) {
  detail::require_match(z.dim(), x.size(), "check_dis2");
  const double energy = x.squaredNorm();
  if (!(energy > 0.0)) throw std::invalid_argument("check_dis2: x must be nonzero");
  const double eta = lifted_error(z, x) / energy;
  InequalityCheck c;
  c.lhs = dist_modulo_phase(extract_rank1(z), x);
  c.rhs = (1.0 + 2.0 * M_SQRT2) * eta * std::sqrt(energy);
  c.holds = c.lhs <= c.rhs + 1e-9;
  return c;
}

/// min over probes M of (1/m) sum_k |<phi_k phi_k*, M>|^2 / ||M||_F^2.
inline double empirical_slbc(const Ensemble& e, const std::vector<HermitianMatrix>& probes) {
  if (probes.empty()) throw std::invalid_argument("empirical_slbc: no probes");
  double best = std::numeric_limits<double>::infinity();
  for (const HermitianMatrix& probe : probes) {
    const double norm_sq = probe.matrix().squaredNorm();
    if (!(norm_sq > 0.0)) throw std::invalid_argument("empirical_slbc: zero probe");
    best = std::min(best, lifted_apply(e, probe).squaredNorm() / (static_cast<double>(e.size()) * norm_sq));
  }
  return best;
}

/// Random unit-Frobenius probes: vv* for rank 1, zz* - xx* for rank 2.
inline std::vector<HermitianMatrix> random_slbc_probes(Index n, int n_probes, int rank, std::uint64_t seed) {
  if (n_probes < 1) throw std::invalid_argument("random_slbc_probes: n_probes must be >= 1");
  if (rank != 1 && rank != 2) throw std::invalid_argument("random_slbc_probes: rank must be 1 or 2");
  Rng rng(seed);
  std::vector<HermitianMatrix> probes;
  probes.reserve(static_cast<std::size_t>(n_probes));
  for (int i = 0; i < n_probes; ++i) {
    HermitianMatrix m = HermitianMatrix::outer(detail::gaussian_vector(n, rng));
    if (rank == 2) m -= HermitianMatrix::outer(detail::gaussian_vector(n, rng));
    probes.push_back(m * (1.0 / m.frobenius_norm()));
  }
  return probes;
}

inline double empirical_slbc(const Ensemble& e, int n_probes, int rank, std::uint64_t seed) {
  if (n_probes < 100) throw std::invalid_argument("empirical_slbc: needs at least 100 probes");
  return empirical_slbc(e, random_slbc_probes(e.dim(), n_probes, rank, seed));
}

struct Cvx2Floor {
  double min_ratio = std::numeric_limits<double>::infinity();  ///< (1/m) sum |<., M>|^2 / ||M||_*^2
  int classified = 0;
  int drawn = 0;
};

/// Empirical floor of the nuclear-norm sampling bound over cvx2 samples.
/// Samples are Z = W W* of random rank with x scaled so both cells occur;
/// drawing stops after n_probes cvx2 samples or 20 n_probes draws.
inline Cvx2Floor empirical_cvx2_floor(const Ensemble& e, int n_probes, std::uint64_t seed) {
  if (n_probes < 1) throw std::invalid_argument("empirical_cvx2_floor: n_probes must be >= 1");
  const Index n = e.dim();
  Rng rng(seed);
  Cvx2Floor out;
  while (out.classified < n_probes && out.drawn < 20 * n_probes) {
    ++out.drawn;
    const Index rank = 1 + std::min(static_cast<Index>(rng.uniform() * static_cast<double>(n)), n - 1);
    HermitianMatrix z = HermitianMatrix::zero(n);
    for (Index r = 0; r < rank; ++r) z += HermitianMatrix::outer(detail::gaussian_vector(n, rng));
    const Signal x = detail::gaussian_vector(n, rng) * (rng.uniform(0.0, 2.0) * std::sqrt(z.trace() / n));
    const HermitianMatrix m = z - HermitianMatrix::outer(x);
    const RealVector values = eig_hermitian(m).values;
    if (detail::cvx_cell(values) != AdmissibleCell::cvx2) continue;
    const double nuclear = values.cwiseAbs().sum();
    if (!(nuclear > 0.0)) continue;
    ++out.classified;
    const double ratio = lifted_apply(e, m).squaredNorm() / (static_cast<double>(e.size()) * nuclear * nuclear);
    out.min_ratio = std::min(out.min_ratio, ratio);
  }
  return out;
}

/// Scale of the noise used to normalize the multiplier process: the psi_1
/// proxy for Poisson and Gaussian noise, the L_q norm with q = (2 + dof)/2
/// for Student-t (whose psi_1 norm is infinite).
inline double noise_norm_estimate(const Signal& x, EnsembleFamily family, const NoiseModel& model,
                                  std::uint64_t seed, Index n_samples = 20000) {
  model.validate();
  switch (model.kind) {
    case NoiseKind::noiseless:
      return 0.0;
    case NoiseKind::poisson:
      return empirical_moment_norms(x, family, n_samples, seed).psi1;
    case NoiseKind::gaussian: {
      double best = 0.0;
      for (int p : {1, 2, 4, 8}) {
        double sum = 0.0;
        Rng draw(substream(seed, static_cast<std::uint64_t>(p)));
        for (Index i = 0; i < n_samples; ++i) sum += std::pow(std::fabs(model.draw_additive(draw)), p);
        best = std::max(best, std::pow(sum / static_cast<double>(n_samples), 1.0 / p) / p);
      }
      return best;
    }
    case NoiseKind::student_t: {
      const double q = 0.5 * (2.0 + model.dof);
      Rng draw(seed);
      double sum = 0.0;
      for (Index i = 0; i < n_samples; ++i) sum += std::pow(std::fabs(model.draw_additive(draw)), q);
      return std::pow(sum / static_cast<double>(n_samples), 1.0 / q);
    }
  }
  throw std::invalid_argument("noise_norm_estimate: unsupported noise model");
}

/// Median over noise draws of ||sum_k xi_k phi_k phi_k*||_op / (norm sqrt(m n)).
/// The Poisson residual has conditional mean zero, so no centering term.
inline double empirical_nubc_ratio(const Ensemble& e, const Signal& x, const NoiseModel& model, int n_trials,
                                   std::uint64_t seed) {
  detail::require_match(e.dim(), x.size(), "empirical_nubc_ratio");
  if (n_trials < 1) throw std::invalid_argument("empirical_nubc_ratio: n_trials must be >= 1");
  if (model.kind == NoiseKind::noiseless) return 0.0;
  const double norm = noise_norm_estimate(x, e.family, model, substream(seed, 0));
  if (!(norm > 0.0)) return 0.0;
  const RealVector clean = phaseless_apply(e, x);
  const double scale = norm * std::sqrt(static_cast<double>(e.size()) * static_cast<double>(e.dim()));
  std::vector<double> ratios;
  ratios.reserve(static_cast<std::size_t>(n_trials));
  for (int t = 0; t < n_trials; ++t) {
    const RealVector xi = observe(e, x, model, substream(seed, 1 + static_cast<std::uint64_t>(t))).y - clean;
    const RealVector values = eig_hermitian(lifted_adjoint(e, xi)).values;
    ratios.push_back(values.cwiseAbs().maxCoeff() / scale);
  }
  std::sort(ratios.begin(), ratios.end());
  const std::size_t mid = ratios.size() / 2;
  return ratios.size() % 2 == 1 ? ratios[mid] : 0.5 * (ratios[mid - 1] + ratios[mid]);
}

/// Random packing around a real x: members z = x + g / sqrt(2n), rescaled by
/// z <- x + delta (z - x).
struct HypothesisPack {
  Signal center;
  std::vector<Signal> members;
  double delta = 1.0;
};

inline HypothesisPack pack_hypotheses(const Signal& x, int count_cap, std::uint64_t seed) {
  const Index n = x.size();
  if (n < 8) throw std::invalid_argument("pack_hypotheses: n must be >= 8 for the separation bounds to bite");
  if (count_cap < 1 || count_cap > 10000) throw std::invalid_argument("pack_hypotheses: count_cap must lie in [1, 10^4]");
  if (x.imag().cwiseAbs().maxCoeff() != 0.0) throw std::invalid_argument("pack_hypotheses: x must be real");
  const double target = std::exp(static_cast<double>(n) / 20.0);
  const int count = static_cast<int>(std::max(1.0, std::min(std::floor(target), static_cast<double>(count_cap))));
  Rng rng(seed);
  const double spread = 1.0 / std::sqrt(2.0 * static_cast<double>(n));
  HypothesisPack pack{x, {}, 1.0};
  pack.members.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Signal z = x;
    for (Index l = 0; l < n; ++l) z(l) += spread * rng.normal();
    pack.members.push_back(std::move(z));
  }
  return pack;
}

inline HypothesisPack rescale(const HypothesisPack& pack, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("rescale: delta must be > 0");
  HypothesisPack out{pack.center, {}, pack.delta * delta};
  out.members.reserve(pack.members.size());
  for (const Signal& z : pack.members) out.members.push_back(pack.center + delta * (z - pack.center));
  return out;
}

struct PackingReport {
  std::size_t pairs = 0;
  std::size_t in_band = 0;
  double fraction = 0.0;
  double min_distance = std::numeric_limits<double>::infinity();
  double max_distance = 0.0;
};

/// Pairwise distances over members and center, divided by delta, against
/// [1/sqrt 8 - (2n)^{-1/2}, 3/2 + n^{-1/2}].
inline PackingReport separation_report(const HypothesisPack& pack) {
  const double n = static_cast<double>(pack.center.size());
  const double low = 1.0 / std::sqrt(8.0) - 1.0 / std::sqrt(2.0 * n);
  const double high = 1.5 + 1.0 / std::sqrt(n);
  std::vector<const Signal*> all{&pack.center};
  for (const Signal& z : pack.members) all.push_back(&z);
  PackingReport r;
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const double d = (*all[i] - *all[j]).norm() / pack.delta;
      r.min_distance = std::min(r.min_distance, d);
      r.max_distance = std::max(r.max_distance, d);
      ++r.pairs;
      r.in_band += (d >= low && d <= high) ? 1 : 0;
    }
  }
  r.fraction = r.pairs > 0 ? static_cast<double>(r.in_band) / static_cast<double>(r.pairs) : 1.0;
  return r;
}

struct KlCheck {
  double exact = 0.0;
  double bound = 0.0;
  bool holds = false;
};

/// Exact KL(P(y | z) || P(y | x)) against the per-measurement bound, for
/// Poisson counts or additive N(0, sigma^2) noise.
inline KlCheck kl_bounds(const Ensemble& e, const Signal& z, const Signal& x, const NoiseModel& model) {
  detail::require_match(e.dim(), z.size(), "kl_bounds");
  detail::require_match(e.dim(), x.size(), "kl_bounds");
  const bool poisson = model.kind == NoiseKind::poisson;
  if (!poisson && !(model.kind == NoiseKind::gaussian && model.sigma > 0.0)) {
    throw std::invalid_argument("kl_bounds: needs poisson or gaussian noise with sigma > 0");
  }
  const RealVector lambda1 = phaseless_apply(e, z);
  const RealVector lambda0 = phaseless_apply(e, x);
  const RealVector diff = phaseless_apply(e, Signal(z - x));
  constexpr double inf = std::numeric_limits<double>::infinity();
  KlCheck out;
  for (Index k = 0; k < e.size(); ++k) {
    const double l1 = lambda1(k);
    const double l0 = lambda0(k);
    const double d = diff(k);
    if (poisson) {
      if (l0 == 0.0) {
        out.exact += l1 > 0.0 ? inf : 0.0;
        out.bound += d > 0.0 ? inf : 0.0;
        continue;
      }
      out.exact += l0 - l1 + (l1 > 0.0 ? l1 * std::log(l1 / l0) : 0.0);
      out.bound += d * (8.0 + 2.0 * d / l0);
    } else {
      out.exact += (l1 - l0) * (l1 - l0) / (2.0 * model.sigma * model.sigma);
      out.bound += d * (4.0 * l0 + d) / (model.sigma * model.sigma);
    }
  }
  out.holds = std::isinf(out.exact) ? std::isinf(out.bound) : out.exact <= out.bound + 1e-9;
  return out;
}

}  // namespace phaselab
