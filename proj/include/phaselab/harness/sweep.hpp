#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "../core_model.hpp"
#include "../cvx.hpp"
#include "../metrics.hpp"
#include "../ncvx.hpp"
#include "../noise.hpp"
#include "config.hpp"
#include "records.hpp"

namespace phaselab::harness {

/// Per-trial seed: hash of (master_seed, experiment_id, ratio, scale, trial).
/// The dof is left out on purpose so every dof cell of a Student-t sweep sees
/// the same ensembles, signals and base noise draws.
inline std::uint64_t stable_hash(std::uint64_t master_seed, const std::string& experiment_id, double ratio,
                                 double scale, int trial) {
  return hash_combine({master_seed, fnv1a64(experiment_id), bits_of(ratio), bits_of(scale),
                       static_cast<std::uint64_t>(trial)});
}

/// Sub-streams of a trial seed.
enum Stream : std::uint64_t { kEnsemble = 1, kSignal = 2, kNoise = 3, kInit = 4 };

inline Index measurement_count(const ExperimentConfig& cfg, double ratio) {
  return static_cast<Index>(std::llround(ratio * static_cast<double>(cfg.n)));
}

struct TrialSpec {
  double ratio = 0.0;
  double scale = 0.0;
  std::optional<double> dof;
  int trial = 0;
};

struct TrialOutcome {
  ErrorReport error;
  int iterations = 0;
  bool failed = false;
  double runtime_ms = 0.0;
};

namespace detail {

/// ||x|| = scale with s nonzero entries on a uniformly random support.
inline Signal sparse_signal(Index n, Index s, double scale, std::uint64_t seed) {
  Rng rng(seed);
  RealVector keys(n);
  for (Index j = 0; j < n; ++j) keys(j) = rng.uniform();
  Signal x = Signal::Zero(n);
  for (Index j : top_support(keys, s)) x(j) = rng.complex_normal();
  return x * (scale / x.norm());
}

/// X = W W* with W n x r complex Gaussian, scaled to trace scale^2, which
/// reduces to xx* with ||x|| = scale at rank 1.
inline HermitianMatrix low_rank_psd(Index n, Index rank, double scale, std::uint64_t seed) {
  Rng rng(seed);
  ComplexMatrix w(n, rank);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < rank; ++j) w(i, j) = rng.complex_normal();
  }
  w *= scale / w.norm();
  return HermitianMatrix(ComplexMatrix(w * w.adjoint()));
}

inline ErrorReport lifted_report(const ComplexMatrix& z, const ComplexMatrix& truth) {
  ErrorReport r;
  r.dist = (z - truth).norm();
  r.mae = r.dist;
  r.relative_mse = r.dist * r.dist / truth.squaredNorm();
  r.lifted_frobenius = r.dist;
  return r;
}

inline TrialOutcome solve_trial(const ExperimentConfig& cfg, const TrialSpec& spec, std::uint64_t seed) {
  const Index n = cfg.n;
  const Index m = measurement_count(cfg, spec.ratio);
  const NoiseModel noise = cfg.noise_model(spec.dof);
  const std::uint64_t ensemble_seed = substream(seed, kEnsemble);
  const std::uint64_t signal_seed = substream(seed, kSignal);
  const std::uint64_t noise_seed = substream(seed, kNoise);
  const std::uint64_t init_seed = substream(seed, kInit);
  TrialOutcome out;

  switch (cfg.estimator) {
    case Estimator::ncvx: {
      const Ensemble e = draw_ensemble(cfg.family, n, m, ensemble_seed);
      const Signal x = random_signal(n, spec.scale, signal_seed);
      const RealVector y = observe(e, x, noise, noise_seed).y;
      const WfConfig wf = cfg.wf_config();
      const auto trace = wf.init == InitKind::prior_scaled
                             ? wf_solve(e, y, wf, prior_scaled_init(x, wf.prior_low, wf.prior_high, init_seed))
                             : wf_solve(e, y, wf);
      out.error = evaluate(trace.estimate, x);
      out.iterations = trace.iterations;
      break;
    }
    case Estimator::sparse: {
      const Ensemble e = draw_ensemble(cfg.family, n, m, ensemble_seed);
      const Signal x = sparse_signal(n, *cfg.sparsity, spec.scale, signal_seed);
      const RealVector y = observe(e, x, noise, noise_seed).y;
      WfConfig wf = cfg.wf_config();
      wf.restart_seed = init_seed;
      const auto trace = sparse_wf_solve(e, y, wf);
      out.error = evaluate(trace.estimate, x);
      out.iterations = trace.iterations;
      break;
    }
    case Estimator::cvx: {
      const Ensemble e = draw_ensemble(cfg.family, n, m, ensemble_seed);
      if (cfg.rank == 1) {
        const Signal x = random_signal(n, spec.scale, signal_seed);
        const RealVector y = observe(e, x, noise, noise_seed).y;
        const auto trace = psd_ls_solve(e, y, cfg.psd_config());
        out.error = evaluate(extract_rank1(trace.estimate), x, &trace.estimate);
        out.iterations = trace.iterations;
      } else {
        const HermitianMatrix truth = low_rank_psd(n, cfg.rank, spec.scale, signal_seed);
        const RealVector y = observe_lifted(e, truth, noise, noise_seed).y;
        const auto trace = psd_ls_solve(e, y, cfg.psd_config());
        out.error = lifted_report(trace.estimate.matrix(), truth.matrix());
        out.iterations = trace.iterations;
      }
      break;
    }
    case Estimator::blinddeconv: {
      const BilinearEnsemble b = draw_bilinear_ensemble(cfg.family, n, m, ensemble_seed);
      const Signal x = random_signal(n, spec.scale, signal_seed);
      const Signal h = random_signal(n, 1.0, substream(signal_seed, 1));
      const ComplexVector y = observe_bilinear(b, x, h, noise, noise_seed);
      const auto trace = blinddeconv_solve(b, y, cfg.nuclear_config(x.norm() * h.norm()));
      out.error = lifted_report(trace.estimate, ComplexMatrix(x * h.adjoint()));
      out.iterations = trace.iterations;
      break;
    }
  }
  return out;
}

}  // namespace detail

/// Solves one trial. Numeric failures are caught and reported as `failed`.
inline TrialOutcome run_trial(const ExperimentConfig& cfg, const TrialSpec& spec, bool record_timing = false) {
  const std::uint64_t seed = stable_hash(cfg.master_seed, cfg.experiment_id, spec.ratio, spec.scale, spec.trial);
  const auto start = std::chrono::steady_clock::now();
  TrialOutcome out;
  try {
    out = detail::solve_trial(cfg, spec, seed);
  } catch (const NumericFailure& e) {
    out = TrialOutcome{};
    out.failed = true;
    out.iterations = e.iterations();
  }
  if (record_timing) {
    out.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return out;
}

inline constexpr const char* kMetricNames[] = {"dist", "relative_mse", "mae"};
inline constexpr const char* kFailureMetric = "failure";

/// Rows of one trial: dist, relative_mse and mae, all NaN on failure, plus
/// a `failure` row with value 1 when the solver failed.
inline std::vector<TrialRecord> trial_records(const ExperimentConfig& cfg, const TrialSpec& spec,
                                              const TrialOutcome& outcome) {
  TrialRecord base;
  base.experiment_id = cfg.experiment_id;
  base.estimator = std::string(to_string(cfg.estimator));
  base.noise_kind = std::string(to_string(cfg.noise));
  base.n = cfg.n;
  base.m = measurement_count(cfg, spec.ratio);
  base.ratio = spec.ratio;
  base.signal_scale = spec.scale;
  base.dof = spec.dof;
  base.trial_index = spec.trial;
  base.seed = stable_hash(cfg.master_seed, cfg.experiment_id, spec.ratio, spec.scale, spec.trial);
  base.iterations = outcome.iterations;
  base.runtime_ms = outcome.runtime_ms;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double values[] = {outcome.error.dist, outcome.error.relative_mse, outcome.error.mae};
  std::vector<TrialRecord> rows;
  for (std::size_t i = 0; i < 3; ++i) {
    TrialRecord r = base;
    r.metric_name = kMetricNames[i];
    r.metric_value = outcome.failed ? nan : values[i];
    rows.push_back(std::move(r));
  }
  if (outcome.failed) {
    TrialRecord r = base;
    r.metric_name = kFailureMetric;
    r.metric_value = 1.0;
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Every trial of the sweep, in canonical (ratio, scale, dof, trial) order.
inline std::vector<TrialSpec> enumerate_trials(const ExperimentConfig& cfg) {
  std::vector<TrialSpec> specs;
  for (double ratio : cfg.ratios) {
    for (double scale : cfg.signal_scales) {
      for (const auto& dof : cfg.dof_axis()) {
        for (int t = 0; t < cfg.trials; ++t) specs.push_back({ratio, scale, dof, t});
      }
    }
  }
  return specs;
}

struct SweepOptions {
  int jobs = 1;
  bool record_timing = false;
  /// Rows from an earlier run; trials already complete there are not rerun.
  std::vector<TrialRecord> existing;
};

struct SweepResult {
  std::vector<TrialRecord> records;  ///< sorted canonically
  int trials_run = 0;
  int trials_reused = 0;
  int failures = 0;
  int total_trials = 0;

  double failure_rate() const { return total_trials > 0 ? static_cast<double>(failures) / total_trials : 0.0; }
};

/// Runs the sweep on `jobs` threads. Each trial owns its seeds and solver
/// state, so the sorted output does not depend on scheduling.
inline SweepResult run_sweep(const ExperimentConfig& cfg, const SweepOptions& options = {}) {
  using Key = decltype(trial_key(TrialRecord{}));
  std::map<Key, std::vector<TrialRecord>> reusable;
  for (const TrialRecord& r : options.existing) {
    if (r.experiment_id != cfg.experiment_id) {
      throw std::invalid_argument("existing records belong to experiment '" + r.experiment_id + "'");
    }
    reusable[trial_key(r)].push_back(r);
  }

  const std::vector<TrialSpec> specs = enumerate_trials(cfg);
  SweepResult result;
  result.total_trials = static_cast<int>(specs.size());
  std::vector<std::vector<TrialRecord>> slots(specs.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const Key key{specs[i].ratio, specs[i].scale, specs[i].dof, specs[i].trial};
    const auto it = reusable.find(key);
    // A trial is complete when all three metric rows are present.
    const bool complete = it != reusable.end() && std::all_of(std::begin(kMetricNames), std::end(kMetricNames),
                                                              [&](const char* name) {
                                                                return std::any_of(it->second.begin(), it->second.end(),
                                                                                   [&](const TrialRecord& r) {
                                                                                     return r.metric_name == name;
                                                                                   });
                                                              });
    if (complete) {
      slots[i] = it->second;
      ++result.trials_reused;
    } else {
      pending.push_back(i);
    }
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(pending.size());
  const auto worker = [&] {
    for (std::size_t k = next++; k < pending.size(); k = next++) {
      const TrialSpec& spec = specs[pending[k]];
      try {
        slots[pending[k]] = trial_records(cfg, spec, run_trial(cfg, spec, options.record_timing));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(pending.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  // Report the first error in canonical order, independent of scheduling.
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
  result.trials_run = static_cast<int>(pending.size());

  for (auto& slot : slots) {
    for (auto& r : slot) {
      if (r.metric_name == kFailureMetric) ++result.failures;
      result.records.push_back(std::move(r));
    }
  }
  sort_records(result.records);
  return result;
}

}  // namespace phaselab::harness
