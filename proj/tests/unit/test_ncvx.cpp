#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include <phaselab/metrics.hpp>
#include <phaselab/ncvx.hpp>
#include <phaselab/noise.hpp>

#include "../support.hpp"

namespace {

using namespace phaselab;

struct Problem {
  Ensemble e;
  Signal x;
  RealVector y;
};

Problem noiseless_problem(Index n, Index m, std::uint64_t seed, double norm = 1.0) {
  Problem p{draw_ensemble(EnsembleFamily::complex_gaussian, n, m, substream(seed, 1)),
            random_signal(n, norm, substream(seed, 2)), {}};
  p.y = phaseless_apply(p.e, p.x);
  return p;
}

void expect_monotone_after_warmup(const std::vector<double>& history) {
  for (std::size_t t = 6; t < history.size(); ++t) {
    ASSERT_LE(history[t], history[t - 1] + 1e-8) << "iteration " << t;
  }
}

TEST(SpectralInit, ZeroObservations) {
  const Ensemble e = draw_ensemble(EnsembleFamily::complex_gaussian, 5, 20, 1);
  const InitResult r = spectral_init(e, RealVector::Zero(20));
  EXPECT_EQ(r.estimate, Signal::Zero(5));
  EXPECT_TRUE(r.warning);
}

TEST(SpectralInit, RepeatedRowGivesColinearStart) {
  const Signal phi = phaselab::testing::random_complex(4, 2);
  RowMajorComplexMatrix rows(6, 4);
  for (Index k = 0; k < 6; ++k) rows.row(k) = phi.transpose();
  const Ensemble e = make_ensemble(rows);
  const InitResult r = spectral_init(e, RealVector::Constant(6, 2.5));
  const double cosine = std::abs(r.estimate.dot(phi)) / (r.estimate.norm() * phi.norm());
  EXPECT_NEAR(cosine, 1.0, 1e-12);
  EXPECT_NEAR(r.estimate.norm(), std::sqrt(2.5), 1e-12);
}

TEST(SpectralInit, NoiselessGoldenRun) {
  int close = 0;
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    const Problem p = noiseless_problem(16, 50 * 16, 100 + trial);
    close += dist_modulo_phase(spectral_init(p.e, p.y).estimate, p.x) <= 0.4 * p.x.norm() ? 1 : 0;
  }
  EXPECT_GE(close, 45);
}

TEST(TruncatedSpectralInit, InfiniteThresholdIsPlainSpectral) {
  const Problem p = noiseless_problem(8, 80, 3);
  const Signal a = truncated_spectral_init(p.e, p.y, std::numeric_limits<double>::infinity()).estimate;
  EXPECT_EQ(a, spectral_init(p.e, p.y).estimate);
}

TEST(TruncatedSpectralInit, CorruptedEntryIsExcluded) {
  Problem p = noiseless_problem(8, 400, 4);
  p.y(0) = 1e6 * p.y.mean();
  const auto keep = detail::truncation_mask(p.y, 3.0);
  EXPECT_EQ(keep[0], 0);
  EXPECT_GT(std::count(keep.begin(), keep.end(), 1), 390);
}

TEST(TruncatedSpectralInit, PoissonGoldenRun) {
  int close = 0;
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    const Ensemble e = draw_ensemble(EnsembleFamily::complex_gaussian, 10, 400, substream(200 + trial, 1));
    const Signal x = random_signal(10, 1.0, substream(200 + trial, 2));
    const RealVector y = observe(e, x, NoiseModel::poisson(), substream(200 + trial, 3)).y;
    close += dist_modulo_phase(truncated_spectral_init(e, y).estimate, x) <= 0.6 ? 1 : 0;
  }
  EXPECT_GE(close, 40);
}

TEST(WfSolve, StationaryAtTruth) {
  const Problem p = noiseless_problem(8, 80, 5);
  const SolveTrace<Signal> t = wf_solve(p.e, p.y, WfConfig{}, p.x);
  EXPECT_TRUE(t.converged);
  EXPECT_LE(t.iterations, 1);
  EXPECT_LE((t.estimate - p.x).norm(), 1e-12);
}

TEST(WfSolve, NoiselessGoldenRun) {
  int recovered = 0;
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    const Problem p = noiseless_problem(16, 160, 300 + trial);
    const SolveTrace<Signal> t = wf_solve(p.e, p.y, WfConfig{});
    expect_monotone_after_warmup(t.objective_history);
    recovered += dist_modulo_phase(t.estimate, p.x) <= 1e-5 * p.x.norm() ? 1 : 0;
  }
  EXPECT_GE(recovered, 45);
}

TEST(WfSolve, ZeroObservationsStayAtOrigin) {
  const Ensemble e = draw_ensemble(EnsembleFamily::complex_gaussian, 6, 30, 6);
  const SolveTrace<Signal> t = wf_solve(e, RealVector::Zero(30), WfConfig{});
  EXPECT_TRUE(t.converged);
  EXPECT_EQ(t.estimate, Signal::Zero(6));
}

TEST(WfSolve, DivergenceRaisesNumericFailure) {
  const Problem p = noiseless_problem(8, 80, 7);
  WfConfig cfg;
  cfg.step = StepKind::fixed;
  cfg.fixed_step = 50.0;
  try {
    wf_solve(p.e, p.y, cfg);
    FAIL() << "expected divergence";
  } catch (const NumericFailure& f) {
    EXPECT_GE(f.iterations(), 1);
    EXPECT_FALSE(f.objective_history().empty());
  }
}

TEST(WfSolve, PhaseEquivariance) {
  const Problem p = noiseless_problem(12, 120, 8);
  const Signal rotated = std::polar(1.0, 1.3) * p.x;
  const RealVector y_rot = phaseless_apply(p.e, rotated);
  // Observations agree to rounding, so the runs agree to rounding too.
  const double a = dist_modulo_phase(wf_solve(p.e, p.y, WfConfig{}).estimate, p.x);
  const double b = dist_modulo_phase(wf_solve(p.e, y_rot, WfConfig{}).estimate, rotated);
  EXPECT_NEAR(a, b, 1e-9);
}

TEST(WfSolve, ScaleCovarianceOfNoiselessRecovery) {
  // Both the start and the step scale with ||z0||, so the iterates scale by c.
  const Problem p = noiseless_problem(12, 48, 9);
  WfConfig cfg;
  cfg.max_iters = 200;
  const double base = dist_modulo_phase(wf_solve(p.e, p.y, cfg).estimate, p.x);
  ASSERT_GT(base, 1e-6);
  for (double c : {0.5, 2.0}) {
    const Signal cx = c * p.x;
    const double scaled = dist_modulo_phase(wf_solve(p.e, phaseless_apply(p.e, cx), cfg).estimate, cx);
    EXPECT_NEAR(scaled, c * base, 1e-6 * c * base) << "c = " << c;
  }
}

TEST(WfSolve, PoissonObjectiveMonotone) {
  const Ensemble e = draw_ensemble(EnsembleFamily::complex_gaussian, 16, 160, 10);
  const Signal x = random_signal(16, 1.0, 11);
  const RealVector y = observe(e, x, NoiseModel::poisson(), 12).y;
  expect_monotone_after_warmup(wf_solve(e, y, WfConfig{}).objective_history);
}

TEST(WfSolve, RejectsBadConfig) {
  const Problem p = noiseless_problem(4, 20, 13);
  WfConfig cfg;
  cfg.tol = 0.0;
  EXPECT_THROW(wf_solve(p.e, p.y, cfg), std::invalid_argument);
  cfg = WfConfig{};
  cfg.sparsity = 5;
  EXPECT_THROW(wf_solve(p.e, p.y, cfg), std::invalid_argument);
}

TEST(WfSolve, PriorScaledNeedsExplicitStart) {
  const Problem p = noiseless_problem(4, 20, 14);
  WfConfig cfg;
  cfg.init = InitKind::prior_scaled;
  EXPECT_THROW(wf_solve(p.e, p.y, cfg), std::invalid_argument);
  const Signal z0 = prior_scaled_init(p.x, 0.8, 1.2, 15);
  const double s = z0.norm() / p.x.norm();
  EXPECT_GE(s, 0.8);
  EXPECT_LE(s, 1.2);
}

TEST(HardThreshold, KeepsLargestEntries) {
  const RealVector v = (RealVector(3) << 3.0, -1.0, 2.0).finished();
  EXPECT_EQ(hard_threshold(v, 2), (RealVector(3) << 3.0, 0.0, 2.0).finished());
}

TEST(HardThreshold, LowerIndexWinsTies) {
  const RealVector v = (RealVector(4) << 1.0, -2.0, 2.0, 1.0).finished();
  EXPECT_EQ(hard_threshold(v, 1), (RealVector(4) << 0.0, -2.0, 0.0, 0.0).finished());
  EXPECT_EQ(hard_threshold(v, 3), (RealVector(4) << 1.0, -2.0, 2.0, 0.0).finished());
}

TEST(HardThreshold, Idempotent) {
  const Signal v = phaselab::testing::random_complex(20, 16);
  for (Index s : {1, 5, 20}) {
    const Signal once = hard_threshold(v, s);
    EXPECT_EQ(Signal(hard_threshold(once, s)), once);
  }
}

TEST(SparseWf, FullSparsityMatchesPlainTrajectory) {
  const Problem p = noiseless_problem(10, 60, 17);
  WfConfig sparse;
  sparse.sparsity = 10;
  const SolveTrace<Signal> a = sparse_wf_solve(p.e, p.y, sparse);
  const SolveTrace<Signal> b = wf_solve(p.e, p.y, WfConfig{});
  EXPECT_EQ(a.objective_history, b.objective_history);
  EXPECT_EQ(a.estimate, b.estimate);
}

TEST(SparseWf, EstimateIsSSparse) {
  const Problem p = noiseless_problem(30, 90, 18);
  WfConfig cfg;
  cfg.sparsity = 4;
  cfg.restarts = 3;
  const Signal z = sparse_wf_solve(p.e, p.y, cfg).estimate;
  EXPECT_LE((z.array() != Complex(0.0)).count(), 4);
}

TEST(SparseWf, RequiresSparsity) {
  const Problem p = noiseless_problem(4, 20, 19);
  EXPECT_THROW(sparse_wf_solve(p.e, p.y, WfConfig{}), std::invalid_argument);
}

}  // namespace
