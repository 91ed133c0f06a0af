#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include <phaselab/noise.hpp>

#include "../support.hpp"

namespace {

using namespace phaselab;

// Mean and unbiased variance of repeated draws of y_1.
struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments repeated_first_entry(const Ensemble& e, const Signal& x, const NoiseModel& model, int draws, double offset) {
  std::vector<double> v;
  for (int s = 0; s < draws; ++s) v.push_back(observe(e, x, model, 1000 + static_cast<std::uint64_t>(s)).y(0) - offset);
  Moments out;
  for (double d : v) out.mean += d;
  out.mean /= draws;
  for (double d : v) out.var += (d - out.mean) * (d - out.mean);
  out.var /= draws - 1;
  return out;
}

TEST(Observe, PoissonOfZeroSignalIsZero) {
  const Ensemble e = draw_ensemble(EnsembleFamily::complex_gaussian, 6, 30, 1);
  const Observation o = observe(e, Signal::Zero(6), NoiseModel::poisson(), 2);
  EXPECT_EQ(o.y, RealVector::Zero(30));
}

TEST(Observe, NoiselessMatchesPhaselessApply) {
  const Ensemble e = draw_ensemble(EnsembleFamily::complex_gaussian, 6, 30, 1);
  const Signal x = random_signal(6, 1.0, 3);
  const RealVector expected = phaseless_apply(e, x);
  const RealVector y = observe(e, x, NoiseModel::noiseless(), 4).y;
  EXPECT_LE((y - expected).cwiseAbs().maxCoeff(), 1e-12 * expected.cwiseAbs().maxCoeff());
}

TEST(Observe, PoissonCountsAreNonnegativeIntegers) {
  const Ensemble e = draw_ensemble(EnsembleFamily::complex_gaussian, 8, 200, 5);
  const RealVector y = observe(e, random_signal(8, 3.0, 6), NoiseModel::poisson(), 7).y;
  for (Index k = 0; k < y.size(); ++k) {
    EXPECT_GE(y(k), 0.0);
    EXPECT_EQ(y(k), std::floor(y(k)));
  }
}

TEST(Observe, PoissonMeanEqualsVariance) {
  const Ensemble e = draw_ensemble(EnsembleFamily::complex_gaussian, 4, 1, 8);
  for (double norm : {1.0, 8.0}) {
    // Rates on both sides of the inversion/rejection switch at 30.
    const Signal x = random_signal(4, norm, 9);
    const double rate = phaseless_apply(e, x)(0);
    const int draws = 10000;
    const Moments m = repeated_first_entry(e, x, NoiseModel::poisson(), draws, 0.0);
    EXPECT_LE(std::fabs(m.mean - rate), 3.0 * std::sqrt(rate / draws)) << "rate " << rate;
    EXPECT_NEAR(m.var, rate, 0.1 * rate) << "rate " << rate;
  }
}

TEST(Observe, ConditionalMeanZero) {
  const Ensemble e = draw_ensemble(EnsembleFamily::complex_gaussian, 4, 1, 10);
  const Signal x = random_signal(4, 2.0, 11);
  const double clean = phaseless_apply(e, x)(0);
  const int draws = 10000;
  for (const NoiseModel& model :
       {NoiseModel::poisson(), NoiseModel::student_t(4.0), NoiseModel::student_t(12.0), NoiseModel::gaussian(0.7)}) {
    const Moments m = repeated_first_entry(e, x, model, draws, clean);
    EXPECT_LE(std::fabs(m.mean), 4.0 * std::sqrt(m.var / draws)) << to_string(model.kind);
  }
}

TEST(Observe, StudentTVarianceMatchesLaw) {
  // Var T_nu = nu / (nu - 2).
  Rng rng(12);
  const int draws = 200000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double t = rng.student_t(8.0);
    sum += t;
    sq += t * t;
  }
  const double mean = sum / draws;
  EXPECT_NEAR(sq / draws - mean * mean, 8.0 / 6.0, 0.03);
}

TEST(Observe, RejectsDofAtOrBelowTwo) {
  const Ensemble e = draw_ensemble(EnsembleFamily::complex_gaussian, 4, 5, 1);
  EXPECT_THROW(observe(e, Signal::Ones(4), NoiseModel::student_t(2.0), 1), std::invalid_argument);
  EXPECT_THROW(observe(e, Signal::Ones(4), NoiseModel::student_t(1.5), 1), std::invalid_argument);
}

TEST(Observe, DeterministicForFixedSeed) {
  const Ensemble e = draw_ensemble(EnsembleFamily::complex_gaussian, 6, 40, 1);
  const Signal x = random_signal(6, 2.0, 2);
  for (const NoiseModel& model : {NoiseModel::poisson(), NoiseModel::student_t(4.0)}) {
    EXPECT_EQ(observe(e, x, model, 77).y, observe(e, x, model, 77).y);
    EXPECT_NE(observe(e, x, model, 77).y, observe(e, x, model, 78).y);
  }
}

TEST(Observe, BilinearRejectsPoisson) {
  const BilinearEnsemble b = draw_bilinear_ensemble(EnsembleFamily::complex_gaussian, 4, 6, 1);
  EXPECT_THROW(observe_bilinear(b, Signal::Ones(4), Signal::Ones(4), NoiseModel::poisson(), 1),
               std::invalid_argument);
}

TEST(MomentNorms, ZeroSignal) {
  const MomentNorms m = empirical_moment_norms(Signal::Zero(4), EnsembleFamily::complex_gaussian, 2000, 1);
  EXPECT_EQ(m.psi1, 0.0);
  EXPECT_EQ(m.l4, 0.0);
}

TEST(MomentNorms, RejectsTooFewSamples) {
  EXPECT_THROW(empirical_moment_norms(Signal::Ones(4), EnsembleFamily::complex_gaussian, 999, 1),
               std::invalid_argument);
}

TEST(MomentNorms, L4BoundAtUnitNorm) {
  const MomentNorms m = empirical_moment_norms(random_signal(8, 1.0, 2), EnsembleFamily::complex_gaussian, 100000, 3);
  EXPECT_LE(m.l4, 5.0 * std::max(1.0, 1.0));
  EXPECT_GT(m.l4, 0.0);
}

TEST(MomentNorms, L4LowEnergyBoundAndMonotone) {
  std::vector<double> l4;
  for (double norm : {0.01, 0.04, 0.16}) {
    const MomentNorms m =
        empirical_moment_norms(random_signal(8, norm, 4), EnsembleFamily::complex_gaussian, 100000, 5);
    EXPECT_LE(m.l4, 5.0 * std::sqrt(norm)) << "norm " << norm;
    l4.push_back(m.l4);
  }
  EXPECT_LT(l4[0], l4[1]);
  EXPECT_LT(l4[1], l4[2]);
}

TEST(MomentNorms, Psi1GrowsAtMostLinearly) {
  // psi1(x) / ||x|| must not grow by more than a factor 2 across the grid.
  const double norms[] = {0.5, 1.0, 2.0, 4.0};
  std::vector<double> per_unit;
  for (double norm : norms) {
    const MomentNorms m =
        empirical_moment_norms(random_signal(8, norm, 6), EnsembleFamily::complex_gaussian, 100000, 7);
    per_unit.push_back(m.psi1 / norm);
  }
  for (std::size_t i = 1; i < per_unit.size(); ++i) EXPECT_LE(per_unit[i], 2.0 * per_unit[0]);
}

}  // namespace
