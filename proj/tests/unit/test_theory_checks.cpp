#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include <phaselab/theory_checks.hpp>

#include "../support.hpp"

namespace {

using namespace phaselab;
using phaselab::testing::random_complex;
using phaselab::testing::random_real;

Signal basis(Index n, Index j) {
  Signal e = Signal::Zero(n);
  e(j) = 1.0;
  return e;
}

TEST(NegativeEigs, ExactLiftHasNone) {
  const Signal x = random_complex(5, 1);
  const NegativeEigenCount c = check_negative_eigs(AdmissibleSample::cvx(HermitianMatrix::outer(x), x));
  EXPECT_EQ(c.count, 0);
  EXPECT_TRUE(c.holds);
}

TEST(NegativeEigs, ZeroMatrixHasOne) {
  const Signal x = random_complex(5, 2);
  const NegativeEigenCount c = check_negative_eigs(AdmissibleSample::cvx(HermitianMatrix::zero(5), x));
  EXPECT_EQ(c.count, 1);
  EXPECT_TRUE(c.holds);
}

TEST(NegativeEigs, RejectsNcvxSample) {
  const Signal x = random_complex(3, 3);
  EXPECT_THROW(check_negative_eigs(AdmissibleSample::ncvx(x, x)), std::invalid_argument);
}

TEST(NegativeEigs, CvxSampleRejectsIndefiniteZ) {
  EXPECT_THROW(AdmissibleSample::cvx(-1.0 * HermitianMatrix::identity(3), Signal::Zero(3)), std::invalid_argument);
}

TEST(NegativeEigs, HoldOnRandomCvxSamples) {
  Rng rng(4);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const Index n = 2 + i % 9;
    const HermitianMatrix z = project_psd(detail::gaussian_hermitian(n, rng));
    violations += check_negative_eigs(AdmissibleSample::cvx(z, detail::gaussian_vector(n, rng))).holds ? 0 : 1;
  }
  EXPECT_EQ(violations, 0);
}

TEST(LowRank, RankOneDifference) {
  const Signal z = random_complex(4, 5);
  const LowRankCheck c = check_lowrank_bounds(AdmissibleSample::ncvx(z, Signal::Zero(4)));
  EXPECT_NEAR(c.nuclear, c.frobenius, 1e-12 * c.frobenius);
  EXPECT_TRUE(c.holds);
}

TEST(LowRank, PlusMinusDiagonalAttainsSqrtTwo) {
  const LowRankCheck c = check_lowrank_bounds(AdmissibleSample::ncvx(basis(2, 0), basis(2, 1)));
  EXPECT_EQ(c.cell, AdmissibleCell::ncvx);
  EXPECT_NEAR(c.nuclear / c.frobenius, std::sqrt(2.0), 1e-15);
  EXPECT_TRUE(c.holds);
}

TEST(LowRank, PartitionSplit) {
  // Z = diag(1, 0), x = (0, a): M = diag(1, -a^2). cvx1 iff a^2 > 1/2.
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  const HermitianMatrix z(d);
  EXPECT_EQ(classify(AdmissibleSample::cvx(z, 0.8 * basis(2, 1))), AdmissibleCell::cvx1);
  EXPECT_EQ(classify(AdmissibleSample::cvx(z, 0.6 * basis(2, 1))), AdmissibleCell::cvx2);
  // Equality falls on the weak side.
  EXPECT_EQ(detail::cvx_cell((RealVector(2) << 1.0, -0.5).finished()), AdmissibleCell::cvx2);
}

TEST(LowRank, HoldOnRandomSamples) {
  Rng rng(6);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const Index n = 2 + i % 9;
    const Signal x = detail::gaussian_vector(n, rng);
    violations += check_lowrank_bounds(AdmissibleSample::ncvx(detail::gaussian_vector(n, rng), x)).holds ? 0 : 1;
    const HermitianMatrix z = project_psd(detail::gaussian_hermitian(n, rng));
    violations += check_lowrank_bounds(AdmissibleSample::cvx(z, x)).holds ? 0 : 1;
  }
  EXPECT_EQ(violations, 0);
}

TEST(Dis2, ExactLift) {
  const Signal x = random_complex(5, 7);
  const InequalityCheck c = check_dis2(HermitianMatrix::outer(x), x);
  EXPECT_NEAR(c.lhs, 0.0, 1e-7);
  EXPECT_TRUE(c.holds);
}

TEST(Slbc, UndersampledNullDirection) {
  RowMajorComplexMatrix row = RowMajorComplexMatrix::Zero(1, 3);
  row(0, 0) = 1.0;
  const Ensemble e = make_ensemble(row);
  EXPECT_NEAR(empirical_slbc(e, {HermitianMatrix::outer(basis(3, 1))}), 0.0, 1e-15);
}

TEST(Slbc, FloorAtTwentyTimesOversampling) {
  const Ensemble e = draw_ensemble(EnsembleFamily::complex_gaussian, 16, 320, 8);
  EXPECT_GE(empirical_slbc(e, 1000, 2, 9), 0.1);
}

TEST(Slbc, ProbesHaveUnitFrobeniusNorm) {
  for (int rank : {1, 2}) {
    for (const HermitianMatrix& p : random_slbc_probes(6, 100, rank, 10)) {
      EXPECT_NEAR(p.frobenius_norm(), 1.0, 1e-12);
    }
  }
  EXPECT_THROW(random_slbc_probes(6, 100, 3, 10), std::invalid_argument);
}

TEST(Slbc, NondecreasingInOversampling) {
  const Index n = 8;
  std::vector<double> medians;
  for (int r : {5, 10, 20}) {
    std::vector<double> values;
    for (std::uint64_t k = 0; k < 20; ++k) {
      const Ensemble e = draw_ensemble(EnsembleFamily::complex_gaussian, n, r * n, substream(11, 100 * r + k));
      values.push_back(empirical_slbc(e, 200, 2, substream(12, k)));
    }
    std::sort(values.begin(), values.end());
    medians.push_back(0.5 * (values[9] + values[10]));
  }
  EXPECT_LE(medians[0], medians[1] + 0.01);
  EXPECT_LE(medians[1], medians[2] + 0.01);
}

TEST(Cvx2Floor, StaysAboveOneOverThirtySix) {
  const Ensemble e = draw_ensemble(EnsembleFamily::complex_gaussian, 8, 160, 13);
  const Cvx2Floor f = empirical_cvx2_floor(e, 1000, 14);
  EXPECT_EQ(f.classified, 1000);
  EXPECT_GE(f.min_ratio, 1.0 / 36.0 - 0.01);
}

TEST(Nubc, NoiselessIsZero) {
  const Ensemble e = draw_ensemble(EnsembleFamily::complex_gaussian, 8, 80, 15);
  EXPECT_EQ(empirical_nubc_ratio(e, random_signal(8, 1.0, 16), NoiseModel::noiseless(), 10, 17), 0.0);
}

TEST(Nubc, StudentTUsesFiniteMomentNorm) {
  // E|T_nu|^q is finite only for q < nu; q = (2 + nu)/2 stays below nu.
  const double est = noise_norm_estimate(Signal::Ones(4), EnsembleFamily::complex_gaussian,
                                         NoiseModel::student_t(8.0), 18, 200000);
  // ||T_8||_{L_5}: E|T|^5 = 8^{5/2} Gamma(3) Gamma(3/2) / (Gamma(1/2) Gamma(4)).
  const double exact = std::pow(std::pow(8.0, 2.5) * 2.0 * std::tgamma(1.5) / (std::sqrt(M_PI) * 6.0), 0.2);
  EXPECT_NEAR(est, exact, 0.05 * exact);
}

TEST(Nubc, PoissonCeilingAndStability) {
  const Index n = 16;
  const Signal x = random_signal(n, 1.0, 19);
  std::vector<double> ratios;
  for (int r : {10, 20, 40}) {
    const Ensemble e = draw_ensemble(EnsembleFamily::complex_gaussian, n, r * n, substream(20, r));
    ratios.push_back(empirical_nubc_ratio(e, x, NoiseModel::poisson(), 50, substream(21, r)));
  }
  EXPECT_LE(ratios[1], 10.0);
  EXPECT_LE(*std::max_element(ratios.begin(), ratios.end()) / *std::min_element(ratios.begin(), ratios.end()), 2.0);
}

TEST(Packing, SeparationBandAtDimension200) {
  const HypothesisPack pack = pack_hypotheses(random_real(200, 22), 500, 23);
  EXPECT_EQ(pack.members.size(), 500U);
  EXPECT_GE(separation_report(pack).fraction, 0.99);
}

TEST(Packing, CountIsCappedExponential) {
  // exp(40 / 20) = 7.39.
  EXPECT_EQ(pack_hypotheses(random_real(40, 24), 500, 25).members.size(), 7U);
}

TEST(Packing, SingleMemberPack) {
  const HypothesisPack pack = pack_hypotheses(random_real(16, 26), 1, 27);
  EXPECT_EQ(pack.members.size(), 1U);
  EXPECT_EQ(separation_report(pack).pairs, 1U);
}

TEST(Packing, RejectsInvalidInput) {
  EXPECT_THROW(pack_hypotheses(random_real(7, 28), 10, 1), std::invalid_argument);
  EXPECT_THROW(pack_hypotheses(random_real(16, 28), 10001, 1), std::invalid_argument);
  EXPECT_THROW(pack_hypotheses(random_complex(16, 28), 10, 1), std::invalid_argument);
}

TEST(Packing, AffineRescaling) {
  const HypothesisPack pack = pack_hypotheses(random_real(50, 29), 100, 30);
  const HypothesisPack scaled = rescale(pack, 0.1);
  for (std::size_t i = 0; i < pack.members.size(); ++i) {
    for (std::size_t j = i + 1; j < pack.members.size(); ++j) {
      EXPECT_NEAR((scaled.members[i] - scaled.members[j]).norm(), 0.1 * (pack.members[i] - pack.members[j]).norm(),
                  1e-12);
    }
  }
  // Distances are reported in units of delta.
  EXPECT_NEAR(separation_report(scaled).fraction, separation_report(pack).fraction, 1e-12);
}

TEST(Kl, IdenticalHypotheses) {
  const Ensemble e = draw_ensemble(EnsembleFamily::complex_gaussian, 4, 20, 31);
  const Signal x = random_real(4, 32);
  for (const NoiseModel& model : {NoiseModel::poisson(), NoiseModel::gaussian(1.0)}) {
    const KlCheck c = kl_bounds(e, x, x, model);
    EXPECT_NEAR(c.exact, 0.0, 1e-12);
    EXPECT_NEAR(c.bound, 0.0, 1e-12);
    EXPECT_TRUE(c.holds);
  }
}

TEST(Kl, GaussianOneMeasurement) {
  RowMajorComplexMatrix row(1, 2);
  row << 1.0, 0.0;
  const Ensemble e = make_ensemble(row);
  const Signal x = (Signal(2) << 1.0, 0.0).finished();
  const Signal z = (Signal(2) << 1.1, 0.0).finished();
  const KlCheck c = kl_bounds(e, z, x, NoiseModel::gaussian(1.0));
  EXPECT_NEAR(c.exact, 0.21 * 0.21 / 2.0, 1e-12);
  // |<phi, z - x>|^2 (4 |<phi, x>|^2 + |<phi, z - x>|^2) / sigma^2 = 0.01 * 4.01.
  EXPECT_NEAR(c.bound, 0.0401, 1e-12);
  EXPECT_TRUE(c.holds);
}

TEST(Kl, PoissonClosedForm) {
  RowMajorComplexMatrix row(1, 1);
  row << 1.0;
  const Ensemble e = make_ensemble(row);
  const KlCheck c = kl_bounds(e, Signal::Constant(1, 2.0), Signal::Constant(1, 1.0), NoiseModel::poisson());
  // lambda0 = 1, lambda1 = 4: 1 - 4 + 4 log 4; bound 1 * (8 + 2).
  EXPECT_NEAR(c.exact, -3.0 + 4.0 * std::log(4.0), 1e-12);
  EXPECT_NEAR(c.bound, 10.0, 1e-12);
  EXPECT_TRUE(c.holds);
}

TEST(Kl, PoissonZeroRateIsInfinite) {
  RowMajorComplexMatrix row = RowMajorComplexMatrix::Zero(1, 2);
  row(0, 0) = 1.0;
  const Ensemble e = make_ensemble(row);
  const KlCheck c = kl_bounds(e, basis(2, 0), basis(2, 1), NoiseModel::poisson());
  EXPECT_TRUE(std::isinf(c.exact));
  EXPECT_TRUE(std::isinf(c.bound));
  EXPECT_TRUE(c.holds);
}

TEST(Kl, RejectsUnsupportedNoise) {
  const Ensemble e = draw_ensemble(EnsembleFamily::complex_gaussian, 2, 3, 33);
  EXPECT_THROW(kl_bounds(e, Signal::Ones(2), Signal::Ones(2), NoiseModel::gaussian(0.0)), std::invalid_argument);
  EXPECT_THROW(kl_bounds(e, Signal::Ones(2), Signal::Ones(2), NoiseModel::student_t(4.0)), std::invalid_argument);
}

}  // namespace
