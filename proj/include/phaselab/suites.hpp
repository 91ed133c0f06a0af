#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "core_model.hpp"
#include "cvx.hpp"
#include "metrics.hpp"
#include "noise.hpp"
#include "theory_checks.hpp"

namespace phaselab::suites {

/// One line of a property table: `value relation threshold`.
struct CheckRow {
  std::string name;
  double value = 0.0;
  std::string relation;
  double threshold = 0.0;
  bool passed = false;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckRow> rows;

  bool passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.passed; });
  }
};

inline CheckRow at_most(std::string name, double value, double threshold) {
  return {std::move(name), value, "<=", threshold, value <= threshold};
}

inline CheckRow at_least(std::string name, double value, double threshold) {
  return {std::move(name), value, ">=", threshold, value >= threshold};
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"propositions", "slbc", "nubc", "packing", "kl"};
  return names;
}

namespace detail {

using phaselab::detail::gaussian_hermitian;
using phaselab::detail::gaussian_vector;

inline SuiteReport propositions(std::uint64_t seed) {
  SuiteReport report{"propositions", {}};
  constexpr int kSamples = 1000;
  const Index dims[] = {2, 8, 32};

  {
    Rng rng(substream(seed, 1));
    int violations = 0;
    for (int i = 0; i < kSamples; ++i) {
      const Index n = dims[i % 3];
      const Signal x = gaussian_vector(n, rng);
      // Alternate far pairs with near pairs, where the bound is tighter.
      const Signal z = i % 2 == 0 ? gaussian_vector(n, rng) : Signal(x + 0.05 * gaussian_vector(n, rng));
      violations += check_dis1(z, x).holds ? 0 : 1;
    }
    report.rows.push_back(at_most("dis1 violations (1000 pairs)", violations, 0));
  }
  {
    Rng rng(substream(seed, 2));
    int violations = 0;
    for (int i = 0; i < kSamples; ++i) {
      const Index n = dims[i % 3];
      const Signal x = gaussian_vector(n, rng);
      const HermitianMatrix h = gaussian_hermitian(n, rng);
      // PSD projection is non-expansive and xx* is PSD, so eta <= t < 0.1.
      const double t = rng.uniform(0.0, 0.1);
      const HermitianMatrix z =
          project_psd(HermitianMatrix::outer(x) + h * (t * x.squaredNorm() / h.frobenius_norm()));
      violations += check_dis2(z, x).holds ? 0 : 1;
    }
    report.rows.push_back(at_most("dis2 violations (1000 perturbations)", violations, 0));
  }

  Rng rng(substream(seed, 3));
  int negative_violations = 0;
  int cvx1_violations = 0;
  int cvx1_count = 0;
  int cells_assigned = 0;
  for (int i = 0; i < kSamples; ++i) {
    const Index n = dims[i % 3];
    const HermitianMatrix z = project_psd(gaussian_hermitian(n, rng));
    const double scale = rng.uniform(0.0, 3.0) * std::sqrt(std::max(z.trace(), 1e-12) / static_cast<double>(n));
    const AdmissibleSample sample = AdmissibleSample::cvx(z, gaussian_vector(n, rng) * scale);
    negative_violations += check_negative_eigs(sample).holds ? 0 : 1;
    const LowRankCheck bound = check_lowrank_bounds(sample);
    cells_assigned += (bound.cell == AdmissibleCell::cvx1 || bound.cell == AdmissibleCell::cvx2) ? 1 : 0;
    if (bound.cell == AdmissibleCell::cvx1) {
      ++cvx1_count;
      cvx1_violations += bound.holds ? 0 : 1;
    }
  }
  int ncvx_violations = 0;
  for (int i = 0; i < kSamples; ++i) {
    const Index n = dims[i % 3];
    const AdmissibleSample sample = AdmissibleSample::ncvx(gaussian_vector(n, rng), gaussian_vector(n, rng));
    ncvx_violations += check_lowrank_bounds(sample).holds ? 0 : 1;
  }
  report.rows.push_back(at_most("one negative eigenvalue violations (1000 cvx)", negative_violations, 0));
  report.rows.push_back(at_most("low-rank ncvx bound violations (1000)", ncvx_violations, 0));
  report.rows.push_back(at_most("low-rank cvx1 bound violations", cvx1_violations, 0));
  report.rows.push_back(at_least("cvx1 samples drawn", cvx1_count, 1));
  report.rows.push_back(at_least("cvx samples in exactly one cell", cells_assigned, kSamples));
  return report;
}

inline SuiteReport slbc(std::uint64_t seed) {
  SuiteReport report{"slbc", {}};
  const Index n = 16;
  const Ensemble e = draw_ensemble(EnsembleFamily::complex_gaussian, n, 20 * n, substream(seed, 1));
  report.rows.push_back(at_least("slbc alpha_hat (n=16, m=20n, 1000 rank-2 probes)",
                                 empirical_slbc(e, 1000, 2, substream(seed, 2)), 0.1));
  const Cvx2Floor floor = empirical_cvx2_floor(e, 1000, substream(seed, 3));
  report.rows.push_back(at_least("cvx2 probes classified", floor.classified, 1000));
  report.rows.push_back(at_least("cvx2 nuclear floor (m=20n)", floor.min_ratio, 1.0 / 36.0 - 0.01));
  return report;
}

inline SuiteReport nubc(std::uint64_t seed) {
  SuiteReport report{"nubc", {}};
  const Index n = 16;
  const Signal x = random_signal(n, 1.0, substream(seed, 1));
  std::vector<double> ratios;
  for (int r : {10, 20, 40}) {
    const Ensemble e = draw_ensemble(EnsembleFamily::complex_gaussian, n, r * n, substream(seed, 10 + r));
    ratios.push_back(empirical_nubc_ratio(e, x, NoiseModel::poisson(), 50, substream(seed, 100 + r)));
  }
  report.rows.push_back(at_most("nubc ratio (poisson, n=16, m=20n, 50 trials)", ratios[1], 10.0));
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  report.rows.push_back(at_most("nubc max/min across m/n in {10, 20, 40}", *hi / *lo, 2.0));
  return report;
}

inline SuiteReport packing(std::uint64_t seed) {
  SuiteReport report{"packing", {}};
  const Index n = 200;
  Rng rng(substream(seed, 1));
  Signal x(n);
  for (Index j = 0; j < n; ++j) x(j) = rng.normal();
  const HypothesisPack pack = pack_hypotheses(x, 500, substream(seed, 2));
  const PackingReport sep = separation_report(pack);
  report.rows.push_back(at_least("pack members (n=200, cap 500)", static_cast<double>(pack.members.size()), 500));
  report.rows.push_back(at_least("fraction of pairs in separation band", sep.fraction, 0.99));

  const HypothesisPack scaled = rescale(pack, 0.1);
  double worst = 0.0;
  for (std::size_t i = 0; i < pack.members.size(); ++i) {
    worst = std::max(worst, std::fabs((scaled.members[i] - x).norm() - 0.1 * (pack.members[i] - x).norm()));
    for (std::size_t j = i + 1; j < pack.members.size(); ++j) {
      const double d = (pack.members[i] - pack.members[j]).norm();
      const double ds = (scaled.members[i] - scaled.members[j]).norm();
      worst = std::max(worst, std::fabs(ds - 0.1 * d));
    }
  }
  report.rows.push_back(at_most("rescale(0.1) max distance deviation", worst, 1e-12));
  return report;
}

inline SuiteReport kl(std::uint64_t seed) {
  SuiteReport report{"kl", {}};
  {
    RowMajorComplexMatrix row(1, 2);
    row << 1.0, 0.0;
    const Ensemble e = make_ensemble(row);
    const Signal x = (Signal(2) << 1.0, 0.0).finished();
    const Signal z = (Signal(2) << 1.1, 0.0).finished();
    const KlCheck c = kl_bounds(e, z, x, NoiseModel::gaussian(1.0));
    report.rows.push_back({"gaussian one-measurement exact - bound", c.exact - c.bound, "<=", 0.0, c.holds});
  }
  Rng rng(substream(seed, 1));
  const Index n = 8;
  const Index m = 50;
  int poisson_violations = 0;
  int gaussian_violations = 0;
  for (int i = 0; i < 100; ++i) {
    // Real Gaussian design and real, near-colinear pairs.
    RowMajorComplexMatrix rows(m, n);
    for (Index k = 0; k < m; ++k) {
      for (Index j = 0; j < n; ++j) rows(k, j) = rng.normal();
    }
    const Ensemble e = make_ensemble(std::move(rows));
    Signal x(n);
    Signal noise(n);
    for (Index j = 0; j < n; ++j) x(j) = rng.normal();
    for (Index j = 0; j < n; ++j) noise(j) = rng.normal();
    const Signal z = rng.uniform(0.8, 1.2) * x + rng.uniform(0.0, 0.2) * (x.norm() / std::sqrt(n)) * noise;
    poisson_violations += kl_bounds(e, z, x, NoiseModel::poisson()).holds ? 0 : 1;
    gaussian_violations += kl_bounds(e, z, x, NoiseModel::gaussian(rng.uniform(0.5, 2.0))).holds ? 0 : 1;
  }
  report.rows.push_back(at_most("poisson KL bound violations (100 cases)", poisson_violations, 0));
  report.rows.push_back(at_most("gaussian KL bound violations (100 cases)", gaussian_violations, 0));
  return report;
}

}  // namespace detail

inline SuiteReport run_suite(std::string_view name, std::uint64_t seed) {
  if (name == "propositions") return detail::propositions(seed);
  if (name == "slbc") return detail::slbc(seed);
  if (name == "nubc") return detail::nubc(seed);
  if (name == "packing") return detail::packing(seed);
  if (name == "kl") return detail::kl(seed);
  throw std::invalid_argument("unknown suite: " + std::string(name));
}

inline std::string format_suite(const SuiteReport& report) {
  std::string out;
  char line[256];
  for (const CheckRow& r : report.rows) {
    std::snprintf(line, sizeof line, "%-13s %-52s %14.6g %2s %-12.6g %s\n", report.suite.c_str(), r.name.c_str(),
                  r.value, r.relation.c_str(), r.threshold, r.passed ? "PASS" : "FAIL");
    out += line;
  }
  return out;
}

}  // namespace phaselab::suites
