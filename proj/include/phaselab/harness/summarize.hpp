#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "records.hpp"
#include "sweep.hpp"

namespace phaselab::harness {

struct CellKey {
  double ratio = 0.0;
  double signal_scale = 0.0;
  std::optional<double> dof;
  std::string metric;

  friend bool operator<(const CellKey& a, const CellKey& b) {
    return std::tie(a.ratio, a.signal_scale, a.dof, a.metric) < std::tie(b.ratio, b.signal_scale, b.dof, b.metric);
  }
};

struct CellSummary {
  CellKey key;
  double mean = 0.0;  ///< over every finite value
  double std = 0.0;   ///< sample standard deviation, 0 for a single value
  int count = 0;
  int excluded = 0;   ///< NaN rows left out
  /// Mean and count without rows that hit the iteration cap; equal to the
  /// inclusive figures when no cap is given.
  double mean_converged = 0.0;
  int count_converged = 0;
};

/// Per-(ratio, scale, dof, metric) aggregates in canonical order. Failure
/// marker rows are not aggregated; their trials show up as `excluded`.
inline std::vector<CellSummary> summarize(const std::vector<TrialRecord>& records,
                                          std::optional<int> iteration_cap = std::nullopt) {
  struct Accumulator {
    std::vector<double> all;
    std::vector<double> converged;
    int excluded = 0;
  };
  std::map<CellKey, Accumulator> cells;
  for (const TrialRecord& r : records) {
    if (r.metric_name == kFailureMetric) continue;
    Accumulator& acc = cells[{r.ratio, r.signal_scale, r.dof, r.metric_name}];
    if (!std::isfinite(r.metric_value)) {
      ++acc.excluded;
      continue;
    }
    acc.all.push_back(r.metric_value);
    if (!iteration_cap || r.iterations < *iteration_cap) acc.converged.push_back(r.metric_value);
  }

  const auto mean_of = [](const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
  };
  std::vector<CellSummary> out;
  for (const auto& [key, acc] : cells) {
    CellSummary s;
    s.key = key;
    s.count = static_cast<int>(acc.all.size());
    s.excluded = acc.excluded;
    s.mean = mean_of(acc.all);
    if (s.count > 1) {
      double ss = 0.0;
      for (double x : acc.all) ss += (x - s.mean) * (x - s.mean);
      s.std = std::sqrt(ss / static_cast<double>(s.count - 1));
    }
    s.count_converged = static_cast<int>(acc.converged.size());
    s.mean_converged = mean_of(acc.converged);
    out.push_back(s);
  }
  return out;
}

/// Aligned text table of summarize() output.
inline std::string format_report(const std::vector<CellSummary>& cells) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%10s %12s %8s %-13s %14s %14s %6s %8s %14s %6s\n", "ratio", "scale", "dof",
                "metric", "mean", "std", "count", "excluded", "mean_conv", "n_conv");
  out += line;
  for (const CellSummary& c : cells) {
    const std::string dof = c.key.dof ? detail::csv_number(*c.key.dof) : "-";
    std::snprintf(line, sizeof line, "%10.6g %12.6g %8s %-13s %14.6e %14.6e %6d %8d %14.6e %6d\n", c.key.ratio,
                  c.key.signal_scale, dof.c_str(), c.key.metric.c_str(), c.mean, c.std, c.count, c.excluded,
                  c.mean_converged, c.count_converged);
    out += line;
  }
  return out;
}

}  // namespace phaselab::harness
