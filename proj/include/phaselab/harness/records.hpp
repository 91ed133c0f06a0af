#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace phaselab::harness {

inline constexpr const char* kCsvHeader =
    "experiment_id,estimator,noise_kind,n,m,ratio,signal_scale,dof,trial_index,seed,metric_name,metric_value,"
    "iterations,runtime_ms";

/// One CSV row: one metric of one trial.
struct TrialRecord {
  std::string experiment_id;
  std::string estimator;
  std::string noise_kind;
  long long n = 0;
  long long m = 0;
  double ratio = 0.0;
  double signal_scale = 0.0;
  std::optional<double> dof;
  int trial_index = 0;
  std::uint64_t seed = 0;
  std::string metric_name;
  double metric_value = 0.0;  ///< NaN for a failed solve
  int iterations = 0;
  double runtime_ms = 0.0;

  friend bool operator==(const TrialRecord& a, const TrialRecord& b) {
    const auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return a.experiment_id == b.experiment_id && a.estimator == b.estimator && a.noise_kind == b.noise_kind &&
           a.n == b.n && a.m == b.m && a.ratio == b.ratio && a.signal_scale == b.signal_scale && a.dof == b.dof &&
           a.trial_index == b.trial_index && a.seed == b.seed && a.metric_name == b.metric_name &&
           same(a.metric_value, b.metric_value) && a.iterations == b.iterations && a.runtime_ms == b.runtime_ms;
  }
};

/// Cell and trial identity of a record, without the metric.
inline auto trial_key(const TrialRecord& r) { return std::make_tuple(r.ratio, r.signal_scale, r.dof, r.trial_index); }

/// Canonical order: (ratio, scale, dof, trial, metric name). A missing dof
/// sorts first.
inline void sort_records(std::vector<TrialRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
    return std::tie(a.ratio, a.signal_scale, a.dof, a.trial_index, a.metric_name) <
           std::tie(b.ratio, b.signal_scale, b.dof, b.trial_index, b.metric_name);
  });
}

namespace detail {

/// 17 significant digits; NaN is always the bare token "nan".
inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_csv_double(const std::string& s, int line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw std::runtime_error("csv line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

inline long long parse_csv_integer(const std::string& s, int line) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = std::string::npos;
  }
  if (used != s.size()) throw std::runtime_error("csv line " + std::to_string(line) + ": bad integer '" + s + "'");
  return v;
}

}  // namespace detail

inline std::string format_record(const TrialRecord& r) {
  using detail::csv_number;
  std::string out;
  out += r.experiment_id + ',' + r.estimator + ',' + r.noise_kind + ',';
  out += std::to_string(r.n) + ',' + std::to_string(r.m) + ',';
  out += csv_number(r.ratio) + ',' + csv_number(r.signal_scale) + ',';
  out += (r.dof ? csv_number(*r.dof) : std::string()) + ',';
  out += std::to_string(r.trial_index) + ',' + std::to_string(r.seed) + ',';
  out += r.metric_name + ',' + csv_number(r.metric_value) + ',';
  out += std::to_string(r.iterations) + ',' + csv_number(r.runtime_ms);
  return out;
}

inline std::string to_csv(const std::vector<TrialRecord>& records) {
  std::string out = std::string(kCsvHeader) + '\n';
  for (const TrialRecord& r : records) out += format_record(r) + '\n';
  return out;
}

inline std::vector<TrialRecord> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("csv: missing or unexpected header");
  std::vector<TrialRecord> records;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 14) throw std::runtime_error("csv line " + std::to_string(number) + ": expected 14 fields");
    TrialRecord r;
    r.experiment_id = f[0];
    r.estimator = f[1];
    r.noise_kind = f[2];
    r.n = detail::parse_csv_integer(f[3], number);
    r.m = detail::parse_csv_integer(f[4], number);
    r.ratio = detail::parse_csv_double(f[5], number);
    r.signal_scale = detail::parse_csv_double(f[6], number);
    if (!f[7].empty()) r.dof = detail::parse_csv_double(f[7], number);
    r.trial_index = static_cast<int>(detail::parse_csv_integer(f[8], number));
    std::size_t used = 0;
    r.seed = std::stoull(f[9], &used);
    if (used != f[9].size()) throw std::runtime_error("csv line " + std::to_string(number) + ": bad seed");
    r.metric_name = f[10];
    r.metric_value = detail::parse_csv_double(f[11], number);
    r.iterations = static_cast<int>(detail::parse_csv_integer(f[12], number));
    r.runtime_ms = detail::parse_csv_double(f[13], number);
    records.push_back(std::move(r));
  }
  return records;
}

inline void write_csv(const std::string& path, const std::vector<TrialRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_csv(records);
  if (!out) throw std::runtime_error("write failed for " + path);
}

inline std::vector<TrialRecord> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

}  // namespace phaselab::harness
