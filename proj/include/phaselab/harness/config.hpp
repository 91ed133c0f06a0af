#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "../core_model.hpp"
#include "../cvx.hpp"
#include "../errors.hpp"
#include "../ncvx.hpp"
#include "../noise.hpp"

namespace phaselab::harness {

enum class Estimator { ncvx, cvx, sparse, blinddeconv };

inline std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::ncvx:
      return "ncvx";
    case Estimator::cvx:
      return "cvx";
    case Estimator::sparse:
      return "sparse";
    case Estimator::blinddeconv:
      return "blinddeconv";
  }
  return "unknown";
}

inline Estimator parse_estimator(std::string_view s) {
  if (s == "ncvx") return Estimator::ncvx;
  if (s == "cvx") return Estimator::cvx;
  if (s == "sparse") return Estimator::sparse;
  if (s == "blinddeconv") return Estimator::blinddeconv;
  throw std::invalid_argument("unknown estimator: " + std::string(s));
}

/// One experiment. Solver settings that do not apply to the estimator are
/// carried but ignored.
struct ExperimentConfig {
  std::string experiment_id;
  Estimator estimator = Estimator::ncvx;
  EnsembleFamily family = EnsembleFamily::complex_gaussian;
  NoiseKind noise = NoiseKind::noiseless;
  std::vector<double> dofs;  ///< Student-t degrees of freedom, one sweep axis
  double noise_scale = 1.0;
  double sigma = 0.0;
  Index n = 0;
  std::vector<double> ratios;
  std::vector<double> signal_scales{1.0};
  int trials = 50;
  std::uint64_t master_seed = 0;
  /// Shared solver settings live here: max_iters, step rule and step size
  /// also drive the lifted solvers.
  WfConfig wf;
  int power_iters = 20;
  std::optional<double> tol;  ///< overrides the estimator's default tolerance
  std::optional<Index> sparsity;
  Index rank = 1;
  std::string output_path;

  double tolerance() const {
    if (tol) return *tol;
    return estimator == Estimator::ncvx || estimator == Estimator::sparse ? WfConfig{}.tol : PsdSolveConfig{}.tol;
  }

  /// The noise model of one sweep cell.
  NoiseModel noise_model(std::optional<double> dof) const {
    switch (noise) {
      case NoiseKind::noiseless:
        return NoiseModel::noiseless();
      case NoiseKind::poisson:
        return NoiseModel::poisson();
      case NoiseKind::student_t:
        return NoiseModel::student_t(dof.value_or(0.0), noise_scale);
      case NoiseKind::gaussian:
        return NoiseModel::gaussian(sigma);
    }
    return NoiseModel::noiseless();
  }

  /// Student-t sweeps iterate over dofs; other noise kinds have one empty cell.
  std::vector<std::optional<double>> dof_axis() const {
    if (noise != NoiseKind::student_t) return {std::nullopt};
    return {dofs.begin(), dofs.end()};
  }

  WfConfig wf_config() const {
    WfConfig c = wf;
    c.tol = tolerance();
    if (estimator == Estimator::sparse) c.sparsity = sparsity;
    return c;
  }

  PsdSolveConfig psd_config() const {
    PsdSolveConfig c;
    c.max_iters = wf.max_iters;
    c.tol = tolerance();
    c.step = wf.step == StepKind::fixed ? PsdStepKind::fixed : PsdStepKind::lipschitz_estimate;
    c.fixed_step = wf.fixed_step;
    c.power_iters = power_iters;
    return c;
  }

  NuclearBallConfig nuclear_config(double radius) const {
    NuclearBallConfig c;
    c.radius = radius;
    c.max_iters = wf.max_iters;
    c.tol = tolerance();
    c.power_iters = power_iters;
    return c;
  }

  std::string output_file() const { return output_path.empty() ? experiment_id + ".csv" : output_path; }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

struct RawValue {
  std::string text;
  int line = 0;
};

class Reader {
 public:
  explicit Reader(std::map<std::string, RawValue> values) : values_(std::move(values)) {}

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const RawValue& raw(const std::string& key) const { return values_.at(key); }

  std::string string(const std::string& key) const {
    std::string s = raw(key).text;
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    if (s.empty() || s.front() == '[') fail(key, "expected a string");
    return s;
  }

  double number(const std::string& key) const { return parse_number(key, raw(key).text); }

  long long integer(const std::string& key) const { return parse_integer(key, raw(key).text); }

  std::vector<double> list(const std::string& key) const {
    const std::string& s = raw(key).text;
    if (s.size() < 2 || s.front() != '[' || s.back() != ']') fail(key, "expected a list like [1, 2, 3]");
    std::vector<double> out;
    const std::string body = trim(std::string_view(s).substr(1, s.size() - 2));
    if (body.empty()) return out;
    std::stringstream items(body);
    std::string item;
    while (std::getline(items, item, ',')) out.push_back(parse_number(key, trim(item)));
    return out;
  }

  template <class Parse>
  auto enumerated(const std::string& key, Parse parse) const {
    try {
      return parse(string(key));
    } catch (const std::invalid_argument& e) {
      fail(key, e.what());
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    throw ParseError(key, has(key) ? raw(key).line : 0, message);
  }

 private:
  double parse_number(const std::string& key, const std::string& text) const {
    const char* begin = text.data();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (text.empty() || end != begin + text.size() || !std::isfinite(v)) fail(key, "expected a number, got '" + text + "'");
    return v;
  }

  long long parse_integer(const std::string& key, const std::string& text) const {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
      fail(key, "expected an integer, got '" + text + "'");
    }
    return v;
  }

  std::map<std::string, RawValue> values_;
};

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "experiment_id", "estimator",  "family",      "noise",         "dofs",       "noise_scale",
      "sigma",         "n",          "ratios",      "signal_scales", "trials",     "master_seed",
      "max_iters",     "tol",        "step",        "step_size",     "ramp_time",  "ramp_cap",
      "init",          "truncation_alpha", "prior_low", "prior_high", "restarts",  "power_iters",
      "sparsity",      "rank",       "output_path"};
  return keys;
}

inline bool valid_identifier(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

}  // namespace detail

/// Parses `key = value` lines; `#` starts a comment, lists are `[a, b, c]`.
/// Unknown, duplicate, missing or mistyped keys raise ParseError.
inline ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, detail::RawValue> values;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string content = detail::trim(std::string_view(line).substr(0, line.find('#')));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ParseError("", number, "expected 'key = value'");
    const std::string key = detail::trim(std::string_view(content).substr(0, eq));
    const std::string value = detail::trim(std::string_view(content).substr(eq + 1));
    if (!detail::known_keys().count(key)) throw ParseError(key, number, "unknown key");
    if (values.count(key)) throw ParseError(key, number, "duplicate key");
    if (value.empty()) throw ParseError(key, number, "missing value");
    values[key] = {value, number};
  }

  const detail::Reader r(std::move(values));
  for (const char* key : {"experiment_id", "estimator", "n", "ratios"}) {
    if (!r.has(key)) throw ParseError(key, 0, "missing required key");
  }

  ExperimentConfig c;
  c.experiment_id = r.string("experiment_id");
  if (!detail::valid_identifier(c.experiment_id)) r.fail("experiment_id", "use letters, digits, '_', '-' or '.'");
  c.estimator = r.enumerated("estimator", parse_estimator);
  if (r.has("family")) c.family = r.enumerated("family", parse_family);
  if (r.has("noise")) c.noise = r.enumerated("noise", parse_noise_kind);
  if (r.has("dofs")) c.dofs = r.list("dofs");
  if (r.has("noise_scale")) c.noise_scale = r.number("noise_scale");
  if (r.has("sigma")) c.sigma = r.number("sigma");
  c.n = static_cast<Index>(r.integer("n"));
  c.ratios = r.list("ratios");
  if (r.has("signal_scales")) c.signal_scales = r.list("signal_scales");
  if (r.has("trials")) c.trials = static_cast<int>(r.integer("trials"));
  if (r.has("master_seed")) {
    const long long seed = r.integer("master_seed");
    if (seed < 0) r.fail("master_seed", "must be >= 0");
    c.master_seed = static_cast<std::uint64_t>(seed);
  }
  if (r.has("max_iters")) c.wf.max_iters = static_cast<int>(r.integer("max_iters"));
  if (r.has("tol")) c.tol = r.number("tol");
  if (r.has("step")) c.wf.step = r.enumerated("step", parse_step_kind);
  if (r.has("step_size")) c.wf.fixed_step = r.number("step_size");
  if (r.has("ramp_time")) c.wf.ramp_time = r.number("ramp_time");
  if (r.has("ramp_cap")) c.wf.ramp_cap = r.number("ramp_cap");
  if (r.has("init")) c.wf.init = r.enumerated("init", parse_init_kind);
  if (r.has("truncation_alpha")) c.wf.truncation_alpha = r.number("truncation_alpha");
  if (r.has("prior_low")) c.wf.prior_low = r.number("prior_low");
  if (r.has("prior_high")) c.wf.prior_high = r.number("prior_high");
  if (r.has("restarts")) c.wf.restarts = static_cast<int>(r.integer("restarts"));
  if (r.has("power_iters")) c.power_iters = static_cast<int>(r.integer("power_iters"));
  if (r.has("sparsity")) c.sparsity = static_cast<Index>(r.integer("sparsity"));
  if (r.has("rank")) c.rank = static_cast<Index>(r.integer("rank"));
  if (r.has("output_path")) c.output_path = r.string("output_path");

  // Semantic checks, reported against the offending key.
  if (c.n < 1) r.fail("n", "must be >= 1");
  if (c.ratios.empty()) r.fail("ratios", "must be nonempty");
  for (double ratio : c.ratios) {
    if (!(ratio > 0.0) || std::llround(ratio * static_cast<double>(c.n)) < 1) r.fail("ratios", "every ratio must give m >= 1");
  }
  if (c.signal_scales.empty()) r.fail("signal_scales", "must be nonempty");
  for (double s : c.signal_scales) {
    if (!(s > 0.0)) r.fail("signal_scales", "every scale must be > 0");
  }
  if (c.trials < 1) r.fail("trials", "must be >= 1");
  if (c.noise == NoiseKind::student_t) {
    if (c.dofs.empty()) r.fail(r.has("dofs") ? "dofs" : "noise", "student_t noise needs a nonempty dofs list");
    for (double dof : c.dofs) {
      if (!(dof > 2.0)) r.fail("dofs", "every dof must be > 2");
    }
    if (!(c.noise_scale >= 0.0)) r.fail("noise_scale", "must be >= 0");
  } else if (r.has("dofs")) {
    r.fail("dofs", "only valid with student_t noise");
  }
  if (c.noise == NoiseKind::gaussian && !(c.sigma >= 0.0)) r.fail("sigma", "must be >= 0");
  if (c.estimator == Estimator::blinddeconv && c.noise == NoiseKind::poisson) {
    r.fail("noise", "poisson noise is not defined for bilinear measurements");
  }
  if (c.estimator == Estimator::sparse) {
    if (!c.sparsity) throw ParseError("sparsity", 0, "sparse estimator needs a sparsity level");
    if (*c.sparsity < 1 || *c.sparsity > c.n) r.fail("sparsity", "must lie in [1, n]");
  } else if (c.sparsity) {
    r.fail("sparsity", "only valid for the sparse estimator");
  }
  if (c.rank < 1 || c.rank > c.n) r.fail("rank", "must lie in [1, n]");
  if (c.rank != 1 && c.estimator != Estimator::cvx) r.fail("rank", "only the cvx estimator supports rank > 1");
  if (c.wf.init == InitKind::prior_scaled && c.estimator == Estimator::sparse) {
    r.fail("init", "prior_scaled is not supported for the sparse estimator");
  }
  const auto require = [&](bool ok, const char* key, const char* message) {
    if (!ok) r.fail(key, message);
  };
  require(c.wf.max_iters >= 1, "max_iters", "must be >= 1");
  require(!c.tol || *c.tol > 0.0, "tol", "must be > 0");
  require(c.wf.fixed_step > 0.0 || c.wf.step != StepKind::fixed, "step_size", "fixed step needs step_size > 0");
  require(c.wf.ramp_time > 0.0, "ramp_time", "must be > 0");
  require(c.wf.ramp_cap > 0.0, "ramp_cap", "must be > 0");
  require(c.wf.truncation_alpha > 0.0, "truncation_alpha", "must be > 0");
  require(c.wf.prior_low > 0.0, "prior_low", "must be > 0");
  require(c.wf.prior_low <= c.wf.prior_high, "prior_high", "must be >= prior_low");
  require(c.wf.restarts >= 1, "restarts", "must be >= 1");
  require(c.power_iters >= 1, "power_iters", "must be >= 1");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("", 0, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

/// Canonical text form: every key in a fixed order with defaults filled in;
/// optional keys appear only when set. parse_config(serialize(c)) == c.
inline std::string serialize(const ExperimentConfig& c) {
  using detail::format_number;
  const auto list = [](const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_number(v[i]);
    return out + "]";
  };
  std::ostringstream out;
  out << "experiment_id = " << c.experiment_id << '\n';
  out << "estimator = " << to_string(c.estimator) << '\n';
  out << "family = " << to_string(c.family) << '\n';
  out << "noise = " << to_string(c.noise) << '\n';
  if (c.noise == NoiseKind::student_t) out << "dofs = " << list(c.dofs) << '\n';
  out << "noise_scale = " << format_number(c.noise_scale) << '\n';
  out << "sigma = " << format_number(c.sigma) << '\n';
  out << "n = " << c.n << '\n';
  out << "ratios = " << list(c.ratios) << '\n';
  out << "signal_scales = " << list(c.signal_scales) << '\n';
  out << "trials = " << c.trials << '\n';
  out << "master_seed = " << c.master_seed << '\n';
  out << "max_iters = " << c.wf.max_iters << '\n';
  if (c.tol) out << "tol = " << format_number(*c.tol) << '\n';
  out << "step = " << to_string(c.wf.step) << '\n';
  out << "step_size = " << format_number(c.wf.fixed_step) << '\n';
  out << "ramp_time = " << format_number(c.wf.ramp_time) << '\n';
  out << "ramp_cap = " << format_number(c.wf.ramp_cap) << '\n';
  out << "init = " << to_string(c.wf.init) << '\n';
  out << "truncation_alpha = " << format_number(c.wf.truncation_alpha) << '\n';
  out << "prior_low = " << format_number(c.wf.prior_low) << '\n';
  out << "prior_high = " << format_number(c.wf.prior_high) << '\n';
  out << "restarts = " << c.wf.restarts << '\n';
  out << "power_iters = " << c.power_iters << '\n';
  if (c.sparsity) out << "sparsity = " << *c.sparsity << '\n';
  out << "rank = " << c.rank << '\n';
  if (!c.output_path.empty()) out << "output_path = " << c.output_path << '\n';
  return out.str();
}

}  // namespace phaselab::harness
