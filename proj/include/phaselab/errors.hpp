#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace phaselab {

/// An iterative routine failed to converge or diverged.
class NumericFailure : public std::runtime_error {
 public:
  NumericFailure(const std::string& what, int iterations, std::vector<double> objective_history = {})
      : std::runtime_error(what), iterations_(iterations), history_(std::move(objective_history)) {}

  int iterations() const noexcept { return iterations_; }
  const std::vector<double>& objective_history() const noexcept { return history_; }

 private:
  int iterations_;
  std::vector<double> history_;
};

/// Malformed experiment configuration. Carries the offending key and line
/// (line 0 when the problem is not tied to one line, e.g. a missing key).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& key, int line, const std::string& message)
      : std::runtime_error(format(key, line, message)), key_(key), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& key, int line, const std::string& message) {
    std::string out = "config error";
    if (line > 0) out += " at line " + std::to_string(line);
    if (!key.empty()) out += " (key '" + key + "')";
    return out + ": " + message;
  }

  std::string key_;
  int line_;
};

}  // namespace phaselab
