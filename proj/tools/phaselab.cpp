// phaselab: run experiment sweeps, property suites and CSV reports.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <phaselab/phaselab.hpp>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitProperty = 3;
constexpr int kExitHardFailure = 4;
constexpr double kMaxFailureRate = 0.2;

int run_command(const std::string& config_path, int jobs, bool resume, bool timing, const std::string& out_dir) {
  using namespace phaselab::harness;
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const phaselab::ParseError& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return kExitConfig;
  }

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path csv = std::filesystem::path(out_dir) / cfg.output_file();
  SweepOptions options;
  options.jobs = jobs;
  options.record_timing = timing;
  if (resume && std::filesystem::exists(csv)) {
    try {
      options.existing = read_csv(csv.string());
    } catch (const std::exception& e) {
      std::cerr << csv.string() << ": cannot resume: " << e.what() << '\n';
      return kExitConfig;
    }
  }

  SweepResult result;
  try {
    result = run_sweep(cfg, options);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid experiment: " << e.what() << '\n';
    return kExitConfig;
  }
  write_csv(csv.string(), result.records);
  std::cout << cfg.experiment_id << ": " << result.trials_run << " trials run, " << result.trials_reused
            << " reused, " << result.failures << " failed; wrote " << result.records.size() << " rows to "
            << csv.string() << '\n';
  if (result.failure_rate() > kMaxFailureRate) {
    std::cerr << "solver failure rate " << result.failure_rate() << " exceeds " << kMaxFailureRate << '\n';
    return kExitHardFailure;
  }
  return 0;
}

int check_command(const std::string& suite, std::uint64_t seed) {
  using namespace phaselab::suites;
  const std::vector<std::string> names = suite == "all" ? suite_names() : std::vector<std::string>{suite};
  bool passed = true;
  for (const std::string& name : names) {
    const SuiteReport report = run_suite(name, seed);
    std::cout << format_suite(report);
    passed = passed && report.passed();
  }
  std::cout << (passed ? "all checks passed" : "property failure") << '\n';
  return passed ? 0 : kExitProperty;
}

int report_command(const std::string& csv, std::optional<int> iteration_cap) {
  using namespace phaselab::harness;
  std::vector<TrialRecord> records;
  try {
    records = read_csv(csv);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  }
  std::cout << format_report(summarize(records, iteration_cap));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase retrieval estimators under Poisson and heavy-tailed noise"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a configured sweep and write its CSV");
  std::string config_path;
  std::string out_dir;
  int jobs = 1;
  bool resume = false;
  bool timing = false;
  run->add_option("--config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--resume", resume, "Keep completed trials from an existing CSV");
  run->add_flag("--timing", timing, "Record wall-clock runtime_ms (output is then not byte-reproducible)");

  auto* check = app.add_subcommand("check", "Run a property suite");
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<std::string> suites = phaselab::suites::suite_names();
  suites.push_back("all");
  check->add_option("--suite", suite, "Suite name")->required()->check(CLI::IsMember(suites));
  check->add_option("--seed", seed, "Master seed");

  auto* report = app.add_subcommand("report", "Summarize a sweep CSV");
  std::string csv;
  std::optional<int> iteration_cap;
  report->add_option("--csv", csv, "Sweep CSV")->required()->check(CLI::ExistingFile);
  report->add_option("--iteration-cap", iteration_cap, "Also report means without runs that hit this cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*run) return run_command(config_path, jobs, resume, timing, out_dir);
  if (*check) return check_command(suite, seed);
  return report_command(csv, iteration_cap);
}
