#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "acomid/data_io.hpp"
#include "acomid/ps_sim.hpp"

namespace acomid {

enum class RunMode { simulated, threaded };

/// Everything a single experiment run needs.
struct ExperimentSpec {
  SimConfig sim;
  std::optional<std::filesystem::path> data_path;
  std::optional<SyntheticProfile> synthetic;
  std::optional<std::size_t> dim_override;
  std::optional<std::filesystem::path> out;
  RunMode mode = RunMode::simulated;
  bool regret = false;  // compute regret against w* (dim <= 64)
  std::filesystem::path cache_dir = ".acomid-cache";
  bool wall_clock = false;
  std::optional<std::filesystem::path> trace_out;

  void validate() const;
  /// Identifies the data source; two specs are comparable iff these match.
  std::string data_key() const;
};

Dataset load_dataset(const ExperimentSpec& spec);

/// Runs the spec on already-loaded data.
RunResult run_experiment(const ExperimentSpec& spec, const Dataset& data);

inline constexpr const char* kCsvHeader =
    "step,epoch,logloss_sum,logloss_mean,regret,tx_values,wall_ms";

void write_csv(std::ostream& out, const std::vector<RunRecord>& records, std::size_t n_samples);

struct CompareReport {
  struct Row {
    std::uint64_t step;
    double logloss_a;
    double logloss_b;
  };
  std::vector<Row> rows;
  double final_linf = 0.0;
  std::uint64_t tx_a = 0;
  std::uint64_t tx_b = 0;
};

/// Runs both specs on the same data. Throws if their data sources or seeds differ.
CompareReport compare_runs(const ExperimentSpec& a, const ExperimentSpec& b);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  double ftrl_perturbation = 0.0;  // injected into the FTRL accumulator when nonzero
  std::uint64_t seed = 7;
};

std::vector<CheckResult> run_verify_suite(const VerifyOptions& opts);

/// CLI entry; returns the process exit code (0 ok, 1 property failure, 2 usage error).
int cli_main(int argc, char** argv);

}  // namespace acomid
