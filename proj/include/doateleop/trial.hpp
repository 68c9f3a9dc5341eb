#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "doateleop/evaluation.hpp"
#include "doateleop/pilot.hpp"
#include "doateleop/scenario.hpp"
#include "doateleop/trial_log.hpp"

namespace doateleop {

struct TrialResult {
  TrialLog log;
  TrialReport report;
};

/// Drives a session to a terminal status with `pilot` and evaluates the log.
/// Throws std::invalid_argument if the pilot does not fit the scenario.
TrialResult run_trial(const Scenario& scenario, const PilotPolicy& pilot, std::uint64_t seed,
                      const std::string& label = {});

struct TrialSpec {
  std::string label;
  Scenario scenario;
  PilotPolicy pilot;
  std::uint64_t seed = 0;
};

struct SuiteConfig {
  std::string name;
  std::vector<TrialSpec> trials;
  unsigned workers = 0;  // 0 = hardware concurrency
  std::optional<std::filesystem::path> log_dir;
};

/// Suite file: {"format_version", "name", "scenario", "noise"?, "trials": [{"label", "seed", "pilot", "scenario"?, "spawn"?}]}.
/// Relative scenario paths resolve against the suite file's directory. `noise`
/// overrides the file's own noise profile when non-empty.
SuiteConfig load_suite(const std::filesystem::path& path, const std::string& noise = {});
SuiteConfig parse_suite(const nlohmann::json& j, const std::filesystem::path& base_dir, const std::string& noise = {});

struct SuiteEntry {
  std::string label;
  std::uint64_t seed = 0;
  std::optional<TrialReport> report;
  std::string error;
};

struct SuiteSummary {
  std::size_t trials = 0;
  std::size_t failed = 0;
  ConfusionCounts pooled;
  /// Mean over trials of each per-trial metric (undefined values are left out).
  ConfusionMetrics mean;
  ErrorStats doa_error_los;
  ErrorStats doa_error_nlos;
  std::size_t connection_losses = 0;
  double mean_covered_area = 0.0;
  double mean_rss_gain = 0.0;
  double mean_distance = 0.0;
};

struct SuiteReport {
  std::string name;
  std::vector<SuiteEntry> entries;  // in suite order
  SuiteSummary summary;
};

/// Runs trials on parallel workers. A trial that throws is recorded as failed
/// and the rest continue. Throws std::invalid_argument for an empty suite.
SuiteReport run_suite(const SuiteConfig& config);

/// Order-independent aggregation of per-trial reports.
SuiteSummary summarize(const std::vector<SuiteEntry>& entries);

}  // namespace doateleop
