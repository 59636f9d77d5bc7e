#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slsoh/adaptive.hpp"
#include "slsoh/cross_validation.hpp"
#include "slsoh/plant_sim.hpp"

namespace slsoh {

struct PipelineConfig {
  std::uint64_t seed = 42;
  std::string out_dir = "out";

  // split
  std::vector<std::string> train_cells;  // empty: every non-test cell
  std::vector<std::string> test_cells = {"1.4", "2.4"};

  // simulate
  CampaignSchedule schedule;
  SeasonalTemperature season;
  double fade_per_ah = 0.0;

  // extract
  double test_gap_s = 3600.0;
  double min_current_step_a = 0.1;

  // rank
  std::size_t mi_bins = 8;
  std::size_t top_k = 6;

  // train
  HyperGrid grid = HyperGrid::defaults();
  std::size_t folds = 5;
  double tol = 1e-8;
  std::size_t max_iter = 10000;

  // adaptive
  AdaptiveConfig adaptive;

  // Unknown keys and out-of-range values raise SchemaError / InvalidArgument.
  static PipelineConfig from_json(const std::string& text);
  static PipelineConfig from_file(const std::string& path);
  std::string to_json() const;
  void validate() const;
};

struct CommandResult {
  std::vector<std::string> written;  // paths relative to out_dir
  std::vector<std::string> warnings;
};

// Telemetry, ground truth and campaign.json under out_dir.
CommandResult cmd_simulate(const PipelineConfig& cfg);
// telemetry/ -> snapshots.csv
CommandResult cmd_extract(const PipelineConfig& cfg);
// snapshots.csv (training cells) -> ranking.csv
CommandResult cmd_rank(const PipelineConfig& cfg);
// snapshots.csv + ranking.csv -> model.json, cv_table.csv
CommandResult cmd_train(const PipelineConfig& cfg);
// model.json + snapshots.csv -> metrics_{train,test}.json, pcepe.csv, pcepe_summary.json
CommandResult cmd_evaluate(const PipelineConfig& cfg);
// model.json + snapshots.csv -> trace_<cell>.csv per test cell, adaptive_summary.json
CommandResult cmd_adaptive(const PipelineConfig& cfg);

struct ValidationIssue {
  std::string file;
  std::string message;
};

struct ValidationReport {
  std::vector<std::string> checked;
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_json() const;
};

// Checks every artifact present under out_dir against its schema. Throws
// MissingInput when out_dir holds no known artifact.
ValidationReport cmd_validate(const PipelineConfig& cfg);

// Exit-code contract: 0 success, 1 internal error, 2 usage or input error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInput = 2;

// {"error":{"code":..,"kind":..,"message":..}}
std::string error_json(int code, const std::string& kind, const std::string& message);

// The train/test split applied to the cells present in `cells`.
struct CellSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
};
CellSplit resolve_split(const PipelineConfig& cfg, std::vector<std::string> cells);

}  // namespace slsoh
