#pragma once

#include "dhvton/evaluate.hpp"
#include "dhvton/trainer.hpp"

namespace dhvton {

struct SweepRow {
  bool hybrid = true;
  double lambda = 0.0;  // ignored when hybrid == false
  MetricReport paired, unpaired;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

// Hybrid-off row first, then one row per lambda value. Each row trains the
// control branch afresh (train-in-loop) from the shared phase-A state, then
// runs the paired and unpaired metric suites on the holdout split.
SweepResult sweep_lambda(const RunConfig& base, const std::vector<double>& values,
                         const std::string& run_dir);

std::string sweep_table(const SweepResult& r);
std::string sweep_json(const SweepResult& r);

std::vector<double> default_lambda_values();  // {0.25, 0.5, 0.75, 1.0, 1.25, 1.5}

}  // namespace dhvton
