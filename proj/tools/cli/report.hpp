#pragma once

#include <string>
#include <vector>

#include "pblsgm/fit.hpp"
#include "pblsgm/simulation.hpp"
#include "pblsgm/types.hpp"

namespace pblsgm::cli {

// Every rendered value is lifted straight from a FitResult / ConditionResult
// field (or a core helper); nothing is computed here.

// Two-panel estimates table (growth-factor means, then variance components)
// with SEs, Wald p-values, and interval limits.
std::string estimates_csv(const FitResult& result);
// Same content as aligned text for the terminal, plus fit indices and the
// impropriety report.
std::string fit_text(const std::string& model, const FitResult& result);
// Full machine-readable summary: convergence, indices, both parameter frames,
// impropriety.
std::string fit_json(const std::string& model, const ModelSpec& spec,
                     const FitResult& result);
// Tidy model-implied mean and marginal SD per outcome over an even time grid.
std::string curves_csv(const ModelSpec& spec, const ReparamParams& params,
                       double t_lo, double t_hi, int points = 101);

// One row per simulation condition (label and design cells).
std::string grid_csv(const std::vector<SimulationCondition>& grid);
// Per-parameter Monte-Carlo metrics of one condition.
std::string metrics_csv(const std::vector<MetricRow>& rows);
// Counts, rates, and both metric tables of one condition.
std::string condition_json(const ConditionResult& result);
// Median/range rollup across conditions.
std::string rollup_csv(const std::vector<RollupRow>& rows);

// Model-comparison table, already sorted by the caller.
struct CompareRow {
  std::string model;
  std::string outcomes;
  bool converged = false;
  FitIndices indices;
  double loglik = 0.0;
};
std::string compare_csv(const std::vector<CompareRow>& rows);
std::string compare_text(const std::vector<CompareRow>& rows);
std::string compare_json(const std::vector<CompareRow>& rows);

// Creates parent directories as needed.
void write_file(const std::string& path, const std::string& content);

}  // namespace pblsgm::cli
