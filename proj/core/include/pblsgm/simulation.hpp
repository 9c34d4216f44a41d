#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pblsgm/fit.hpp"
#include "pblsgm/params.hpp"
#include "pblsgm/types.hpp"

namespace pblsgm {

// Multivariate normal sampler. Uses a Cholesky factor when the covariance is
// positive definite, otherwise an eigendecomposition with eigenvalues clipped
// at `eigen_floor` (supports deliberately singular designs such as zero knot
// variance).
class MvnSampler {
 public:
  MvnSampler(Eigen::VectorXd mean, const Eigen::MatrixXd& cov,
             double eigen_floor = 1e-12);
  Eigen::VectorXd draw(std::mt19937_64& rng) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd factor_;
};

// One cell of the simulation design.
struct SimulationCondition {
  int scenario = 1;        // which mean configuration differs across outcomes
  int n = 500;             // sample size
  int waves = 10;          // 6 or 10
  double knot_y = 4.5;
  double knot_z = 4.5;
  double rho = 0.3;        // between-construct growth-factor correlation
  double theta_eps = 1.0;  // residual variance, both outcomes
  double time_window = 0.25;  // half-width of the uniform jitter around waves

  std::string label() const;
  // Grid membership: n in {200,500}, waves/knots in the three supported
  // time-knot layouts, rho in {-.3,0,.3}, theta in {1,2}, scenario in {1,2,3}.
  // Throws std::invalid_argument otherwise.
  void validate() const;
};

// The full crossed design, 108 conditions, in a fixed deterministic order.
std::vector<SimulationCondition> condition_grid();

// Population parameters of a condition in the natural frame (bivariate
// random-knot model; within-construct factor correlations 0.3, residual
// correlation 0.3).
OriginalParams condition_params(const SimulationCondition& cond);

// Model specs used when fitting a condition's data.
ModelSpec condition_model(const SimulationCondition& cond, bool reduced_knots);

// Trajectory data from the natural-frame generating model: factor vectors
// (including individual knots) from the stacked MVN, individually jittered
// measurement times, outcome values from the exact piecewise trajectory plus
// correlated residuals. Every cell observed.
Dataset generate_from_params(const OriginalParams& truth, const Eigen::VectorXd& wave_grid,
                             double time_window, int n, std::mt19937_64& rng);
Dataset generate_dataset(const SimulationCondition& cond, std::mt19937_64& rng);

// Monte-Carlo performance summaries for one parameter across replications.
// When truth == 0 the bias and rmse are reported absolutely and flagged.
struct Metrics {
  double rel_bias = 0.0;
  double emp_se = 0.0;
  double rel_rmse = 0.0;
  double coverage = 0.0;
  double mc_se_bias = 0.0;  // sqrt(Var(estimates)/S)
  double mean_se = 0.0;     // mean estimated SE over replications with one
  bool absolute = false;
  int used = 0;     // replications contributing estimates
  int ci_used = 0;  // replications contributing coverage
};
Metrics performance_metrics(const std::vector<double>& estimates,
                            const std::vector<double>& ses,
                            const std::vector<std::pair<double, double>>& cis,
                            double truth);

struct MetricRow {
  std::string name;  // natural-frame slot name
  double truth = 0.0;
  Metrics metrics;
};

struct ConditionResult {
  SimulationCondition condition;
  int replications = 0;
  int datasets_generated = 0;    // includes rejected (non-convergent) draws
  int full_nonconverged = 0;     // datasets where the full fit did not converge
  int reduced_nonconverged = 0;
  int full_improper = 0;         // accepted replications, improper full solution
  int improper_negative_variance = 0;
  int improper_out_of_range = 0;
  // Full-model rows apply the substitution rule: replications whose full
  // solution is improper contribute the reduced estimate instead where the
  // reduced model has the parameter; knot rows aggregate proper fits only.
  std::vector<MetricRow> full_metrics;
  std::vector<MetricRow> reduced_metrics;

  double full_convergence_rate() const;
  double reduced_convergence_rate() const;
};

// Per-replication fits, injectable for tests.
struct ReplicationFits {
  FitResult full;
  FitResult reduced;
};
using ConditionFitter = std::function<ReplicationFits(
    const Dataset& data, const SimulationCondition& cond, std::uint64_t fit_seed)>;

// Runs replications until `reps` datasets yield convergent full and reduced
// fits. Each replication slot owns an RNG stream seeded master_seed xor slot
// index, so a retried slot never disturbs the others. Throws std::runtime_error
// when total generated datasets exceed 10x reps (systematic fitter failure).
// threads > 1 spreads slots over a pool; slot streams and the slot-ordered
// merge make the result identical to the serial run, but the fitter must then
// be safe to call concurrently.
ConditionResult run_condition(const SimulationCondition& cond, int reps,
                              std::uint64_t master_seed, const ConditionFitter& fitter,
                              int threads = 1);
// Default fitter: reduced model from heuristic starts, full model warm-started
// from the reduced solution.
ConditionResult run_condition(const SimulationCondition& cond, int reps,
                              std::uint64_t master_seed, const FitOptions& base_options,
                              int threads = 1);

// Median and range of the headline metrics across several conditions, one row
// per parameter. NaN metric values (e.g. coverage with no usable intervals)
// are skipped; a row's `conditions` counts those contributing its bias.
struct RollupRow {
  std::string name;
  int conditions = 0;
  double median_rel_bias = 0.0, min_rel_bias = 0.0, max_rel_bias = 0.0;
  double median_emp_se = 0.0, min_emp_se = 0.0, max_emp_se = 0.0;
  double median_rel_rmse = 0.0, min_rel_rmse = 0.0, max_rel_rmse = 0.0;
  double median_coverage = 0.0, min_coverage = 0.0, max_coverage = 0.0;
  double median_mean_se = 0.0, min_mean_se = 0.0, max_mean_se = 0.0;
};
// reduced=false rolls up full_metrics, reduced=true reduced_metrics.
std::vector<RollupRow> rollup_metrics(const std::vector<ConditionResult>& results,
                                      bool reduced);

}  // namespace pblsgm
