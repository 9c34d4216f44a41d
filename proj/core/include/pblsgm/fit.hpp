#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pblsgm/parameter_map.hpp"
#include "pblsgm/params.hpp"
#include "pblsgm/types.hpp"

namespace pblsgm {

struct FitOptions {
  int max_attempts = 10;
  double gradient_tolerance = 1e-6;
  double relative_change_tolerance = 1e-10;
  int max_iterations = 2000;
  double ci_level = 0.95;
  std::uint64_t seed = 0;
  int threads = 1;
  bool compute_se = true;
  // Box for knot locations; by default the observed time range of the data.
  std::optional<std::pair<double, double>> knot_bounds;
  // Start-value override (warm starts); attempt 1 uses it verbatim, retries
  // perturb it like any other start.
  std::optional<ReparamParams> initial;
};

struct ImproprietyReport {
  // Names of natural-frame growth-factor variances estimated negative.
  std::vector<std::string> negative_variances;
  // Pairs of factor names whose correlation falls outside [-1, 1]
  // (computed only when both variances are positive).
  std::vector<std::pair<std::string, std::string>> extreme_correlations;

  bool proper() const {
    return negative_variances.empty() && extreme_correlations.empty();
  }
};

struct FitIndices {
  double minus2ll = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  int n_params = 0;
  int n = 0;
};

// -2loglik + 2k and -2loglik + k*log(n).
FitIndices fit_indices(double minus2ll, int n_params, int n);

struct ParamSummary {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;        // NaN when unavailable
  double ci_lower = 0.0;  // Wald limits at the requested level
  double ci_upper = 0.0;
  double p_value = 0.0;
};

struct FitResult {
  bool converged = false;
  int attempts_used = 0;
  int iterations = 0;
  int evaluations = 0;
  std::string message;

  double loglik = 0.0;
  FitIndices indices;

  ReparamParams theta_prime;
  OriginalParams theta;

  bool se_available = false;
  Eigen::MatrixXd cov_prime;     // sampling covariance of the packed estimate
  Eigen::VectorXd se_prime_flat; // slot-aligned SEs, reparameterized frame
  Eigen::VectorXd se_flat;       // slot-aligned delta-method SEs, natural frame
  ReparamParams se_prime;        // same-shape containers holding SEs
  OriginalParams se;

  std::vector<ParamSummary> summary;  // natural frame, slot order
  ImproprietyReport impropriety;
};

// Full-information ML fit: heuristic (or provided) starts, box-constrained
// quasi-Newton on the per-individual mean negative log-likelihood, up to
// max_attempts seeded start perturbations, then standard errors and the
// back-transform. Throws std::invalid_argument for structurally bad input
// (including data too degenerate to fit, e.g. fewer distinct observed times
// than growth factors).
FitResult fit(const Dataset& data, const ModelSpec& spec, const FitOptions& options = {});

// Observed-information standard errors at a solution: the negative
// log-likelihood Hessian approximated by the symmetrized finite-difference
// Jacobian of the exact score, inverted; natural-frame SEs by delta method
// through the back-transform. available=false (with a note) when the
// information matrix is not positive definite.
struct SeTable {
  bool available = false;
  Eigen::MatrixXd cov_prime;
  Eigen::VectorXd se_prime;
  Eigen::VectorXd se_original;
  std::string note;
};
SeTable standard_errors(const Dataset& data, const ModelSpec& spec,
                        const ReparamParams& at, const ParameterMap& map,
                        const FitOptions& options = {});

// Negative-variance / out-of-range-correlation screen on the natural-frame
// stacked growth-factor covariance.
ImproprietyReport detect_improper(const OriginalParams& original,
                                  const ReparamParams& reparam,
                                  const ModelSpec& spec);

// Heuristic start values: per-outcome piecewise OLS on the pooled mean curve
// (knot started at the grid midpoint), forward-transformed; diagonal
// covariance starts from per-wave sample variances. Exposed for tests.
ReparamParams heuristic_starts(const Dataset& data, const ModelSpec& spec);

// Observed time range over all individuals (default knot box).
std::pair<double, double> observed_time_range(const Dataset& data);

}  // namespace pblsgm
