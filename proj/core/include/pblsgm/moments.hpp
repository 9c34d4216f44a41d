#pragma once

#include <Eigen/Dense>

#include "pblsgm/params.hpp"
#include "pblsgm/types.hpp"

namespace pblsgm {

struct ImpliedMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Model-implied moments of the stacked outcome vector (y waves first, then z
// waves) at one individual's measurement times, all cells observed.
ImpliedMoments implied_moments(const ModelSpec& spec, const Eigen::VectorXd& times,
                               const ReparamParams& params);

// Masked version: rows and columns of unobserved cells are dropped. The cell
// order is outcome-major (observed y waves in time order, then observed z
// waves). Cross-outcome residual covariance ties residuals of the same wave.
ImpliedMoments implied_moments(const ModelSpec& spec, const IndividualRecord& record,
                               const ReparamParams& params);

}  // namespace pblsgm
