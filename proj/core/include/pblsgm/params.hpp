#pragma once

#include <Eigen/Dense>

#include <limits>
#include <vector>

#include "pblsgm/types.hpp"

namespace pblsgm {

// Growth-factor parameters for one outcome. The same container is used in
// both frames; the frame tag on Params below keeps them from being mixed up.
//
//   mean: growth-factor means excluding any knot location.
//     bilinear shapes, natural frame:          (eta0, eta1, eta2)
//     bilinear shapes, reparameterized frame:  (measurement at knot,
//                                               mean of slopes,
//                                               half slope difference)
//     linear: (eta0, eta1); quadratic: (eta0, eta1, eta2)
//   knot: knot mean mu_gamma (random knot) or fixed knot gamma; NaN otherwise.
//   psi:  factor covariance. 4x4 for the random-knot spline (the fourth factor
//         is gamma in the natural frame, the knot deviation delta in the
//         reparameterized frame), 3x3 fixed-knot, 2x2 linear, 3x3 quadratic.
//   theta_eps: residual variance.
struct OutcomeParams {
  TrajectoryShape shape = TrajectoryShape::BilinearRandomKnot;
  Eigen::VectorXd mean;
  double knot = std::numeric_limits<double>::quiet_NaN();
  Eigen::MatrixXd psi;
  double theta_eps = 0.0;
};

namespace frame {
struct Original {};
struct Reparam {};
}  // namespace frame

template <class Frame>
struct Params {
  std::vector<OutcomeParams> outcome;  // 1 or 2 entries
  // Cross-construct factor covariance, factor_count(y) x factor_count(z).
  // Empty (0x0) for univariate models.
  Eigen::MatrixXd psi_cross;
  double theta_eps_cross = 0.0;

  bool parallel() const { return outcome.size() == 2; }
};

// Natural ("original") frame: factors are intercept, the two slopes, and for
// random-knot shapes the knot location itself.
using OriginalParams = Params<frame::Original>;
// Reparameterized frame: factors are the measurement at the knot, the mean of
// the two slopes, half their difference, and the knot deviation.
using ReparamParams = Params<frame::Reparam>;

// Stacked factor covariance over all outcomes (block diagonal with the cross
// block filled in). Size = sum of factor counts.
template <class Frame>
Eigen::MatrixXd stacked_psi(const Params<Frame>& p) {
  int q0 = static_cast<int>(p.outcome[0].psi.rows());
  int q1 = p.parallel() ? static_cast<int>(p.outcome[1].psi.rows()) : 0;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(q0 + q1, q0 + q1);
  out.topLeftCorner(q0, q0) = p.outcome[0].psi;
  if (q1 > 0) {
    out.bottomRightCorner(q1, q1) = p.outcome[1].psi;
    out.topRightCorner(q0, q1) = p.psi_cross;
    out.bottomLeftCorner(q1, q0) = p.psi_cross.transpose();
  }
  return out;
}

// Structural consistency with a model spec (outcome count, shapes, matrix
// sizes). Throws std::invalid_argument.
template <class Frame>
void validate_params(const Params<Frame>& p, const ModelSpec& spec);

extern template void validate_params<frame::Original>(const OriginalParams&, const ModelSpec&);
extern template void validate_params<frame::Reparam>(const ReparamParams&, const ModelSpec&);

}  // namespace pblsgm
