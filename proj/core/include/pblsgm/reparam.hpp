#pragma once

#include <Eigen/Dense>

#include <vector>

#include "pblsgm/params.hpp"

namespace pblsgm {

enum class TransformDirection { Forward, Inverse };

// Jacobian of the growth-factor transform, 4x4 for random-knot outcomes and
// 3x3 for fixed-knot ones, together with where it was evaluated.
struct TransformJacobian {
  Eigen::MatrixXd matrix;
  TransformDirection direction = TransformDirection::Forward;
  Eigen::VectorXd evaluated_at;
};

// Mean maps for the random-knot (4-factor) transform. Parameter vectors carry
// the knot location in the fourth slot:
//   original:         (mu_eta0, mu_eta1, mu_eta2, mu_gamma)
//   reparameterized:  (mu at knot, mean of slopes, half slope difference, ...)
// forward_mean returns the factor means, whose fourth entry (knot deviation)
// is 0 by construction; inverse_mean takes the knot mean separately and
// returns the original parameter vector with mu_gamma in the fourth slot.
Eigen::Vector4d forward_mean(const Eigen::Vector4d& mu_original);
Eigen::Vector4d inverse_mean(const Eigen::Vector4d& mu_reparam, double mu_gamma);

// Jacobian of the forward map (eta0, eta1, eta2, gamma) ->
// (eta0 + gamma*eta1, (eta1+eta2)/2, (eta2-eta1)/2, gamma - mu_gamma),
// evaluated at the mean vector:
//   [[1, mu_gamma, 0, mu_eta1], [0, .5, .5, 0], [0, -.5, .5, 0], [0, 0, 0, 1]]
TransformJacobian grad_forward(const Eigen::Vector4d& mu_original);

// Jacobian of the inverse map, evaluated at the reparameterized parameter
// vector (mu0', mu1', mu2', mu_gamma):
//   [[1, -mu_gamma, mu_gamma, mu2' - mu1'], [0, 1, -1, 0], [0, 1, 1, 0],
//    [0, 0, 0, 1]]
// The (1,4) entry is what makes this the exact matrix inverse of
// grad_forward at consistent points (mu2' - mu1' = -mu_eta1 there): the
// individual knot gamma = delta + mu_gamma varies with the knot deviation, so
// the intercept row picks up the slope-difference term.
TransformJacobian grad_inverse(const Eigen::Vector4d& mu_reparam);

// Fixed-knot (3-factor) versions: gamma enters as a fixed constant, so the
// maps are linear and the Jacobians constant in the means.
Eigen::Vector3d forward_mean_reduced(const Eigen::Vector3d& mu_original, double gamma);
Eigen::Vector3d inverse_mean_reduced(const Eigen::Vector3d& mu_reparam, double gamma);
TransformJacobian grad_forward_reduced(double gamma);
TransformJacobian grad_inverse_reduced(double gamma);

// Congruence transform of the factor-covariance blocks: within-outcome blocks
// become J_u * Psi_u * J_u', the cross block J_y * Psi_yz * J_z'. Works in
// both directions; pass the matching Jacobians.
struct CovBlocks {
  std::vector<Eigen::MatrixXd> within;  // one per outcome
  Eigen::MatrixXd cross;                // empty when univariate
};
CovBlocks transform_cov(const CovBlocks& blocks,
                        const std::vector<TransformJacobian>& jacobians);

// Whole-structure conversions dispatching per outcome shape (linear and
// quadratic outcomes pass through unchanged).
ReparamParams to_reparam(const OriginalParams& original);
OriginalParams to_original(const ReparamParams& reparam);

// Closed-form per-cell inverse transform for the full parallel random-knot
// variant: every mean and covariance cell of the natural frame written as an
// explicit expression in reparameterized cells. Used as an independent
// cross-check of the matrix congruence; the two must agree entrywise.
// Precondition: two outcomes, both BilinearRandomKnot.
OriginalParams inverse_cov_percell(const ReparamParams& reparam);

}  // namespace pblsgm
