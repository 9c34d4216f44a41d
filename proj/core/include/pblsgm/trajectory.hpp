#pragma once

#include <Eigen/Dense>

#include "pblsgm/params.hpp"
#include "pblsgm/types.hpp"

namespace pblsgm {

// Piecewise-linear trajectory value: eta0 + eta1*t before the knot,
// continuous with slope eta2 after it.
double bilinear_value(double eta0, double eta1, double eta2, double gamma, double t);

// sign with sign(0) = 0, the convention used for the knot-deviation loading.
inline double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Random-knot loadings, one row per time: [1, t - mu_gamma, |t - mu_gamma|,
// -mu_eta2' - mu_eta2' * sign(t - mu_gamma)]. The fourth column is the
// knot-deviation loading: 0 before the knot, -2*mu_eta2' after it, and
// -mu_eta2' exactly at it.
Eigen::MatrixXd loadings_full(const Eigen::VectorXd& times, double mu_gamma,
                              double mu_eta2_prime);

// Fixed-knot loadings: [1, t - gamma, |t - gamma|].
Eigen::MatrixXd loadings_reduced(const Eigen::VectorXd& times, double gamma);

Eigen::MatrixXd loadings_linear(const Eigen::VectorXd& times);     // [1, t]
Eigen::MatrixXd loadings_quadratic(const Eigen::VectorXd& times);  // [1, t, t^2]

// Dispatch on shape; `reparam` supplies the knot mean and half-slope-difference
// mean where the shape needs them.
Eigen::MatrixXd loadings(const Eigen::VectorXd& times, const OutcomeParams& reparam);

// Factor mean vector entering the implied mean (the knot-deviation mean is 0
// by construction for random-knot shapes).
Eigen::VectorXd factor_mean(const OutcomeParams& reparam);

}  // namespace pblsgm
