#include "pblsgm/trajectory.hpp"

#include <cmath>
#include <stdexcept>

namespace pblsgm {

double bilinear_value(double eta0, double eta1, double eta2, double gamma, double t) {
  // Equivalent reparameterized form, continuous at the knot by construction.
  const double at_knot = eta0 + eta1 * gamma;
  const double mean_slope = 0.5 * (eta1 + eta2);
  const double half_diff = 0.5 * (eta2 - eta1);
  return at_knot + mean_slope * (t - gamma) + half_diff * std::abs(t - gamma);
}

Eigen::MatrixXd loadings_full(const Eigen::VectorXd& times, double mu_gamma,
                              double mu_eta2_prime) {
  Eigen::MatrixXd lam(times.size(), 4);
  for (int j = 0; j < times.size(); ++j) {
    const double d = times(j) - mu_gamma;
    lam(j, 0) = 1.0;
    lam(j, 1) = d;
    lam(j, 2) = std::abs(d);
    lam(j, 3) = -mu_eta2_prime - mu_eta2_prime * sign0(d);
  }
  return lam;
}

Eigen::MatrixXd loadings_reduced(const Eigen::VectorXd& times, double gamma) {
  Eigen::MatrixXd lam(times.size(), 3);
  for (int j = 0; j < times.size(); ++j) {
    const double d = times(j) - gamma;
    lam(j, 0) = 1.0;
    lam(j, 1) = d;
    lam(j, 2) = std::abs(d);
  }
  return lam;
}

Eigen::MatrixXd loadings_linear(const Eigen::VectorXd& times) {
  Eigen::MatrixXd lam(times.size(), 2);
  lam.col(0).setOnes();
  lam.col(1) = times;
  return lam;
}

Eigen::MatrixXd loadings_quadratic(const Eigen::VectorXd& times) {
  Eigen::MatrixXd lam(times.size(), 3);
  lam.col(0).setOnes();
  lam.col(1) = times;
  lam.col(2) = times.cwiseProduct(times);
  return lam;
}

Eigen::MatrixXd loadings(const Eigen::VectorXd& times, const OutcomeParams& reparam) {
  switch (reparam.shape) {
    case TrajectoryShape::BilinearRandomKnot:
      return loadings_full(times, reparam.knot, reparam.mean(2));
    case TrajectoryShape::BilinearFixedKnot:
      return loadings_reduced(times, reparam.knot);
    case TrajectoryShape::Linear:
      return loadings_linear(times);
    case TrajectoryShape::Quadratic:
      return loadings_quadratic(times);
  }
  throw std::invalid_argument("unknown trajectory shape");
}

Eigen::VectorXd factor_mean(const OutcomeParams& reparam) {
  if (reparam.shape == TrajectoryShape::BilinearRandomKnot) {
    Eigen::VectorXd m(4);
    m << reparam.mean, 0.0;  // knot deviation has mean zero
    return m;
  }
  return reparam.mean;
}

}  // namespace pblsgm
