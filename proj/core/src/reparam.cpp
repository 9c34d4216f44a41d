#include "pblsgm/reparam.hpp"

#include <stdexcept>

namespace pblsgm {

Eigen::Vector4d forward_mean(const Eigen::Vector4d& mu) {
  return {mu(0) + mu(3) * mu(1), 0.5 * (mu(1) + mu(2)), 0.5 * (mu(2) - mu(1)), 0.0};
}

Eigen::Vector4d inverse_mean(const Eigen::Vector4d& mu_prime, double mu_gamma) {
  return {mu_prime(0) - mu_gamma * mu_prime(1) + mu_gamma * mu_prime(2),
          mu_prime(1) - mu_prime(2), mu_prime(1) + mu_prime(2), mu_gamma};
}

TransformJacobian grad_forward(const Eigen::Vector4d& mu) {
  TransformJacobian jac;
  jac.direction = TransformDirection::Forward;
  jac.evaluated_at = mu;
  jac.matrix.resize(4, 4);
  jac.matrix << 1.0, mu(3), 0.0, mu(1),
                0.0, 0.5, 0.5, 0.0,
               0.0, -0.5, 0.5, 0.0,
                0.0, 0.0, 0.0, 1.0;
  return jac;
}

TransformJacobian grad_inverse(const Eigen::Vector4d& mu_prime) {
  const double mu_gamma = mu_prime(3);
  TransformJacobian jac;
  jac.direction = TransformDirection::Inverse;
  jac.evaluated_at = mu_prime;
  jac.matrix.resize(4, 4);
  jac.matrix << 1.0, -mu_gamma, mu_gamma, mu_prime(2) - mu_prime(1),
                0.0, 1.0, -1.0, 0.0,
                0.0, 1.0, 1.0, 0.0,
                0.0, 0.0, 0.0, 1.0;
  return jac;
}

Eigen::Vector3d forward_mean_reduced(const Eigen::Vector3d& mu, double gamma) {
  return {mu(0) + gamma * mu(1), 0.5 * (mu(1) + mu(2)), 0.5 * (mu(2) - mu(1))};
}

Eigen::Vector3d inverse_mean_reduced(const Eigen::Vector3d& mu_prime, double gamma) {
  return {mu_prime(0) - gamma * mu_prime(1) + gamma * mu_prime(2),
          mu_prime(1) - mu_prime(2), mu_prime(1) + mu_prime(2)};
}

TransformJacobian grad_forward_reduced(double gamma) {
  TransformJacobian jac;
  jac.direction = TransformDirection::Forward;
  jac.evaluated_at = Eigen::VectorXd::Constant(1, gamma);
  jac.matrix.resize(3, 3);
  jac.matrix << 1.0, gamma, 0.0,
                0.0, 0.5, 0.5,
                0.0, -0.5, 0.5;
  return jac;
}

TransformJacobian grad_inverse_reduced(double gamma) {
  TransformJacobian jac;
  jac.direction = TransformDirection::Inverse;
  jac.evaluated_at = Eigen::VectorXd::Constant(1, gamma);
  jac.matrix.resize(3, 3);
  jac.matrix << 1.0, -gamma, gamma,
                0.0, 1.0, -1.0,
                0.0, 1.0, 1.0;
  return jac;
}

CovBlocks transform_cov(const CovBlocks& blocks,
                        const std::vector<TransformJacobian>& jacobians) {
  if (blocks.within.size() != jacobians.size())
    throw std::invalid_argument("one Jacobian per outcome block required");
  CovBlocks out;
  out.within.reserve(blocks.within.size());
  for (size_t u = 0; u < blocks.within.size(); ++u) {
    const Eigen::MatrixXd& j = jacobians[u].matrix;
    if (j.cols() != blocks.within[u].rows())
      throw std::invalid_argument("Jacobian size does not match covariance block");
    out.within.push_back(j * blocks.within[u] * j.transpose());
  }
  if (blocks.cross.size() > 0) {
    if (blocks.within.size() != 2)
      throw std::invalid_argument("cross block requires two outcomes");
    out.cross = jacobians[0].matrix * blocks.cross * jacobians[1].matrix.transpose();
  }
  return out;
}

namespace {

// Mean-bearing parameter vector with the knot in the fourth slot.
Eigen::Vector4d param_vec4(const OutcomeParams& o) {
  return {o.mean(0), o.mean(1), o.mean(2), o.knot};
}

TransformJacobian outcome_jacobian_forward(const OutcomeParams& original) {
  switch (original.shape) {
    case TrajectoryShape::BilinearRandomKnot:
      return grad_forward(param_vec4(original));
    case TrajectoryShape::BilinearFixedKnot:
      return grad_forward_reduced(original.knot);
    case TrajectoryShape::Linear:
    case TrajectoryShape::Quadratic: {
      TransformJacobian jac;
      jac.direction = TransformDirection::Forward;
      jac.matrix = Eigen::MatrixXd::Identity(factor_count(original.shape),
                                             factor_count(original.shape));
      return jac;
    }
  }
  throw std::invalid_argument("unknown trajectory shape");
}

TransformJacobian outcome_jacobian_inverse(const OutcomeParams& reparam) {
  switch (reparam.shape) {
    case TrajectoryShape::BilinearRandomKnot:
      return grad_inverse(param_vec4(reparam));
    case TrajectoryShape::BilinearFixedKnot:
      return grad_inverse_reduced(reparam.knot);
    case TrajectoryShape::Linear:
    case TrajectoryShape::Quadratic: {
      TransformJacobian jac;
      jac.direction = TransformDirection::Inverse;
      jac.matrix = Eigen::MatrixXd::Identity(factor_count(reparam.shape),
                                             factor_count(reparam.shape));
      return jac;
    }
  }
  throw std::invalid_argument("unknown trajectory shape");
}

}  // namespace

ReparamParams to_reparam(const OriginalParams& original) {
  ReparamParams out;
  out.outcome.resize(original.outcome.size());
  std::vector<TransformJacobian> jacs;
  jacs.reserve(original.outcome.size());
  for (size_t u = 0; u < original.outcome.size(); ++u) {
    const auto& o = original.outcome[u];
    auto& r = out.outcome[u];
    r.shape = o.shape;
    r.theta_eps = o.theta_eps;
    switch (o.shape) {
      case TrajectoryShape::BilinearRandomKnot: {
        Eigen::Vector4d mu_prime = forward_mean(param_vec4(o));
        r.mean = mu_prime.head(3);
        r.knot = o.knot;
        break;
      }
      case TrajectoryShape::BilinearFixedKnot:
        r.mean = forward_mean_reduced(o.mean, o.knot);
        r.knot = o.knot;
        break;
      case TrajectoryShape::Linear:
      case TrajectoryShape::Quadratic:
        r.mean = o.mean;
        r.knot = o.knot;
        break;
    }
    jacs.push_back(outcome_jacobian_forward(o));
  }
  CovBlocks blocks;
  for (const auto& o : original.outcome) blocks.within.push_back(o.psi);
  blocks.cross = original.psi_cross;
  CovBlocks transformed = transform_cov(blocks, jacs);
  for (size_t u = 0; u < out.outcome.size(); ++u)
    out.outcome[u].psi = transformed.within[u];
  out.psi_cross = transformed.cross;
  out.theta_eps_cross = original.theta_eps_cross;
  return out;
}

OriginalParams to_original(const ReparamParams& reparam) {
  OriginalParams out;
  out.outcome.resize(reparam.outcome.size());
  std::vector<TransformJacobian> jacs;
  jacs.reserve(reparam.outcome.size());
  for (size_t u = 0; u < reparam.outcome.size(); ++u) {
    const auto& r = reparam.outcome[u];
    auto& o = out.outcome[u];
    o.shape = r.shape;
    o.theta_eps = r.theta_eps;
    switch (r.shape) {
      case TrajectoryShape::BilinearRandomKnot: {
        Eigen::Vector4d mu = inverse_mean(
            {r.mean(0), r.mean(1), r.mean(2), 0.0}, r.knot);
        o.mean = mu.head(3);
        o.knot = r.knot;
        break;
      }
      case TrajectoryShape::BilinearFixedKnot:
        o.mean = inverse_mean_reduced(r.mean, r.knot);
        o.knot = r.knot;
        break;
      case TrajectoryShape::Linear:
      case TrajectoryShape::Quadratic:
        o.mean = r.mean;
        o.knot = r.knot;
        break;
    }
    jacs.push_back(outcome_jacobian_inverse(r));
  }
  CovBlocks blocks;
  for (const auto& r : reparam.outcome) blocks.within.push_back(r.psi);
  blocks.cross = reparam.psi_cross;
  CovBlocks transformed = transform_cov(blocks, jacs);
  for (size_t u = 0; u < out.outcome.size(); ++u)
    out.outcome[u].psi = transformed.within[u];
  out.psi_cross = transformed.cross;
  out.theta_eps_cross = reparam.theta_eps_cross;
  return out;
}

OriginalParams inverse_cov_percell(const ReparamParams& rp) {
  if (rp.outcome.size() != 2 ||
      rp.outcome[0].shape != TrajectoryShape::BilinearRandomKnot ||
      rp.outcome[1].shape != TrajectoryShape::BilinearRandomKnot)
    throw std::invalid_argument(
        "per-cell inverse transform is defined for the full parallel variant");

  OriginalParams out;
  out.outcome.resize(2);
  out.theta_eps_cross = rp.theta_eps_cross;

  double a[2], w[2];
  for (int u = 0; u < 2; ++u) {
    const auto& r = rp.outcome[u];
    a[u] = r.knot;
    w[u] = r.mean(2) - r.mean(1);  // slope-difference coupling of the intercept row

    auto& o = out.outcome[u];
    o.shape = r.shape;
    o.theta_eps = r.theta_eps;
    o.knot = a[u];
    o.mean.resize(3);
    o.mean(0) = r.mean(0) - a[u] * r.mean(1) + a[u] * r.mean(2);
    o.mean(1) = r.mean(1) - r.mean(2);
    o.mean(2) = r.mean(1) + r.mean(2);

    const Eigen::MatrixXd& p = r.psi;
    Eigen::Matrix4d psi;
    const double aa = a[u], ww = w[u];
    psi(0, 0) = p(0, 0) + aa * aa * (p(1, 1) + p(2, 2) - 2.0 * p(1, 2)) +
                2.0 * aa * (p(0, 2) - p(0, 1)) +
                2.0 * ww * (p(0, 3) + aa * (p(2, 3) - p(1, 3))) + ww * ww * p(3, 3);
    psi(0, 1) = p(0, 1) - p(0, 2) + aa * (2.0 * p(1, 2) - p(1, 1) - p(2, 2)) +
                ww * (p(1, 3) - p(2, 3));
    psi(0, 2) = p(0, 1) + p(0, 2) + aa * (p(2, 2) - p(1, 1)) +
                ww * (p(1, 3) + p(2, 3));
    psi(0, 3) = p(0, 3) + aa * (p(2, 3) - p(1, 3)) + ww * p(3, 3);
    psi(1, 1) = p(1, 1) + p(2, 2) - 2.0 * p(1, 2);
    psi(1, 2) = p(1, 1) - p(2, 2);
    psi(1, 3) = p(1, 3) - p(2, 3);
    psi(2, 2) = p(1, 1) + p(2, 2) + 2.0 * p(1, 2);
    psi(2, 3) = p(1, 3) + p(2, 3);
    psi(3, 3) = p(3, 3);
    psi(1, 0) = psi(0, 1);
    psi(2, 0) = psi(0, 2);
    psi(3, 0) = psi(0, 3);
    psi(2, 1) = psi(1, 2);
    psi(3, 1) = psi(1, 3);
    psi(3, 2) = psi(2, 3);
    o.psi = psi;
  }

  const Eigen::MatrixXd& P = rp.psi_cross;
  const double ay = a[0], az = a[1], wy = w[0], wz = w[1];
  Eigen::Matrix4d c;
  c(0, 0) = (P(1, 1) + P(2, 2) - P(1, 2) - P(2, 1)) * ay * az +
            (P(2, 0) - P(1, 0)) * ay + (P(0, 2) - P(0, 1)) * az + P(0, 0) +
            wy * (P(3, 0) - az * P(3, 1) + az * P(3, 2)) +
            wz * (P(0, 3) - ay * P(1, 3) + ay * P(2, 3)) + wy * wz * P(3, 3);
  c(0, 1) = P(0, 1) - P(0, 2) + ay * (P(2, 1) + P(1, 2) - P(1, 1) - P(2, 2)) +
            wy * (P(3, 1) - P(3, 2));
  c(0, 2) = P(0, 1) + P(0, 2) + ay * (P(2, 1) - P(1, 1) + P(2, 2) - P(1, 2)) +
            wy * (P(3, 1) + P(3, 2));
  c(0, 3) = P(0, 3) + ay * (P(2, 3) - P(1, 3)) + wy * P(3, 3);
  c(1, 0) = P(1, 0) - P(2, 0) + az * (P(1, 2) - P(1, 1) + P(2, 1) - P(2, 2)) +
            wz * (P(1, 3) - P(2, 3));
  c(1, 1) = P(1, 1) - P(2, 1) - P(1, 2) + P(2, 2);
  c(1, 2) = P(1, 1) - P(2, 1) + P(1, 2) - P(2, 2);
  c(1, 3) = P(1, 3) - P(2, 3);
  c(2, 0) = P(1, 0) + P(2, 0) - az * (P(1, 1) + P(2, 1)) + az * (P(1, 2) + P(2, 2)) +
            wz * (P(1, 3) + P(2, 3));
  c(2, 1) = P(1, 1) + P(2, 1) - P(1, 2) - P(2, 2);
  c(2, 2) = P(1, 1) + P(2, 1) + P(1, 2) + P(2, 2);
  c(2, 3) = P(1, 3) + P(2, 3);
  c(3, 0) = P(3, 0) - az * P(3, 1) + az * P(3, 2) + wz * P(3, 3);
  c(3, 1) = P(3, 1) - P(3, 2);
  c(3, 2) = P(3, 1) + P(3, 2);
  c(3, 3) = P(3, 3);
  out.psi_cross = c;

  return out;
}

}  // namespace pblsgm
