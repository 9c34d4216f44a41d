#pragma once

// Independent reference implementations for oracle tests. These deliberately
// avoid the library's own code paths: naive formulas, scalar loops, textbook
// linear algebra. Slow is fine here.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

// Piecewise-linear trajectory evaluated the pedestrian way.
inline double piecewise_line(double eta0, double eta1, double eta2, double gamma,
                             double t) {
  if (t <= gamma) return eta0 + eta1 * t;
  return eta0 + eta1 * gamma + eta2 * (t - gamma);
}

// Multivariate normal log-density via explicit inverse and determinant,
// independent of any Cholesky shortcut used by the library.
inline double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                         const Eigen::MatrixXd& sigma) {
  const int m = static_cast<int>(x.size());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sigma);
  const double logdet = std::log(lu.determinant());
  const Eigen::VectorXd r = x - mu;
  const double quad = r.dot(lu.solve(r));
  return -0.5 * m * std::log(2.0 * std::numbers::pi) - 0.5 * logdet - 0.5 * quad;
}

// Random symmetric positive definite matrix with unit-ish scale.
inline Eigen::MatrixXd random_spd(int q, std::mt19937_64& rng, double jitter = 0.5) {
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd a(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) a(i, j) = gauss(rng);
  Eigen::MatrixXd s = a * a.transpose() / q;
  s += jitter * Eigen::MatrixXd::Identity(q, q);
  return s;
}

// Random correlation-bounded covariance block pair (within y, within z, cross)
// that is jointly positive definite: draw one (qy+qz) SPD matrix and slice it.
struct StackedCov {
  Eigen::MatrixXd yy, zz, yz;
};
inline StackedCov random_stacked_cov(int qy, int qz, std::mt19937_64& rng) {
  Eigen::MatrixXd s = random_spd(qy + qz, rng);
  StackedCov out;
  out.yy = s.topLeftCorner(qy, qy);
  out.zz = s.bottomRightCorner(qz, qz);
  out.yz = s.topRightCorner(qy, qz);
  return out;
}

}  // namespace oracle
