#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>

namespace pblsgm {

// Objective convention used across the estimation stack: nullopt signals an
// evaluation failure (typically a covariance that would not factor).
using Objective = std::function<std::optional<double>(const Eigen::VectorXd&)>;

struct FdOptions {
  // Per-coordinate step is scale * (1 + |x_j|).
  double gradient_central_scale = 2e-5;
  double gradient_forward_scale = 1e-6;
  double hessian_scale = 5e-4;
  int threads = 1;
};

// Central differences: (f(x + h e_j) - f(x - h e_j)) / (2h).
std::optional<Eigen::VectorXd> fd_gradient_central(const Objective& f,
                                                   const Eigen::VectorXd& x,
                                                   const FdOptions& opt = {});

// Forward differences reuse f(x) (pass it in when already known).
std::optional<Eigen::VectorXd> fd_gradient_forward(const Objective& f,
                                                   const Eigen::VectorXd& x,
                                                   double f_at_x,
                                                   const FdOptions& opt = {});

// Symmetric four-point central stencil. The result is exactly symmetric by
// construction (each (j,k) pair is evaluated once and mirrored).
std::optional<Eigen::MatrixXd> fd_hessian(const Objective& f, const Eigen::VectorXd& x,
                                          const FdOptions& opt = {});

// Central-difference Jacobian of a vector-valued map (used for delta-method
// propagation through the back-transform).
using VectorMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
Eigen::MatrixXd fd_jacobian(const VectorMap& g, const Eigen::VectorXd& x,
                            double step_scale = 1e-6);

}  // namespace pblsgm
