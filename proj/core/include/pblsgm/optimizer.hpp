#pragma once

#include <Eigen/Dense>

#include <string>

#include "pblsgm/numdiff.hpp"

namespace pblsgm {

struct BoxMinimizeOptions {
  double gradient_tolerance = 1e-6;         // on the projected gradient max-norm
  double relative_change_tolerance = 1e-10; // on the objective between accepted steps
  int max_iterations = 2000;
  int memory = 8;                           // L-BFGS history length
  FdOptions fd;
  // Iterations use cheap forward differences until the projected gradient
  // max-norm falls under this multiple of the tolerance, then switch to
  // central differences to polish.
  double central_switch_factor = 100.0;
  // Optional exact gradient: callable as value_and_gradient(x, g) writing the
  // gradient into g and returning the objective value (nullopt on evaluation
  // failure, matching the Objective convention). When set, every gradient the
  // solver needs comes from here and the finite-difference phases are skipped;
  // the Objective is still used for plain value queries during line search.
  std::function<std::optional<double>(const Eigen::VectorXd&, Eigen::VectorXd&)>
      value_and_gradient;
};

struct BoxMinimizeResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd gradient;    // central-difference gradient at x
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  std::string message;
};

// Quasi-Newton minimization with box constraints: L-BFGS directions, trial
// points projected onto the box, Armijo backtracking on the projected path.
// Convergence requires both the projected-gradient max-norm under
// gradient_tolerance and the relative objective change under
// relative_change_tolerance. Failed evaluations (nullopt) reject the trial
// point; a nullopt at the start point gives converged = false immediately.
BoxMinimizeResult box_minimize(const Objective& f, const Eigen::VectorXd& x0,
                               const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                               const BoxMinimizeOptions& options = {});

}  // namespace pblsgm
