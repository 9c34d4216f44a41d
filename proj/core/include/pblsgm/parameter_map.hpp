#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "pblsgm/params.hpp"
#include "pblsgm/types.hpp"

namespace pblsgm {

// Flat layout of the free parameters of a model, one slot per estimated
// scalar, in a fixed order:
//   per outcome: means (incl. the knot location when the shape has one),
//                then the lower triangle of psi row by row,
//   then the full cross block row-major (parallel models),
//   then residual variances and the cross residual covariance.
// The same slot layout carries both frames; slot names differ per frame
// (e.g. reparameterized "mu_knot_y" vs natural "mu_eta0_y" mean blocks, psi
// cells share indices). Knot slots are the only box-bounded coordinates.
class ParameterMap {
 public:
  ParameterMap(ModelSpec spec, std::vector<std::pair<double, double>> knot_bounds);

  int size() const { return static_cast<int>(reparam_names_.size()); }
  const ModelSpec& spec() const { return spec_; }
  const std::vector<std::string>& names_reparam() const { return reparam_names_; }
  const std::vector<std::string>& names_original() const { return original_names_; }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  // True for mean-block slots (incl. knots); retry perturbation treats these
  // multiplicatively tighter than covariance slots.
  const std::vector<bool>& is_mean_slot() const { return mean_slot_; }

  Eigen::VectorXd pack(const ReparamParams& p) const;
  ReparamParams unpack(const Eigen::VectorXd& x) const;
  Eigen::VectorXd pack_original(const OriginalParams& p) const;
  OriginalParams unpack_original(const Eigen::VectorXd& x) const;

 private:
  template <class Frame>
  Eigen::VectorXd pack_any(const Params<Frame>& p) const;
  template <class Frame>
  Params<Frame> unpack_any(const Eigen::VectorXd& x) const;

  ModelSpec spec_;
  std::vector<std::pair<double, double>> knot_bounds_;
  std::vector<std::string> reparam_names_;
  std::vector<std::string> original_names_;
  Eigen::VectorXd lower_, upper_;
  std::vector<bool> mean_slot_;
};

// Free-parameter count for a model spec (univariate random knot 15, fixed 11,
// linear 6, quadratic 10; parallel full 47, reduced 32, mixed 39, ...).
int free_parameter_count(const ModelSpec& spec);

}  // namespace pblsgm
