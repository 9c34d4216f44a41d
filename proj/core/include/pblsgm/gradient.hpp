#pragma once

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

#include "pblsgm/parameter_map.hpp"
#include "pblsgm/params.hpp"
#include "pblsgm/types.hpp"

namespace pblsgm {

// Shared-workspace FIML evaluator: the sample log likelihood and its exact
// gradient with respect to the packed reparameterized parameter vector, in
// one pass over the data. The knot coordinates are differentiable wherever no
// measurement time sits exactly on a knot, which holds almost surely for
// jittered designs. Far cheaper than finite differences for optimizer and
// curvature use; loglik_sample stays the simple reference implementation.
class FimlEvaluator {
 public:
  FimlEvaluator(const ModelSpec& spec, const Dataset& data, const ParameterMap& map);

  // Sum of individual log likelihoods; nullopt when any individual's implied
  // covariance fails to factor. Deterministic fixed-order accumulation.
  std::optional<double> value(const Eigen::VectorXd& x);
  // Value plus the gradient d loglik / dx written into grad (resized to
  // map.size()). On nullopt the gradient content is unspecified.
  std::optional<double> value_and_gradient(const Eigen::VectorXd& x,
                                           Eigen::VectorXd& grad);

  int sample_size() const { return static_cast<int>(records_.size()); }

 private:
  struct RecordView {
    std::vector<Eigen::VectorXd> times;          // observed times per outcome
    Eigen::VectorXd x;                           // stacked observed values
    std::vector<std::pair<int, int>> same_wave;  // rows in y block / z block
    std::vector<int> offset;                     // block starts, plus total m
  };

  std::optional<double> evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* grad);

  const ModelSpec& spec_;
  const ParameterMap& map_;
  std::vector<RecordView> records_;
  int n_out_;
  std::vector<int> q_;      // factors per outcome
  std::vector<int> foff_;   // factor block offsets in the stacked covariance
  int q_total_ = 0;
  int max_m_ = 0;

  // per-evaluate scratch, sized once
  Eigen::MatrixXd psibar_, sigma_, w_, u_, m_, t1_, bb_;
  std::vector<Eigen::MatrixXd> lam_;
  Eigen::VectorXd mu_, resid_, qvec_, svec_, g1_, g2_;
  std::vector<Eigen::VectorXd> fmean_;
  std::vector<Eigen::VectorXd> meang_;
  std::vector<Eigen::MatrixXd> psig_;
  Eigen::MatrixXd crossg_;
  std::vector<double> knotg_, thetag_;
  double thetacrossg_ = 0.0;
};

}  // namespace pblsgm
