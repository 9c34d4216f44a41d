#pragma once

#include <optional>

#include "pblsgm/moments.hpp"
#include "pblsgm/params.hpp"
#include "pblsgm/types.hpp"

namespace pblsgm {

// Full-information Gaussian log-likelihood of one individual's observed cells:
//   -(m/2) log(2*pi) - log|Sigma_i|/2 - (x - mu)' Sigma_i^{-1} (x - mu)/2
// with m the number of observed cells. Returns nullopt when the implied
// covariance is not positive definite; callers treat that as an evaluation
// failure, not an error.
std::optional<double> loglik_individual(const IndividualRecord& record,
                                        const ModelSpec& spec,
                                        const ReparamParams& params);

// Sum over individuals. The reduction sorts the contributions before a
// compensated sum, so the value is invariant to the ordering of the dataset.
// nullopt if any individual's covariance fails to factor.
std::optional<double> loglik_sample(const Dataset& data, const ModelSpec& spec,
                                    const ReparamParams& params);

}  // namespace pblsgm
