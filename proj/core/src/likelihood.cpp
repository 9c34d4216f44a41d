#include "pblsgm/likelihood.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "pblsgm/stats.hpp"

namespace pblsgm {

std::optional<double> loglik_individual(const IndividualRecord& record,
                                        const ModelSpec& spec,
                                        const ReparamParams& params) {
  ImpliedMoments mom = implied_moments(spec, record, params);
  const int m = static_cast<int>(mom.mean.size());
  if (m == 0) return std::nullopt;

  Eigen::VectorXd x(m);
  int cell = 0;
  for (size_t u = 0; u < record.observed.size(); ++u)
    for (int j = 0; j < spec.waves; ++j)
      if (record.observed[u][j]) x(cell++) = record.values[u](j);

  Eigen::LLT<Eigen::MatrixXd> llt(mom.cov);
  if (llt.info() != Eigen::Success) return std::nullopt;
  double logdet = 0.0;
  const auto& l = llt.matrixLLT();
  for (int i = 0; i < m; ++i) {
    const double d = l(i, i);
    if (!(d > 0.0)) return std::nullopt;
    logdet += 2.0 * std::log(d);
  }
  Eigen::VectorXd resid = x - mom.mean;
  llt.matrixL().solveInPlace(resid);
  const double quad = resid.squaredNorm();
  return -0.5 * m * std::log(2.0 * std::numbers::pi) - 0.5 * logdet - 0.5 * quad;
}

std::optional<double> loglik_sample(const Dataset& data, const ModelSpec& spec,
                                    const ReparamParams& params) {
  std::vector<double> contributions;
  contributions.reserve(data.size());
  for (const auto& record : data) {
    auto ll = loglik_individual(record, spec, params);
    if (!ll) return std::nullopt;
    contributions.push_back(*ll);
  }
  return stable_ordered_sum(std::move(contributions));
}

}  // namespace pblsgm
