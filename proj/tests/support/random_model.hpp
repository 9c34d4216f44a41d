#pragma once

// Random-but-valid model instances used by the moments/likelihood oracles.

#include <algorithm>
#include <random>

#include "pblsgm/params.hpp"
#include "pblsgm/types.hpp"
#include "support/oracles.hpp"

namespace builders {

inline pblsgm::ReparamParams random_reparam(const pblsgm::ModelSpec& spec,
                                            std::mt19937_64& rng) {
  using namespace pblsgm;
  std::uniform_real_distribution<double> mu0(40.0, 120.0), slope(-3.0, 5.0),
      knot(1.0, 8.0), theta(0.3, 2.0);
  std::uniform_real_distribution<double> resid_corr(-0.4, 0.4);

  const int n_out = static_cast<int>(spec.outcomes.size());
  const int qy = factor_count(spec.outcomes[0].shape);
  const int qz = n_out == 2 ? factor_count(spec.outcomes[1].shape) : 1;
  oracle::StackedCov cov = oracle::random_stacked_cov(qy, qz, rng);

  ReparamParams p;
  p.outcome.resize(n_out);
  for (int u = 0; u < n_out; ++u) {
    auto& o = p.outcome[u];
    o.shape = spec.outcomes[u].shape;
    switch (o.shape) {
      case TrajectoryShape::BilinearRandomKnot:
      case TrajectoryShape::BilinearFixedKnot:
        o.mean = Eigen::Vector3d(mu0(rng), slope(rng), slope(rng));
        o.knot = knot(rng);
        break;
      case TrajectoryShape::Linear:
        o.mean = Eigen::Vector2d(mu0(rng), slope(rng));
        break;
      case TrajectoryShape::Quadratic:
        o.mean = Eigen::Vector3d(mu0(rng), slope(rng), slope(rng) / 4.0);
        break;
    }
    o.psi = u == 0 ? cov.yy : cov.zz;
    o.theta_eps = theta(rng);
  }
  if (n_out == 2) {
    p.psi_cross = cov.yz;
    p.theta_eps_cross = resid_corr(rng) *
        std::sqrt(p.outcome[0].theta_eps * p.outcome[1].theta_eps);
  }
  return p;
}

inline pblsgm::IndividualRecord random_record(const pblsgm::ModelSpec& spec,
                                              std::mt19937_64& rng,
                                              double missing_prob = 0.0) {
  using namespace pblsgm;
  std::uniform_real_distribution<double> tdraw(0.0, 9.0), v(80.0, 130.0);
  std::bernoulli_distribution miss(missing_prob);

  IndividualRecord rec;
  rec.id = "r";
  std::vector<double> ts(spec.waves);
  for (auto& t : ts) t = tdraw(rng);
  std::sort(ts.begin(), ts.end());
  rec.times.resize(spec.waves);
  for (int j = 0; j < spec.waves; ++j) rec.times(j) = ts[j] + 1e-3 * j;

  const int n_out = static_cast<int>(spec.outcomes.size());
  rec.values.resize(n_out);
  rec.observed.resize(n_out);
  for (int u = 0; u < n_out; ++u) {
    rec.values[u].resize(spec.waves);
    rec.observed[u].assign(spec.waves, true);
    for (int j = 0; j < spec.waves; ++j) {
      rec.values[u](j) = v(rng);
      if (miss(rng)) rec.observed[u][j] = false;
    }
  }
  if (rec.observed_count() == 0) rec.observed[0][0] = true;
  return rec;
}

}  // namespace builders
