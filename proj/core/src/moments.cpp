#include "pblsgm/moments.hpp"

#include <stdexcept>
#include <vector>

#include "pblsgm/trajectory.hpp"

namespace pblsgm {

namespace {

std::vector<int> template_waves(const OutcomeSpec& outcome, int waves) {
  std::vector<int> keep;
  keep.reserve(waves);
  for (int j = 0; j < waves; ++j)
    if (outcome.observed.empty() || outcome.observed[j]) keep.push_back(j);
  return keep;
}

ImpliedMoments assemble(const ModelSpec& spec, const Eigen::VectorXd& times,
                        const ReparamParams& params,
                        const std::vector<std::vector<int>>& keep) {
  const int n_out = static_cast<int>(spec.outcomes.size());
  if (static_cast<int>(params.outcome.size()) != n_out)
    throw std::invalid_argument("parameter set does not match model spec");
  if (times.size() != spec.waves)
    throw std::invalid_argument("time vector length does not match wave count");

  std::vector<Eigen::MatrixXd> lam(n_out);
  std::vector<Eigen::VectorXd> fmean(n_out);
  std::vector<int> offset(n_out + 1, 0);
  for (int u = 0; u < n_out; ++u) {
    const auto& rows = keep[u];
    Eigen::VectorXd tu(rows.size());
    for (size_t r = 0; r < rows.size(); ++r) tu(r) = times(rows[r]);
    lam[u] = loadings(tu, params.outcome[u]);
    fmean[u] = factor_mean(params.outcome[u]);
    offset[u + 1] = offset[u] + static_cast<int>(rows.size());
  }
  const int m = offset[n_out];

  ImpliedMoments out;
  out.mean.resize(m);
  out.cov.resize(m, m);
  for (int u = 0; u < n_out; ++u) {
    const int ru = static_cast<int>(keep[u].size());
    out.mean.segment(offset[u], ru) = lam[u] * fmean[u];
    for (int v = 0; v <= u; ++v) {
      const int rv = static_cast<int>(keep[v].size());
      Eigen::MatrixXd psi;
      if (u == v) {
        psi = params.outcome[u].psi;
      } else {
        // stored orientation is (factors of outcome 0) x (factors of outcome 1)
        psi = params.psi_cross.transpose();
      }
      Eigen::MatrixXd block = lam[u] * psi * lam[v].transpose();
      if (u == v) {
        // mirror the lower triangle so the result is exactly symmetric
        for (int r = 0; r < ru; ++r)
          for (int c = 0; c <= r; ++c) {
            out.cov(offset[u] + r, offset[v] + c) = block(r, c);
            out.cov(offset[v] + c, offset[u] + r) = block(r, c);
          }
      } else {
        out.cov.block(offset[u], offset[v], ru, rv) = block;
        out.cov.block(offset[v], offset[u], rv, ru) = block.transpose();
      }
    }
    for (int r = 0; r < ru; ++r)
      out.cov(offset[u] + r, offset[u] + r) += params.outcome[u].theta_eps;
  }

  if (n_out == 2) {
    // residuals of the two outcomes covary only within the same wave
    const auto& ky = keep[0];
    const auto& kz = keep[1];
    size_t ry = 0, rz = 0;
    while (ry < ky.size() && rz < kz.size()) {
      if (ky[ry] == kz[rz]) {
        const int iy = offset[0] + static_cast<int>(ry);
        const int iz = offset[1] + static_cast<int>(rz);
        out.cov(iy, iz) += params.theta_eps_cross;
        out.cov(iz, iy) += params.theta_eps_cross;
        ++ry;
        ++rz;
      } else if (ky[ry] < kz[rz]) {
        ++ry;
      } else {
        ++rz;
      }
    }
  }

  return out;
}

}  // namespace

ImpliedMoments implied_moments(const ModelSpec& spec, const Eigen::VectorXd& times,
                               const ReparamParams& params) {
  std::vector<std::vector<int>> keep;
  keep.reserve(spec.outcomes.size());
  for (const auto& outcome : spec.outcomes)
    keep.push_back(template_waves(outcome, spec.waves));
  return assemble(spec, times, params, keep);
}

ImpliedMoments implied_moments(const ModelSpec& spec, const IndividualRecord& record,
                               const ReparamParams& params) {
  if (record.observed.size() != spec.outcomes.size())
    throw std::invalid_argument("record does not match model spec");
  std::vector<std::vector<int>> keep(spec.outcomes.size());
  for (size_t u = 0; u < spec.outcomes.size(); ++u) {
    keep[u].reserve(spec.waves);
    for (int j = 0; j < spec.waves; ++j)
      if (record.observed[u][j]) keep[u].push_back(j);
  }
  return assemble(spec, record.times, params, keep);
}

}  // namespace pblsgm
