#include "pblsgm/gradient.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pblsgm/trajectory.hpp"

namespace pblsgm {

namespace {

// Same loading definitions as trajectory.cpp, written into a preallocated
// block; the shared reference tests pin the two implementations together.
void fill_loadings(const Eigen::VectorXd& t, const OutcomeParams& o,
                   Eigen::Ref<Eigen::MatrixXd> out) {
  const int rows = static_cast<int>(t.size());
  switch (o.shape) {
    case TrajectoryShape::BilinearRandomKnot:
      for (int j = 0; j < rows; ++j) {
        const double d = t(j) - o.knot;
        out(j, 0) = 1.0;
        out(j, 1) = d;
        out(j, 2) = std::abs(d);
        out(j, 3) = -o.mean(2) - o.mean(2) * sign0(d);
      }
      return;
    case TrajectoryShape::BilinearFixedKnot:
      for (int j = 0; j < rows; ++j) {
        const double d = t(j) - o.knot;
        out(j, 0) = 1.0;
        out(j, 1) = d;
        out(j, 2) = std::abs(d);
      }
      return;
    case TrajectoryShape::Linear:
      for (int j = 0; j < rows; ++j) {
        out(j, 0) = 1.0;
        out(j, 1) = t(j);
      }
      return;
    case TrajectoryShape::Quadratic:
      for (int j = 0; j < rows; ++j) {
        out(j, 0) = 1.0;
        out(j, 1) = t(j);
        out(j, 2) = t(j) * t(j);
      }
      return;
  }
  throw std::invalid_argument("unknown trajectory shape");
}

}  // namespace

FimlEvaluator::FimlEvaluator(const ModelSpec& spec, const Dataset& data,
                             const ParameterMap& map)
    : spec_(spec), map_(map) {
  spec_.validate();
  validate_dataset(data, spec_);
  n_out_ = static_cast<int>(spec_.outcomes.size());
  q_.resize(n_out_);
  foff_.assign(n_out_ + 1, 0);
  for (int u = 0; u < n_out_; ++u) {
    q_[u] = factor_count(spec_.outcomes[u].shape);
    foff_[u + 1] = foff_[u] + q_[u];
  }
  q_total_ = foff_[n_out_];

  records_.reserve(data.size());
  for (const auto& rec : data) {
    RecordView view;
    view.offset.assign(n_out_ + 1, 0);
    std::vector<std::vector<int>> kept(n_out_);
    for (int u = 0; u < n_out_; ++u) {
      for (int j = 0; j < spec_.waves; ++j)
        if (rec.observed[u][j]) kept[u].push_back(j);
      view.offset[u + 1] = view.offset[u] + static_cast<int>(kept[u].size());
    }
    const int m = view.offset[n_out_];
    view.times.resize(n_out_);
    view.x.resize(m);
    int cell = 0;
    for (int u = 0; u < n_out_; ++u) {
      view.times[u].resize(kept[u].size());
      for (size_t r = 0; r < kept[u].size(); ++r) {
        view.times[u](static_cast<int>(r)) = rec.times(kept[u][r]);
        view.x(cell++) = rec.values[u](kept[u][r]);
      }
    }
    if (n_out_ == 2) {
      size_t ry = 0, rz = 0;
      while (ry < kept[0].size() && rz < kept[1].size()) {
        if (kept[0][ry] == kept[1][rz]) {
          view.same_wave.emplace_back(static_cast<int>(ry), static_cast<int>(rz));
          ++ry;
          ++rz;
        } else if (kept[0][ry] < kept[1][rz]) {
          ++ry;
        } else {
          ++rz;
        }
      }
    }
    max_m_ = std::max(max_m_, m);
    records_.push_back(std::move(view));
  }

  psibar_.resize(q_total_, q_total_);
  sigma_.resize(max_m_, max_m_);
  w_.resize(max_m_, max_m_);
  u_.resize(max_m_, q_total_);
  m_.resize(q_total_, q_total_);
  t1_.resize(max_m_, q_total_);
  bb_.resize(max_m_, max_m_);
  lam_.resize(n_out_);
  for (int u = 0; u < n_out_; ++u) lam_[u].resize(max_m_, q_[u]);
  mu_.resize(max_m_);
  resid_.resize(max_m_);
  qvec_.resize(max_m_);
  svec_.resize(max_m_);
  g1_.resize(q_total_);
  g2_.resize(q_total_);
  fmean_.resize(n_out_);
  meang_.resize(n_out_);
  psig_.resize(n_out_);
  knotg_.resize(n_out_);
  thetag_.resize(n_out_);
}

std::optional<double> FimlEvaluator::value(const Eigen::VectorXd& x) {
  return evaluate(x, nullptr);
}

std::optional<double> FimlEvaluator::value_and_gradient(const Eigen::VectorXd& x,
                                                        Eigen::VectorXd& grad) {
  grad.resize(map_.size());
  return evaluate(x, &grad);
}

std::optional<double> FimlEvaluator::evaluate(const Eigen::VectorXd& x,
                                              Eigen::VectorXd* grad) {
  const ReparamParams p = map_.unpack(x);
  for (int u = 0; u < n_out_; ++u) {
    fmean_[u] = factor_mean(p.outcome[u]);
    psibar_.block(foff_[u], foff_[u], q_[u], q_[u]) = p.outcome[u].psi;
  }
  if (n_out_ == 2) {
    psibar_.block(foff_[0], foff_[1], q_[0], q_[1]) = p.psi_cross;
    psibar_.block(foff_[1], foff_[0], q_[1], q_[0]) = p.psi_cross.transpose();
  }

  const bool want_grad = grad != nullptr;
  if (want_grad) {
    for (int u = 0; u < n_out_; ++u) {
      meang_[u] = Eigen::VectorXd::Zero(p.outcome[u].mean.size());
      psig_[u] = Eigen::MatrixXd::Zero(q_[u], q_[u]);
      knotg_[u] = 0.0;
      thetag_[u] = 0.0;
    }
    if (n_out_ == 2) crossg_ = Eigen::MatrixXd::Zero(q_[0], q_[1]);
    thetacrossg_ = 0.0;
  }

  const double log2pi = std::log(2.0 * std::numbers::pi);
  double total = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt;

  for (const RecordView& rec : records_) {
    const int m = rec.offset[n_out_];
    auto sigma = sigma_.topLeftCorner(m, m);

    for (int u = 0; u < n_out_; ++u) {
      const int ru = rec.offset[u + 1] - rec.offset[u];
      fill_loadings(rec.times[u], p.outcome[u], lam_[u].topRows(ru));
      mu_.segment(rec.offset[u], ru).noalias() = lam_[u].topRows(ru) * fmean_[u];

      t1_.topLeftCorner(ru, q_[u]).noalias() =
          lam_[u].topRows(ru) * p.outcome[u].psi;
      bb_.topLeftCorner(ru, ru).noalias() =
          t1_.topLeftCorner(ru, q_[u]) * lam_[u].topRows(ru).transpose();
      for (int r = 0; r < ru; ++r)
        for (int c = 0; c <= r; ++c) {
          sigma(rec.offset[u] + r, rec.offset[u] + c) = bb_(r, c);
          sigma(rec.offset[u] + c, rec.offset[u] + r) = bb_(r, c);
        }
      for (int r = 0; r < ru; ++r)
        sigma(rec.offset[u] + r, rec.offset[u] + r) += p.outcome[u].theta_eps;
    }
    if (n_out_ == 2) {
      const int r0 = rec.offset[1] - rec.offset[0];
      const int r1 = rec.offset[2] - rec.offset[1];
      t1_.topLeftCorner(r0, q_[1]).noalias() = lam_[0].topRows(r0) * p.psi_cross;
      bb_.topLeftCorner(r0, r1).noalias() =
          t1_.topLeftCorner(r0, q_[1]) * lam_[1].topRows(r1).transpose();
      sigma.block(rec.offset[0], rec.offset[1], r0, r1) =
          bb_.topLeftCorner(r0, r1);
      sigma.block(rec.offset[1], rec.offset[0], r1, r0) =
          bb_.topLeftCorner(r0, r1).transpose();
      for (const auto& [py, pz] : rec.same_wave) {
        sigma(rec.offset[0] + py, rec.offset[1] + pz) += p.theta_eps_cross;
        sigma(rec.offset[1] + pz, rec.offset[0] + py) += p.theta_eps_cross;
      }
    }

    llt.compute(sigma);
    if (llt.info() != Eigen::Success) return std::nullopt;
    double logdet = 0.0;
    const auto& lfac = llt.matrixLLT();
    for (int i = 0; i < m; ++i) {
      const double d = lfac(i, i);
      if (!(d > 0.0)) return std::nullopt;
      logdet += 2.0 * std::log(d);
    }
    resid_.head(m) = rec.x - mu_.head(m);
    qvec_.head(m) = resid_.head(m);
    llt.matrixL().solveInPlace(qvec_.head(m));
    const double quad = qvec_.head(m).squaredNorm();
    total += -0.5 * m * log2pi - 0.5 * logdet - 0.5 * quad;
    if (!want_grad) continue;

    // finish the solve: qvec = Sigma^{-1} r, then W = Sigma^{-1} - q q'
    llt.matrixU().solveInPlace(qvec_.head(m));
    auto w = w_.topLeftCorner(m, m);
    w.setIdentity();
    llt.solveInPlace(w);
    w.noalias() -= qvec_.head(m) * qvec_.head(m).transpose();

    // U = W Lambda-bar and M = Lambda-bar' U over the stacked factor blocks
    auto uview = u_.topLeftCorner(m, q_total_);
    for (int v = 0; v < n_out_; ++v) {
      const int rv = rec.offset[v + 1] - rec.offset[v];
      uview.middleCols(foff_[v], q_[v]).noalias() =
          w.middleCols(rec.offset[v], rv) * lam_[v].topRows(rv);
    }
    for (int u = 0; u < n_out_; ++u) {
      const int ru = rec.offset[u + 1] - rec.offset[u];
      for (int v = 0; v < n_out_; ++v)
        m_.block(foff_[u], foff_[v], q_[u], q_[v]).noalias() =
            lam_[u].topRows(ru).transpose() *
            uview.block(rec.offset[u], foff_[v], ru, q_[v]);
    }

    for (int u = 0; u < n_out_; ++u) {
      const int ru = rec.offset[u + 1] - rec.offset[u];
      const OutcomeParams& o = p.outcome[u];
      const auto qu = qvec_.segment(rec.offset[u], ru);

      // growth-factor means enter the model mean through the leading columns
      const int nm = static_cast<int>(o.mean.size());
      meang_[u].noalias() += lam_[u].topRows(ru).leftCols(nm).transpose() * qu;

      // psi cells: d Sigma = lambda_i lambda_j' (+ transpose off-diagonal)
      for (int i = 0; i < q_[u]; ++i) {
        psig_[u](i, i) -= 0.5 * m_(foff_[u] + i, foff_[u] + i);
        for (int j = 0; j < i; ++j)
          psig_[u](i, j) -= m_(foff_[u] + i, foff_[u] + j);
      }

      // residual variance: d Sigma = identity on this outcome's rows
      double trw = 0.0;
      for (int r = 0; r < ru; ++r)
        trw += w(rec.offset[u] + r, rec.offset[u] + r);
      thetag_[u] -= 0.5 * trw;

      if (shape_has_knot(o.shape)) {
        // loading derivatives wrt the knot: columns (0, -1, -sign); wrt the
        // trailing slope mean (random-knot shape): column -(1 + sign)
        for (int r = 0; r < ru; ++r)
          svec_(r) = sign0(rec.times[u](r) - o.knot);
        const auto urows = uview.middleRows(rec.offset[u], ru);
        g1_.noalias() = urows.colwise().sum().transpose();
        g2_.noalias() = urows.transpose() * svec_.head(ru);

        const double sumq = qu.sum();
        const double qs = qu.dot(svec_.head(ru));
        double kg = -o.mean(1) * sumq - o.mean(2) * qs;
        kg += psibar_.row(foff_[u] + 1).dot(g1_) +
              psibar_.row(foff_[u] + 2).dot(g2_);
        knotg_[u] += kg;

        if (o.shape == TrajectoryShape::BilinearRandomKnot)
          meang_[u](2) += psibar_.row(foff_[u] + 3).dot(g1_) +
                          psibar_.row(foff_[u] + 3).dot(g2_);
      }
    }
    if (n_out_ == 2) {
      crossg_ -= m_.block(foff_[0], foff_[1], q_[0], q_[1]);
      for (const auto& [py, pz] : rec.same_wave)
        thetacrossg_ -= w(rec.offset[0] + py, rec.offset[1] + pz);
    }
  }

  if (want_grad) {
    int slot = 0;
    for (int u = 0; u < n_out_; ++u) {
      for (int i = 0; i < meang_[u].size(); ++i) (*grad)(slot++) = meang_[u](i);
      if (shape_has_knot(spec_.outcomes[u].shape)) (*grad)(slot++) = knotg_[u];
      for (int r = 0; r < q_[u]; ++r)
        for (int c = 0; c <= r; ++c) (*grad)(slot++) = psig_[u](r, c);
    }
    if (n_out_ == 2)
      for (int r = 0; r < q_[0]; ++r)
        for (int c = 0; c < q_[1]; ++c) (*grad)(slot++) = crossg_(r, c);
    for (int u = 0; u < n_out_; ++u) (*grad)(slot++) = thetag_[u];
    if (n_out_ == 2) (*grad)(slot++) = thetacrossg_;
    if (slot != map_.size())
      throw std::logic_error("gradient layout disagrees with the parameter map");
  }
  return total;
}

}  // namespace pblsgm
