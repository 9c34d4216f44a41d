#include "pblsgm/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace pblsgm {

namespace {

Eigen::VectorXd clamp_to_box(const Eigen::VectorXd& x, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

// Gradient of the box-constrained problem: components that push out of an
// active bound are dropped.
Eigen::VectorXd project_gradient(const Eigen::VectorXd& g, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& lower,
                                 const Eigen::VectorXd& upper) {
  Eigen::VectorXd pg = g;
  for (int i = 0; i < x.size(); ++i) {
    if (x(i) <= lower(i) && g(i) > 0.0) pg(i) = 0.0;
    if (x(i) >= upper(i) && g(i) < 0.0) pg(i) = 0.0;
  }
  return pg;
}

struct Pair {
  Eigen::VectorXd s, y;
  double rho;
};

// Standard two-loop recursion; the initial Hessian is gamma * I.
Eigen::VectorXd lbfgs_direction(const Eigen::VectorXd& g, const std::deque<Pair>& hist,
                                double gamma) {
  Eigen::VectorXd q = g;
  std::vector<double> alpha(hist.size());
  for (int i = static_cast<int>(hist.size()) - 1; i >= 0; --i) {
    alpha[i] = hist[i].rho * hist[i].s.dot(q);
    q -= alpha[i] * hist[i].y;
  }
  q *= gamma;
  for (size_t i = 0; i < hist.size(); ++i) {
    const double beta = hist[i].rho * hist[i].y.dot(q);
    q += (alpha[i] - beta) * hist[i].s;
  }
  return -q;
}

}  // namespace

BoxMinimizeResult box_minimize(const Objective& f, const Eigen::VectorXd& x0,
                               const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                               const BoxMinimizeOptions& options) {
  BoxMinimizeResult res;
  int evaluations = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evaluations;
    return f(x);
  };

  Eigen::VectorXd x = clamp_to_box(x0, lower, upper);
  auto fx_opt = eval(x);
  if (!fx_opt) {
    res.x = x;
    res.evaluations = evaluations;
    res.message = "objective evaluation failed at the start point";
    return res;
  }
  double fx = *fx_opt;

  // An exact gradient counts as already-polished: the central-difference
  // switchover logic is skipped and the final gradient is reused as-is.
  bool central = options.value_and_gradient != nullptr;
  auto gradient = [&](const Eigen::VectorXd& at, double f_at)
      -> std::optional<Eigen::VectorXd> {
    if (options.value_and_gradient) {
      ++evaluations;
      Eigen::VectorXd g_at(at.size());
      if (!options.value_and_gradient(at, g_at)) return std::nullopt;
      return g_at;
    }
    if (central) return fd_gradient_central(eval, at, options.fd);
    auto g = fd_gradient_forward(eval, at, f_at, options.fd);
    if (!g) g = fd_gradient_central(eval, at, options.fd);
    return g;
  };

  auto g_opt = gradient(x, fx);
  if (!g_opt) {
    res.x = x;
    res.f = fx;
    res.evaluations = evaluations;
    res.message = "gradient evaluation failed at the start point";
    return res;
  }
  Eigen::VectorXd g = *g_opt;

  std::deque<Pair> hist;
  double gamma = 1.0 / std::max(1.0, g.lpNorm<Eigen::Infinity>());
  double rel_change = std::numeric_limits<double>::infinity();
  const double c1 = 1e-4;
  std::string stop_reason = "iteration budget exhausted";

  int iter = 0;
  while (iter < options.max_iterations) {
    Eigen::VectorXd pg = project_gradient(g, x, lower, upper);
    const double pg_norm = pg.lpNorm<Eigen::Infinity>();

    if (!central && pg_norm <= options.central_switch_factor * options.gradient_tolerance) {
      central = true;
      auto polished = gradient(x, fx);
      if (!polished) {
        stop_reason = "gradient evaluation failed while polishing";
        break;
      }
      g = *polished;
      continue;
    }
    if (pg_norm <= options.gradient_tolerance &&
        rel_change <= options.relative_change_tolerance) {
      res.converged = true;
      stop_reason = "converged";
      break;
    }
    ++iter;

    Eigen::VectorXd d = lbfgs_direction(pg, hist, gamma);
    // drop components that would immediately leave the box
    for (int i = 0; i < x.size(); ++i) {
      if (x(i) <= lower(i) && d(i) < 0.0) d(i) = 0.0;
      if (x(i) >= upper(i) && d(i) > 0.0) d(i) = 0.0;
    }
    if (d.dot(pg) >= 0.0) {
      hist.clear();
      d = -pg;
    }
    if (d.lpNorm<Eigen::Infinity>() == 0.0) {
      // nothing can move: the point is a constrained first-order point iff the
      // projected gradient is already at tolerance
      res.converged = pg_norm <= options.gradient_tolerance;
      stop_reason = res.converged ? "converged" : "no feasible descent direction";
      break;
    }

    // Armijo backtracking along the projected path; a trial is accepted only
    // if its objective and gradient both evaluate.
    double alpha = 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new, g_new;
    double f_new = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      Eigen::VectorXd trial = clamp_to_box(x + alpha * d, lower, upper);
      Eigen::VectorXd step = trial - x;
      if (step.lpNorm<Eigen::Infinity>() == 0.0) break;
      auto ft = eval(trial);
      if (ft && *ft <= fx + c1 * g.dot(step)) {
        auto gt = gradient(trial, *ft);
        if (gt) {
          x_new = std::move(trial);
          f_new = *ft;
          g_new = std::move(*gt);
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (!central) {
        central = true;
        auto polished = gradient(x, fx);
        if (!polished) {
          stop_reason = "gradient evaluation failed while polishing";
          break;
        }
        g = *polished;
        continue;
      }
      res.converged = pg_norm <= options.gradient_tolerance;
      stop_reason = res.converged ? "converged" : "line search found no acceptable step";
      break;
    }

    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-10 * s.norm() * yv.norm()) {
      hist.push_back({s, yv, 1.0 / sy});
      if (static_cast<int>(hist.size()) > options.memory) hist.pop_front();
      gamma = sy / yv.squaredNorm();
    }
    rel_change = std::abs(fx - f_new) / (1.0 + std::abs(f_new));
    x = std::move(x_new);
    fx = f_new;
    g = std::move(g_new);
  }

  res.x = x;
  res.f = fx;
  res.iterations = iter;
  res.message = stop_reason;

  if (central) {
    res.gradient = g;
  } else {
    auto final_g = fd_gradient_central(eval, x, options.fd);
    res.gradient = final_g ? *final_g : g;
  }
  res.evaluations = evaluations;
  return res;
}

}  // namespace pblsgm
