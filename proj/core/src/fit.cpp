#include "pblsgm/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include "pblsgm/gradient.hpp"
#include "pblsgm/likelihood.hpp"
#include "pblsgm/numdiff.hpp"
#include "pblsgm/optimizer.hpp"
#include "pblsgm/reparam.hpp"
#include "pblsgm/stats.hpp"

namespace pblsgm {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> factor_names(const OutcomeSpec& o) {
  switch (o.shape) {
    case TrajectoryShape::BilinearRandomKnot:
      return {"intercept_" + o.name, "slope1_" + o.name, "slope2_" + o.name,
              "knot_" + o.name};
    case TrajectoryShape::BilinearFixedKnot:
      return {"intercept_" + o.name, "slope1_" + o.name, "slope2_" + o.name};
    case TrajectoryShape::Linear:
      return {"intercept_" + o.name, "slope_" + o.name};
    case TrajectoryShape::Quadratic:
      return {"intercept_" + o.name, "linear_" + o.name, "quad_" + o.name};
  }
  throw std::invalid_argument("unknown trajectory shape");
}

// The optimizer works on the mean negative log-likelihood per individual; the
// scaling keeps gradient tolerances meaningful independently of the sample
// size. Both callbacks share one evaluator and its workspaces.
Objective scaled_value(FimlEvaluator& eval, double n) {
  return [&eval, n](const Eigen::VectorXd& x) -> std::optional<double> {
    auto v = eval.value(x);
    if (!v) return std::nullopt;
    return -*v / n;
  };
}

void check_identified(const Dataset& data, const ModelSpec& spec) {
  for (size_t u = 0; u < spec.outcomes.size(); ++u) {
    std::vector<double> times;
    for (const auto& rec : data)
      for (int j = 0; j < spec.waves; ++j)
        if (rec.observed[u][j]) times.push_back(rec.times(j));
    std::sort(times.begin(), times.end());
    int distinct = 0;
    for (size_t i = 0; i < times.size(); ++i)
      if (i == 0 || times[i] - times[i - 1] > 1e-9) ++distinct;
    if (distinct < factor_count(spec.outcomes[u].shape))
      throw std::invalid_argument(
          "outcome '" + spec.outcomes[u].name + "' has only " +
          std::to_string(distinct) +
          " distinct observed times; the trajectory shape needs at least " +
          std::to_string(factor_count(spec.outcomes[u].shape)));
  }
}

Eigen::VectorXd perturbed_start(const Eigen::VectorXd& x0, const ParameterMap& map,
                                std::uint64_t seed, int attempt) {
  std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(attempt));
  std::normal_distribution<double> normal;
  Eigen::VectorXd x = x0;
  for (int i = 0; i < x.size(); ++i) {
    const double v = x0(i);
    if (map.is_mean_slot()[i])
      x(i) = v + (0.05 + 0.05 * std::abs(v)) * normal(rng);
    else
      x(i) = v * (1.0 + 0.3 * normal(rng)) + 0.05 * normal(rng);
    x(i) = std::min(std::max(x(i), map.lower()(i)), map.upper()(i));
  }
  return x;
}

}  // namespace

FitIndices fit_indices(double minus2ll, int n_params, int n) {
  FitIndices out;
  out.minus2ll = minus2ll;
  out.n_params = n_params;
  out.n = n;
  out.aic = minus2ll + 2.0 * n_params;
  out.bic = minus2ll + n_params * std::log(static_cast<double>(n));
  return out;
}

std::pair<double, double> observed_time_range(const Dataset& data) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& rec : data)
    for (size_t u = 0; u < rec.observed.size(); ++u)
      for (size_t j = 0; j < rec.observed[u].size(); ++j)
        if (rec.observed[u][j]) {
          lo = std::min(lo, rec.times(j));
          hi = std::max(hi, rec.times(j));
        }
  if (!(lo <= hi)) throw std::invalid_argument("dataset has no observed cells");
  return {lo, hi};
}

ImproprietyReport detect_improper(const OriginalParams& original,
                                  const ReparamParams& /*reparam*/,
                                  const ModelSpec& spec) {
  ImproprietyReport rep;
  Eigen::MatrixXd psi = stacked_psi(original);
  std::vector<std::string> names;
  for (const auto& o : spec.outcomes) {
    auto f = factor_names(o);
    names.insert(names.end(), f.begin(), f.end());
  }
  const int q = static_cast<int>(psi.rows());
  for (int i = 0; i < q; ++i)
    if (psi(i, i) < 0.0) rep.negative_variances.push_back(names[i]);
  for (int i = 0; i < q; ++i)
    for (int j = i + 1; j < q; ++j) {
      if (psi(i, i) <= 0.0 || psi(j, j) <= 0.0) continue;
      const double corr = psi(i, j) / std::sqrt(psi(i, i) * psi(j, j));
      if (std::abs(corr) > 1.0)
        rep.extreme_correlations.emplace_back(names[i], names[j]);
    }
  return rep;
}

ReparamParams heuristic_starts(const Dataset& data, const ModelSpec& spec) {
  spec.validate();
  validate_dataset(data, spec);
  const auto range = observed_time_range(data);
  const double mid = 0.5 * (range.first + range.second);

  ReparamParams p;
  p.outcome.resize(spec.outcomes.size());
  for (size_t u = 0; u < spec.outcomes.size(); ++u) {
    auto& o = p.outcome[u];
    o.shape = spec.outcomes[u].shape;

    // pooled observations and per-wave dispersion
    std::vector<double> ts, ys;
    std::vector<double> wave_mean(spec.waves, 0.0), wave_m2(spec.waves, 0.0);
    std::vector<int> wave_n(spec.waves, 0);
    std::vector<double> crude_slopes;
    for (const auto& rec : data) {
      int first = -1, last = -1;
      for (int j = 0; j < spec.waves; ++j) {
        if (!rec.observed[u][j]) continue;
        const double t = rec.times(j), y = rec.values[u](j);
        ts.push_back(t);
        ys.push_back(y);
        ++wave_n[j];
        const double d = y - wave_mean[j];
        wave_mean[j] += d / wave_n[j];
        wave_m2[j] += d * (y - wave_mean[j]);
        if (first < 0) first = j;
        last = j;
      }
      if (first >= 0 && last != first &&
          rec.times(last) - rec.times(first) > 1e-9)
        crude_slopes.push_back((rec.values[u](last) - rec.values[u](first)) /
                               (rec.times(last) - rec.times(first)));
    }

    // pooled regression of the mean curve
    const int q = factor_count(o.shape);
    const int ncol = o.shape == TrajectoryShape::Linear ? 2 : 3;
    Eigen::MatrixXd design(ts.size(), ncol);
    Eigen::VectorXd y(ts.size());
    for (size_t i = 0; i < ts.size(); ++i) {
      const double t = ts[i];
      y(i) = ys[i];
      switch (o.shape) {
        case TrajectoryShape::BilinearRandomKnot:
        case TrajectoryShape::BilinearFixedKnot:
          design(i, 0) = 1.0;
          design(i, 1) = t - mid;
          design(i, 2) = std::abs(t - mid);
          break;
        case TrajectoryShape::Linear:
          design(i, 0) = 1.0;
          design(i, 1) = t;
          break;
        case TrajectoryShape::Quadratic:
          design(i, 0) = 1.0;
          design(i, 1) = t;
          design(i, 2) = t * t;
          break;
      }
    }
    o.mean = design.colPivHouseholderQr().solve(y);
    o.knot = shape_has_knot(o.shape) ? mid : kNan;

    double var_first = 1.0, var_sum = 0.0;
    int var_waves = 0;
    bool first_seen = false;
    for (int j = 0; j < spec.waves; ++j) {
      if (wave_n[j] < 2) continue;
      const double v = wave_m2[j] / (wave_n[j] - 1);
      if (!first_seen) {
        var_first = v;
        first_seen = true;
      }
      var_sum += v;
      ++var_waves;
    }
    const double pooled_var = var_waves > 0 ? var_sum / var_waves : 1.0;
    double slope_var = 0.25;
    if (crude_slopes.size() >= 2) {
      double m = 0.0, m2 = 0.0;
      int k = 0;
      for (double s : crude_slopes) {
        ++k;
        const double d = s - m;
        m += d / k;
        m2 += d * (s - m);
      }
      slope_var = m2 / (k - 1);
    }

    Eigen::VectorXd diag(q);
    const double v0 = std::max(0.5 * var_first, 0.05);
    const double vs = std::max(0.5 * slope_var, 0.01);
    switch (o.shape) {
      case TrajectoryShape::BilinearRandomKnot:
        diag << v0, vs, vs, 0.04;
        break;
      case TrajectoryShape::BilinearFixedKnot:
        diag << v0, vs, vs;
        break;
      case TrajectoryShape::Linear:
        diag << v0, vs;
        break;
      case TrajectoryShape::Quadratic:
        diag << v0, vs, std::max(vs / 8.0, 1e-3);
        break;
    }
    o.psi = diag.asDiagonal();
    o.theta_eps = std::max(0.25 * pooled_var, 0.05);
  }

  if (spec.parallel()) {
    p.psi_cross = Eigen::MatrixXd::Zero(factor_count(spec.outcomes[0].shape),
                                        factor_count(spec.outcomes[1].shape));
    p.theta_eps_cross = 0.0;
  }
  return p;
}

SeTable standard_errors(const Dataset& data, const ModelSpec& spec,
                        const ReparamParams& at, const ParameterMap& map,
                        const FitOptions& /*options*/) {
  SeTable out;
  const int p = map.size();
  const double n = static_cast<double>(data.size());
  FimlEvaluator eval(spec, data, map);
  Eigen::VectorXd x = map.pack(at);

  // Observed information from the finite-difference Jacobian of the exact
  // score, symmetrized because its columns are differenced independently.
  bool score_failed = false;
  VectorMap score = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    Eigen::VectorXd g(p);
    if (!eval.value_and_gradient(v, g)) {
      score_failed = true;
      g.setZero();
    }
    return -g / n;
  };
  const Eigen::MatrixXd jac = fd_jacobian(score, x);
  if (score_failed) {
    out.note = "score evaluation failed near the solution";
    return out;
  }
  Eigen::MatrixXd hess = 0.5 * (jac + jac.transpose());
  Eigen::MatrixXd info = n * hess;  // observed information of the summed -loglik
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (llt.info() != Eigen::Success) {
    out.note = "observed information matrix is not positive definite";
    return out;
  }
  out.cov_prime = llt.solve(Eigen::MatrixXd::Identity(p, p));
  out.se_prime = out.cov_prime.diagonal().cwiseMax(0.0).cwiseSqrt();

  VectorMap back = [&map](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return map.pack_original(to_original(map.unpack(v)));
  };
  Eigen::MatrixXd g = fd_jacobian(back, x);
  Eigen::MatrixXd cov_orig = g * out.cov_prime * g.transpose();
  out.se_original = cov_orig.diagonal().cwiseMax(0.0).cwiseSqrt();
  out.available = true;
  return out;
}

FitResult fit(const Dataset& data, const ModelSpec& spec, const FitOptions& options) {
  spec.validate();
  validate_dataset(data, spec);
  check_identified(data, spec);

  const auto bounds = options.knot_bounds ? *options.knot_bounds
                                          : observed_time_range(data);
  if (!(bounds.first < bounds.second))
    throw std::invalid_argument("knot bounds must be a nonempty interval");
  std::vector<std::pair<double, double>> knot_bounds;
  for (const auto& o : spec.outcomes)
    if (shape_has_knot(o.shape)) knot_bounds.push_back(bounds);
  ParameterMap map(spec, knot_bounds);
  const int n = static_cast<int>(data.size());

  FimlEvaluator eval(spec, data, map);
  Objective obj = scaled_value(eval, static_cast<double>(n));
  ReparamParams starts =
      options.initial ? *options.initial : heuristic_starts(data, spec);
  Eigen::VectorXd x0 = map.pack(starts);

  BoxMinimizeOptions bopt;
  bopt.gradient_tolerance = options.gradient_tolerance;
  bopt.relative_change_tolerance = options.relative_change_tolerance;
  bopt.max_iterations = options.max_iterations;
  bopt.fd.threads = options.threads;
  bopt.value_and_gradient = [&eval, n](const Eigen::VectorXd& x,
                                       Eigen::VectorXd& g) -> std::optional<double> {
    auto v = eval.value_and_gradient(x, g);
    if (!v) return std::nullopt;
    g /= -static_cast<double>(n);
    return -*v / static_cast<double>(n);
  };

  FitResult res;
  BoxMinimizeResult best;
  bool have_best = false;
  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
    Eigen::VectorXd xs =
        attempt == 1 ? x0 : perturbed_start(x0, map, options.seed, attempt);
    BoxMinimizeResult r = box_minimize(obj, xs, map.lower(), map.upper(), bopt);
    res.iterations += r.iterations;
    res.evaluations += r.evaluations;
    res.attempts_used = attempt;
    if (!have_best || (r.converged && !best.converged) ||
        (r.converged == best.converged && r.f < best.f)) {
      best = std::move(r);
      have_best = true;
    }
    if (best.converged) break;
  }

  res.converged = best.converged;
  res.message = best.message;
  res.theta_prime = map.unpack(best.x);
  res.theta = to_original(res.theta_prime);
  auto ll = loglik_sample(data, spec, res.theta_prime);
  res.loglik = ll ? *ll : kNan;
  res.indices = fit_indices(-2.0 * res.loglik, map.size(), n);

  if (options.compute_se && res.converged) {
    SeTable se = standard_errors(data, spec, res.theta_prime, map, options);
    res.se_available = se.available;
    if (se.available) {
      res.cov_prime = std::move(se.cov_prime);
      res.se_prime_flat = std::move(se.se_prime);
      res.se_flat = std::move(se.se_original);
      res.se_prime = map.unpack(res.se_prime_flat);
      res.se = map.unpack_original(res.se_flat);
    } else if (!se.note.empty()) {
      res.message += "; " + se.note;
    }
  }

  const double z = normal_quantile(0.5 + 0.5 * options.ci_level);
  Eigen::VectorXd est = map.pack_original(res.theta);
  res.summary.reserve(map.size());
  for (int i = 0; i < map.size(); ++i) {
    ParamSummary row;
    row.name = map.names_original()[i];
    row.estimate = est(i);
    if (res.se_available) {
      row.se = res.se_flat(i);
      row.ci_lower = row.estimate - z * row.se;
      row.ci_upper = row.estimate + z * row.se;
      row.p_value = row.se > 0.0 ? wald_p_value(row.estimate / row.se) : kNan;
    } else {
      row.se = kNan;
      row.ci_lower = kNan;
      row.ci_upper = kNan;
      row.p_value = kNan;
    }
    res.summary.push_back(std::move(row));
  }

  res.impropriety = detect_improper(res.theta, res.theta_prime, spec);
  return res;
}

}  // namespace pblsgm
