#include "pblsgm/gradient.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

#include "pblsgm/likelihood.hpp"
#include "pblsgm/numdiff.hpp"
#include "pblsgm/optimizer.hpp"
#include "pblsgm/parameter_map.hpp"
#include "pblsgm/trajectory.hpp"
#include "support/builders.hpp"
#include "support/random_model.hpp"

using namespace pblsgm;

namespace {

std::vector<std::pair<double, double>> knot_boxes(const ModelSpec& spec) {
  std::vector<std::pair<double, double>> boxes;
  for (const auto& o : spec.outcomes)
    if (shape_has_knot(o.shape)) boxes.emplace_back(0.5, 8.5);
  return boxes;
}

Dataset random_dataset(const ModelSpec& spec, int n, std::mt19937_64& rng,
                       double missing_prob) {
  Dataset data;
  for (int i = 0; i < n; ++i) {
    IndividualRecord rec = builders::random_record(spec, rng, missing_prob);
    rec.id = std::to_string(i);
    data.push_back(std::move(rec));
  }
  return data;
}

// Finite differencing the knot coordinates assumes no measurement time sits
// on a kink; push the knots clear of every time in the data.
void separate_knots(ReparamParams& params, const Dataset& data) {
  for (auto& o : params.outcome) {
    if (!shape_has_knot(o.shape)) continue;
    bool moved = true;
    while (moved) {
      moved = false;
      for (const auto& rec : data)
        for (int j = 0; j < rec.times.size(); ++j)
          if (std::abs(rec.times(j) - o.knot) < 5e-4) {
            o.knot += 1.3e-3;
            moved = true;
          }
    }
  }
}

void check_gradient_matches_fd(const ModelSpec& spec, std::mt19937_64& rng,
                               double missing_prob) {
  Dataset data = random_dataset(spec, 10, rng, missing_prob);
  ReparamParams params = builders::random_reparam(spec, rng);
  separate_knots(params, data);
  ParameterMap map(spec, knot_boxes(spec));
  FimlEvaluator eval(spec, data, map);
  const Eigen::VectorXd x = map.pack(params);

  auto value = eval.value(x);
  auto reference = loglik_sample(data, spec, params);
  REQUIRE(value.has_value());
  REQUIRE(reference.has_value());
  CHECK(*value == doctest::Approx(*reference).epsilon(1e-12));

  Eigen::VectorXd grad(map.size());
  auto value2 = eval.value_and_gradient(x, grad);
  REQUIRE(value2.has_value());
  CHECK(*value2 == doctest::Approx(*value).epsilon(1e-13));

  Objective obj = [&](const Eigen::VectorXd& p) { return eval.value(p); };
  auto fd = fd_gradient_central(obj, x, FdOptions{});
  REQUIRE(fd.has_value());
  for (int j = 0; j < map.size(); ++j)
    CHECK(grad(j) == doctest::Approx((*fd)(j)).epsilon(1e-4).scale(
                         1.0 + std::abs((*fd)(j))));
}

}  // namespace

TEST_CASE("analytic gradient matches finite differences on every model shape") {
  std::mt19937_64 rng(3101);
  std::vector<ModelSpec> specs = {
      builders::full_spec(6),
      builders::reduced_spec(6),
      builders::univariate_spec(6, TrajectoryShape::BilinearRandomKnot),
      builders::univariate_spec(6, TrajectoryShape::BilinearFixedKnot),
      builders::univariate_spec(5, TrajectoryShape::Linear),
      builders::univariate_spec(6, TrajectoryShape::Quadratic),
      builders::bivariate_spec(6, TrajectoryShape::BilinearRandomKnot,
                               TrajectoryShape::BilinearFixedKnot),
      builders::bivariate_spec(5, TrajectoryShape::Linear, TrajectoryShape::Linear),
      builders::bivariate_spec(6, TrajectoryShape::Quadratic,
                               TrajectoryShape::BilinearRandomKnot),
  };
  for (const auto& spec : specs) {
    CAPTURE(spec.outcomes[0].name);
    for (int rep = 0; rep < 3; ++rep) {
      check_gradient_matches_fd(spec, rng, 0.0);
      check_gradient_matches_fd(spec, rng, 0.25);
    }
  }
}

TEST_CASE("evaluator is deterministic across calls") {
  std::mt19937_64 rng(3202);
  ModelSpec spec = builders::full_spec(6);
  Dataset data = random_dataset(spec, 8, rng, 0.2);
  ReparamParams params = builders::random_reparam(spec, rng);
  ParameterMap map(spec, knot_boxes(spec));
  FimlEvaluator eval(spec, data, map);
  const Eigen::VectorXd x = map.pack(params);

  Eigen::VectorXd g1(map.size()), g2(map.size());
  auto v1 = eval.value_and_gradient(x, g1);
  auto v2 = eval.value_and_gradient(x, g2);
  REQUIRE(v1.has_value());
  REQUIRE(v2.has_value());
  CHECK(*v1 == *v2);
  CHECK((g1 - g2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("indefinite covariance parameters yield no value and no gradient") {
  std::mt19937_64 rng(3303);
  ModelSpec spec = builders::univariate_spec(6, TrajectoryShape::BilinearRandomKnot);
  Dataset data = random_dataset(spec, 5, rng, 0.0);
  ReparamParams params = builders::random_reparam(spec, rng);
  params.outcome[0].psi *= -1.0;       // negative definite factor covariance
  params.outcome[0].theta_eps = -0.5;  // and a negative residual variance
  ParameterMap map(spec, knot_boxes(spec));
  FimlEvaluator eval(spec, data, map);
  const Eigen::VectorXd x = map.pack(params);

  CHECK_FALSE(loglik_sample(data, spec, params).has_value());
  CHECK_FALSE(eval.value(x).has_value());
  Eigen::VectorXd grad(map.size());
  CHECK_FALSE(eval.value_and_gradient(x, grad).has_value());
}

TEST_CASE("box minimization with analytic gradients finds the finite-difference solution") {
  // noisy bilinear data; both gradient modes must land on the same optimum
  std::mt19937_64 rng(3404);
  ModelSpec spec = builders::univariate_spec(6, TrajectoryShape::BilinearFixedKnot);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Dataset data;
  for (int i = 0; i < 60; ++i) {
    IndividualRecord rec;
    rec.id = std::to_string(i);
    rec.times = Eigen::VectorXd(6);
    rec.values.resize(1);
    rec.observed.assign(1, std::vector<bool>(6, true));
    rec.values[0] = Eigen::VectorXd(6);
    const double eta0 = 10.0 + 2.0 * gauss(rng);
    const double eta1 = 3.0 + 0.5 * gauss(rng);
    const double eta2 = 1.0 + 0.5 * gauss(rng);
    for (int j = 0; j < 6; ++j) {
      rec.times(j) = j + 0.2 * gauss(rng);
      rec.values[0](j) =
          bilinear_value(eta0, eta1, eta2, 2.6, rec.times(j)) + 0.5 * gauss(rng);
    }
    std::sort(rec.times.data(), rec.times.data() + 6);
    data.push_back(std::move(rec));
  }

  ParameterMap map(spec, {{0.5, 4.5}});
  FimlEvaluator eval(spec, data, map);
  const double n = static_cast<double>(data.size());
  Objective obj = [&](const Eigen::VectorXd& p) -> std::optional<double> {
    auto v = eval.value(p);
    if (!v) return std::nullopt;
    return -*v / n;
  };

  ReparamParams start = builders::random_reparam(spec, rng);
  start.outcome[0].mean << 12.0, 2.0, 2.0;
  start.outcome[0].knot = 3.0;
  start.outcome[0].psi = Eigen::Matrix3d::Identity() * 2.0;
  start.outcome[0].theta_eps = 1.0;
  const Eigen::VectorXd x0 = map.pack(start);

  BoxMinimizeOptions fd_opts;
  BoxMinimizeResult fd_res = box_minimize(obj, x0, map.lower(), map.upper(), fd_opts);

  BoxMinimizeOptions an_opts = fd_opts;
  an_opts.value_and_gradient = [&](const Eigen::VectorXd& p,
                                   Eigen::VectorXd& grad) -> std::optional<double> {
    auto v = eval.value_and_gradient(p, grad);
    if (!v) return std::nullopt;
    grad /= -n;
    return -*v / n;
  };
  BoxMinimizeResult an_res = box_minimize(obj, x0, map.lower(), map.upper(), an_opts);

  REQUIRE(fd_res.converged);
  REQUIRE(an_res.converged);
  CHECK(an_res.f == doctest::Approx(fd_res.f).epsilon(1e-8));
  CHECK((an_res.x - fd_res.x).cwiseAbs().maxCoeff() < 2e-3);
  CHECK(an_res.gradient.cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("gradient-based curvature matches the finite-difference objective curvature") {
  std::mt19937_64 rng(3505);
  ModelSpec spec = builders::univariate_spec(5, TrajectoryShape::Linear);
  Dataset data = random_dataset(spec, 12, rng, 0.1);
  ReparamParams params = builders::random_reparam(spec, rng);
  ParameterMap map(spec, {});
  FimlEvaluator eval(spec, data, map);
  const Eigen::VectorXd x = map.pack(params);

  Objective obj = [&](const Eigen::VectorXd& p) { return eval.value(p); };
  auto h_obj = fd_hessian(obj, x, FdOptions{});
  REQUIRE(h_obj.has_value());

  VectorMap gradmap = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd g(map.size());
    REQUIRE(eval.value_and_gradient(p, g).has_value());
    return g;
  };
  const Eigen::MatrixXd jac = fd_jacobian(gradmap, x);
  Eigen::MatrixXd h_grad = 0.5 * (jac + jac.transpose());
  const double scale = 1.0 + h_obj->cwiseAbs().maxCoeff();
  CHECK((h_grad - *h_obj).cwiseAbs().maxCoeff() / scale < 1e-4);
}
