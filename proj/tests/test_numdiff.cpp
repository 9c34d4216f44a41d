#include "pblsgm/numdiff.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace pblsgm;

namespace {

// Smooth test function with a hand-derived gradient and Hessian:
//   f(x) = exp(x0 * x1 / 4) + sin(x2) + x0^2
double smooth_f(const Eigen::Vector3d& x) {
  return std::exp(x(0) * x(1) / 4.0) + std::sin(x(2)) + x(0) * x(0);
}

Eigen::Vector3d smooth_grad(const Eigen::Vector3d& x) {
  const double e = std::exp(x(0) * x(1) / 4.0);
  return {x(1) / 4.0 * e + 2.0 * x(0), x(0) / 4.0 * e, std::cos(x(2))};
}

Eigen::Matrix3d smooth_hess(const Eigen::Vector3d& x) {
  const double e = std::exp(x(0) * x(1) / 4.0);
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  h(0, 0) = x(1) * x(1) / 16.0 * e + 2.0;
  h(0, 1) = h(1, 0) = (1.0 / 4.0 + x(0) * x(1) / 16.0) * e;
  h(1, 1) = x(0) * x(0) / 16.0 * e;
  h(2, 2) = -std::sin(x(2));
  return h;
}

Objective wrap3(double (*fn)(const Eigen::Vector3d&)) {
  return [fn](const Eigen::VectorXd& x) -> std::optional<double> {
    return fn(Eigen::Vector3d(x));
  };
}

}  // namespace

TEST_CASE("central gradient is exact on quadratics up to roundoff") {
  Eigen::Matrix3d a;
  a << 4.0, 1.0, 0.5, 1.0, 3.0, -0.2, 0.5, -0.2, 2.0;
  Eigen::Vector3d b(1.0, -2.0, 0.3);
  Objective f = [&](const Eigen::VectorXd& x) -> std::optional<double> {
    return 0.5 * x.dot(a * x) + b.dot(x);
  };
  Eigen::Vector3d x(0.7, -1.1, 2.0);
  auto g = fd_gradient_central(f, x);
  REQUIRE(g.has_value());
  Eigen::Vector3d expect = a * x + b;
  CHECK((*g - expect).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("central gradient matches the analytic gradient of a smooth function") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> draw(-2.0, 2.0);
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::Vector3d x(draw(rng), draw(rng), draw(rng));
    auto g = fd_gradient_central(wrap3(smooth_f), x);
    REQUIRE(g.has_value());
    CHECK((*g - smooth_grad(x)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("forward gradient is first-order accurate and reuses f(x)") {
  Eigen::Vector3d x(0.4, 1.2, -0.6);
  int evals = 0;
  Objective f = [&](const Eigen::VectorXd& v) -> std::optional<double> {
    ++evals;
    return smooth_f(Eigen::Vector3d(v));
  };
  const double fx = smooth_f(x);
  auto g = fd_gradient_forward(f, x, fx);
  REQUIRE(g.has_value());
  CHECK(evals == 3);  // one bumped point per coordinate, base value reused
  CHECK((*g - smooth_grad(x)).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("Hessian recovers the matrix of a quadratic exactly up to roundoff") {
  Eigen::Matrix3d a;
  a << 4.0, 1.0, 0.5, 1.0, 3.0, -0.2, 0.5, -0.2, 2.0;
  Objective f = [&](const Eigen::VectorXd& x) -> std::optional<double> {
    return 0.5 * x.dot(a * x);
  };
  Eigen::Vector3d x(0.3, -0.8, 1.5);
  auto h = fd_hessian(f, x);
  REQUIRE(h.has_value());
  CHECK((*h - a).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((*h - h->transpose()).cwiseAbs().maxCoeff() == 0.0);  // mirrored cells
}

TEST_CASE("Hessian matches the analytic Hessian of a smooth function") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> draw(-1.5, 1.5);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::Vector3d x(draw(rng), draw(rng), draw(rng));
    auto h = fd_hessian(wrap3(smooth_f), x);
    REQUIRE(h.has_value());
    CHECK((*h - smooth_hess(x)).cwiseAbs().maxCoeff() < 2e-5);
  }
}

TEST_CASE("evaluation failure inside a stencil propagates as nullopt") {
  // fails whenever any coordinate leaves the starting box
  Eigen::Vector2d x0(1.0, 1.0);
  Objective f = [&](const Eigen::VectorXd& x) -> std::optional<double> {
    if ((x - x0).cwiseAbs().maxCoeff() > 1e-9) return std::nullopt;
    return x.squaredNorm();
  };
  CHECK_FALSE(fd_gradient_central(f, x0).has_value());
  CHECK_FALSE(fd_gradient_forward(f, x0, x0.squaredNorm()).has_value());
  CHECK_FALSE(fd_hessian(f, x0).has_value());
}

TEST_CASE("Jacobian of a linear map reproduces its matrix") {
  Eigen::MatrixXd m(2, 3);
  m << 1.0, -2.0, 0.5, 3.0, 0.0, -1.5;
  VectorMap g = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return m * x; };
  Eigen::Vector3d x(0.2, -0.7, 1.9);
  Eigen::MatrixXd jac = fd_jacobian(g, x);
  REQUIRE(jac.rows() == 2);
  REQUIRE(jac.cols() == 3);
  CHECK((jac - m).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("Jacobian of a nonlinear map matches hand derivatives") {
  VectorMap g = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::Vector2d out;
    out << x(0) * x(1), std::sin(x(0)) + x(1) * x(1);
    return out;
  };
  Eigen::Vector2d x(0.8, -1.3);
  Eigen::MatrixXd jac = fd_jacobian(g, x);
  Eigen::Matrix2d expect;
  expect << x(1), x(0), std::cos(x(0)), 2.0 * x(1);
  CHECK((jac - expect).cwiseAbs().maxCoeff() < 1e-6);
}
