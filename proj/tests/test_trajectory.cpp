#include "pblsgm/trajectory.hpp"

#include <doctest.h>

#include <random>

#include "support/oracles.hpp"

using namespace pblsgm;

TEST_CASE("bilinear value matches the piecewise definition") {
  // Scenario-1 y outcome: 98 + 5t up to the knot, slope 2.6 after.
  CHECK(bilinear_value(98.0, 5.0, 2.6, 2.5, 0.0) == doctest::Approx(98.0).epsilon(1e-14));
  CHECK(bilinear_value(98.0, 5.0, 2.6, 2.5, 2.5) == doctest::Approx(110.5).epsilon(1e-14));
  CHECK(bilinear_value(98.0, 5.0, 2.6, 2.5, 5.0) == doctest::Approx(117.0).epsilon(1e-14));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 9.0);
  for (int i = 0; i < 500; ++i) {
    double eta0 = u(rng), eta1 = u(rng), eta2 = u(rng);
    double gamma = u(rng), t = u(rng);
    CHECK(bilinear_value(eta0, eta1, eta2, gamma, t) ==
          doctest::Approx(oracle::piecewise_line(eta0, eta1, eta2, gamma, t)).epsilon(1e-13));
  }
}

TEST_CASE("bilinear trajectory is continuous at the knot") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-2.0, 8.0);
  for (int i = 0; i < 200; ++i) {
    double eta0 = u(rng), eta1 = u(rng), eta2 = u(rng), gamma = u(rng);
    double below = bilinear_value(eta0, eta1, eta2, gamma, gamma - 1e-9);
    double at = bilinear_value(eta0, eta1, eta2, gamma, gamma);
    double above = bilinear_value(eta0, eta1, eta2, gamma, gamma + 1e-9);
    CHECK(std::abs(below - at) < 1e-7);
    CHECK(std::abs(above - at) < 1e-7);
  }
}

TEST_CASE("random-knot loading rows") {
  Eigen::VectorXd times(3);
  times << 0.0, 2.5, 5.0;
  // mu_gamma = 2.5, half slope difference -1.2 (scenario-1 shape).
  Eigen::MatrixXd lam = loadings_full(times, 2.5, -1.2);
  REQUIRE(lam.rows() == 3);
  REQUIRE(lam.cols() == 4);

  // Pre-knot row: knot-deviation loading vanishes.
  CHECK(lam(0, 0) == doctest::Approx(1.0));
  CHECK(lam(0, 1) == doctest::Approx(-2.5));
  CHECK(lam(0, 2) == doctest::Approx(2.5));
  CHECK(lam(0, 3) == doctest::Approx(0.0));

  // Exactly at the knot: sign(0) = 0 leaves -mu_eta2'.
  CHECK(lam(1, 1) == doctest::Approx(0.0));
  CHECK(lam(1, 2) == doctest::Approx(0.0));
  CHECK(lam(1, 3) == doctest::Approx(1.2));

  // Post-knot: -2 * mu_eta2'.
  CHECK(lam(2, 1) == doctest::Approx(2.5));
  CHECK(lam(2, 2) == doctest::Approx(2.5));
  CHECK(lam(2, 3) == doctest::Approx(2.4));
}

TEST_CASE("fixed-knot, linear, quadratic loading rows") {
  Eigen::VectorXd times(2);
  times << 1.0, 4.0;

  Eigen::MatrixXd red = loadings_reduced(times, 2.5);
  CHECK(red(0, 0) == doctest::Approx(1.0));
  CHECK(red(0, 1) == doctest::Approx(-1.5));
  CHECK(red(0, 2) == doctest::Approx(1.5));
  CHECK(red(1, 1) == doctest::Approx(1.5));
  CHECK(red(1, 2) == doctest::Approx(1.5));

  Eigen::MatrixXd lin = loadings_linear(times);
  CHECK(lin.cols() == 2);
  CHECK(lin(1, 0) == doctest::Approx(1.0));
  CHECK(lin(1, 1) == doctest::Approx(4.0));

  Eigen::MatrixXd quad = loadings_quadratic(times);
  CHECK(quad.cols() == 3);
  CHECK(quad(1, 2) == doctest::Approx(16.0));
}

TEST_CASE("random-knot loadings reproduce the population curve at delta = 0") {
  // For an individual sitting exactly at the population knot, the loading rows
  // applied to the reparameterized means must reproduce the bilinear curve.
  double mu_eta0 = 98.0, mu_eta1 = 5.0, mu_eta2 = 2.6, gamma = 2.5;
  double mu0p = mu_eta0 + gamma * mu_eta1;       // 110.5
  double mu1p = 0.5 * (mu_eta1 + mu_eta2);       // 3.8
  double mu2p = 0.5 * (mu_eta2 - mu_eta1);       // -1.2
  Eigen::VectorXd times(7);
  times << 0.0, 1.0, 2.0, 2.5, 3.0, 4.0, 5.0;
  Eigen::MatrixXd lam = loadings_full(times, gamma, mu2p);
  Eigen::Vector4d mu_factors(mu0p, mu1p, mu2p, 0.0);
  Eigen::VectorXd curve = lam * mu_factors;
  for (int j = 0; j < times.size(); ++j) {
    CHECK(curve(j) ==
          doctest::Approx(oracle::piecewise_line(mu_eta0, mu_eta1, mu_eta2, gamma, times(j)))
              .epsilon(1e-12));
  }
}
