#include "pblsgm/parameter_map.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "support/builders.hpp"
#include "support/random_model.hpp"

using namespace pblsgm;

namespace {

ModelSpec mixed_spec(int waves) {
  return builders::bivariate_spec(waves, TrajectoryShape::BilinearRandomKnot,
                                  TrajectoryShape::BilinearFixedKnot);
}

std::vector<std::pair<double, double>> bounds_for(const ModelSpec& spec) {
  std::vector<std::pair<double, double>> b;
  for (const auto& o : spec.outcomes)
    if (shape_has_knot(o.shape)) b.emplace_back(0.5, 8.5);
  return b;
}

}  // namespace

TEST_CASE("free parameter counts match the model variants") {
  CHECK(free_parameter_count(builders::full_spec(10)) == 47);
  CHECK(free_parameter_count(builders::reduced_spec(10)) == 32);
  CHECK(free_parameter_count(mixed_spec(10)) == 39);
  CHECK(free_parameter_count(builders::univariate_spec(10, TrajectoryShape::BilinearRandomKnot)) == 15);
  CHECK(free_parameter_count(builders::univariate_spec(10, TrajectoryShape::BilinearFixedKnot)) == 11);
  CHECK(free_parameter_count(builders::univariate_spec(10, TrajectoryShape::Linear)) == 6);
  CHECK(free_parameter_count(builders::univariate_spec(10, TrajectoryShape::Quadratic)) == 10);
  CHECK(free_parameter_count(builders::bivariate_spec(10, TrajectoryShape::Linear,
                                                      TrajectoryShape::Linear)) == 17);
  CHECK(free_parameter_count(builders::bivariate_spec(10, TrajectoryShape::Quadratic,
                                                      TrajectoryShape::Quadratic)) == 30);
}

TEST_CASE("map size and name lists agree with the count") {
  for (const ModelSpec& spec :
       {builders::full_spec(6), builders::reduced_spec(6), mixed_spec(6),
        builders::univariate_spec(6, TrajectoryShape::Linear),
        builders::bivariate_spec(6, TrajectoryShape::Quadratic, TrajectoryShape::Linear)}) {
    ParameterMap map(spec, bounds_for(spec));
    CHECK(map.size() == free_parameter_count(spec));
    CHECK(static_cast<int>(map.names_reparam().size()) == map.size());
    CHECK(static_cast<int>(map.names_original().size()) == map.size());
    std::set<std::string> rp(map.names_reparam().begin(), map.names_reparam().end());
    std::set<std::string> orig(map.names_original().begin(), map.names_original().end());
    CHECK(static_cast<int>(rp.size()) == map.size());
    CHECK(static_cast<int>(orig.size()) == map.size());
  }
}

TEST_CASE("slot names describe the factors in each frame") {
  ModelSpec spec = builders::full_spec(10);
  ParameterMap map(spec, bounds_for(spec));
  const auto& rp = map.names_reparam();
  const auto& orig = map.names_original();
  CHECK(rp[0] == "mu_meas_knot_y");
  CHECK(rp[1] == "mu_slope_mean_y");
  CHECK(rp[2] == "mu_slope_halfdiff_y");
  CHECK(rp[3] == "mu_knot_y");
  CHECK(orig[0] == "mu_intercept_y");
  CHECK(orig[1] == "mu_slope1_y");
  CHECK(orig[2] == "mu_slope2_y");
  CHECK(orig[3] == "mu_knot_y");
  // psi cells are positional and shared between frames
  CHECK(rp[4] == "psi_y_11");
  CHECK(orig[4] == "psi_y_11");
  CHECK(rp[5] == "psi_y_21");
  CHECK(std::find(rp.begin(), rp.end(), "psi_yz_11") != rp.end());
  CHECK(std::find(rp.begin(), rp.end(), "psi_yz_44") != rp.end());
  CHECK(rp.back() == "theta_yz");
  CHECK(std::find(rp.begin(), rp.end(), "theta_y") != rp.end());
  CHECK(std::find(rp.begin(), rp.end(), "theta_z") != rp.end());
}

TEST_CASE("only knot slots are bounded and mean slots are flagged") {
  ModelSpec spec = builders::full_spec(10);
  ParameterMap map(spec, {{0.5, 8.5}, {1.0, 7.0}});
  const auto& names = map.names_reparam();
  for (int i = 0; i < map.size(); ++i) {
    if (names[i] == "mu_knot_y") {
      CHECK(map.lower()(i) == 0.5);
      CHECK(map.upper()(i) == 8.5);
    } else if (names[i] == "mu_knot_z") {
      CHECK(map.lower()(i) == 1.0);
      CHECK(map.upper()(i) == 7.0);
    } else {
      CHECK(std::isinf(map.lower()(i)));
      CHECK(map.lower()(i) < 0.0);
      CHECK(std::isinf(map.upper()(i)));
      CHECK(map.upper()(i) > 0.0);
    }
    const bool is_mean = names[i].rfind("mu_", 0) == 0;
    CHECK(map.is_mean_slot()[i] == is_mean);
  }
}

TEST_CASE("wrong number of knot bounds is rejected") {
  CHECK_THROWS_AS(ParameterMap(builders::full_spec(10), {{0.5, 8.5}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ParameterMap(builders::univariate_spec(10, TrajectoryShape::Linear),
                               {{0.5, 8.5}}),
                  std::invalid_argument);
}

TEST_CASE("pack and unpack are mutually inverse in the reparameterized frame") {
  std::mt19937_64 rng(21);
  for (const ModelSpec& spec :
       {builders::full_spec(6), builders::reduced_spec(6), mixed_spec(6),
        builders::univariate_spec(6, TrajectoryShape::BilinearRandomKnot),
        builders::bivariate_spec(6, TrajectoryShape::Linear, TrajectoryShape::Quadratic)}) {
    ParameterMap map(spec, bounds_for(spec));
    for (int rep = 0; rep < 20; ++rep) {
      ReparamParams p = builders::random_reparam(spec, rng);
      Eigen::VectorXd x = map.pack(p);
      REQUIRE(x.size() == map.size());
      ReparamParams back = map.unpack(x);
      Eigen::VectorXd x2 = map.pack(back);
      CHECK((x - x2).cwiseAbs().maxCoeff() == 0.0);
      for (size_t u = 0; u < p.outcome.size(); ++u) {
        CHECK((back.outcome[u].mean - p.outcome[u].mean).cwiseAbs().maxCoeff() == 0.0);
        CHECK((back.outcome[u].psi - p.outcome[u].psi).cwiseAbs().maxCoeff() == 0.0);
        CHECK(back.outcome[u].theta_eps == p.outcome[u].theta_eps);
        if (shape_has_knot(p.outcome[u].shape))
          CHECK(back.outcome[u].knot == p.outcome[u].knot);
      }
      if (spec.outcomes.size() == 2) {
        CHECK((back.psi_cross - p.psi_cross).cwiseAbs().maxCoeff() == 0.0);
        CHECK(back.theta_eps_cross == p.theta_eps_cross);
      }
    }
  }
}

TEST_CASE("unpacked psi matrices are exactly symmetric") {
  ModelSpec spec = builders::full_spec(6);
  ParameterMap map(spec, bounds_for(spec));
  std::mt19937_64 rng(22);
  std::normal_distribution<double> draw;
  Eigen::VectorXd x(map.size());
  for (int i = 0; i < x.size(); ++i) x(i) = draw(rng);
  ReparamParams p = map.unpack(x);
  for (const auto& o : p.outcome)
    CHECK((o.psi - o.psi.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("arbitrary flat vectors survive an unpack-pack round trip bit for bit") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> draw;
  for (const ModelSpec& spec :
       {builders::full_spec(6), mixed_spec(6),
        builders::univariate_spec(6, TrajectoryShape::Quadratic)}) {
    ParameterMap map(spec, bounds_for(spec));
    Eigen::VectorXd x(map.size());
    for (int i = 0; i < x.size(); ++i) x(i) = draw(rng);
    CHECK((map.pack(map.unpack(x)) - x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((map.pack_original(map.unpack_original(x)) - x).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("natural-frame pack uses the same slot layout") {
  ModelSpec spec = builders::full_spec(6);
  ParameterMap map(spec, bounds_for(spec));
  std::mt19937_64 rng(24);
  OriginalParams p = builders::random_full_original(rng);
  Eigen::VectorXd x = map.pack_original(p);
  OriginalParams back = map.unpack_original(x);
  CHECK((back.outcome[0].mean - p.outcome[0].mean).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.outcome[1].knot == p.outcome[1].knot);
  CHECK((back.psi_cross - p.psi_cross).cwiseAbs().maxCoeff() == 0.0);
  // knot slot carries mu_gamma in both frames
  const auto& names = map.names_original();
  for (int i = 0; i < map.size(); ++i)
    if (names[i] == "mu_knot_y") CHECK(x(i) == p.outcome[0].knot);
}
