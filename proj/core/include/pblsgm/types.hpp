#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pblsgm {

// Shape of one outcome's latent trajectory.
enum class TrajectoryShape {
  BilinearRandomKnot,  // linear-linear, knot location varies across individuals
  BilinearFixedKnot,   // linear-linear, one knot location shared by everyone
  Linear,
  Quadratic,
};

// Number of growth factors the shape carries. The random-knot spline counts
// the knot deviation as a factor: (measurement at knot, mean slope, half
// slope difference, knot deviation).
int factor_count(TrajectoryShape shape);

// True when the shape has a knot location parameter (random or fixed).
bool shape_has_knot(TrajectoryShape shape);

std::string_view shape_name(TrajectoryShape shape);

struct OutcomeSpec {
  std::string name;
  TrajectoryShape shape = TrajectoryShape::BilinearRandomKnot;
  // Observation template: which waves this outcome is measured at.
  // Empty means every wave.
  std::vector<bool> observed;
};

// A univariate or parallel (two-outcome) growth model over a common set of
// measurement waves. Individual measurement times vary; the wave count does not.
struct ModelSpec {
  int waves = 0;
  std::vector<OutcomeSpec> outcomes;

  bool parallel() const { return outcomes.size() == 2; }
  // Throws std::invalid_argument on structural problems (no outcomes, bad
  // wave count, template length mismatch, duplicate outcome names).
  void validate() const;
};

// One individual's observations. `times[j]` is only meaningful where at least
// one outcome is observed at wave j.
struct IndividualRecord {
  std::string id;
  Eigen::VectorXd times;
  std::vector<Eigen::VectorXd> values;      // per outcome, length = waves
  std::vector<std::vector<bool>> observed;  // per outcome, length = waves

  int observed_count() const;
  // Strictly increasing times across waves where any outcome is observed.
  bool times_strictly_increasing() const;
};

using Dataset = std::vector<IndividualRecord>;

// Throws std::invalid_argument when the dataset does not conform to the spec
// (wrong vector lengths, non-increasing times, record with nothing observed).
void validate_dataset(const Dataset& data, const ModelSpec& spec);

}  // namespace pblsgm
