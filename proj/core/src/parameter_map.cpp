#include "pblsgm/parameter_map.hpp"

#include <limits>
#include <stdexcept>

namespace pblsgm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int mean_entry_count(TrajectoryShape shape) {
  switch (shape) {
    case TrajectoryShape::BilinearRandomKnot:
    case TrajectoryShape::BilinearFixedKnot:
      return 3;
    case TrajectoryShape::Linear:
      return 2;
    case TrajectoryShape::Quadratic:
      return 3;
  }
  throw std::invalid_argument("unknown trajectory shape");
}

std::vector<std::string> mean_names(TrajectoryShape shape, const std::string& outcome,
                                    bool reparam_frame) {
  switch (shape) {
    case TrajectoryShape::BilinearRandomKnot:
    case TrajectoryShape::BilinearFixedKnot:
      if (reparam_frame)
        return {"mu_meas_knot_" + outcome, "mu_slope_mean_" + outcome,
                "mu_slope_halfdiff_" + outcome};
      return {"mu_intercept_" + outcome, "mu_slope1_" + outcome,
              "mu_slope2_" + outcome};
    case TrajectoryShape::Linear:
      return {"mu_intercept_" + outcome, "mu_slope_" + outcome};
    case TrajectoryShape::Quadratic:
      return {"mu_intercept_" + outcome, "mu_linear_" + outcome,
              "mu_quad_" + outcome};
  }
  throw std::invalid_argument("unknown trajectory shape");
}

std::string knot_name(TrajectoryShape shape, const std::string& outcome) {
  return shape == TrajectoryShape::BilinearRandomKnot ? "mu_knot_" + outcome
                                                      : "knot_" + outcome;
}

}  // namespace

ParameterMap::ParameterMap(ModelSpec spec,
                           std::vector<std::pair<double, double>> knot_bounds)
    : spec_(std::move(spec)), knot_bounds_(std::move(knot_bounds)) {
  spec_.validate();
  size_t knotted = 0;
  for (const auto& o : spec_.outcomes)
    if (shape_has_knot(o.shape)) ++knotted;
  if (knot_bounds_.size() != knotted)
    throw std::invalid_argument(
        "expected one knot bound pair per outcome with a knot");

  std::vector<double> lo, hi;
  size_t bound_idx = 0;
  for (const auto& o : spec_.outcomes) {
    const auto rp = mean_names(o.shape, o.name, true);
    const auto orig = mean_names(o.shape, o.name, false);
    for (size_t i = 0; i < rp.size(); ++i) {
      reparam_names_.push_back(rp[i]);
      original_names_.push_back(orig[i]);
      lo.push_back(-kInf);
      hi.push_back(kInf);
      mean_slot_.push_back(true);
    }
    if (shape_has_knot(o.shape)) {
      reparam_names_.push_back(knot_name(o.shape, o.name));
      original_names_.push_back(knot_name(o.shape, o.name));
      lo.push_back(knot_bounds_[bound_idx].first);
      hi.push_back(knot_bounds_[bound_idx].second);
      mean_slot_.push_back(true);
      ++bound_idx;
    }
    const int q = factor_count(o.shape);
    for (int r = 0; r < q; ++r)
      for (int c = 0; c <= r; ++c) {
        const std::string name = "psi_" + o.name + "_" + std::to_string(r + 1) +
                                 std::to_string(c + 1);
        reparam_names_.push_back(name);
        original_names_.push_back(name);
        lo.push_back(-kInf);
        hi.push_back(kInf);
        mean_slot_.push_back(false);
      }
  }
  if (spec_.parallel()) {
    const std::string pair = spec_.outcomes[0].name + spec_.outcomes[1].name;
    const int qy = factor_count(spec_.outcomes[0].shape);
    const int qz = factor_count(spec_.outcomes[1].shape);
    for (int r = 0; r < qy; ++r)
      for (int c = 0; c < qz; ++c) {
        const std::string name = "psi_" + pair + "_" + std::to_string(r + 1) +
                                 std::to_string(c + 1);
        reparam_names_.push_back(name);
        original_names_.push_back(name);
        lo.push_back(-kInf);
        hi.push_back(kInf);
        mean_slot_.push_back(false);
      }
  }
  for (const auto& o : spec_.outcomes) {
    reparam_names_.push_back("theta_" + o.name);
    original_names_.push_back("theta_" + o.name);
    lo.push_back(-kInf);
    hi.push_back(kInf);
    mean_slot_.push_back(false);
  }
  if (spec_.parallel()) {
    const std::string pair = spec_.outcomes[0].name + spec_.outcomes[1].name;
    reparam_names_.push_back("theta_" + pair);
    original_names_.push_back("theta_" + pair);
    lo.push_back(-kInf);
    hi.push_back(kInf);
    mean_slot_.push_back(false);
  }

  lower_ = Eigen::Map<Eigen::VectorXd>(lo.data(), lo.size());
  upper_ = Eigen::Map<Eigen::VectorXd>(hi.data(), hi.size());
}

template <class Frame>
Eigen::VectorXd ParameterMap::pack_any(const Params<Frame>& p) const {
  validate_params(p, spec_);
  Eigen::VectorXd x(size());
  int slot = 0;
  for (size_t u = 0; u < spec_.outcomes.size(); ++u) {
    const auto& o = p.outcome[u];
    for (int i = 0; i < o.mean.size(); ++i) x(slot++) = o.mean(i);
    if (shape_has_knot(o.shape)) x(slot++) = o.knot;
    const int q = factor_count(o.shape);
    for (int r = 0; r < q; ++r)
      for (int c = 0; c <= r; ++c) x(slot++) = o.psi(r, c);
  }
  if (spec_.parallel()) {
    const int qy = factor_count(spec_.outcomes[0].shape);
    const int qz = factor_count(spec_.outcomes[1].shape);
    for (int r = 0; r < qy; ++r)
      for (int c = 0; c < qz; ++c) x(slot++) = p.psi_cross(r, c);
  }
  for (size_t u = 0; u < spec_.outcomes.size(); ++u)
    x(slot++) = p.outcome[u].theta_eps;
  if (spec_.parallel()) x(slot++) = p.theta_eps_cross;
  return x;
}

template <class Frame>
Params<Frame> ParameterMap::unpack_any(const Eigen::VectorXd& x) const {
  if (x.size() != size())
    throw std::invalid_argument("flat vector length does not match parameter map");
  Params<Frame> p;
  p.outcome.resize(spec_.outcomes.size());
  int slot = 0;
  for (size_t u = 0; u < spec_.outcomes.size(); ++u) {
    auto& o = p.outcome[u];
    o.shape = spec_.outcomes[u].shape;
    const int nm = mean_entry_count(o.shape);
    o.mean.resize(nm);
    for (int i = 0; i < nm; ++i) o.mean(i) = x(slot++);
    if (shape_has_knot(o.shape)) o.knot = x(slot++);
    const int q = factor_count(o.shape);
    o.psi.resize(q, q);
    for (int r = 0; r < q; ++r)
      for (int c = 0; c <= r; ++c) {
        o.psi(r, c) = x(slot);
        o.psi(c, r) = x(slot);
        ++slot;
      }
  }
  if (spec_.parallel()) {
    const int qy = factor_count(spec_.outcomes[0].shape);
    const int qz = factor_count(spec_.outcomes[1].shape);
    p.psi_cross.resize(qy, qz);
    for (int r = 0; r < qy; ++r)
      for (int c = 0; c < qz; ++c) p.psi_cross(r, c) = x(slot++);
  }
  for (size_t u = 0; u < spec_.outcomes.size(); ++u)
    p.outcome[u].theta_eps = x(slot++);
  if (spec_.parallel()) p.theta_eps_cross = x(slot++);
  return p;
}

Eigen::VectorXd ParameterMap::pack(const ReparamParams& p) const {
  return pack_any(p);
}

ReparamParams ParameterMap::unpack(const Eigen::VectorXd& x) const {
  return unpack_any<frame::Reparam>(x);
}

Eigen::VectorXd ParameterMap::pack_original(const OriginalParams& p) const {
  return pack_any(p);
}

OriginalParams ParameterMap::unpack_original(const Eigen::VectorXd& x) const {
  return unpack_any<frame::Original>(x);
}

int free_parameter_count(const ModelSpec& spec) {
  spec.validate();
  int count = 0;
  for (const auto& o : spec.outcomes) {
    count += mean_entry_count(o.shape);
    if (shape_has_knot(o.shape)) ++count;
    const int q = factor_count(o.shape);
    count += q * (q + 1) / 2;
    ++count;  // residual variance
  }
  if (spec.parallel()) {
    count += factor_count(spec.outcomes[0].shape) * factor_count(spec.outcomes[1].shape);
    ++count;  // cross residual covariance
  }
  return count;
}

}  // namespace pblsgm
