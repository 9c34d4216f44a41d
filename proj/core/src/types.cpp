#include "pblsgm/types.hpp"

#include <set>
#include <stdexcept>

#include "pblsgm/params.hpp"

namespace pblsgm {

int factor_count(TrajectoryShape shape) {
  switch (shape) {
    case TrajectoryShape::BilinearRandomKnot: return 4;
    case TrajectoryShape::BilinearFixedKnot: return 3;
    case TrajectoryShape::Linear: return 2;
    case TrajectoryShape::Quadratic: return 3;
  }
  throw std::invalid_argument("unknown trajectory shape");
}

bool shape_has_knot(TrajectoryShape shape) {
  return shape == TrajectoryShape::BilinearRandomKnot ||
         shape == TrajectoryShape::BilinearFixedKnot;
}

std::string_view shape_name(TrajectoryShape shape) {
  switch (shape) {
    case TrajectoryShape::BilinearRandomKnot: return "bilinear-random-knot";
    case TrajectoryShape::BilinearFixedKnot: return "bilinear-fixed-knot";
    case TrajectoryShape::Linear: return "linear";
    case TrajectoryShape::Quadratic: return "quadratic";
  }
  return "?";
}

void ModelSpec::validate() const {
  if (waves < 2) throw std::invalid_argument("model needs at least 2 waves");
  if (outcomes.empty() || outcomes.size() > 2)
    throw std::invalid_argument("model supports 1 or 2 outcomes");
  std::set<std::string> names;
  for (const auto& o : outcomes) {
    if (o.name.empty()) throw std::invalid_argument("outcome name must be non-empty");
    if (!names.insert(o.name).second)
      throw std::invalid_argument("duplicate outcome name: " + o.name);
    if (!o.observed.empty() && static_cast<int>(o.observed.size()) != waves)
      throw std::invalid_argument("observation template length != waves for " + o.name);
  }
}

int IndividualRecord::observed_count() const {
  int count = 0;
  for (const auto& mask : observed)
    for (bool cell : mask)
      if (cell) ++count;
  return count;
}

bool IndividualRecord::times_strictly_increasing() const {
  double last = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < times.size(); ++j) {
    bool any = false;
    for (const auto& mask : observed)
      if (j < static_cast<int>(mask.size()) && mask[j]) any = true;
    if (!any) continue;
    if (times(j) <= last) return false;
    last = times(j);
  }
  return true;
}

void validate_dataset(const Dataset& data, const ModelSpec& spec) {
  spec.validate();
  if (data.empty()) throw std::invalid_argument("dataset is empty");
  const size_t n_out = spec.outcomes.size();
  for (size_t i = 0; i < data.size(); ++i) {
    const auto& rec = data[i];
    auto fail = [&](const std::string& what) {
      throw std::invalid_argument("record " + rec.id + " (index " +
                                  std::to_string(i) + "): " + what);
    };
    if (rec.times.size() != spec.waves) fail("times length != waves");
    if (rec.values.size() != n_out || rec.observed.size() != n_out)
      fail("outcome count mismatch");
    for (size_t u = 0; u < n_out; ++u) {
      if (rec.values[u].size() != spec.waves) fail("value vector length != waves");
      if (rec.observed[u].size() != static_cast<size_t>(spec.waves))
        fail("mask length != waves");
      if (!spec.outcomes[u].observed.empty()) {
        for (int j = 0; j < spec.waves; ++j)
          if (rec.observed[u][j] && !spec.outcomes[u].observed[j])
            fail("cell observed outside the observation template");
      }
    }
    if (rec.observed_count() == 0) fail("no observed cells");
    if (!rec.times_strictly_increasing()) fail("times not strictly increasing");
  }
}

template <class Frame>
void validate_params(const Params<Frame>& p, const ModelSpec& spec) {
  spec.validate();
  if (p.outcome.size() != spec.outcomes.size())
    throw std::invalid_argument("parameter outcome count != model outcome count");
  for (size_t u = 0; u < p.outcome.size(); ++u) {
    const auto& o = p.outcome[u];
    if (o.shape != spec.outcomes[u].shape)
      throw std::invalid_argument("parameter shape mismatch for outcome " +
                                  spec.outcomes[u].name);
    const int q = factor_count(o.shape);
    const int mean_len = shape_has_knot(o.shape) ? 3 : q;
    if (o.mean.size() != mean_len)
      throw std::invalid_argument("mean length mismatch for outcome " +
                                  spec.outcomes[u].name);
    if (o.psi.rows() != q || o.psi.cols() != q)
      throw std::invalid_argument("psi size mismatch for outcome " +
                                  spec.outcomes[u].name);
    if (shape_has_knot(o.shape) && !std::isfinite(o.knot))
      throw std::invalid_argument("knot must be finite for outcome " +
                                  spec.outcomes[u].name);
  }
  if (p.parallel()) {
    if (p.psi_cross.rows() != factor_count(p.outcome[0].shape) ||
        p.psi_cross.cols() != factor_count(p.outcome[1].shape))
      throw std::invalid_argument("cross covariance block size mismatch");
  }
}

template void validate_params<frame::Original>(const OriginalParams&, const ModelSpec&);
template void validate_params<frame::Reparam>(const ReparamParams&, const ModelSpec&);

}  // namespace pblsgm
