#include "pblsgm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace pblsgm {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("quantile probability must lie in (0, 1)");
  static const boost::math::normal_distribution<double> unit;
  return boost::math::quantile(unit, p);
}

double wald_p_value(double z) {
  static const boost::math::normal_distribution<double> unit;
  return 2.0 * boost::math::cdf(unit, -std::abs(z));
}

void KahanSum::add(double x) {
  const double t = value_ + x;
  if (std::abs(value_) >= std::abs(x))
    compensation_ += (value_ - t) + x;
  else
    compensation_ += (x - t) + value_;
  value_ = t;
}

double stable_ordered_sum(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  KahanSum acc;
  for (double x : xs) acc.add(x);
  return acc.sum();
}

}  // namespace pblsgm
