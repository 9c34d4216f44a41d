#pragma once

#include <cstddef>
#include <vector>

namespace pblsgm {

// Standard normal quantile, e.g. normal_quantile(0.975) for 95% Wald limits.
double normal_quantile(double p);

// Two-sided p-value for a Wald z statistic.
double wald_p_value(double z);

// Neumaier compensated summation; sum() returns value + carried compensation.
class KahanSum {
 public:
  void add(double x);
  double sum() const { return value_ + compensation_; }

 private:
  double value_ = 0.0;
  double compensation_ = 0.0;
};

// Compensated sum of a vector after sorting (permutation-invariant reduction).
double stable_ordered_sum(std::vector<double> xs);

}  // namespace pblsgm
