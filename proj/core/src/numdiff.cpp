#include "pblsgm/numdiff.hpp"

#include <atomic>
#include <cmath>
#include <utility>
#include <vector>

#include "pblsgm/parallel.hpp"

namespace pblsgm {

std::optional<Eigen::VectorXd> fd_gradient_central(const Objective& f,
                                                   const Eigen::VectorXd& x,
                                                   const FdOptions& opt) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd g(n);
  Eigen::VectorXd xt = x;
  for (int j = 0; j < n; ++j) {
    const double h = opt.gradient_central_scale * (1.0 + std::abs(x(j)));
    xt(j) = x(j) + h;
    const auto fp = f(xt);
    if (!fp) return std::nullopt;
    xt(j) = x(j) - h;
    const auto fm = f(xt);
    if (!fm) return std::nullopt;
    xt(j) = x(j);
    g(j) = (*fp - *fm) / (2.0 * h);
  }
  return g;
}

std::optional<Eigen::VectorXd> fd_gradient_forward(const Objective& f,
                                                   const Eigen::VectorXd& x,
                                                   double f_at_x,
                                                   const FdOptions& opt) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd g(n);
  Eigen::VectorXd xt = x;
  for (int j = 0; j < n; ++j) {
    const double h = opt.gradient_forward_scale * (1.0 + std::abs(x(j)));
    xt(j) = x(j) + h;
    const auto fp = f(xt);
    if (!fp) return std::nullopt;
    xt(j) = x(j);
    g(j) = (*fp - f_at_x) / h;
  }
  return g;
}

std::optional<Eigen::MatrixXd> fd_hessian(const Objective& f, const Eigen::VectorXd& x,
                                          const FdOptions& opt) {
  const int n = static_cast<int>(x.size());
  const auto f0 = f(x);
  if (!f0) return std::nullopt;

  Eigen::VectorXd h(n);
  for (int j = 0; j < n; ++j)
    h(j) = opt.hessian_scale * (1.0 + std::abs(x(j)));

  std::vector<std::pair<int, int>> cells;
  cells.reserve(n * (n + 1) / 2);
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) cells.emplace_back(j, k);

  Eigen::MatrixXd hess(n, n);
  std::atomic<bool> failed{false};
  parallel_for(cells.size(), opt.threads, [&](size_t c) {
    if (failed.load(std::memory_order_relaxed)) return;
    const auto [j, k] = cells[c];
    Eigen::VectorXd xt = x;
    double value;
    if (j == k) {
      xt(j) = x(j) + h(j);
      const auto fp = f(xt);
      xt(j) = x(j) - h(j);
      const auto fm = f(xt);
      if (!fp || !fm) {
        failed.store(true, std::memory_order_relaxed);
        return;
      }
      value = (*fp - 2.0 * *f0 + *fm) / (h(j) * h(j));
    } else {
      xt(j) = x(j) + h(j);
      xt(k) = x(k) + h(k);
      const auto fpp = f(xt);
      xt(k) = x(k) - h(k);
      const auto fpm = f(xt);
      xt(j) = x(j) - h(j);
      const auto fmm = f(xt);
      xt(k) = x(k) + h(k);
      const auto fmp = f(xt);
      if (!fpp || !fpm || !fmm || !fmp) {
        failed.store(true, std::memory_order_relaxed);
        return;
      }
      value = (*fpp - *fpm - *fmp + *fmm) / (4.0 * h(j) * h(k));
    }
    hess(j, k) = value;
    hess(k, j) = value;
  });
  if (failed.load()) return std::nullopt;
  return hess;
}

Eigen::MatrixXd fd_jacobian(const VectorMap& g, const Eigen::VectorXd& x,
                            double step_scale) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd jac;
  Eigen::VectorXd xt = x;
  for (int j = 0; j < n; ++j) {
    const double h = step_scale * (1.0 + std::abs(x(j)));
    xt(j) = x(j) + h;
    Eigen::VectorXd gp = g(xt);
    xt(j) = x(j) - h;
    Eigen::VectorXd gm = g(xt);
    xt(j) = x(j);
    if (jac.size() == 0) jac.resize(gp.size(), n);
    jac.col(j) = (gp - gm) / (2.0 * h);
  }
  return jac;
}

}  // namespace pblsgm
