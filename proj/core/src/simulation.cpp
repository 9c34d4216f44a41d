#include "pblsgm/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "pblsgm/parameter_map.hpp"
#include "pblsgm/trajectory.hpp"

namespace pblsgm {

namespace {

constexpr double kFactorSd[4] = {5.0, 1.0, 1.0, 0.3};
constexpr double kWithinCorr = 0.3;
constexpr double kResidualCorr = 0.3;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

MvnSampler::MvnSampler(Eigen::VectorXd mean, const Eigen::MatrixXd& cov,
                       double eigen_floor)
    : mean_(std::move(mean)) {
  if (cov.rows() != cov.cols() || cov.rows() != mean_.size())
    throw std::invalid_argument("mvn sampler: mean and covariance sizes disagree");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) {
    factor_ = llt.matrixL();
    return;
  }
  // singular or indefinite input: square root through the spectrum, degenerate
  // directions pinned at zero
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("mvn sampler: eigendecomposition failed");
  Eigen::VectorXd vals = es.eigenvalues();
  for (int i = 0; i < vals.size(); ++i)
    if (vals(i) < eigen_floor) vals(i) = 0.0;
  factor_ = es.eigenvectors() * vals.cwiseSqrt().asDiagonal();
}

Eigen::VectorXd MvnSampler::draw(std::mt19937_64& rng) const {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd z(mean_.size());
  for (int i = 0; i < z.size(); ++i) z(i) = gauss(rng);
  return mean_ + factor_ * z;
}

std::string SimulationCondition::label() const {
  std::ostringstream out;
  out << "s" << scenario << "_n" << n << "_w" << waves << "_k" << knot_y << "-"
      << knot_z << "_r" << rho << "_t" << theta_eps;
  return out.str();
}

void SimulationCondition::validate() const {
  if (scenario < 1 || scenario > 3)
    throw std::invalid_argument("condition: scenario must be 1, 2, or 3");
  if (n != 200 && n != 500)
    throw std::invalid_argument("condition: n must be 200 or 500");
  const bool layout_ok = (waves == 6 && knot_y == 2.5 && knot_z == 2.5) ||
                         (waves == 10 && knot_y == 4.5 && knot_z == 4.5) ||
                         (waves == 10 && knot_y == 3.5 && knot_z == 5.5);
  if (!layout_ok)
    throw std::invalid_argument(
        "condition: waves/knots must be one of 6/(2.5,2.5), 10/(4.5,4.5), "
        "10/(3.5,5.5)");
  if (rho != -0.3 && rho != 0.0 && rho != 0.3)
    throw std::invalid_argument("condition: rho must be -0.3, 0, or 0.3");
  if (theta_eps != 1.0 && theta_eps != 2.0)
    throw std::invalid_argument("condition: residual variance must be 1 or 2");
  if (!(time_window >= 0.0) || time_window >= 0.5)
    throw std::invalid_argument("condition: time window must lie in [0, 0.5)");
}

std::vector<SimulationCondition> condition_grid() {
  struct Layout {
    int waves;
    double knot_y, knot_z;
  };
  const Layout layouts[] = {{6, 2.5, 2.5}, {10, 4.5, 4.5}, {10, 3.5, 5.5}};
  std::vector<SimulationCondition> grid;
  grid.reserve(108);
  for (int scenario : {1, 2, 3})
    for (const Layout& layout : layouts)
      for (double rho : {-0.3, 0.0, 0.3})
        for (double theta : {1.0, 2.0})
          for (int n : {200, 500}) {
            SimulationCondition cond;
            cond.scenario = scenario;
            cond.n = n;
            cond.waves = layout.waves;
            cond.knot_y = layout.knot_y;
            cond.knot_z = layout.knot_z;
            cond.rho = rho;
            cond.theta_eps = theta;
            grid.push_back(cond);
          }
  return grid;
}

OriginalParams condition_params(const SimulationCondition& cond) {
  cond.validate();
  OriginalParams p;
  p.outcome.resize(2);
  for (int u = 0; u < 2; ++u) {
    OutcomeParams& o = p.outcome[u];
    o.shape = TrajectoryShape::BilinearRandomKnot;
    o.mean = Eigen::VectorXd(3);
    switch (cond.scenario) {
      case 1:  // intercepts differ
        o.mean << (u == 0 ? 98.0 : 102.0), 5.0, 2.6;
        break;
      case 2:  // first slopes differ
        o.mean << 100.0, (u == 0 ? 4.4 : 3.6), 2.0;
        break;
      default:  // second slopes differ
        o.mean << 100.0, 5.0, (u == 0 ? 2.6 : 3.4);
        break;
    }
    o.knot = (u == 0) ? cond.knot_y : cond.knot_z;
    o.psi = Eigen::MatrixXd(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        o.psi(i, j) = (i == j ? 1.0 : kWithinCorr) * kFactorSd[i] * kFactorSd[j];
    o.theta_eps = cond.theta_eps;
  }
  p.psi_cross = Eigen::MatrixXd(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      p.psi_cross(i, j) = cond.rho * kFactorSd[i] * kFactorSd[j];
  p.theta_eps_cross = kResidualCorr * cond.theta_eps;
  return p;
}

ModelSpec condition_model(const SimulationCondition& cond, bool reduced_knots) {
  ModelSpec spec;
  spec.waves = cond.waves;
  const TrajectoryShape shape = reduced_knots ? TrajectoryShape::BilinearFixedKnot
                                              : TrajectoryShape::BilinearRandomKnot;
  spec.outcomes.push_back({"y", shape, {}});
  spec.outcomes.push_back({"z", shape, {}});
  return spec;
}

Dataset generate_from_params(const OriginalParams& truth,
                             const Eigen::VectorXd& wave_grid, double time_window,
                             int n, std::mt19937_64& rng) {
  if (truth.outcome.size() != 2 ||
      truth.outcome[0].shape != TrajectoryShape::BilinearRandomKnot ||
      truth.outcome[1].shape != TrajectoryShape::BilinearRandomKnot)
    throw std::invalid_argument(
        "generate_from_params: generating model must be the bivariate "
        "random-knot spline");
  if (n <= 0 || wave_grid.size() == 0)
    throw std::invalid_argument("generate_from_params: empty design");

  Eigen::VectorXd factor_mean(8);
  factor_mean << truth.outcome[0].mean, truth.outcome[0].knot,
      truth.outcome[1].mean, truth.outcome[1].knot;
  MvnSampler factors(factor_mean, stacked_psi(truth));

  Eigen::Matrix2d theta;
  theta << truth.outcome[0].theta_eps, truth.theta_eps_cross,
      truth.theta_eps_cross, truth.outcome[1].theta_eps;
  MvnSampler residuals(Eigen::Vector2d::Zero(), theta);

  const int waves = static_cast<int>(wave_grid.size());
  std::uniform_real_distribution<double> jitter(-time_window, time_window);
  Dataset data;
  data.reserve(n);
  for (int i = 0; i < n; ++i) {
    IndividualRecord rec;
    rec.id = std::to_string(i);
    rec.times = Eigen::VectorXd(waves);
    for (int j = 0; j < waves; ++j) rec.times(j) = wave_grid(j) + jitter(rng);
    Eigen::VectorXd eta = factors.draw(rng);
    rec.values.assign(2, Eigen::VectorXd(waves));
    rec.observed.assign(2, std::vector<bool>(waves, true));
    for (int j = 0; j < waves; ++j) {
      Eigen::VectorXd eps = residuals.draw(rng);
      for (int u = 0; u < 2; ++u)
        rec.values[u](j) = bilinear_value(eta(4 * u), eta(4 * u + 1),
                                          eta(4 * u + 2), eta(4 * u + 3),
                                          rec.times(j)) +
                           eps(u);
    }
    data.push_back(std::move(rec));
  }
  return data;
}

Dataset generate_dataset(const SimulationCondition& cond, std::mt19937_64& rng) {
  cond.validate();
  Eigen::VectorXd grid(cond.waves);
  for (int j = 0; j < cond.waves; ++j) grid(j) = j;
  return generate_from_params(condition_params(cond), grid, cond.time_window,
                              cond.n, rng);
}

Metrics performance_metrics(const std::vector<double>& estimates,
                            const std::vector<double>& ses,
                            const std::vector<std::pair<double, double>>& cis,
                            double truth) {
  Metrics m;
  m.absolute = (truth == 0.0);

  double sum = 0.0;
  for (double e : estimates)
    if (std::isfinite(e)) {
      sum += e;
      ++m.used;
    }
  if (m.used == 0) {
    m.rel_bias = m.emp_se = m.rel_rmse = m.mc_se_bias = kNan;
  } else {
    const double mean = sum / m.used;
    const double bias = mean - truth;
    double ss = 0.0;
    for (double e : estimates)
      if (std::isfinite(e)) ss += (e - mean) * (e - mean);
    const double var = (m.used > 1) ? ss / (m.used - 1) : kNan;
    m.rel_bias = m.absolute ? bias : bias / truth;
    m.emp_se = std::sqrt(var);
    const double rmse = std::sqrt(bias * bias + var);
    m.rel_rmse = m.absolute ? rmse : rmse / std::abs(truth);
    m.mc_se_bias = std::sqrt(var / m.used);
  }

  double se_sum = 0.0;
  int se_used = 0;
  for (double s : ses)
    if (std::isfinite(s)) {
      se_sum += s;
      ++se_used;
    }
  m.mean_se = se_used ? se_sum / se_used : kNan;

  int covered = 0;
  for (const auto& [lo, hi] : cis)
    if (std::isfinite(lo) && std::isfinite(hi)) {
      ++m.ci_used;
      if (lo <= truth && truth <= hi) ++covered;
    }
  m.coverage = m.ci_used ? static_cast<double>(covered) / m.ci_used : kNan;
  return m;
}

double ConditionResult::full_convergence_rate() const {
  return datasets_generated
             ? static_cast<double>(datasets_generated - full_nonconverged) /
                   datasets_generated
             : kNan;
}

double ConditionResult::reduced_convergence_rate() const {
  return datasets_generated
             ? static_cast<double>(datasets_generated - reduced_nonconverged) /
                   datasets_generated
             : kNan;
}

namespace {

// Accumulated estimate/SE/interval columns for one parameter slot.
struct SlotCells {
  std::vector<double> est, se;
  std::vector<std::pair<double, double>> ci;
};

std::unordered_map<std::string, const ParamSummary*> index_summary(
    const std::vector<ParamSummary>& rows) {
  std::unordered_map<std::string, const ParamSummary*> index;
  for (const auto& row : rows) index[row.name] = &row;
  return index;
}

}  // namespace

namespace {

// One summary cell captured from an accepted replication.
struct CellDraw {
  bool present = false;
  double est = 0.0, se = 0.0, ci_lower = 0.0, ci_upper = 0.0;
};

// Everything a replication slot produces; slots are merged in slot order so
// the result does not depend on the thread count.
struct SlotOutcome {
  int datasets = 0;
  int full_nonconverged = 0;
  int reduced_nonconverged = 0;
  bool negative = false;
  bool out_of_range = false;
  std::vector<CellDraw> full_rows, reduced_rows;
};

}  // namespace

ConditionResult run_condition(const SimulationCondition& cond, int reps,
                              std::uint64_t master_seed,
                              const ConditionFitter& fitter, int threads) {
  cond.validate();
  if (reps <= 0) throw std::invalid_argument("run_condition: reps must be positive");

  const double upper = cond.waves - 1.0;
  const std::vector<std::pair<double, double>> knot_box = {{0.0, upper},
                                                           {0.0, upper}};
  ParameterMap full_map(condition_model(cond, false), knot_box);
  ParameterMap reduced_map(condition_model(cond, true), knot_box);
  const auto& full_names = full_map.names_original();
  const auto& reduced_names = reduced_map.names_original();

  const Eigen::VectorXd full_truth = full_map.pack_original(condition_params(cond));
  std::unordered_map<std::string, int> full_index;
  for (size_t i = 0; i < full_names.size(); ++i)
    full_index[full_names[i]] = static_cast<int>(i);

  // the reduced model's counterpart of a full-model slot shares the name,
  // except the knot mean (mu_knot_X there, knot_X here); knot variances and
  // covariances have none
  auto reduced_counterpart = [&](const std::string& full_name) -> std::string {
    if (full_name.rfind("mu_knot_", 0) == 0) return full_name.substr(3);
    return full_name;
  };
  std::unordered_map<std::string, int> reduced_index;
  for (size_t i = 0; i < reduced_names.size(); ++i)
    reduced_index[reduced_names[i]] = static_cast<int>(i);

  const int budget = 10 * reps;
  std::atomic<int> claimed{0};
  std::atomic<int> next_slot{0};
  std::atomic<bool> abort{false};
  std::vector<SlotOutcome> slots(reps);
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto run_slot = [&](int slot) {
    SlotOutcome& out = slots[slot];
    std::mt19937_64 data_rng(master_seed ^ static_cast<std::uint64_t>(slot));
    for (int attempt = 0;; ++attempt) {
      if (claimed.fetch_add(1) >= budget)
        throw std::runtime_error("run_condition: dataset budget exhausted for " +
                                 cond.label());
      Dataset data = generate_dataset(cond, data_rng);
      ++out.datasets;
      const std::uint64_t fit_seed =
          (master_seed ^ (0x9E3779B97F4A7C15ULL *
                          static_cast<std::uint64_t>(slot + 1))) +
          static_cast<std::uint64_t>(attempt);
      ReplicationFits fits = fitter(data, cond, fit_seed);
      if (!fits.full.converged) ++out.full_nonconverged;
      if (!fits.reduced.converged) ++out.reduced_nonconverged;
      if (!fits.full.converged || !fits.reduced.converged) continue;

      out.negative = !fits.full.impropriety.negative_variances.empty();
      out.out_of_range = !fits.full.impropriety.extreme_correlations.empty();
      const bool improper = out.negative || out.out_of_range;

      auto full_rows = index_summary(fits.full.summary);
      auto reduced_rows = index_summary(fits.reduced.summary);
      out.full_rows.resize(full_names.size());
      out.reduced_rows.resize(reduced_names.size());
      for (size_t i = 0; i < full_names.size(); ++i) {
        const ParamSummary* src = nullptr;
        if (!improper) {
          auto it = full_rows.find(full_names[i]);
          if (it != full_rows.end()) src = it->second;
        } else {
          auto it = reduced_rows.find(reduced_counterpart(full_names[i]));
          if (it != reduced_rows.end()) src = it->second;
        }
        if (!src) continue;  // knot rows of an improper replication
        out.full_rows[i] = {true, src->estimate, src->se, src->ci_lower,
                            src->ci_upper};
      }
      for (size_t i = 0; i < reduced_names.size(); ++i) {
        auto it = reduced_rows.find(reduced_names[i]);
        if (it == reduced_rows.end()) continue;
        out.reduced_rows[i] = {true, it->second->estimate, it->second->se,
                               it->second->ci_lower, it->second->ci_upper};
      }
      return;
    }
  };

  auto worker = [&] {
    for (;;) {
      if (abort.load()) return;
      const int slot = next_slot.fetch_add(1);
      if (slot >= reps) return;
      try {
        run_slot(slot);
      } catch (...) {
        {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
        abort.store(true);
        return;
      }
    }
  };

  const int pool = std::max(1, std::min(threads, reps));
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> crew;
    crew.reserve(pool);
    for (int t = 0; t < pool; ++t) crew.emplace_back(worker);
    for (auto& th : crew) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  ConditionResult res;
  res.condition = cond;
  res.replications = reps;
  std::vector<SlotCells> full_cells(full_names.size());
  std::vector<SlotCells> reduced_cells(reduced_names.size());
  for (const SlotOutcome& out : slots) {
    res.datasets_generated += out.datasets;
    res.full_nonconverged += out.full_nonconverged;
    res.reduced_nonconverged += out.reduced_nonconverged;
    if (out.negative || out.out_of_range) {
      ++res.full_improper;
      if (out.negative) ++res.improper_negative_variance;
      if (out.out_of_range) ++res.improper_out_of_range;
    }
    for (size_t i = 0; i < full_names.size(); ++i) {
      const CellDraw& c = out.full_rows[i];
      if (!c.present) continue;
      full_cells[i].est.push_back(c.est);
      full_cells[i].se.push_back(c.se);
      full_cells[i].ci.emplace_back(c.ci_lower, c.ci_upper);
    }
    for (size_t i = 0; i < reduced_names.size(); ++i) {
      const CellDraw& c = out.reduced_rows[i];
      if (!c.present) continue;
      reduced_cells[i].est.push_back(c.est);
      reduced_cells[i].se.push_back(c.se);
      reduced_cells[i].ci.emplace_back(c.ci_lower, c.ci_upper);
    }
  }

  for (size_t i = 0; i < full_names.size(); ++i) {
    MetricRow row;
    row.name = full_names[i];
    row.truth = full_truth(static_cast<int>(i));
    row.metrics = performance_metrics(full_cells[i].est, full_cells[i].se,
                                      full_cells[i].ci, row.truth);
    res.full_metrics.push_back(std::move(row));
  }
  for (size_t i = 0; i < reduced_names.size(); ++i) {
    MetricRow row;
    row.name = reduced_names[i];
    row.truth = full_truth(full_index.at(
        reduced_names[i].rfind("knot_", 0) == 0 ? "mu_" + reduced_names[i]
                                                : reduced_names[i]));
    row.metrics = performance_metrics(reduced_cells[i].est, reduced_cells[i].se,
                                      reduced_cells[i].ci, row.truth);
    res.reduced_metrics.push_back(std::move(row));
  }
  return res;
}

ConditionResult run_condition(const SimulationCondition& cond, int reps,
                              std::uint64_t master_seed,
                              const FitOptions& base_options, int threads) {
  ConditionFitter fitter = [&base_options](const Dataset& data,
                                           const SimulationCondition& c,
                                           std::uint64_t fit_seed) {
    ReplicationFits out;
    FitOptions reduced_options = base_options;
    reduced_options.seed = fit_seed;
    out.reduced = fit(data, condition_model(c, true), reduced_options);

    FitOptions full_options = base_options;
    full_options.seed = fit_seed ^ 0x517CC1B727220A95ULL;
    if (out.reduced.converged) {
      // warm start: carry the reduced solution over, seed the knot-deviation
      // rows with a small variance and zero covariances
      ReparamParams start = out.reduced.theta_prime;
      for (auto& o : start.outcome) {
        o.shape = TrajectoryShape::BilinearRandomKnot;
        Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(4, 4);
        psi.topLeftCorner(3, 3) = o.psi;
        psi(3, 3) = 0.04;
        o.psi = psi;
      }
      Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(4, 4);
      cross.topLeftCorner(3, 3) = start.psi_cross;
      start.psi_cross = cross;
      full_options.initial = start;
    }
    out.full = fit(data, condition_model(c, false), full_options);
    return out;
  };
  return run_condition(cond, reps, master_seed, fitter, threads);
}

std::vector<RollupRow> rollup_metrics(const std::vector<ConditionResult>& results,
                                      bool reduced) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<const Metrics*>> by_name;
  for (const auto& res : results)
    for (const auto& row : (reduced ? res.reduced_metrics : res.full_metrics)) {
      if (!by_name.count(row.name)) order.push_back(row.name);
      by_name[row.name].push_back(&row.metrics);
    }

  auto summarize = [](std::vector<double> v, double& med, double& lo, double& hi) {
    v.erase(std::remove_if(v.begin(), v.end(),
                           [](double x) { return std::isnan(x); }),
            v.end());
    if (v.empty()) {
      med = lo = hi = kNan;
      return;
    }
    std::sort(v.begin(), v.end());
    lo = v.front();
    hi = v.back();
    const size_t m = v.size() / 2;
    med = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  };

  std::vector<RollupRow> rows;
  rows.reserve(order.size());
  for (const auto& name : order) {
    RollupRow r;
    r.name = name;
    std::vector<double> bias, emp, rmse, cover, mse;
    for (const Metrics* m : by_name[name]) {
      bias.push_back(m->rel_bias);
      emp.push_back(m->emp_se);
      rmse.push_back(m->rel_rmse);
      cover.push_back(m->coverage);
      mse.push_back(m->mean_se);
    }
    r.conditions = static_cast<int>(std::count_if(
        bias.begin(), bias.end(), [](double x) { return !std::isnan(x); }));
    summarize(bias, r.median_rel_bias, r.min_rel_bias, r.max_rel_bias);
    summarize(emp, r.median_emp_se, r.min_emp_se, r.max_emp_se);
    summarize(rmse, r.median_rel_rmse, r.min_rel_rmse, r.max_rel_rmse);
    summarize(cover, r.median_coverage, r.min_coverage, r.max_coverage);
    summarize(mse, r.median_mean_se, r.min_mean_se, r.max_mean_se);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace pblsgm
