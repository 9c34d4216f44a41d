#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pblsgm/moments.hpp"
#include "pblsgm/parameter_map.hpp"

namespace pblsgm::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.8g", v);
  return buf;
}

bool mean_panel(const std::string& name) {
  return name.rfind("mu_", 0) == 0 || name.rfind("knot_", 0) == 0;
}

// names depend only on the spec, so placeholder boxes suffice
ParameterMap name_map(const ModelSpec& spec) {
  std::vector<std::pair<double, double>> boxes;
  for (const auto& o : spec.outcomes)
    if (shape_has_knot(o.shape)) boxes.emplace_back(0.0, 1.0);
  return ParameterMap(spec, boxes);
}

void append_row(std::ostringstream& out, const std::string& panel,
                const ParamSummary& row) {
  out << panel << ',' << row.name << ',' << fmt(row.estimate) << ','
      << fmt(row.se) << ',' << fmt(row.p_value) << ',' << fmt(row.ci_lower)
      << ',' << fmt(row.ci_upper) << '\n';
}

ordered_json metrics_json(const std::vector<MetricRow>& rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json j;
    j["name"] = row.name;
    j["truth"] = row.truth;
    j["rel_bias"] = row.metrics.rel_bias;
    j["emp_se"] = row.metrics.emp_se;
    j["rel_rmse"] = row.metrics.rel_rmse;
    j["coverage"] = row.metrics.coverage;
    j["mc_se_bias"] = row.metrics.mc_se_bias;
    j["mean_se"] = row.metrics.mean_se;
    j["absolute"] = row.metrics.absolute;
    j["used"] = row.metrics.used;
    j["ci_used"] = row.metrics.ci_used;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace

std::string estimates_csv(const FitResult& result) {
  std::ostringstream out;
  out << "panel,parameter,estimate,se,p_value,ci_lower,ci_upper\n";
  for (const auto& row : result.summary)
    if (mean_panel(row.name)) append_row(out, "means", row);
  for (const auto& row : result.summary)
    if (!mean_panel(row.name)) append_row(out, "variances", row);
  return out.str();
}

std::string fit_text(const std::string& model, const FitResult& result) {
  std::ostringstream out;
  out << "model: " << model << '\n';
  out << "converged: " << (result.converged ? "yes" : "no") << " (attempts "
      << result.attempts_used << ", " << result.message << ")\n";
  out << "-2loglik " << fmt(result.indices.minus2ll) << "  AIC "
      << fmt(result.indices.aic) << "  BIC " << fmt(result.indices.bic)
      << "  (free parameters " << result.indices.n_params << ", n "
      << result.indices.n << ")\n";

  auto panel = [&](const char* title, bool means) {
    out << '\n' << title << '\n';
    char line[160];
    std::snprintf(line, sizeof(line), "  %-22s %12s %10s %10s %22s\n",
                  "parameter", "estimate", "se", "p", "ci");
    out << line;
    for (const auto& row : result.summary) {
      if (mean_panel(row.name) != means) continue;
      const std::string ci =
          "[" + fmt(row.ci_lower) + ", " + fmt(row.ci_upper) + "]";
      std::snprintf(line, sizeof(line), "  %-22s %12s %10s %10s %22s\n",
                    row.name.c_str(), fmt(row.estimate).c_str(),
                    fmt(row.se).c_str(), fmt(row.p_value).c_str(), ci.c_str());
      out << line;
    }
  };
  panel("growth factor means", true);
  panel("variance components", false);

  out << '\n';
  if (result.impropriety.proper()) {
    out << "solution admissible: no negative variances, correlations in range\n";
  } else {
    for (const auto& name : result.impropriety.negative_variances)
      out << "improper: negative variance estimate for " << name << '\n';
    for (const auto& [a, b] : result.impropriety.extreme_correlations)
      out << "improper: correlation of " << a << " and " << b
          << " outside [-1, 1]\n";
  }
  return out.str();
}

std::string fit_json(const std::string& model, const ModelSpec& spec,
                     const FitResult& result) {
  ordered_json j;
  j["model"] = model;
  j["converged"] = result.converged;
  j["attempts"] = result.attempts_used;
  j["iterations"] = result.iterations;
  j["evaluations"] = result.evaluations;
  j["message"] = result.message;
  j["n"] = result.indices.n;
  j["n_params"] = result.indices.n_params;
  j["loglik"] = result.loglik;
  j["minus2ll"] = result.indices.minus2ll;
  j["aic"] = result.indices.aic;
  j["bic"] = result.indices.bic;
  j["se_available"] = result.se_available;

  ordered_json improper;
  improper["proper"] = result.impropriety.proper();
  improper["negative_variances"] = result.impropriety.negative_variances;
  ordered_json pairs = ordered_json::array();
  for (const auto& [a, b] : result.impropriety.extreme_correlations)
    pairs.push_back({a, b});
  improper["extreme_correlations"] = std::move(pairs);
  j["impropriety"] = std::move(improper);

  ordered_json estimates = ordered_json::array();
  for (const auto& row : result.summary) {
    ordered_json r;
    r["name"] = row.name;
    r["estimate"] = row.estimate;
    r["se"] = row.se;
    r["ci_lower"] = row.ci_lower;
    r["ci_upper"] = row.ci_upper;
    r["p_value"] = row.p_value;
    estimates.push_back(std::move(r));
  }
  j["estimates"] = std::move(estimates);

  ParameterMap map = name_map(spec);
  const Eigen::VectorXd prime = map.pack(result.theta_prime);
  ordered_json reparam = ordered_json::array();
  for (int i = 0; i < map.size(); ++i) {
    ordered_json r;
    r["name"] = map.names_reparam()[i];
    r["estimate"] = prime(i);
    if (result.se_available && result.se_prime_flat.size() == map.size())
      r["se"] = result.se_prime_flat(i);
    reparam.push_back(std::move(r));
  }
  j["estimates_reparam"] = std::move(reparam);
  return j.dump(2) + "\n";
}

std::string curves_csv(const ModelSpec& spec, const ReparamParams& params,
                       double t_lo, double t_hi, int points) {
  if (!(t_lo < t_hi) || points < 2)
    throw std::invalid_argument("curve grid needs t_lo < t_hi and >= 2 points");
  ModelSpec grid_spec;
  grid_spec.waves = points;
  for (const auto& o : spec.outcomes)
    grid_spec.outcomes.push_back({o.name, o.shape, {}});
  Eigen::VectorXd times(points);
  for (int i = 0; i < points; ++i)
    times(i) = t_lo + (t_hi - t_lo) * i / (points - 1);

  const ImpliedMoments mom = implied_moments(grid_spec, times, params);
  std::ostringstream out;
  out << "outcome,t,mean,sd\n";
  int offset = 0;
  for (const auto& o : grid_spec.outcomes) {
    for (int i = 0; i < points; ++i) {
      const double var = mom.cov(offset + i, offset + i);
      out << o.name << ',' << fmt(times(i)) << ',' << fmt(mom.mean(offset + i))
          << ',' << fmt(var >= 0.0 ? std::sqrt(var) : 0.0) << '\n';
    }
    offset += points;
  }
  return out.str();
}

std::string grid_csv(const std::vector<SimulationCondition>& grid) {
  std::ostringstream out;
  out << "label,scenario,n,waves,knot_y,knot_z,rho,theta_eps\n";
  for (const auto& c : grid)
    out << c.label() << ',' << c.scenario << ',' << c.n << ',' << c.waves << ','
        << fmt(c.knot_y) << ',' << fmt(c.knot_z) << ',' << fmt(c.rho) << ','
        << fmt(c.theta_eps) << '\n';
  return out.str();
}

std::string metrics_csv(const std::vector<MetricRow>& rows) {
  std::ostringstream out;
  out << "parameter,truth,rel_bias,emp_se,rel_rmse,coverage,mc_se_bias,mean_se,"
         "absolute,used,ci_used\n";
  for (const auto& row : rows) {
    const Metrics& m = row.metrics;
    out << row.name << ',' << fmt(row.truth) << ',' << fmt(m.rel_bias) << ','
        << fmt(m.emp_se) << ',' << fmt(m.rel_rmse) << ',' << fmt(m.coverage)
        << ',' << fmt(m.mc_se_bias) << ',' << fmt(m.mean_se) << ','
        << (m.absolute ? "true" : "false") << ',' << m.used << ',' << m.ci_used
        << '\n';
  }
  return out.str();
}

std::string condition_json(const ConditionResult& result) {
  const SimulationCondition& c = result.condition;
  ordered_json j;
  j["label"] = c.label();
  j["condition"] = {{"scenario", c.scenario}, {"n", c.n},
                    {"waves", c.waves},       {"knot_y", c.knot_y},
                    {"knot_z", c.knot_z},     {"rho", c.rho},
                    {"theta_eps", c.theta_eps}};
  j["replications"] = result.replications;
  j["datasets_generated"] = result.datasets_generated;
  j["full_nonconverged"] = result.full_nonconverged;
  j["reduced_nonconverged"] = result.reduced_nonconverged;
  j["full_convergence_rate"] = result.full_convergence_rate();
  j["reduced_convergence_rate"] = result.reduced_convergence_rate();
  j["full_improper"] = result.full_improper;
  j["improper_negative_variance"] = result.improper_negative_variance;
  j["improper_out_of_range"] = result.improper_out_of_range;
  j["full_metrics"] = metrics_json(result.full_metrics);
  j["reduced_metrics"] = metrics_json(result.reduced_metrics);
  return j.dump(2) + "\n";
}

std::string rollup_csv(const std::vector<RollupRow>& rows) {
  std::ostringstream out;
  out << "parameter,conditions";
  for (const char* family :
       {"rel_bias", "emp_se", "rel_rmse", "coverage", "mean_se"})
    out << ",median_" << family << ",min_" << family << ",max_" << family;
  out << '\n';
  for (const auto& r : rows) {
    out << r.name << ',' << r.conditions;
    for (double v : {r.median_rel_bias, r.min_rel_bias, r.max_rel_bias,
                     r.median_emp_se, r.min_emp_se, r.max_emp_se,
                     r.median_rel_rmse, r.min_rel_rmse, r.max_rel_rmse,
                     r.median_coverage, r.min_coverage, r.max_coverage,
                     r.median_mean_se, r.min_mean_se, r.max_mean_se})
      out << ',' << fmt(v);
    out << '\n';
  }
  return out.str();
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  out << "model,outcomes,converged,n_params,loglik,minus2ll,aic,bic\n";
  for (const auto& r : rows)
    out << r.model << ',' << r.outcomes << ','
        << (r.converged ? "true" : "false") << ',' << r.indices.n_params << ','
        << fmt(r.loglik) << ',' << fmt(r.indices.minus2ll) << ','
        << fmt(r.indices.aic) << ',' << fmt(r.indices.bic) << '\n';
  return out.str();
}

std::string compare_text(const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-20s %-10s %-10s %8s %14s %14s %14s\n",
                "model", "outcomes", "converged", "params", "-2loglik", "AIC",
                "BIC");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-20s %-10s %-10s %8d %14s %14s %14s\n",
                  r.model.c_str(), r.outcomes.c_str(),
                  r.converged ? "yes" : "no", r.indices.n_params,
                  fmt(r.indices.minus2ll).c_str(), fmt(r.indices.aic).c_str(),
                  fmt(r.indices.bic).c_str());
    out << line;
  }
  return out.str();
}

std::string compare_json(const std::vector<CompareRow>& rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json j;
    j["model"] = r.model;
    j["outcomes"] = r.outcomes;
    j["converged"] = r.converged;
    j["n_params"] = r.indices.n_params;
    j["loglik"] = r.loglik;
    j["minus2ll"] = r.indices.minus2ll;
    j["aic"] = r.indices.aic;
    j["bic"] = r.indices.bic;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path())
    std::filesystem::create_directories(target.parent_path());
  std::ofstream out(target, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot write file");
  out << content;
}

}  // namespace pblsgm::cli
