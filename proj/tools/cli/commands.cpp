#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "pblsgm/fit.hpp"

#include "report.hpp"

namespace pblsgm::cli {

namespace {

void shift_times(Dataset& records, double offset) {
  if (offset == 0.0) return;
  for (auto& rec : records)
    for (int j = 0; j < rec.times.size(); ++j)
      if (!std::isnan(rec.times(j))) rec.times(j) -= offset;
}

WideDataset load_data(const std::string& path, bool from_long, double offset) {
  WideDataset data = from_long ? long_to_wide(path) : load_wide_csv(path);
  shift_times(data.records, offset);
  return data;
}

std::filesystem::path joined(const std::string& dir, const std::string& name) {
  return std::filesystem::path(dir) / name;
}

std::string outcome_names(const ModelSpec& spec) {
  std::string names;
  for (const auto& o : spec.outcomes)
    names += (names.empty() ? "" : "+") + o.name;
  return names;
}

}  // namespace

int fit_exit_code(const FitResult& result) {
  if (!result.converged) return 1;
  return result.impropriety.proper() ? 0 : 2;
}

int cmd_fit(const FitCommand& cmd, std::ostream& out, std::ostream& err) {
  try {
    WideDataset data =
        load_data(cmd.data_path, cmd.from_long, cmd.config.time_offset);
    const ModelSpec spec = build_model_spec(cmd.config, data.layout);
    const FitResult result =
        fit(data.records, spec, effective_fit_options(cmd.config));

    out << fit_text(cmd.config.model, result);
    if (!result.converged &&
        (cmd.config.model == "full" || cmd.config.model == "mixed"))
      err << "hint: random-knot variance surfaces can be too flat to optimize; "
             "try --model reduced\n";

    if (!cmd.out_dir.empty()) {
      const auto range = observed_time_range(data.records);
      write_file(joined(cmd.out_dir, "estimates.csv").string(),
                 estimates_csv(result));
      write_file(joined(cmd.out_dir, "summary.json").string(),
                 fit_json(cmd.config.model, spec, result));
      write_file(joined(cmd.out_dir, "curves.csv").string(),
                 curves_csv(spec, result.theta_prime, range.first, range.second));
      out << "reports written to " << cmd.out_dir << '\n';
    }
    return fit_exit_code(result);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

SimulationCondition load_condition(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open file");
  SimulationCondition cond;
  std::string line;
  int line_no = 0;
  auto parse_value = [&](const std::string& key, const std::string& value) {
    auto number = [&](auto& slot) {
      double v = 0.0;
      auto [ptr, ec] =
          std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || ptr != value.data() + value.size())
        throw std::invalid_argument(path + ": line " + std::to_string(line_no) +
                                    ": '" + value + "' is not a number");
      slot = static_cast<std::remove_reference_t<decltype(slot)>>(v);
    };
    if (key == "scenario")
      number(cond.scenario);
    else if (key == "n")
      number(cond.n);
    else if (key == "waves")
      number(cond.waves);
    else if (key == "knot_y")
      number(cond.knot_y);
    else if (key == "knot_z")
      number(cond.knot_z);
    else if (key == "rho")
      number(cond.rho);
    else if (key == "theta_eps")
      number(cond.theta_eps);
    else if (key == "time_window")
      number(cond.time_window);
    else
      throw std::invalid_argument(
          path + ": line " + std::to_string(line_no) + ": unknown key '" + key +
          "'; valid keys: scenario, n, waves, knot_y, knot_z, rho, theta_eps, "
          "time_window");
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const size_t b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const size_t e = line.find_last_not_of(" \t");
    line = line.substr(b, e - b + 1);
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ": line " + std::to_string(line_no) +
                                  ": expected key = value");
    auto trim = [](std::string s) {
      size_t tb = s.find_first_not_of(" \t");
      size_t te = s.find_last_not_of(" \t");
      return tb == std::string::npos ? std::string() : s.substr(tb, te - tb + 1);
    };
    parse_value(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  cond.validate();
  return cond;
}

namespace {

void write_condition_reports(const ConditionResult& result,
                             const std::string& out_dir, std::ostream& out) {
  const std::string label = result.condition.label();
  write_file(joined(out_dir, label + "_full.csv").string(),
             metrics_csv(result.full_metrics));
  write_file(joined(out_dir, label + "_reduced.csv").string(),
             metrics_csv(result.reduced_metrics));
  write_file(joined(out_dir, label + ".json").string(), condition_json(result));
  out << "reports written to " << out_dir << '\n';
}

void print_condition_line(const ConditionResult& r, std::ostream& out) {
  out << r.condition.label() << ": replications " << r.replications
      << ", datasets " << r.datasets_generated << ", convergence full "
      << r.full_convergence_rate() << " reduced " << r.reduced_convergence_rate()
      << ", improper full solutions " << r.full_improper << '\n';
}

}  // namespace

int cmd_simulate(const SimulateCommand& cmd, std::ostream& out,
                 std::ostream& err) {
  try {
    if (cmd.list) {
      const std::string table = grid_csv(condition_grid());
      out << table;
      if (!cmd.out_dir.empty())
        write_file(joined(cmd.out_dir, "conditions.csv").string(), table);
      return 0;
    }
    if (!cmd.condition_path.empty()) {
      const SimulationCondition cond = load_condition(cmd.condition_path);
      const ConditionResult result =
          run_condition(cond, cmd.reps, cmd.seed, FitOptions{}, cmd.threads);
      print_condition_line(result, out);
      if (!cmd.out_dir.empty()) write_condition_reports(result, cmd.out_dir, out);
      return 0;
    }
    if (cmd.grid) {
      std::vector<ConditionResult> results;
      for (const auto& cond : condition_grid()) {
        results.push_back(
            run_condition(cond, cmd.reps, cmd.seed, FitOptions{}, cmd.threads));
        print_condition_line(results.back(), out);
        if (!cmd.out_dir.empty()) {
          const ConditionResult& r = results.back();
          const std::string label = r.condition.label();
          write_file(joined(cmd.out_dir, label + "_full.csv").string(),
                     metrics_csv(r.full_metrics));
          write_file(joined(cmd.out_dir, label + "_reduced.csv").string(),
                     metrics_csv(r.reduced_metrics));
          write_file(joined(cmd.out_dir, label + ".json").string(),
                     condition_json(r));
        }
      }
      if (!cmd.out_dir.empty()) {
        write_file(joined(cmd.out_dir, "rollup_full.csv").string(),
                   rollup_csv(rollup_metrics(results, false)));
        write_file(joined(cmd.out_dir, "rollup_reduced.csv").string(),
                   rollup_csv(rollup_metrics(results, true)));
        out << "reports written to " << cmd.out_dir << '\n';
      }
      return 0;
    }
    err << "nothing to do: pass --list, --condition <file>, or --grid\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_compare(const CompareCommand& cmd, std::ostream& out, std::ostream& err) {
  try {
    if (cmd.models.empty()) {
      err << "error: --models needs at least one variant\n";
      return 1;
    }
    WideDataset data =
        load_data(cmd.data_path, cmd.from_long, cmd.config.time_offset);

    std::vector<CompareRow> rows;
    for (const auto& model : cmd.models) {
      RunConfig config = cmd.config;
      apply_config_value(config, "model", model);  // validates the name
      const ModelSpec spec = build_model_spec(config, data.layout);
      const FitResult result =
          fit(data.records, spec, effective_fit_options(config));
      CompareRow row;
      row.model = model;
      row.outcomes = outcome_names(spec);
      row.converged = result.converged;
      row.indices = result.indices;
      row.loglik = result.loglik;
      rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const CompareRow& a, const CompareRow& b) {
                       const double ba = std::isnan(a.indices.bic)
                                             ? std::numeric_limits<double>::infinity()
                                             : a.indices.bic;
                       const double bb = std::isnan(b.indices.bic)
                                             ? std::numeric_limits<double>::infinity()
                                             : b.indices.bic;
                       return ba < bb;
                     });
    out << compare_text(rows);
    if (!cmd.out_dir.empty()) {
      write_file(joined(cmd.out_dir, "compare.csv").string(), compare_csv(rows));
      write_file(joined(cmd.out_dir, "compare.json").string(),
                 compare_json(rows));
      out << "reports written to " << cmd.out_dir << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace pblsgm::cli
