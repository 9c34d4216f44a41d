#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pblsgm/simulation.hpp"

#include "config.hpp"

namespace pblsgm::cli {

struct FitCommand {
  std::string data_path;
  bool from_long = false;
  std::string out_dir;  // empty: terminal report only
  RunConfig config;
};

// 0 converged and admissible, 2 converged but improper, 1 failure.
int fit_exit_code(const FitResult& result);
int cmd_fit(const FitCommand& cmd, std::ostream& out, std::ostream& err);

// Condition file: flat key = value over scenario, n, waves, knot_y, knot_z,
// rho, theta_eps, time_window; validated against the supported design grid.
SimulationCondition load_condition(const std::string& path);

struct SimulateCommand {
  bool grid = false;
  bool list = false;
  std::string condition_path;
  int reps = 10;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir;
};
int cmd_simulate(const SimulateCommand& cmd, std::ostream& out, std::ostream& err);

struct CompareCommand {
  std::string data_path;
  bool from_long = false;
  std::vector<std::string> models;
  std::string out_dir;
  RunConfig config;  // outcome selection and fit options shared by every fit
};
int cmd_compare(const CompareCommand& cmd, std::ostream& out, std::ostream& err);

}  // namespace pblsgm::cli
