#include "config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pblsgm::cli {

namespace {

const std::vector<std::string> kModels = {
    "full",       "reduced", "mixed",    "univariate-random",
    "univariate-fixed", "linear",  "quadratic"};

bool univariate_model(const std::string& model) {
  return model == "univariate-random" || model == "univariate-fixed" ||
         model == "linear" || model == "quadratic";
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  size_t e = s.find_last_not_of(" \t");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  if (value == "nan") return std::numeric_limits<double>::quiet_NaN();
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw std::invalid_argument("config key '" + key + "': '" + value +
                                "' is not a number");
  return out;
}

long long parse_int(const std::string& key, const std::string& value) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw std::invalid_argument("config key '" + key + "': '" + value +
                                "' is not an integer");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("config key '" + key + "': '" + value +
                              "' is not true/false");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "model",          "outcome",
      "random_knot_outcome", "time_offset",
      "knot_lower",     "knot_upper",
      "max_attempts",   "gradient_tolerance",
      "relative_change_tolerance", "max_iterations",
      "ci_level",       "seed",
      "threads",        "compute_se"};
  return keys;
}

void apply_config_value(RunConfig& config, const std::string& key,
                        const std::string& value) {
  if (key == "model") {
    for (const auto& m : kModels)
      if (value == m) {
        config.model = value;
        return;
      }
    std::string valid;
    for (const auto& m : kModels) valid += (valid.empty() ? "" : ", ") + m;
    throw std::invalid_argument("unknown model '" + value + "'; expected one of " +
                                valid);
  }
  if (key == "outcome") {
    config.outcome = value;
  } else if (key == "random_knot_outcome") {
    config.random_knot_outcome = value;
  } else if (key == "time_offset") {
    config.time_offset = parse_double(key, value);
  } else if (key == "knot_lower") {
    config.knot_lower = parse_double(key, value);
  } else if (key == "knot_upper") {
    config.knot_upper = parse_double(key, value);
  } else if (key == "max_attempts") {
    config.fit.max_attempts = static_cast<int>(parse_int(key, value));
  } else if (key == "gradient_tolerance") {
    config.fit.gradient_tolerance = parse_double(key, value);
  } else if (key == "relative_change_tolerance") {
    config.fit.relative_change_tolerance = parse_double(key, value);
  } else if (key == "max_iterations") {
    config.fit.max_iterations = static_cast<int>(parse_int(key, value));
  } else if (key == "ci_level") {
    config.fit.ci_level = parse_double(key, value);
  } else if (key == "seed") {
    config.fit.seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "threads") {
    config.fit.threads = static_cast<int>(parse_int(key, value));
  } else if (key == "compute_se") {
    config.fit.compute_se = parse_bool(key, value);
  } else {
    std::string valid;
    for (const auto& k : config_keys()) valid += (valid.empty() ? "" : ", ") + k;
    throw std::invalid_argument("unknown config key '" + key +
                                "'; valid keys: " + valid);
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open file");
  RunConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ": line " + std::to_string(line_no) +
                                  ": expected key = value");
    try {
      apply_config_value(config, trim(line.substr(0, eq)),
                         trim(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ": line " + std::to_string(line_no) +
                                  ": " + e.what());
    }
  }
  return config;
}

std::string render_config(const RunConfig& config) {
  std::ostringstream out;
  out << "model = " << config.model << '\n';
  out << "outcome = " << config.outcome << '\n';
  out << "random_knot_outcome = " << config.random_knot_outcome << '\n';
  out << "time_offset = " << format_double(config.time_offset) << '\n';
  out << "knot_lower = " << format_double(config.knot_lower) << '\n';
  out << "knot_upper = " << format_double(config.knot_upper) << '\n';
  out << "max_attempts = " << config.fit.max_attempts << '\n';
  out << "gradient_tolerance = " << format_double(config.fit.gradient_tolerance)
      << '\n';
  out << "relative_change_tolerance = "
      << format_double(config.fit.relative_change_tolerance) << '\n';
  out << "max_iterations = " << config.fit.max_iterations << '\n';
  out << "ci_level = " << format_double(config.fit.ci_level) << '\n';
  out << "seed = " << config.fit.seed << '\n';
  out << "threads = " << config.fit.threads << '\n';
  out << "compute_se = " << (config.fit.compute_se ? "true" : "false") << '\n';
  return out.str();
}

ModelSpec build_model_spec(const RunConfig& config, const WideLayout& layout) {
  if (layout.outcomes.empty())
    throw std::invalid_argument("data contains no outcome columns");

  auto has_outcome = [&](const std::string& name) {
    for (const auto& o : layout.outcomes)
      if (o == name) return true;
    return false;
  };

  ModelSpec spec;
  spec.waves = layout.waves;
  if (univariate_model(config.model)) {
    const std::string chosen =
        config.outcome.empty() ? layout.outcomes.front() : config.outcome;
    if (!has_outcome(chosen))
      throw std::invalid_argument("outcome '" + chosen +
                                  "' is not a column block in the data");
    TrajectoryShape shape = TrajectoryShape::Linear;
    if (config.model == "univariate-random")
      shape = TrajectoryShape::BilinearRandomKnot;
    else if (config.model == "univariate-fixed")
      shape = TrajectoryShape::BilinearFixedKnot;
    else if (config.model == "quadratic")
      shape = TrajectoryShape::Quadratic;
    spec.outcomes.push_back({chosen, shape, {}});
    return spec;
  }

  if (layout.outcomes.size() != 2)
    throw std::invalid_argument("model '" + config.model +
                                "' needs two outcome column blocks, the data has " +
                                std::to_string(layout.outcomes.size()));
  if (config.model == "mixed") {
    if (config.random_knot_outcome.empty())
      throw std::invalid_argument(
          "mixed model needs random_knot_outcome naming one outcome");
    if (!has_outcome(config.random_knot_outcome))
      throw std::invalid_argument("random_knot_outcome '" +
                                  config.random_knot_outcome +
                                  "' is not a column block in the data");
  }
  for (const auto& name : layout.outcomes) {
    TrajectoryShape shape = TrajectoryShape::BilinearFixedKnot;
    if (config.model == "full" ||
        (config.model == "mixed" && name == config.random_knot_outcome))
      shape = TrajectoryShape::BilinearRandomKnot;
    spec.outcomes.push_back({name, shape, {}});
  }
  return spec;
}

FitOptions effective_fit_options(const RunConfig& config) {
  FitOptions options = config.fit;
  const bool lo = !std::isnan(config.knot_lower);
  const bool hi = !std::isnan(config.knot_upper);
  if (lo != hi)
    throw std::invalid_argument("knot_lower and knot_upper must be set together");
  if (lo) options.knot_bounds = {config.knot_lower, config.knot_upper};
  return options;
}

}  // namespace pblsgm::cli
