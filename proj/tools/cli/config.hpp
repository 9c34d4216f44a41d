#pragma once

#include <limits>
#include <string>
#include <vector>

#include "pblsgm/fit.hpp"
#include "pblsgm/types.hpp"

#include "csv.hpp"

namespace pblsgm::cli {

// Everything a fit run needs beyond the data file, loadable from a flat
// key = value config file and overridable by command-line flags.
struct RunConfig {
  // full | reduced | mixed | univariate-random | univariate-fixed | linear |
  // quadratic
  std::string model = "full";
  // univariate variants: which outcome column block to model (default: the
  // first block in the file)
  std::string outcome;
  // mixed: the one outcome whose knot stays random
  std::string random_knot_outcome;
  // subtracted from every time cell before fitting (e.g. centering age)
  double time_offset = 0.0;
  // knot search box; NaN = derive from the observed time range
  double knot_lower = std::numeric_limits<double>::quiet_NaN();
  double knot_upper = std::numeric_limits<double>::quiet_NaN();
  FitOptions fit;
};

// The valid config keys, in file order.
const std::vector<std::string>& config_keys();

// Applies one key = value pair. Unknown keys and unparsable values throw
// std::invalid_argument; the unknown-key message lists every valid key.
void apply_config_value(RunConfig& config, const std::string& key,
                        const std::string& value);

// Flat key = value file; '#' starts a comment, blank lines are skipped.
RunConfig load_config(const std::string& path);

// Every key with its current value, parseable by load_config.
std::string render_config(const RunConfig& config);

// Maps the configured model variant onto the outcome blocks present in the
// data. Validates variant/outcome consistency (two-outcome variants need two
// blocks, mixed needs random_knot_outcome, names must exist).
ModelSpec build_model_spec(const RunConfig& config, const WideLayout& layout);

// Knot bounds and remaining fit options merged for the estimation call.
FitOptions effective_fit_options(const RunConfig& config);

}  // namespace pblsgm::cli
