#pragma once

#include <string>
#include <vector>

#include "pblsgm/types.hpp"

namespace pblsgm::cli {

// Column structure of a wide file: `id,t1..tJ,<a>1..<a>J[,<b>1..<b>J]`.
struct WideLayout {
  int waves = 0;
  std::vector<std::string> outcomes;  // column prefixes, header order
};

struct WideDataset {
  WideLayout layout;
  Dataset records;
};

// Wide CSV with one row per individual and a required header. Empty cells are
// missing-by-design; a wave with any observed outcome needs a time cell, and
// non-empty times must be strictly increasing. Malformed content (bad header,
// wrong cell count, non-numeric cells, no observed outcomes) throws
// std::runtime_error naming the line.
WideDataset load_wide_csv(const std::string& path);

// Inverse of load_wide_csv; numbers are written round-trip exact.
void save_wide_csv(const std::string& path, const WideDataset& data);

// Long rows `id,time,outcome,value` grouped into wide records: each id's
// distinct times become its waves in increasing order, J is the largest wave
// count, and shorter records leave trailing cells empty. An empty value cell
// records the wave without an observation; duplicate (id,time,outcome)
// measurements are rejected.
WideDataset long_to_wide(const std::string& path);

}  // namespace pblsgm::cli
