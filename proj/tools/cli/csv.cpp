#include "csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace pblsgm::cli {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void fail(const std::string& path, int line, const std::string& what) {
  throw std::runtime_error(path + ": line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding spaces; cells carry no quoting
    size_t b = cell.find_first_not_of(" \t");
    size_t e = cell.find_last_not_of(" \t");
    cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_number(const std::string& cell, const std::string& path, int line,
                    const std::string& column) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    fail(path, line, "column '" + column + "' is not a number: '" + cell + "'");
  return value;
}

// header token -> (prefix, wave index); "t3" -> ("t", 3)
std::pair<std::string, int> split_token(const std::string& token) {
  size_t digits = 0;
  while (digits < token.size() && std::isdigit(static_cast<unsigned char>(
                                      token[token.size() - 1 - digits])))
    ++digits;
  if (digits == 0 || digits == token.size()) return {token, -1};
  return {token.substr(0, token.size() - digits),
          std::stoi(token.substr(token.size() - digits))};
}

WideLayout parse_header(const std::vector<std::string>& cells,
                        const std::string& path) {
  if (cells.empty() || cells[0] != "id")
    fail(path, 1, "header must start with an 'id' column");

  WideLayout layout;
  std::vector<std::pair<std::string, int>> runs;  // prefix -> run length
  for (size_t i = 1; i < cells.size(); ++i) {
    auto [prefix, wave] = split_token(cells[i]);
    if (wave < 1)
      fail(path, 1, "column '" + cells[i] + "' is not <name><wave>");
    if (runs.empty() || runs.back().first != prefix) runs.emplace_back(prefix, 0);
    if (wave != ++runs.back().second)
      fail(path, 1, "column '" + cells[i] + "' breaks the wave sequence of '" +
                        prefix + "'");
  }
  if (runs.empty() || runs.front().first != "t")
    fail(path, 1, "time columns t1..tJ must follow id");
  layout.waves = runs.front().second;
  if (runs.size() < 2 || runs.size() > 3)
    fail(path, 1, "expected one or two outcome column blocks after the times");
  for (size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].second != layout.waves)
      fail(path, 1, "outcome '" + runs[r].first + "' has " +
                        std::to_string(runs[r].second) + " waves, times have " +
                        std::to_string(layout.waves));
    layout.outcomes.push_back(runs[r].first);
  }
  if (layout.outcomes.size() == 2 && layout.outcomes[0] == layout.outcomes[1])
    fail(path, 1, "outcome blocks share the name '" + layout.outcomes[0] + "'");
  return layout;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

WideDataset load_wide_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open file");

  std::string line;
  int line_no = 0;
  WideDataset data;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_row(line);
    if (!have_header) {
      data.layout = parse_header(cells, path);
      have_header = true;
      continue;
    }

    const int waves = data.layout.waves;
    const int n_out = static_cast<int>(data.layout.outcomes.size());
    const size_t expected = 1 + static_cast<size_t>(waves) * (1 + n_out);
    if (cells.size() != expected)
      fail(path, line_no, "expected " + std::to_string(expected) + " cells, got " +
                              std::to_string(cells.size()));
    if (cells[0].empty()) fail(path, line_no, "empty id");

    IndividualRecord rec;
    rec.id = cells[0];
    rec.times = Eigen::VectorXd::Constant(waves, kNan);
    rec.values.assign(n_out, Eigen::VectorXd::Constant(waves, kNan));
    rec.observed.assign(n_out, std::vector<bool>(waves, false));

    for (int j = 0; j < waves; ++j) {
      const std::string& cell = cells[1 + j];
      if (!cell.empty())
        rec.times(j) = parse_number(cell, path, line_no, "t" + std::to_string(j + 1));
    }
    bool any = false;
    for (int u = 0; u < n_out; ++u) {
      for (int j = 0; j < waves; ++j) {
        const std::string column = data.layout.outcomes[u] + std::to_string(j + 1);
        const std::string& cell = cells[1 + waves * (1 + u) + j];
        if (cell.empty()) continue;
        rec.values[u](j) = parse_number(cell, path, line_no, column);
        rec.observed[u][j] = true;
        any = true;
        if (std::isnan(rec.times(j)))
          fail(path, line_no, "column '" + column + "' is observed but t" +
                                  std::to_string(j + 1) + " is empty");
      }
    }
    if (!any) fail(path, line_no, "no observed outcome values");
    for (int j = 1, prev = 0; j < waves; ++j) {
      if (std::isnan(rec.times(j))) continue;
      if (!std::isnan(rec.times(prev)) && rec.times(j) <= rec.times(prev))
        fail(path, line_no, "times are not strictly increasing at t" +
                                std::to_string(j + 1));
      prev = j;
    }
    data.records.push_back(std::move(rec));
  }
  if (!have_header) throw std::runtime_error(path + ": empty file");
  return data;
}

void save_wide_csv(const std::string& path, const WideDataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot write file");
  out << "id";
  for (int j = 1; j <= data.layout.waves; ++j) out << ",t" << j;
  for (const auto& name : data.layout.outcomes)
    for (int j = 1; j <= data.layout.waves; ++j) out << ',' << name << j;
  out << '\n';
  for (const auto& rec : data.records) {
    out << rec.id;
    for (int j = 0; j < data.layout.waves; ++j) {
      out << ',';
      if (!std::isnan(rec.times(j))) out << format_number(rec.times(j));
    }
    for (size_t u = 0; u < data.layout.outcomes.size(); ++u)
      for (int j = 0; j < data.layout.waves; ++j) {
        out << ',';
        if (rec.observed[u][j]) out << format_number(rec.values[u](j));
      }
    out << '\n';
  }
}

WideDataset long_to_wide(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open file");

  struct Measurement {
    bool present = false;
    bool observed = false;
    double value = 0.0;
    int line = 0;
  };
  struct Person {
    std::map<double, std::vector<Measurement>> by_time;  // ordered by time
  };
  std::vector<std::string> ids;  // first-appearance order
  std::unordered_map<std::string, Person> people;
  std::vector<std::string> outcomes;

  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_row(line);
    if (!have_header) {
      if (cells != std::vector<std::string>{"id", "time", "outcome", "value"})
        fail(path, line_no, "long format header must be id,time,outcome,value");
      have_header = true;
      continue;
    }
    if (cells.size() != 4)
      fail(path, line_no, "expected 4 cells, got " + std::to_string(cells.size()));
    if (cells[0].empty()) fail(path, line_no, "empty id");
    if (cells[2].empty()) fail(path, line_no, "empty outcome name");
    const double t = parse_number(cells[1], path, line_no, "time");

    auto found = std::find(outcomes.begin(), outcomes.end(), cells[2]);
    if (found == outcomes.end()) {
      if (outcomes.size() == 2)
        fail(path, line_no, "more than two outcomes ('" + cells[2] + "' is the third)");
      outcomes.push_back(cells[2]);
      found = std::prev(outcomes.end());
    }
    const size_t u = static_cast<size_t>(found - outcomes.begin());

    if (!people.count(cells[0])) ids.push_back(cells[0]);
    auto& slot = people[cells[0]].by_time[t];
    if (slot.size() < outcomes.size()) slot.resize(2);
    if (slot[u].present)
      fail(path, line_no, "duplicate measurement of '" + cells[2] + "' for id '" +
                              cells[0] + "' at time " + cells[1] + " (first on line " +
                              std::to_string(slot[u].line) + ")");
    slot[u].present = true;
    slot[u].line = line_no;
    if (!cells[3].empty()) {
      slot[u].value = parse_number(cells[3], path, line_no, "value");
      slot[u].observed = true;
    }
  }
  if (!have_header) throw std::runtime_error(path + ": empty file");
  if (ids.empty()) throw std::runtime_error(path + ": no data rows");

  int waves = 0;
  for (const auto& id : ids)
    waves = std::max(waves, static_cast<int>(people[id].by_time.size()));

  WideDataset data;
  data.layout.waves = waves;
  data.layout.outcomes = outcomes;
  const int n_out = static_cast<int>(outcomes.size());
  for (const auto& id : ids) {
    IndividualRecord rec;
    rec.id = id;
    rec.times = Eigen::VectorXd::Constant(waves, kNan);
    rec.values.assign(n_out, Eigen::VectorXd::Constant(waves, kNan));
    rec.observed.assign(n_out, std::vector<bool>(waves, false));
    int j = 0;
    for (const auto& [t, slot] : people[id].by_time) {
      rec.times(j) = t;
      for (int u = 0; u < n_out; ++u)
        if (static_cast<size_t>(u) < slot.size() && slot[u].observed) {
          rec.values[u](j) = slot[u].value;
          rec.observed[u][j] = true;
        }
      ++j;
    }
    data.records.push_back(std::move(rec));
  }
  return data;
}

}  // namespace pblsgm::cli
