#include "rliot/rl/q_table.hpp"

#include <algorithm>
#include <charconv>
#include <set>

namespace rliot::rl {

namespace {

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  for (;;) {
    const auto comma = line.find(',');
    cells.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return cells;
}

void check_labels(const std::vector<std::string>& labels, const char* what) {
  std::set<std::string_view> seen;
  for (const auto& l : labels) {
    if (l.find_first_of(",\r\n") != std::string::npos) throw std::invalid_argument(std::string(what) + " label contains a separator: " + l);
    if (!seen.insert(l).second) throw std::invalid_argument(std::string("duplicate ") + what + " label: " + l);
  }
}

}  // namespace

LabelledMatrix::LabelledMatrix(std::vector<std::string> states, std::vector<std::string> actions)
    : states_(std::move(states)), actions_(std::move(actions)), values_(states_.size() * actions_.size(), 0.0) {
  check_labels(states_, "state");
  check_labels(actions_, "action");
}

std::size_t LabelledMatrix::state_index(std::string_view label) const {
  const auto it = std::find(states_.begin(), states_.end(), label);
  if (it == states_.end()) throw std::out_of_range("unknown state '" + std::string(label) + "'");
  return static_cast<std::size_t>(it - states_.begin());
}

std::size_t LabelledMatrix::action_index(std::string_view label) const {
  const auto it = std::find(actions_.begin(), actions_.end(), label);
  if (it == actions_.end()) throw std::out_of_range("unknown action '" + std::string(label) + "'");
  return static_cast<std::size_t>(it - actions_.begin());
}

void LabelledMatrix::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

double QTable::row_max(std::size_t s) const {
  const auto r = row(s);
  return *std::max_element(r.begin(), r.end());
}

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string out(buf, end);
  return out == "-0" ? "0" : out;
}

std::string QTable::to_csv() const {
  std::string out = "state";
  for (const auto& a : actions()) out += "," + a;
  out += "\n";
  for (std::size_t s = 0; s < num_states(); ++s) {
    out += states()[s];
    for (const double v : row(s)) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

QTable QTable::from_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    if (line.ends_with('\r')) line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  if (lines.empty()) throw TableParseError("empty Q-table file");
  const auto header = split_csv_line(lines.front());
  if (header.front() != "state") throw TableParseError("Q-table header must start with 'state'");
  std::vector<std::string> actions(header.begin() + 1, header.end());
  std::vector<std::string> states;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_csv_line(lines[i]);
    if (cells.size() != header.size()) {
      throw TableParseError("row " + std::to_string(i) + " has " + std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
    }
    states.emplace_back(cells.front());
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = 0;
      auto [ptr, ec] = std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
      if (ec != std::errc{} || ptr != cells[c].data() + cells[c].size()) {
        throw TableParseError("bad value '" + std::string(cells[c]) + "' in row " + std::to_string(i));
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  QTable q;
  try {
    q = QTable(std::move(states), std::move(actions));
  } catch (const std::invalid_argument& e) {
    throw TableParseError(e.what());
  }
  for (std::size_t s = 0; s < rows.size(); ++s) std::copy(rows[s].begin(), rows[s].end(), q.row(s).begin());
  return q;
}

}  // namespace rliot::rl
