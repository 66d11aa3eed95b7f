#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rliot::rl {

/// Dense |states| x |actions| matrix with labelled rows and columns.
class LabelledMatrix {
 public:
  LabelledMatrix() = default;
  LabelledMatrix(std::vector<std::string> states, std::vector<std::string> actions);

  std::size_t num_states() const { return states_.size(); }
  std::size_t num_actions() const { return actions_.size(); }
  const std::vector<std::string>& states() const { return states_; }
  const std::vector<std::string>& actions() const { return actions_; }

  double& at(std::size_t s, std::size_t a) { return values_[s * actions_.size() + a]; }
  double at(std::size_t s, std::size_t a) const { return values_[s * actions_.size() + a]; }
  std::span<double> row(std::size_t s) { return {values_.data() + s * actions_.size(), actions_.size()}; }
  std::span<const double> row(std::size_t s) const { return {values_.data() + s * actions_.size(), actions_.size()}; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  std::size_t state_index(std::string_view label) const;
  std::size_t action_index(std::string_view label) const;

  void fill(double v);

  friend bool operator==(const LabelledMatrix&, const LabelledMatrix&) = default;

 private:
  std::vector<std::string> states_;
  std::vector<std::string> actions_;
  std::vector<double> values_;
};

/// State-action value estimates, zero-initialised.
class QTable : public LabelledMatrix {
 public:
  using LabelledMatrix::LabelledMatrix;

  double row_max(std::size_t s) const;

  /// CSV: header `state,<action labels...>`, then one row per state. Values
  /// use the shortest representation that round-trips exactly.
  std::string to_csv() const;
  static QTable from_csv(std::string_view text);
};

/// Eligibility traces with the same shape as a QTable; entries stay >= 0.
class TraceTable : public LabelledMatrix {
 public:
  using LabelledMatrix::LabelledMatrix;
  static TraceTable like(const QTable& q) { return TraceTable(q.states(), q.actions()); }
  void reset() { fill(0.0); }
};

class TableParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace rliot::rl
