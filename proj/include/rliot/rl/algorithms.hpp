#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "rliot/rl/q_table.hpp"
#include "rliot/rng.hpp"

namespace rliot::rl {

enum class Algorithm { qlearning, sarsa, qlambda, sarsalambda };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);
bool uses_traces(Algorithm a);

struct HyperParams {
  double epsilon = 0.2;
  double alpha = 0.1;
  double gamma = 0.55;
  double lambda = 0.0;  // ignored by the one-step algorithms
  std::optional<double> epsilon_decay;  // multiplicative, per episode

  /// Throws std::invalid_argument when a value is outside its range.
  void validate() const;
  /// Exploration rate for a 1-based episode index.
  double epsilon_at(std::size_t episode) const;
};

struct Selection {
  std::size_t action = 0;
  bool greedy = false;
};

/// Epsilon-greedy choice. Exploratory draws are reported as non-greedy even
/// when they hit an argmax; greedy draws break ties uniformly.
Selection select_action(const QTable& q, std::size_t state, double epsilon, Rng& rng);

/// Transition fed to the update rules. `terminal` zeroes the bootstrap term.
struct Step {
  std::size_t state = 0;
  std::size_t action = 0;
  double reward = 0.0;
  std::size_t next_state = 0;
  bool terminal = false;
};

/// Q(s,a) += alpha * (r + gamma * max_b Q(s',b) - Q(s,a))
void q_learning_update(QTable& q, const Step& step, const HyperParams& hp);

/// Q(s,a) += alpha * (r + gamma * Q(s',a') - Q(s,a))
void sarsa_update(QTable& q, const Step& step, std::size_t next_action, const HyperParams& hp);

/// Accumulating-trace SARSA(lambda): the TD error is spread over every pair
/// in proportion to its trace, then traces decay by gamma*lambda.
void sarsa_lambda_update(QTable& q, TraceTable& e, const Step& step, std::size_t next_action, const HyperParams& hp);

/// Watkins Q(lambda): bootstrap on the greedy value; traces decay when the
/// next action is greedy and are cut to zero otherwise.
void watkins_q_lambda_update(QTable& q, TraceTable& e, const Step& step, bool next_greedy, const HyperParams& hp);

}  // namespace rliot::rl
