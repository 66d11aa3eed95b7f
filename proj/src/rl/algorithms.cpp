#include "rliot/rl/algorithms.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace rliot::rl {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::qlearning: return "qlearning";
    case Algorithm::sarsa: return "sarsa";
    case Algorithm::qlambda: return "qlambda";
    case Algorithm::sarsalambda: return "sarsalambda";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view s) {
  if (s == "qlearning") return Algorithm::qlearning;
  if (s == "sarsa") return Algorithm::sarsa;
  if (s == "qlambda") return Algorithm::qlambda;
  if (s == "sarsalambda") return Algorithm::sarsalambda;
  throw std::invalid_argument("unknown algorithm '" + std::string(s) + "'");
}

bool uses_traces(Algorithm a) { return a == Algorithm::qlambda || a == Algorithm::sarsalambda; }

void HyperParams::validate() const {
  const auto check = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  check(epsilon >= 0.0 && epsilon <= 1.0, "epsilon must be in [0,1]");
  check(alpha > 0.0 && alpha <= 1.0, "alpha must be in (0,1]");
  check(gamma >= 0.0 && gamma <= 1.0, "gamma must be in [0,1]");
  check(lambda >= 0.0 && lambda <= 1.0, "lambda must be in [0,1]");
  check(!epsilon_decay || (*epsilon_decay > 0.0 && *epsilon_decay <= 1.0), "epsilon_decay must be in (0,1]");
}

double HyperParams::epsilon_at(std::size_t episode) const {
  if (!epsilon_decay || episode <= 1) return epsilon;
  return epsilon * std::pow(*epsilon_decay, static_cast<double>(episode - 1));
}

Selection select_action(const QTable& q, std::size_t state, double epsilon, Rng& rng) {
  const std::size_t n = q.num_actions();
  if (rng.uniform01() < epsilon) return {rng.index(n), false};
  const auto row = q.row(state);
  const double best = q.row_max(state);
  std::vector<std::size_t> ties;
  for (std::size_t a = 0; a < n; ++a) {
    if (row[a] == best) ties.push_back(a);
  }
  return {ties[rng.index(ties.size())], true};
}

void q_learning_update(QTable& q, const Step& step, const HyperParams& hp) {
  const double bootstrap = step.terminal ? 0.0 : hp.gamma * q.row_max(step.next_state);
  double& value = q.at(step.state, step.action);
  const double delta = step.reward + bootstrap - value;
  value += hp.alpha * delta;
}

void sarsa_update(QTable& q, const Step& step, std::size_t next_action, const HyperParams& hp) {
  const double bootstrap = step.terminal ? 0.0 : hp.gamma * q.at(step.next_state, next_action);
  double& value = q.at(step.state, step.action);
  const double delta = step.reward + bootstrap - value;
  value += hp.alpha * delta;
}

namespace {

// Q += alpha * delta * e over every pair, then e *= decay.
void trace_sweep(QTable& q, TraceTable& e, double delta, double alpha, double decay) {
  auto qv = q.values();
  auto ev = e.values();
  const double step = alpha * delta;
  for (std::size_t i = 0; i < qv.size(); ++i) {
    if (ev[i] == 0.0) continue;
    qv[i] += step * ev[i];
    ev[i] *= decay;
  }
}

}  // namespace

void sarsa_lambda_update(QTable& q, TraceTable& e, const Step& step, std::size_t next_action, const HyperParams& hp) {
  const double bootstrap = step.terminal ? 0.0 : hp.gamma * q.at(step.next_state, next_action);
  const double delta = step.reward + bootstrap - q.at(step.state, step.action);
  e.at(step.state, step.action) += 1.0;
  trace_sweep(q, e, delta, hp.alpha, hp.gamma * hp.lambda);
}

void watkins_q_lambda_update(QTable& q, TraceTable& e, const Step& step, bool next_greedy, const HyperParams& hp) {
  const double bootstrap = step.terminal ? 0.0 : hp.gamma * q.row_max(step.next_state);
  const double delta = step.reward + bootstrap - q.at(step.state, step.action);
  e.at(step.state, step.action) += 1.0;
  trace_sweep(q, e, delta, hp.alpha, hp.gamma * hp.lambda);
  if (!next_greedy) e.reset();
}

}  // namespace rliot::rl
