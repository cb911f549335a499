#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "transq/lasso.hpp"

namespace transq {

// Feature map phi(x, a) over a finite action set indexed 0..num_actions-1.
// Index order is the canonical action order used for tie-breaking.
struct FeatureProvider {
  int num_actions = 2;
  Eigen::Index dim = 0;
  std::function<Vector(const Vector& x, int action)> features;
};

// One-hot over (state, action); x holds the state index in x[0].
FeatureProvider tabular_features(int num_states, int num_actions);

// design_row(x, a) with action index 0 -> a = +1, index 1 -> a = -1.
FeatureProvider interaction_features(Eigen::Index p);

int interaction_action_value(int action_index);

struct FqiTask {
  int task_id = 0;
  Matrix phi;                    // n x d, phi(x_i, a_i)
  Vector reward;                 // n
  std::vector<Matrix> next_phi;  // one n x d matrix per action: phi(x'_i, a')

  Eigen::Index rows() const { return phi.rows(); }
};

// tasks[0] is the target; the rest are auxiliary tasks.
struct FqiBuffer {
  std::vector<FqiTask> tasks;

  Eigen::Index dim() const { return tasks.empty() ? 0 : tasks.front().phi.cols(); }
  void validate() const;
};

// Build one task from raw transitions. Rows with terminal[i] set get zero
// next-state features for every action.
FqiTask make_fqi_task(const FeatureProvider& provider, const std::vector<Vector>& states,
                      const std::vector<int>& actions, const Vector& rewards,
                      const std::vector<Vector>& next_states, const std::vector<bool>& terminal,
                      int task_id = 0);

struct FqiState {
  Vector w_hat;
  std::vector<Vector> delta_hat;
  std::vector<Vector> beta_hat;  // beta_hat[k] = w_hat + delta_hat[k]
  int iteration = 0;

  static FqiState zeros(std::size_t tasks, Eigen::Index dim);
};

/// y^(k)_i = r_i + gamma * max_a' phi(x'_i, a')' beta_hat[k], each task using
/// its own coefficients.
std::vector<Vector> fqi_targets(const FqiBuffer& buf, const FqiState& state, double gamma);

struct FqiOptions {
  LassoConfig lasso;
  // Fit each iteration on a random subsample of this many rows per task.
  std::optional<Eigen::Index> subsample;
  std::uint64_t seed = 0;
  // Stop once ||beta_hat[0] change||_inf falls below this.
  double early_stop = 1e-8;
};

/// Runs the pooled-then-corrected update up to `iterations` times from the
/// zero state. history[0] is the zero state; history.back() is the final one.
std::vector<FqiState> fqi_iterate(const FqiBuffer& buf, double gamma, double lambda_w,
                                  double lambda_delta, int iterations, const FqiOptions& opts = {});

// Greedy action index with respect to phi(x, a)' beta_hat[0].
std::function<int(const Vector& x)> fqi_policy(const FqiState& state, const FeatureProvider& provider);

// Deterministic chain: move left/right (action 0/1) between states
// 0..num_states-1, clamped at the ends.
struct ChainMdp {
  int num_states = 4;
  double gamma = 0.9;
  double goal_reward = 1.0;  // taking "right" in the last state
  double edge_reward = 0.2;  // taking "left" in state 0

  int next_state(int s, int a) const;
  double reward(int s, int a) const;
};

// Exact transition enumeration: one row per (state, action) pair.
FqiTask chain_task(const ChainMdp& mdp, int task_id = 0);

// Q* by value iteration to machine precision, indexed [state * 2 + action].
Vector chain_q_star(const ChainMdp& mdp);

}  // namespace transq
