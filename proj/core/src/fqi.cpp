#include "transq/fqi.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "transq/error.hpp"
#include "transq/environment.hpp"
#include "transq/qmodel.hpp"

namespace transq {

FeatureProvider tabular_features(int num_states, int num_actions) {
  if (num_states < 1 || num_actions < 1) throw Error(ErrorCode::DomainError, "tabular features need states and actions");
  FeatureProvider fp;
  fp.num_actions = num_actions;
  fp.dim = static_cast<Eigen::Index>(num_states) * num_actions;
  fp.features = [num_states, num_actions](const Vector& x, int a) {
    const int s = static_cast<int>(x[0]);
    if (s < 0 || s >= num_states || a < 0 || a >= num_actions) {
      throw Error(ErrorCode::DomainError, "state or action index out of range");
    }
    Vector phi = Vector::Zero(static_cast<Eigen::Index>(num_states) * num_actions);
    phi[s * num_actions + a] = 1.0;
    return phi;
  };
  return fp;
}

int interaction_action_value(int action_index) { return action_index == 0 ? 1 : -1; }

FeatureProvider interaction_features(Eigen::Index p) {
  FeatureProvider fp;
  fp.num_actions = 2;
  fp.dim = 2 * p;
  fp.features = [](const Vector& x, int a) { return design_row(x, interaction_action_value(a)); };
  return fp;
}

void FqiBuffer::validate() const {
  if (tasks.empty()) throw Error(ErrorCode::EmptyTarget, "buffer has no target task");
  const Eigen::Index d = dim();
  const std::size_t actions = tasks.front().next_phi.size();
  if (actions == 0) throw Error(ErrorCode::DimensionMismatch, "next-state features must cover every action");
  for (const auto& task : tasks) {
    if (task.rows() < 1) throw Error(ErrorCode::InsufficientData, "every task needs at least one transition");
    if (task.phi.cols() != d) throw Error(ErrorCode::DimensionMismatch, "tasks disagree on feature dimension");
    if (task.reward.size() != task.rows()) throw Error(ErrorCode::DimensionMismatch, "reward length != rows");
    if (task.next_phi.size() != actions) throw Error(ErrorCode::DimensionMismatch, "tasks disagree on action count");
    for (const auto& m : task.next_phi) {
      if (m.rows() != task.rows() || m.cols() != d) {
        throw Error(ErrorCode::DimensionMismatch, "next-state feature block has wrong shape");
      }
    }
  }
}

FqiTask make_fqi_task(const FeatureProvider& provider, const std::vector<Vector>& states,
                      const std::vector<int>& actions, const Vector& rewards,
                      const std::vector<Vector>& next_states, const std::vector<bool>& terminal,
                      int task_id) {
  const std::size_t n = states.size();
  if (actions.size() != n || static_cast<std::size_t>(rewards.size()) != n || next_states.size() != n ||
      terminal.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "transition arrays disagree in length");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(n);
  FqiTask task;
  task.task_id = task_id;
  task.reward = rewards;
  task.phi.resize(rows, provider.dim);
  task.next_phi.assign(static_cast<std::size_t>(provider.num_actions), Matrix::Zero(rows, provider.dim));
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    task.phi.row(i) = provider.features(states[idx], actions[idx]).transpose();
    if (terminal[idx]) continue;
    for (int a = 0; a < provider.num_actions; ++a) {
      task.next_phi[static_cast<std::size_t>(a)].row(i) = provider.features(next_states[idx], a).transpose();
    }
  }
  return task;
}

FqiState FqiState::zeros(std::size_t tasks, Eigen::Index dim) {
  FqiState st;
  st.w_hat = Vector::Zero(dim);
  st.delta_hat.assign(tasks, Vector::Zero(dim));
  st.beta_hat.assign(tasks, Vector::Zero(dim));
  return st;
}

std::vector<Vector> fqi_targets(const FqiBuffer& buf, const FqiState& state, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw Error(ErrorCode::DomainError, "gamma must lie in [0,1)");
  buf.validate();
  if (state.beta_hat.size() != buf.tasks.size()) {
    throw Error(ErrorCode::DimensionMismatch, "state has a different number of tasks than the buffer");
  }
  std::vector<Vector> targets;
  targets.reserve(buf.tasks.size());
  for (std::size_t k = 0; k < buf.tasks.size(); ++k) {
    const FqiTask& task = buf.tasks[k];
    const Vector& beta = state.beta_hat[k];
    if (beta.size() != buf.dim()) throw Error(ErrorCode::DimensionMismatch, "coefficient length != feature dim");
    Vector best = task.next_phi.front() * beta;
    for (std::size_t a = 1; a < task.next_phi.size(); ++a) best = best.cwiseMax(task.next_phi[a] * beta);
    targets.push_back(task.reward + gamma * best);
  }
  return targets;
}

namespace {

std::vector<Eigen::Index> pick_rows(Eigen::Index n, const std::optional<Eigen::Index>& subsample, Rng& rng) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  if (!subsample || *subsample >= n) return rows;
  std::shuffle(rows.begin(), rows.end(), rng);
  rows.resize(static_cast<std::size_t>(std::max<Eigen::Index>(1, *subsample)));
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

std::vector<FqiState> fqi_iterate(const FqiBuffer& buf, double gamma, double lambda_w, double lambda_delta,
                                  int iterations, const FqiOptions& opts) {
  if (iterations < 1) throw Error(ErrorCode::DomainError, "need at least one iteration");
  buf.validate();
  const std::size_t K1 = buf.tasks.size();
  const Eigen::Index d = buf.dim();
  LassoConfig cfg_w = opts.lasso;
  cfg_w.lambda = lambda_w;
  LassoConfig cfg_d = opts.lasso;
  cfg_d.lambda = lambda_delta;
  Rng rng(opts.seed);

  std::vector<FqiState> history{FqiState::zeros(K1, d)};
  for (int it = 1; it <= iterations; ++it) {
    const FqiState& prev = history.back();
    const std::vector<Vector> targets = fqi_targets(buf, prev, gamma);

    std::vector<std::vector<Eigen::Index>> rows(K1);
    Eigen::Index total = 0;
    for (std::size_t k = 0; k < K1; ++k) {
      rows[k] = pick_rows(buf.tasks[k].rows(), opts.subsample, rng);
      total += static_cast<Eigen::Index>(rows[k].size());
    }

    // Step I: pooled fit over every task.
    Matrix phi_all(total, d);
    Vector y_all(total);
    std::vector<Matrix> phi_k(K1);
    std::vector<Vector> y_k(K1);
    Eigen::Index offset = 0;
    for (std::size_t k = 0; k < K1; ++k) {
      const auto m = static_cast<Eigen::Index>(rows[k].size());
      phi_k[k] = buf.tasks[k].phi(rows[k], Eigen::all);
      y_k[k] = targets[k](rows[k]);
      phi_all.middleRows(offset, m) = phi_k[k];
      y_all.segment(offset, m) = y_k[k];
      offset += m;
    }

    FqiState next;
    next.iteration = it;
    next.w_hat = lasso_fit(phi_all, y_all, cfg_w).coefficients;

    // Step II: per-task correction around the pooled estimate.
    for (std::size_t k = 0; k < K1; ++k) {
      next.delta_hat.push_back(lasso_fit_offset(phi_k[k], y_k[k], next.w_hat, cfg_d).coefficients);
      next.beta_hat.push_back(next.w_hat + next.delta_hat.back());
    }

    const double change = (next.beta_hat.front() - prev.beta_hat.front()).lpNorm<Eigen::Infinity>();
    history.push_back(std::move(next));
    if (change < opts.early_stop) break;
  }
  return history;
}

std::function<int(const Vector& x)> fqi_policy(const FqiState& state, const FeatureProvider& provider) {
  if (state.beta_hat.empty()) throw Error(ErrorCode::EmptyTarget, "state has no target coefficients");
  const Vector beta = state.beta_hat.front();
  if (beta.size() != provider.dim) throw Error(ErrorCode::DimensionMismatch, "feature dim != coefficient length");
  return [beta, provider](const Vector& x) {
    int best = 0;
    double best_q = provider.features(x, 0).dot(beta);
    for (int a = 1; a < provider.num_actions; ++a) {
      const double q = provider.features(x, a).dot(beta);
      if (q > best_q) {
        best_q = q;
        best = a;
      }
    }
    return best;
  };
}

int ChainMdp::next_state(int s, int a) const {
  return a == 0 ? std::max(s - 1, 0) : std::min(s + 1, num_states - 1);
}

double ChainMdp::reward(int s, int a) const {
  if (a == 1 && s == num_states - 1) return goal_reward;
  if (a == 0 && s == 0) return edge_reward;
  return 0.0;
}

FqiTask chain_task(const ChainMdp& mdp, int task_id) {
  const FeatureProvider fp = tabular_features(mdp.num_states, 2);
  std::vector<Vector> states, next;
  std::vector<int> actions;
  Vector rewards(2 * mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int a = 0; a < 2; ++a) {
      states.push_back(Vector::Constant(1, s));
      actions.push_back(a);
      rewards[s * 2 + a] = mdp.reward(s, a);
      next.push_back(Vector::Constant(1, mdp.next_state(s, a)));
    }
  }
  return make_fqi_task(fp, states, actions, rewards, next, std::vector<bool>(states.size(), false), task_id);
}

Vector chain_q_star(const ChainMdp& mdp) {
  if (!(mdp.gamma >= 0.0 && mdp.gamma < 1.0)) throw Error(ErrorCode::DomainError, "chain gamma must lie in [0,1)");
  Vector q = Vector::Zero(2 * mdp.num_states);
  for (int it = 0; it < 100000; ++it) {
    Vector updated(q.size());
    for (int s = 0; s < mdp.num_states; ++s) {
      for (int a = 0; a < 2; ++a) {
        const int s2 = mdp.next_state(s, a);
        updated[s * 2 + a] = mdp.reward(s, a) + mdp.gamma * std::max(q[s2 * 2], q[s2 * 2 + 1]);
      }
    }
    const bool done = (updated - q).lpNorm<Eigen::Infinity>() == 0.0;
    q = std::move(updated);
    if (done) break;
  }
  return q;
}

}  // namespace transq
