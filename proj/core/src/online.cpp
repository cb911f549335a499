#include "transq/online.hpp"

#include <algorithm>
#include <cmath>

#include "transq/error.hpp"

namespace transq {

double Environment::mean_reward(std::size_t, const Vector&, int) const {
  throw Error(ErrorCode::MissingOracle, "environment does not expose mean rewards");
}

void RegretTrace::push(double regret) {
  instantaneous.push_back(regret);
  cumulative.push_back((cumulative.empty() ? 0.0 : cumulative.back()) + regret);
}

double RegretTrace::sum_from(std::size_t first) const {
  double total = 0.0;
  for (std::size_t i = first; i < instantaneous.size(); ++i) total += instantaneous[i];
  return total;
}

ActionRule uniform_random_actions() {
  return [](std::size_t, const Vector&, Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 0.5 ? -1 : 1;
  };
}

ActionRule greedy_actions(const PolicySet& policy) {
  return [policy](std::size_t t, const Vector& x, Rng&) { return greedy_action(x, policy.stages[t - 1]); };
}

Learner transfer_learner() {
  return [](const TaskDataset& target, const std::vector<TaskDataset>& sources, const TransferConfig& cfg) {
    return transferred_q_learning(target, sources, cfg).first;
  };
}

namespace {

PolicySet require_oracle(const Environment& env) {
  if (!env.has_mean_reward()) throw Error(ErrorCode::MissingOracle, "regret needs mean rewards");
  auto truth = env.true_params();
  if (!truth) throw Error(ErrorCode::MissingOracle, "regret needs the environment's true parameters");
  return *std::move(truth);
}

void check_horizon(const Environment& env, const PolicySet& policy) {
  if (policy.horizon() != env.horizon()) {
    throw Error(ErrorCode::DimensionMismatch, "policy horizon differs from environment horizon");
  }
}

}  // namespace

Episode rollout(const Environment& env, const ActionRule& rule, const PolicySet& oracle, double gamma,
                Rng& rng) {
  if (!env.has_mean_reward()) throw Error(ErrorCode::MissingOracle, "regret needs mean rewards");
  check_horizon(env, oracle);
  const std::size_t T = env.horizon();
  const Eigen::Index p = env.dim();

  Episode ep;
  ep.data.stages.resize(T);
  Vector x = env.reset(rng);
  double discount = 1.0;
  for (std::size_t t = 1; t <= T; ++t) {
    const int a = rule(t, x, rng);
    const int best = greedy_action(x, oracle.stages[t - 1]);
    if (a != best) ep.regret += discount * (env.mean_reward(t, x, best) - env.mean_reward(t, x, a));
    Transition tr = env.step(t, x, a, rng);

    StageData& sd = ep.data.stages[t - 1];
    sd.X = x.transpose();
    sd.a = ActionVector::Constant(1, a);
    sd.r = Vector::Constant(1, tr.reward);
    if (sd.X.cols() != p) throw Error(ErrorCode::DimensionMismatch, "environment state has wrong dimension");

    x = std::move(tr.next);
    discount *= gamma;
  }
  return ep;
}

double episode_regret(const Environment& env, const PolicySet& policy, const PolicySet& oracle,
                      double gamma, Rng& rng) {
  check_horizon(env, policy);
  return rollout(env, greedy_actions(policy), oracle, gamma, rng).regret;
}

EtcResult run_etc(const Environment& env, const std::vector<TaskDataset>& sources, int n_e, int N,
                  const TransferConfig& cfg, Rng& rng, const OnlineOptions& opts) {
  if (n_e < 1 || n_e >= N) throw Error(ErrorCode::InvalidPhase, "need 1 <= n_e < N");
  const PolicySet oracle = require_oracle(env);

  EtcResult res;
  res.trace.n_e = n_e;
  std::vector<TaskDataset> episodes;
  episodes.reserve(static_cast<std::size_t>(n_e));
  for (int i = 0; i < n_e; ++i) {
    Episode ep = rollout(env, opts.explore, oracle, cfg.gamma, rng);
    episodes.push_back(std::move(ep.data));
    res.trace.push(ep.regret);
  }
  res.explored = TaskDataset::concat(episodes);

  res.policy = opts.learner(res.explored, sources, cfg);
  check_horizon(env, res.policy);
  const ActionRule exploit = greedy_actions(res.policy);
  for (int i = n_e; i < N; ++i) res.trace.push(rollout(env, exploit, oracle, cfg.gamma, rng).regret);
  return res;
}

PhasedResult run_phased_etc(const Environment& env, const std::vector<TaskDataset>& sources,
                            int batch_size, int n_phases, const TransferConfig& cfg,
                            bool seed_with_sources, Rng& rng, const OnlineOptions& opts) {
  if (batch_size < 1 || n_phases < 1) throw Error(ErrorCode::InvalidPhase, "need batch_size >= 1 and n_phases >= 1");
  const PolicySet oracle = require_oracle(env);
  const bool transfer = seed_with_sources && !sources.empty();

  PhasedResult res;
  if (opts.initial) {
    res.policy = *opts.initial;
  } else if (transfer) {
    res.policy = opts.learner(TaskDataset::concat(sources), {}, cfg);
  } else {
    res.policy = PolicySet::zeros(env.horizon(), env.dim(), cfg.gamma);
  }
  check_horizon(env, res.policy);

  const std::vector<TaskDataset> none;
  std::vector<TaskDataset> episodes;
  for (int phase = 0; phase < n_phases; ++phase) {
    res.trace.phase_boundaries.push_back(res.trace.episodes());
    const ActionRule act = greedy_actions(res.policy);
    for (int i = 0; i < batch_size; ++i) {
      Episode ep = rollout(env, act, oracle, cfg.gamma, rng);
      episodes.push_back(std::move(ep.data));
      res.trace.push(ep.regret);
    }
    const TaskDataset accumulated = TaskDataset::concat(episodes);
    res.policy = opts.learner(accumulated, transfer ? sources : none, cfg);
    check_horizon(env, res.policy);
  }
  return res;
}

int recommended_n_e(double N, double N_src, double p, double s_hint, double alpha, ExplorationMode mode) {
  if (!(N >= 2.0) || !(N_src > 0.0) || !(p > 1.0) || !(s_hint > 0.0) || !(alpha >= 0.0)) {
    throw Error(ErrorCode::DomainError, "recommended_n_e needs N >= 2, N_src > 0, p > 1, s > 0, alpha >= 0");
  }
  const double log_p = std::log(p);
  double value = 0.0;
  if (mode == ExplorationMode::Transfer) {
    value = std::max(std::pow(N, 0.8) * std::pow(log_p, 0.2) / std::pow(N_src, 0.4 * alpha),
                     s_hint * s_hint * log_p / std::pow(N_src, 2.0 * alpha));
  } else {
    const double slp = s_hint * log_p;
    value = std::max(std::pow(N, 2.0 / 3.0) * std::cbrt(slp), slp * slp);
  }
  const double clamped = std::clamp(std::ceil(value), 1.0, N - 1.0);
  return static_cast<int>(clamped);
}

}  // namespace transq
