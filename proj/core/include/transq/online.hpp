#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "transq/environment.hpp"
#include "transq/transfer.hpp"

namespace transq {

struct RegretTrace {
  std::vector<double> instantaneous;  // one entry per episode
  std::vector<double> cumulative;     // prefix sums of instantaneous
  int n_e = 0;
  std::vector<std::size_t> phase_boundaries;  // first episode index of each phase

  void push(double regret);
  std::size_t episodes() const { return instantaneous.size(); }
  // Sum of instantaneous regret over episodes [first, end).
  double sum_from(std::size_t first) const;
  double exploitation_regret() const { return sum_from(static_cast<std::size_t>(n_e)); }
};

// Chooses the action at stage t (1-based) given covariates.
using ActionRule = std::function<int(std::size_t t, const Vector& x, Rng& rng)>;

// Fits per-stage parameters from target data and (possibly empty) sources.
using Learner = std::function<PolicySet(const TaskDataset& target,
                                        const std::vector<TaskDataset>& sources,
                                        const TransferConfig& cfg)>;

ActionRule uniform_random_actions();
ActionRule greedy_actions(const PolicySet& policy);
Learner transfer_learner();

struct Episode {
  TaskDataset data;  // one trajectory
  double regret = 0.0;
};

/// Roll one episode with `rule`, accumulating gamma^{t-1} times the mean
/// reward gap between the oracle's greedy action and the action taken.
Episode rollout(const Environment& env, const ActionRule& rule, const PolicySet& oracle,
                double gamma, Rng& rng);

double episode_regret(const Environment& env, const PolicySet& policy, const PolicySet& oracle,
                      double gamma, Rng& rng);

struct OnlineOptions {
  ActionRule explore = uniform_random_actions();
  Learner learner = transfer_learner();
  // Phase-0 parameters for run_phased_etc; overrides the default init.
  std::optional<PolicySet> initial;
};

struct EtcResult {
  PolicySet policy;
  RegretTrace trace;
  TaskDataset explored;
};

/// Explore for n_e episodes, fit once, then act greedily for N - n_e
/// episodes. Regret is recorded for all N episodes.
EtcResult run_etc(const Environment& env, const std::vector<TaskDataset>& sources, int n_e, int N,
                  const TransferConfig& cfg, Rng& rng, const OnlineOptions& opts = {});

struct PhasedResult {
  RegretTrace trace;
  PolicySet policy;  // parameters after the last refit
};

/// Greedy batches with a refit on all accumulated target data after each
/// phase. With seed_with_sources the phase-0 parameters come from a fit on
/// the sources alone and every refit transfers from them.
PhasedResult run_phased_etc(const Environment& env, const std::vector<TaskDataset>& sources,
                            int batch_size, int n_phases, const TransferConfig& cfg,
                            bool seed_with_sources, Rng& rng, const OnlineOptions& opts = {});

enum class ExplorationMode { Transfer, Single };

// Exploration length with proportionality constant 1, rounded up and
// clamped to [1, N-1].
int recommended_n_e(double N, double N_src, double p, double s_hint, double alpha,
                    ExplorationMode mode);

}  // namespace transq
