#pragma once

#include <optional>
#include <random>

#include "transq/qmodel.hpp"

namespace transq {

using Rng = std::mt19937_64;

struct Transition {
  double reward = 0.0;
  // Covariates at stage t+1; empty after the final stage.
  Vector next;
};

// Episodic finite-horizon environment. Implementations are immutable: all
// randomness comes from the caller's generator, so one instance can serve
// many concurrent runs.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::size_t horizon() const = 0;
  virtual Eigen::Index dim() const = 0;

  virtual Vector reset(Rng& rng) const = 0;
  // t is 1-based.
  virtual Transition step(std::size_t t, const Vector& x, int a, Rng& rng) const = 0;

  virtual bool has_mean_reward() const { return false; }
  // E[r_t | x_t, a_t]; throws MissingOracle unless has_mean_reward().
  virtual double mean_reward(std::size_t t, const Vector& x, int a) const;

  virtual std::optional<PolicySet> true_params() const { return std::nullopt; }
};

}  // namespace transq
