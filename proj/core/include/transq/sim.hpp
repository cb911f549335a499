#pragma once

#include <array>
#include <cstdint>

#include "transq/environment.hpp"

namespace transq {

// Two-stage MDP with binary states and actions in {-1, +1}:
//   S1 ~ U{-1,1}, Pr(S2 = 1 | S1, A1) = expit(b1 S1 + b2 A1), R1 = 0,
//   R2 = k1 + k2 S1 + k3 A1 + k4 S1 A1 + k5 A2 + k6 S2 A2 + k7 A1 A2 + eps.
//
// Covariate layout (p >= 8, z ~ N(0,1) redrawn at each stage):
//   x1 = (1, S1, z_3, ..., z_p)
//   x2 = (1, S1, A1, S1 A1, S2, z_6, ..., z_p)
struct TwoStageMdpSpec {
  double b1 = 1.0;
  double b2 = 1.0;
  std::array<double, 7> kappa{1, 1, 1, 1, 1, 1, 1};
  double gamma = 1.0;
  Eigen::Index p = 100;
  double noise_sd = 1.0;

  void validate() const;
};

struct TrueParams {
  std::array<double, 7> theta2{};
  std::array<double, 4> theta1{};
  PolicySet embedded;  // the same Q-functions in ambient (beta, psi) coordinates
};

double expit(double z);

// Exact backward induction over the four (S1, A1) cells.
TrueParams dp_true_params(const TwoStageMdpSpec& spec);

class TwoStageEnvironment final : public Environment {
 public:
  explicit TwoStageEnvironment(TwoStageMdpSpec spec);

  std::size_t horizon() const override { return 2; }
  Eigen::Index dim() const override { return spec_.p; }
  Vector reset(Rng& rng) const override;
  Transition step(std::size_t t, const Vector& x, int a, Rng& rng) const override;
  bool has_mean_reward() const override { return true; }
  double mean_reward(std::size_t t, const Vector& x, int a) const override;
  std::optional<PolicySet> true_params() const override { return truth_.embedded; }

  const TwoStageMdpSpec& spec() const { return spec_; }
  const TrueParams& truth() const { return truth_; }

 private:
  TwoStageMdpSpec spec_;
  TrueParams truth_;
};

TwoStageEnvironment as_environment(const TwoStageMdpSpec& spec);

// Expected discounted return of greedy play under `policy` from x1, exact
// over S2 and reward noise. The stage-2 noise covariates are taken from
// x2 (entries 5..p-1); its structured prefix is rebuilt from the play.
double expected_return(const TwoStageMdpSpec& spec, const PolicySet& policy, const Vector& x1,
                       const Vector& x2);

// n trajectories under the uniform behaviour policy; deterministic in seed.
TaskDataset sample_trajectories(const TwoStageMdpSpec& spec, Eigen::Index n, std::uint64_t seed,
                                int task_id = 0);

}  // namespace transq
