#include "transq/sim.hpp"

#include <algorithm>
#include <cmath>

#include "transq/error.hpp"

namespace transq {

void TwoStageMdpSpec::validate() const {
  if (p < 8) throw Error(ErrorCode::DomainError, "two-stage MDP needs p >= 8");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(ErrorCode::DomainError, "gamma must lie in [0,1]");
  if (!(noise_sd > 0.0)) throw Error(ErrorCode::DomainError, "noise_sd must be > 0");
  if (!std::isfinite(b1) || !std::isfinite(b2)) throw Error(ErrorCode::NonFiniteInput, "b1, b2 must be finite");
  for (double k : kappa) {
    if (!std::isfinite(k)) throw Error(ErrorCode::NonFiniteInput, "kappa must be finite");
  }
}

double expit(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

// Mean stage-2 reward at the binary cell (S1, A1, S2, A2).
double stage2_mean(const std::array<double, 7>& k, double s1, double a1, double s2, double a2) {
  return k[0] + k[1] * s1 + k[2] * a1 + k[3] * s1 * a1 + k[4] * a2 + k[5] * s2 * a2 + k[6] * a1 * a2;
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

double coin(Rng& rng) { return uniform01(rng) < 0.5 ? -1.0 : 1.0; }

void fill_noise(Vector& x, Eigen::Index from, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index j = from; j < x.size(); ++j) x[j] = normal(rng);
}

}  // namespace

TrueParams dp_true_params(const TwoStageMdpSpec& spec) {
  spec.validate();
  const auto& k = spec.kappa;
  TrueParams tp;
  tp.theta2 = k;

  tp.theta1.fill(0.0);
  for (double s1 : {-1.0, 1.0}) {
    for (double a1 : {-1.0, 1.0}) {
      const double up = expit(spec.b1 * s1 + spec.b2 * a1);
      double f = 0.0;
      for (double s2 : {-1.0, 1.0}) {
        const double prob = s2 > 0.0 ? up : 1.0 - up;
        const double best = std::max(stage2_mean(k, s1, a1, s2, -1.0), stage2_mean(k, s1, a1, s2, 1.0));
        f += prob * best;
      }
      f *= spec.gamma;
      tp.theta1[0] += 0.25 * f;
      tp.theta1[1] += 0.25 * s1 * f;
      tp.theta1[2] += 0.25 * a1 * f;
      tp.theta1[3] += 0.25 * s1 * a1 * f;
    }
  }

  const Eigen::Index p = spec.p;
  tp.embedded = PolicySet::zeros(2, p, spec.gamma);
  auto& st1 = tp.embedded.stages[0];
  st1.beta[0] = tp.theta1[0];
  st1.beta[1] = tp.theta1[1];
  st1.psi[0] = tp.theta1[2];
  st1.psi[1] = tp.theta1[3];

  auto& st2 = tp.embedded.stages[1];
  st2.beta.head(4) << k[0], k[1], k[2], k[3];
  st2.psi[0] = k[4];
  st2.psi[2] = k[6];
  st2.psi[4] = k[5];
  return tp;
}

TwoStageEnvironment::TwoStageEnvironment(TwoStageMdpSpec spec)
    : spec_(spec), truth_(dp_true_params(spec)) {}

Vector TwoStageEnvironment::reset(Rng& rng) const {
  Vector x(spec_.p);
  x[0] = 1.0;
  x[1] = coin(rng);
  fill_noise(x, 2, rng);
  return x;
}

Transition TwoStageEnvironment::step(std::size_t t, const Vector& x, int a, Rng& rng) const {
  check_action(a);
  if (x.size() != spec_.p) throw Error(ErrorCode::DimensionMismatch, "state has wrong dimension");
  if (t == 1) {
    const double s1 = x[1];
    const double a1 = static_cast<double>(a);
    const double s2 = uniform01(rng) < expit(spec_.b1 * s1 + spec_.b2 * a1) ? 1.0 : -1.0;
    Transition tr;
    tr.reward = 0.0;
    tr.next.resize(spec_.p);
    tr.next.head(5) << 1.0, s1, a1, s1 * a1, s2;
    fill_noise(tr.next, 5, rng);
    return tr;
  }
  if (t == 2) {
    std::normal_distribution<double> normal(0.0, spec_.noise_sd);
    return {mean_reward(2, x, a) + normal(rng), Vector()};
  }
  throw Error(ErrorCode::DomainError, "stage index out of range for a two-stage MDP");
}

double TwoStageEnvironment::mean_reward(std::size_t t, const Vector& x, int a) const {
  check_action(a);
  if (t == 1) return 0.0;
  if (t != 2) throw Error(ErrorCode::DomainError, "stage index out of range for a two-stage MDP");
  return stage2_mean(spec_.kappa, x[1], x[2], x[4], static_cast<double>(a));
}

TwoStageEnvironment as_environment(const TwoStageMdpSpec& spec) { return TwoStageEnvironment(spec); }

double expected_return(const TwoStageMdpSpec& spec, const PolicySet& policy, const Vector& x1,
                       const Vector& x2) {
  if (policy.horizon() != 2) throw Error(ErrorCode::DimensionMismatch, "policy horizon must be 2");
  if (x1.size() != spec.p || x2.size() != spec.p || policy.dim() != spec.p) {
    throw Error(ErrorCode::DimensionMismatch, "covariates or policy have wrong dimension");
  }
  const double s1 = x1[1];
  const double a1 = static_cast<double>(greedy_action(x1, policy.stages[0]));
  const double up = expit(spec.b1 * s1 + spec.b2 * a1);
  Vector x = x2;
  double value = 0.0;
  for (double s2 : {-1.0, 1.0}) {
    x.head(5) << 1.0, s1, a1, s1 * a1, s2;
    const double a2 = static_cast<double>(greedy_action(x, policy.stages[1]));
    value += (s2 > 0.0 ? up : 1.0 - up) * stage2_mean(spec.kappa, s1, a1, s2, a2);
  }
  return spec.gamma * value;
}

TaskDataset sample_trajectories(const TwoStageMdpSpec& spec, Eigen::Index n, std::uint64_t seed,
                                int task_id) {
  if (n < 1) throw Error(ErrorCode::InsufficientData, "need at least one trajectory");
  const TwoStageEnvironment env(spec);
  Rng rng(seed);

  TaskDataset ds;
  ds.task_id = task_id;
  ds.stages.resize(2);
  for (auto& sd : ds.stages) {
    sd.X.resize(n, spec.p);
    sd.a.resize(n);
    sd.r.resize(n);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector x = env.reset(rng);
    for (std::size_t t = 1; t <= 2; ++t) {
      const int a = static_cast<int>(coin(rng));
      Transition tr = env.step(t, x, a, rng);
      auto& sd = ds.stages[t - 1];
      sd.X.row(i) = x.transpose();
      sd.a[i] = a;
      sd.r[i] = tr.reward;
      x = std::move(tr.next);
    }
  }
  return ds;
}

}  // namespace transq
