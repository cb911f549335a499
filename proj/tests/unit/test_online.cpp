#include <doctest.h>

#include <cmath>

#include "transq/error.hpp"
#include "transq/online.hpp"
#include "transq/sim.hpp"

using namespace transq;

namespace {

// Constant covariate x = (1); stage rewards depend only on the action.
class TableEnvironment final : public Environment {
 public:
  std::size_t horizon() const override { return 2; }
  Eigen::Index dim() const override { return 1; }
  Vector reset(Rng&) const override { return Vector::Ones(1); }
  Transition step(std::size_t t, const Vector& x, int a, Rng&) const override {
    return {mean_reward(t, x, a), t < 2 ? Vector::Ones(1) : Vector()};
  }
  bool has_mean_reward() const override { return true; }
  double mean_reward(std::size_t t, const Vector&, int a) const override {
    if (t == 1) return a == 1 ? 2.0 : 0.5;
    return a == 1 ? 0.0 : 1.0;
  }
  std::optional<PolicySet> true_params() const override { return plays(1, -1); }

  static PolicySet plays(int a1, int a2) {
    PolicySet ps = PolicySet::zeros(2, 1, 1.0);
    ps.stages[0].psi[0] = a1;
    ps.stages[1].psi[0] = a2;
    return ps;
  }
};

class NoOracleEnvironment final : public Environment {
 public:
  std::size_t horizon() const override { return 1; }
  Eigen::Index dim() const override { return 1; }
  Vector reset(Rng&) const override { return Vector::Ones(1); }
  Transition step(std::size_t, const Vector&, int, Rng&) const override { return {0.0, Vector()}; }
};

TwoStageMdpSpec small_spec() {
  TwoStageMdpSpec spec;
  spec.p = 8;
  return spec;
}

Learner single_task_learner() {
  return [](const TaskDataset& target, const std::vector<TaskDataset>&, const TransferConfig& cfg) {
    return single_task_q_learning(target, cfg).first;
  };
}

}  // namespace

TEST_CASE("episode regret on a hand-rolled environment") {
  const TableEnvironment env;
  const PolicySet oracle = *env.true_params();
  Rng rng(1);
  CHECK(episode_regret(env, oracle, oracle, 0.5, rng) == 0.0);
  CHECK(episode_regret(env, TableEnvironment::plays(-1, -1), oracle, 0.5, rng) == 1.5);
  CHECK(episode_regret(env, TableEnvironment::plays(1, 1), oracle, 0.5, rng) == 0.5);
  CHECK(episode_regret(env, TableEnvironment::plays(-1, 1), oracle, 0.5, rng) == 2.0);
  CHECK(episode_regret(env, TableEnvironment::plays(-1, 1), oracle, 0.0, rng) == 1.5);
  CHECK(episode_regret(env, TableEnvironment::plays(1, 1), oracle, 0.0, rng) == 0.0);
  CHECK_THROWS_AS(episode_regret(env, PolicySet::zeros(3, 1, 1.0), oracle, 0.5, rng), Error);
}

TEST_CASE("regret needs mean rewards") {
  const NoOracleEnvironment env;
  Rng rng(2);
  try {
    episode_regret(env, PolicySet::zeros(1, 1, 1.0), PolicySet::zeros(1, 1, 1.0), 1.0, rng);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingOracle);
  }
  CHECK_THROWS_AS(run_etc(env, {}, 1, 2, TransferConfig{}, rng), Error);
}

TEST_CASE("oracle play has zero regret in the simulator") {
  const TwoStageEnvironment env = as_environment(small_spec());
  const PolicySet oracle = *env.true_params();
  Rng rng(3);
  for (int i = 0; i < 100; ++i) CHECK(episode_regret(env, oracle, oracle, 1.0, rng) == 0.0);
}

TEST_CASE("run_etc bookkeeping") {
  const TwoStageEnvironment env = as_environment(small_spec());
  TransferConfig cfg;

  SUBCASE("n_e = N - 1 leaves one exploitation episode") {
    Rng rng(4);
    const EtcResult res = run_etc(env, {}, 9, 10, cfg, rng);
    CHECK(res.trace.episodes() == 10);
    CHECK(res.trace.n_e == 9);
    CHECK(res.explored.rows() == 9);
    CHECK(res.trace.exploitation_regret() == res.trace.instantaneous.back());
  }
  SUBCASE("an injected oracle has no exploitation regret") {
    Rng rng(5);
    OnlineOptions opts;
    opts.learner = [&](const TaskDataset&, const std::vector<TaskDataset>&, const TransferConfig&) {
      return *env.true_params();
    };
    const EtcResult res = run_etc(env, {}, 5, 60, cfg, rng, opts);
    CHECK(res.trace.exploitation_regret() == 0.0);
    CHECK(res.trace.sum_from(0) > 0.0);
  }
  SUBCASE("invalid exploration lengths") {
    Rng rng(6);
    for (int n_e : {0, 10, 11}) {
      try {
        run_etc(env, {}, n_e, 10, cfg, rng);
        FAIL("expected an error");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidPhase);
      }
    }
  }
}

TEST_CASE("regret is non-negative and cumulative regret is a non-decreasing prefix sum") {
  const TwoStageEnvironment env = as_environment(small_spec());
  const TaskDataset source = sample_trajectories(small_spec(), 100, 77, 1);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const EtcResult res = run_etc(env, {source}, 5, 40, TransferConfig{}, rng);
    double sum = 0.0;
    for (std::size_t i = 0; i < res.trace.episodes(); ++i) {
      CHECK(res.trace.instantaneous[i] >= 0.0);
      sum += res.trace.instantaneous[i];
      CHECK(res.trace.cumulative[i] == sum);
      if (i > 0) CHECK(res.trace.cumulative[i] >= res.trace.cumulative[i - 1]);
    }
  }
}

TEST_CASE("empty sources reproduce single-task ETC exactly") {
  const TwoStageEnvironment env = as_environment(small_spec());
  TransferConfig cfg;
  OnlineOptions st;
  st.learner = single_task_learner();
  Rng a(8), b(8);
  const EtcResult via_transfer = run_etc(env, {}, 10, 30, cfg, a);
  const EtcResult via_single = run_etc(env, {}, 10, 30, cfg, b, st);
  CHECK(via_transfer.trace.instantaneous == via_single.trace.instantaneous);
  for (std::size_t t = 0; t < 2; ++t) {
    CHECK(via_transfer.policy.stages[t].stacked() == via_single.policy.stages[t].stacked());
  }
}

TEST_CASE("exploration regret per episode does not depend on n_e") {
  const TwoStageEnvironment env = as_environment(small_spec());
  OnlineOptions opts;
  opts.learner = [](const TaskDataset& t, const std::vector<TaskDataset>&, const TransferConfig& cfg) {
    return PolicySet::zeros(t.horizon(), t.dim(), cfg.gamma);
  };
  auto per_episode = [&](int n_e) {
    std::vector<double> values;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      Rng rng(1000 + seed);
      const EtcResult res = run_etc(env, {}, n_e, n_e + 1, TransferConfig{}, rng, opts);
      for (int i = 0; i < n_e; ++i) values.push_back(res.trace.instantaneous[static_cast<std::size_t>(i)]);
    }
    double mean = 0.0, sq = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    for (double v : values) sq += (v - mean) * (v - mean);
    const double se = std::sqrt(sq / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
    return std::pair{mean, se};
  };
  const auto [m5, se5] = per_episode(5);
  const auto [m20, se20] = per_episode(20);
  INFO(m5 << " +- " << se5 << " vs " << m20 << " +- " << se20);
  CHECK(std::abs(m5 - m20) <= 2.0 * std::hypot(se5, se20));
}

TEST_CASE("phased ETC with zero init plays +1 in the first phase") {
  const TwoStageEnvironment env = as_environment(small_spec());
  Rng rng(9), replay(9);
  const PhasedResult res = run_phased_etc(env, {}, 20, 1, TransferConfig{}, false, rng);
  REQUIRE(res.trace.episodes() == 20);
  CHECK(res.trace.phase_boundaries == std::vector<std::size_t>{0});
  const PolicySet zero = PolicySet::zeros(2, 8, 1.0);
  const PolicySet oracle = *env.true_params();
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(res.trace.instantaneous[i] == episode_regret(env, zero, oracle, 1.0, replay));
  }
}

TEST_CASE("phased ETC with an oracle init and no refitting stays at zero regret") {
  const TwoStageEnvironment env = as_environment(small_spec());
  OnlineOptions opts;
  opts.initial = *env.true_params();
  opts.learner = [&](const TaskDataset&, const std::vector<TaskDataset>&, const TransferConfig&) {
    return *env.true_params();
  };
  Rng rng(10);
  const PhasedResult res = run_phased_etc(env, {}, 10, 3, TransferConfig{}, false, rng, opts);
  CHECK(res.trace.phase_boundaries == std::vector<std::size_t>{0, 10, 20});
  CHECK(res.trace.cumulative.back() == 0.0);
  CHECK_THROWS_AS(run_phased_etc(env, {}, 0, 3, TransferConfig{}, false, rng), Error);
  CHECK_THROWS_AS(run_phased_etc(env, {}, 10, 0, TransferConfig{}, false, rng), Error);
}

TEST_CASE("phased ETC refits on all accumulated data") {
  const TwoStageEnvironment env = as_environment(small_spec());
  std::vector<Eigen::Index> seen;
  OnlineOptions opts;
  opts.learner = [&](const TaskDataset& t, const std::vector<TaskDataset>&, const TransferConfig& cfg) {
    seen.push_back(t.rows());
    return PolicySet::zeros(t.horizon(), t.dim(), cfg.gamma);
  };
  Rng rng(11);
  run_phased_etc(env, {}, 7, 3, TransferConfig{}, false, rng, opts);
  CHECK(seen == std::vector<Eigen::Index>{7, 14, 21});
}

TEST_CASE("recommended exploration lengths") {
  const double N = 1000, p = 10, s = 2;
  const double lp = std::log(p);
  const double transfer = std::max(std::pow(N, 0.8) * std::pow(lp, 0.2), s * s * lp);
  CHECK(recommended_n_e(N, 1, p, s, 0.0, ExplorationMode::Transfer) == static_cast<int>(std::ceil(transfer)));
  CHECK(recommended_n_e(50, 1, std::exp(1.0), 1, 0.0, ExplorationMode::Single) == 14);
  CHECK(recommended_n_e(2, 1, 100, 5, 0.0, ExplorationMode::Single) == 1);
  CHECK(recommended_n_e(10, 1, 1e6, 5, 0.0, ExplorationMode::Transfer) == 9);

  int previous = recommended_n_e(N, 1, p, s, 0.5, ExplorationMode::Transfer);
  for (double n_src : {2.0, 10.0, 100.0, 1e4, 1e6}) {
    const int current = recommended_n_e(N, n_src, p, s, 0.5, ExplorationMode::Transfer);
    CHECK(current <= previous);
    previous = current;
  }
  CHECK_THROWS_AS(recommended_n_e(1, 1, p, s, 0, ExplorationMode::Single), Error);
  CHECK_THROWS_AS(recommended_n_e(N, 0, p, s, 0, ExplorationMode::Single), Error);
  CHECK_THROWS_AS(recommended_n_e(N, 1, p, s, -1, ExplorationMode::Single), Error);
}
