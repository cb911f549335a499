#include <doctest.h>

#include <array>
#include <cmath>
#include <map>

#include "transq/error.hpp"
#include "transq/online.hpp"
#include "transq/sim.hpp"
#include "transq/transfer.hpp"

using namespace transq;

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double reward2(const std::array<double, 7>& k, int s1, int a1, int s2, int a2) {
  return k[0] + k[1] * s1 + k[2] * a1 + k[3] * s1 * a1 + k[4] * a2 + k[5] * s2 * a2 + k[6] * a1 * a2;
}

double p_s2(const TwoStageMdpSpec& spec, int s1, int a1, int s2) {
  const double up = logistic(spec.b1 * s1 + spec.b2 * a1);
  return s2 == 1 ? up : 1.0 - up;
}

// Four-point enumeration of the stage-1 Q-function.
std::array<double, 4> theta1_oracle(const TwoStageMdpSpec& spec) {
  std::array<double, 4> th{};
  for (int s1 : {-1, 1}) {
    for (int a1 : {-1, 1}) {
      double f = 0.0;
      for (int s2 : {-1, 1}) {
        const double best = std::max(reward2(spec.kappa, s1, a1, s2, 1), reward2(spec.kappa, s1, a1, s2, -1));
        f += p_s2(spec, s1, a1, s2) * best;
      }
      f *= spec.gamma;
      th[0] += f / 4;
      th[1] += s1 * f / 4;
      th[2] += a1 * f / 4;
      th[3] += s1 * a1 * f / 4;
    }
  }
  return th;
}

Vector x1_of(Eigen::Index p, int s1) {
  Vector x = Vector::Zero(p);
  x[0] = 1;
  x[1] = s1;
  return x;
}

Vector x2_of(Eigen::Index p, int s1, int a1, int s2) {
  Vector x = Vector::Zero(p);
  x[0] = 1;
  x[1] = s1;
  x[2] = a1;
  x[3] = s1 * a1;
  x[4] = s2;
  return x;
}

TwoStageMdpSpec spec8() {
  TwoStageMdpSpec spec;
  spec.p = 8;
  return spec;
}

}  // namespace

TEST_CASE("expit") {
  CHECK(expit(0.0) == 0.5);
  CHECK(std::abs(expit(40.0) - 1.0) <= 1e-15);
  CHECK(expit(2.0) == doctest::Approx(0.8808).epsilon(1e-4));
  CHECK(expit(-700.0) > 0.0);
  CHECK(expit(-700.0) < 1e-300);
  CHECK(expit(700.0) == 1.0);
  CHECK(std::isfinite(expit(-800.0)));
  CHECK(expit(1.3) + expit(-1.3) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("dynamic programming oracle") {
  SUBCASE("default calibration") {
    const TrueParams tp = dp_true_params(TwoStageMdpSpec{});
    const std::array<double, 4> expect{2.6904, 1.1904, 1.6904, 1.1904};
    for (int j = 0; j < 4; ++j) CHECK(std::abs(tp.theta1[j] - expect[j]) < 5e-5);
    const auto oracle = theta1_oracle(TwoStageMdpSpec{});
    for (int j = 0; j < 4; ++j) CHECK(tp.theta1[j] == doctest::Approx(oracle[j]).epsilon(1e-14));
    for (int j = 0; j < 7; ++j) CHECK(tp.theta2[j] == 1.0);
  }
  SUBCASE("source with a larger S1 effect") {
    TwoStageMdpSpec spec;
    spec.kappa[1] = 1.2;
    const TrueParams tp = dp_true_params(spec);
    const std::array<double, 4> expect{2.6904, 1.3904, 1.6904, 1.1904};
    for (int j = 0; j < 4; ++j) CHECK(std::abs(tp.theta1[j] - expect[j]) < 5e-5);
    CHECK(tp.theta2[1] == 1.2);
  }
  SUBCASE("no discounting of the future means zero stage-1 value") {
    TwoStageMdpSpec spec;
    spec.gamma = 0.0;
    const TrueParams tp = dp_true_params(spec);
    for (double v : tp.theta1) CHECK(v == 0.0);
  }
  SUBCASE("random specs agree with the enumeration") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal;
    for (int rep = 0; rep < 50; ++rep) {
      TwoStageMdpSpec spec = spec8();
      spec.b1 = normal(rng);
      spec.b2 = normal(rng);
      spec.gamma = std::uniform_real_distribution<double>(0, 1)(rng);
      for (double& k : spec.kappa) k = normal(rng);
      const TrueParams tp = dp_true_params(spec);
      const auto oracle = theta1_oracle(spec);
      for (int j = 0; j < 4; ++j) CHECK(tp.theta1[j] == doctest::Approx(oracle[j]).epsilon(1e-13));
      for (int j = 0; j < 7; ++j) CHECK(tp.theta2[j] == spec.kappa[j]);
    }
  }
}

TEST_CASE("embedded parameters reproduce the true Q-functions") {
  const TwoStageMdpSpec spec = spec8();
  const TrueParams tp = dp_true_params(spec);
  for (int s1 : {-1, 1}) {
    for (int a1 : {-1, 1}) {
      const double q1 = tp.theta1[0] + tp.theta1[1] * s1 + tp.theta1[2] * a1 + tp.theta1[3] * s1 * a1;
      CHECK(q_value(x1_of(8, s1), a1, tp.embedded.stages[0]) == doctest::Approx(q1).epsilon(1e-14));
      for (int s2 : {-1, 1}) {
        for (int a2 : {-1, 1}) {
          CHECK(q_value(x2_of(8, s1, a1, s2), a2, tp.embedded.stages[1]) == reward2(spec.kappa, s1, a1, s2, a2));
        }
      }
    }
  }
  CHECK(tp.embedded.stages[0].beta.tail(6).isZero(0.0));
  CHECK(tp.embedded.stages[0].psi.tail(6).isZero(0.0));
  CHECK(tp.embedded.stages[1].beta.tail(3).isZero(0.0));
  CHECK(tp.embedded.stages[1].psi.tail(3).isZero(0.0));
}

TEST_CASE("greedy oracle play beats every stage policy") {
  const TwoStageMdpSpec spec = spec8();
  const TrueParams tp = dp_true_params(spec);

  // Value of a1 = f(S1), a2 = g(S2), exact over S1 and S2.
  auto value = [&](std::array<int, 2> f, std::array<int, 2> g) {
    double v = 0.0;
    for (int s1 : {-1, 1}) {
      const int a1 = f[(s1 + 1) / 2];
      for (int s2 : {-1, 1}) v += 0.5 * spec.gamma * p_s2(spec, s1, a1, s2) * reward2(spec.kappa, s1, a1, s2, g[(s2 + 1) / 2]);
    }
    return v;
  };
  double best = -1e300;
  for (int f0 : {-1, 1}) {
    for (int f1 : {-1, 1}) {
      for (int g0 : {-1, 1}) {
        for (int g1 : {-1, 1}) best = std::max(best, value({f0, f1}, {g0, g1}));
      }
    }
  }
  double oracle = 0.0;
  for (int s1 : {-1, 1}) {
    const int a1 = greedy_action(x1_of(8, s1), tp.embedded.stages[0]);
    for (int s2 : {-1, 1}) {
      const int a2 = greedy_action(x2_of(8, s1, a1, s2), tp.embedded.stages[1]);
      oracle += 0.5 * spec.gamma * p_s2(spec, s1, a1, s2) * reward2(spec.kappa, s1, a1, s2, a2);
    }
  }
  CHECK(oracle >= best - 1e-12);

  double via_library = 0.0;
  for (int s1 : {-1, 1}) via_library += 0.5 * expected_return(spec, tp.embedded, x1_of(8, s1), x2_of(8, 0, 0, 0));
  CHECK(via_library == doctest::Approx(oracle).epsilon(1e-14));
}

TEST_CASE("expected_return of a fixed policy") {
  const TwoStageMdpSpec spec = spec8();
  const PolicySet zero = PolicySet::zeros(2, 8, spec.gamma);
  // Zero parameters always play +1.
  for (int s1 : {-1, 1}) {
    double v = 0.0;
    for (int s2 : {-1, 1}) v += spec.gamma * p_s2(spec, s1, 1, s2) * reward2(spec.kappa, s1, 1, s2, 1);
    CHECK(expected_return(spec, zero, x1_of(8, s1), x2_of(8, 0, 0, 0)) == doctest::Approx(v).epsilon(1e-14));
  }
  CHECK_THROWS_AS(expected_return(spec, PolicySet::zeros(2, 9, 1.0), x1_of(8, 1), x2_of(8, 0, 0, 0)), Error);
}

TEST_CASE("sampled transitions follow the logistic law") {
  const TwoStageMdpSpec spec = spec8();
  const TaskDataset ds = sample_trajectories(spec, 100000, 2024);
  REQUIRE(ds.rows() == 100000);
  long hits = 0, total = 0;
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    const double s1 = ds.stages[0].X(i, 1);
    const int a1 = ds.stages[0].a[i];
    CHECK_FALSE(ds.stages[1].X(i, 2) != a1);
    if (s1 == 1 && a1 == 1) {
      ++total;
      hits += ds.stages[1].X(i, 4) == 1.0;
    }
  }
  CHECK(std::abs(static_cast<double>(hits) / static_cast<double>(total) - expit(2.0)) < 0.005);
}

TEST_CASE("sampled rewards match the cell means") {
  const TwoStageMdpSpec spec = spec8();
  const TaskDataset ds = sample_trajectories(spec, 100000, 99);
  std::map<std::array<int, 4>, std::pair<double, long>> cells;
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    const std::array<int, 4> key{static_cast<int>(ds.stages[1].X(i, 1)), ds.stages[0].a[i],
                                 static_cast<int>(ds.stages[1].X(i, 4)), ds.stages[1].a[i]};
    cells[key].first += ds.stages[1].r[i];
    cells[key].second += 1;
    CHECK_FALSE(ds.stages[0].r[i] != 0.0);
  }
  CHECK(cells.size() == 16);
  for (const auto& [key, acc] : cells) {
    const double mean = acc.first / static_cast<double>(acc.second);
    const double expect = reward2(spec.kappa, key[0], key[1], key[2], key[3]);
    CHECK(std::abs(mean - expect) <= 3.0 * spec.noise_sd / std::sqrt(static_cast<double>(acc.second)));
  }
}

TEST_CASE("covariate layout and determinism") {
  TwoStageMdpSpec spec;
  spec.p = 12;
  const TaskDataset a = sample_trajectories(spec, 50, 5, 3);
  const TaskDataset b = sample_trajectories(spec, 50, 5, 3);
  const TaskDataset c = sample_trajectories(spec, 50, 6, 3);
  CHECK(a.task_id == 3);
  CHECK(a.dim() == 12);
  CHECK(a.horizon() == 2);
  for (std::size_t t = 0; t < 2; ++t) {
    CHECK(a.stages[t].X == b.stages[t].X);
    CHECK(a.stages[t].a == b.stages[t].a);
    CHECK(a.stages[t].r == b.stages[t].r);
  }
  CHECK(a.stages[1].r != c.stages[1].r);
  for (Eigen::Index i = 0; i < 50; ++i) {
    CHECK(a.stages[0].X(i, 0) == 1.0);
    CHECK(a.stages[1].X(i, 0) == 1.0);
    CHECK(a.stages[1].X(i, 1) == a.stages[0].X(i, 1));
    CHECK(a.stages[1].X(i, 3) == a.stages[1].X(i, 1) * a.stages[1].X(i, 2));
  }
  // Noise covariates are redrawn per stage.
  CHECK(a.stages[0].X.rightCols(6) != a.stages[1].X.rightCols(6));
}

TEST_CASE("large samples recover the embedded parameters") {
  const TwoStageMdpSpec spec = spec8();
  const TrueParams tp = dp_true_params(spec);
  const TaskDataset ds = sample_trajectories(spec, 5000, 17);
  const PolicySet ps = single_task_q_learning(ds, spec.gamma, 1e-4);
  for (std::size_t t = 0; t < 2; ++t) {
    const double err = (ps.stages[t].stacked() - tp.embedded.stages[t].stacked()).norm();
    INFO("stage " << t + 1 << " error " << err);
    CHECK(err < 0.05);
  }
}

TEST_CASE("environment adapter") {
  const TwoStageEnvironment env = as_environment(spec8());
  const Vector x2 = x2_of(8, 1, 1, 1);
  CHECK(env.mean_reward(1, x1_of(8, 1), 1) == 0.0);
  CHECK(env.mean_reward(1, x1_of(8, -1), -1) == 0.0);
  CHECK(env.mean_reward(2, x2, 1) == 7.0);
  CHECK(env.mean_reward(2, x2_of(8, -1, 1, -1), -1) == reward2(env.spec().kappa, -1, 1, -1, -1));
  CHECK(env.horizon() == 2);
  CHECK(env.dim() == 8);
  const PolicySet oracle = *env.true_params();
  Rng rng(3);
  CHECK(episode_regret(env, oracle, oracle, 1.0, rng) == 0.0);

  const Vector x1 = env.reset(rng);
  CHECK(x1[0] == 1.0);
  CHECK(std::abs(x1[1]) == 1.0);
  const Transition first = env.step(1, x1, -1, rng);
  CHECK(first.reward == 0.0);
  CHECK(first.next[2] == -1.0);
  CHECK(first.next[1] == x1[1]);
  const Transition last = env.step(2, first.next, 1, rng);
  CHECK(last.next.size() == 0);
}

TEST_CASE("spec validation") {
  TwoStageMdpSpec spec;
  CHECK_NOTHROW(spec.validate());
  spec.p = 7;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = {};
  spec.gamma = 1.01;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = {};
  spec.noise_sd = 0.0;
  CHECK_THROWS_AS(spec.validate(), Error);
  CHECK_THROWS_AS(sample_trajectories(TwoStageMdpSpec{}, 0, 1), Error);
}
