#pragma once

#include <Eigen/Dense>
#include <vector>

#include "transq/lasso.hpp"

namespace transq {

using ActionVector = Eigen::VectorXi;

// Linear Q-function Q(x, a) = x'beta + a * x'psi for a in {-1, +1}.
struct StageParams {
  Vector beta;
  Vector psi;

  static StageParams zeros(Eigen::Index p);
  // Split a stacked (beta, psi) vector of length 2p.
  static StageParams from_stacked(const Vector& theta);

  Eigen::Index dim() const { return beta.size(); }
  Vector stacked() const;
  void validate() const;
};

// Per-stage parameters theta_1..theta_T; theta_{T+1} = 0 is implicit.
struct PolicySet {
  std::vector<StageParams> stages;
  double gamma = 1.0;

  static PolicySet zeros(std::size_t horizon, Eigen::Index p, double gamma);

  std::size_t horizon() const { return stages.size(); }
  Eigen::Index dim() const { return stages.empty() ? 0 : stages.front().dim(); }
  void validate() const;
};

struct StageData {
  Matrix X;         // n x p, row i = x_{t,i}
  ActionVector a;   // entries in {-1, +1}
  Vector r;

  Eigen::Index rows() const { return X.rows(); }
  void validate() const;
};

struct TaskDataset {
  std::vector<StageData> stages;
  int task_id = 0;  // 0 = target, 1..K = sources

  std::size_t horizon() const { return stages.size(); }
  Eigen::Index rows() const { return stages.empty() ? 0 : stages.front().rows(); }
  Eigen::Index dim() const { return stages.empty() ? 0 : stages.front().X.cols(); }
  void validate() const;

  // Row-wise concatenation of two datasets with matching shape.
  static TaskDataset concat(const TaskDataset& first, const TaskDataset& second);
  static TaskDataset concat(const std::vector<TaskDataset>& parts);
};

void check_action(int a);

Vector design_row(const Vector& x, int a);

// n x 2p matrix with rows (x_i', a_i x_i').
Matrix build_design(const StageData& sd);

double q_value(const Vector& x, int a, const StageParams& sp);

// max over a in {-1, +1}: x'beta + |x'psi|.
double max_q(const Vector& x, const StageParams& sp);

// sign(x'psi) with ties resolved to +1.
int greedy_action(const Vector& x, const StageParams& sp);

}  // namespace transq
