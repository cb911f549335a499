#include "transq/qmodel.hpp"

#include <cmath>
#include <string>

#include "transq/error.hpp"

namespace transq {

StageParams StageParams::zeros(Eigen::Index p) { return {Vector::Zero(p), Vector::Zero(p)}; }

StageParams StageParams::from_stacked(const Vector& theta) {
  if (theta.size() % 2 != 0 || theta.size() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "stacked parameter length must be even and > 0");
  }
  const Eigen::Index p = theta.size() / 2;
  return {theta.head(p), theta.tail(p)};
}

Vector StageParams::stacked() const {
  Vector theta(beta.size() + psi.size());
  theta << beta, psi;
  return theta;
}

void StageParams::validate() const {
  if (beta.size() != psi.size() || beta.size() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "beta and psi must have equal length >= 1");
  }
  if (!beta.allFinite() || !psi.allFinite()) {
    throw Error(ErrorCode::NonFiniteInput, "stage parameters contain NaN/Inf");
  }
}

PolicySet PolicySet::zeros(std::size_t horizon, Eigen::Index p, double gamma) {
  PolicySet ps;
  ps.gamma = gamma;
  ps.stages.assign(horizon, StageParams::zeros(p));
  return ps;
}

void PolicySet::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(ErrorCode::DomainError, "gamma must lie in [0,1]");
  for (const auto& sp : stages) {
    sp.validate();
    if (sp.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "stages disagree on p");
  }
}

void StageData::validate() const {
  if (a.size() != X.rows() || r.size() != X.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "stage data row counts disagree");
  }
  for (Eigen::Index i = 0; i < a.size(); ++i) check_action(a[i]);
}

void TaskDataset::validate() const {
  for (const auto& sd : stages) {
    sd.validate();
    if (sd.rows() != rows()) {
      throw Error(ErrorCode::DimensionMismatch, "all stages of a task must have the same n");
    }
    if (sd.X.cols() != dim()) {
      throw Error(ErrorCode::DimensionMismatch, "all stages of a task must have the same p");
    }
  }
}

TaskDataset TaskDataset::concat(const TaskDataset& first, const TaskDataset& second) {
  TaskDataset out = concat(std::vector<TaskDataset>{first, second});
  out.task_id = first.task_id;
  return out;
}

TaskDataset TaskDataset::concat(const std::vector<TaskDataset>& parts) {
  TaskDataset out;
  const TaskDataset* shape = nullptr;
  Eigen::Index total = 0;
  for (const auto& part : parts) {
    if (part.rows() == 0) continue;
    part.validate();
    if (shape && (part.horizon() != shape->horizon() || part.dim() != shape->dim())) {
      throw Error(ErrorCode::DimensionMismatch, "cannot concatenate datasets of different shape");
    }
    if (!shape) shape = &part;
    total += part.rows();
  }
  if (!shape) return out;
  out.task_id = shape->task_id;
  out.stages.resize(shape->horizon());
  for (std::size_t t = 0; t < shape->horizon(); ++t) {
    StageData& sd = out.stages[t];
    sd.X.resize(total, shape->dim());
    sd.a.resize(total);
    sd.r.resize(total);
    Eigen::Index offset = 0;
    for (const auto& part : parts) {
      const Eigen::Index n = part.rows();
      if (n == 0) continue;
      sd.X.middleRows(offset, n) = part.stages[t].X;
      sd.a.segment(offset, n) = part.stages[t].a;
      sd.r.segment(offset, n) = part.stages[t].r;
      offset += n;
    }
  }
  return out;
}

void check_action(int a) {
  if (a != 1 && a != -1) {
    throw Error(ErrorCode::InvalidAction, "action must be -1 or +1, got " + std::to_string(a));
  }
}

Vector design_row(const Vector& x, int a) {
  check_action(a);
  Vector w(2 * x.size());
  w << x, static_cast<double>(a) * x;
  return w;
}

Matrix build_design(const StageData& sd) {
  if (sd.a.size() != sd.X.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "action count != covariate rows");
  }
  const Eigen::Index p = sd.X.cols();
  Matrix W(sd.X.rows(), 2 * p);
  W.leftCols(p) = sd.X;
  for (Eigen::Index i = 0; i < sd.X.rows(); ++i) {
    check_action(sd.a[i]);
    W.row(i).tail(p) = static_cast<double>(sd.a[i]) * sd.X.row(i);
  }
  return W;
}

double q_value(const Vector& x, int a, const StageParams& sp) {
  check_action(a);
  return x.dot(sp.beta) + static_cast<double>(a) * x.dot(sp.psi);
}

double max_q(const Vector& x, const StageParams& sp) {
  return x.dot(sp.beta) + std::abs(x.dot(sp.psi));
}

int greedy_action(const Vector& x, const StageParams& sp) {
  return x.dot(sp.psi) < 0.0 ? -1 : 1;
}

}  // namespace transq
