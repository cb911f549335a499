#include "transq/transfer.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "transq/error.hpp"

namespace transq {

void TransferConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(ErrorCode::DomainError, "gamma must lie in [0,1]");
  for (const auto* choice : {&lambda_src, &lambda_0}) {
    if (choice->mode == PenaltyChoice::Mode::Explicit && !(choice->value >= 0.0)) {
      throw Error(ErrorCode::DomainError, "explicit penalty must be >= 0");
    }
  }
  if (cv_folds < 2) throw Error(ErrorCode::DomainError, "cv_folds must be >= 2");
  if (cv_grid_size < 1) throw Error(ErrorCode::DomainError, "cv_grid_size must be >= 1");
  if (cv_grid_ratio && !(*cv_grid_ratio > 0.0 && *cv_grid_ratio <= 1.0)) {
    throw Error(ErrorCode::DomainError, "cv_grid_ratio must lie in (0,1]");
  }
  if (!(cv_tol > 0.0)) throw Error(ErrorCode::DomainError, "cv_tol must be > 0");
  if (!(c1 > 0.0)) throw Error(ErrorCode::DomainError, "c1 must be > 0");
  if (s_hint && !(*s_hint >= 1.0)) throw Error(ErrorCode::DomainError, "s_hint must be >= 1");
  if (!(h_hint >= 0.0)) throw Error(ErrorCode::DomainError, "h_hint must be >= 0");
  lasso.validate();
}

Vector pseudo_outcomes(const StageData* next_stage, const Vector& rewards,
                       const StageParams& theta_next, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(ErrorCode::DomainError, "gamma must lie in [0,1]");
  Vector y = rewards;
  if (next_stage == nullptr) return y;
  if (next_stage->rows() != rewards.size()) {
    throw Error(ErrorCode::DimensionMismatch, "next-stage rows != reward count");
  }
  if (next_stage->X.cols() != theta_next.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "next-stage covariates do not match parameter dim");
  }
  // gamma * (X beta + |X psi|), vectorized form of max_q per row
  y.noalias() += gamma * (next_stage->X * theta_next.beta +
                          (next_stage->X * theta_next.psi).cwiseAbs());
  return y;
}

namespace {

DesignResponse stack(const std::vector<DesignResponse>& parts) {
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts.front().W.cols();
  for (const auto& part : parts) {
    if (part.W.cols() != cols) throw Error(ErrorCode::DimensionMismatch, "source designs disagree on columns");
    if (part.y.size() != part.W.rows()) throw Error(ErrorCode::DimensionMismatch, "source response length != rows");
    if (part.W.rows() < 1) throw Error(ErrorCode::InsufficientData, "source task has no rows");
    rows += part.W.rows();
  }
  DesignResponse out{Matrix(rows, cols), Vector(rows)};
  Eigen::Index offset = 0;
  for (const auto& part : parts) {
    out.W.middleRows(offset, part.W.rows()) = part.W;
    out.y.segment(offset, part.W.rows()) = part.y;
    offset += part.W.rows();
  }
  return out;
}

DesignResponse pool_tasks(const std::vector<DesignResponse>& sources, const DesignResponse& target,
                          PoolMode pool) {
  stack(sources);  // validates every source block, including empty ones
  if (pool == PoolMode::SourcesOnly) return stack(sources);
  std::vector<DesignResponse> all;
  all.reserve(sources.size() + 1);
  all.push_back(target);
  all.insert(all.end(), sources.begin(), sources.end());
  return stack(all);
}

LassoConfig with_lambda(LassoConfig cfg, double lambda) {
  cfg.lambda = lambda;
  return cfg;
}

Eigen::Index nnz(const Vector& v) { return (v.array() != 0.0).count(); }

struct PenaltyContext {
  double design_cols;
  double n0;
  double n_src;
};

TheoryLambdas theory_for(const TransferConfig& cfg, const PenaltyContext& ctx) {
  const double s = cfg.s_hint.value_or(std::sqrt(ctx.design_cols));
  return theory_lambdas(ctx.design_cols, ctx.n0, ctx.n_src > 0 ? ctx.n_src : ctx.n0, s,
                        cfg.h_hint, cfg.c1);
}

std::vector<double> default_cv_grid(const TransferConfig& cfg, const Matrix& W, const Vector& y) {
  const double ratio = cfg.cv_grid_ratio.value_or(W.rows() >= W.cols() ? 1e-3 : 1e-2);
  return lambda_grid(lasso_lambda_max(W, y), cfg.cv_grid_size, ratio);
}

LassoConfig cv_lasso(const TransferConfig& cfg) {
  LassoConfig out = cfg.lasso;
  out.tol = cfg.cv_tol;
  return out;
}

// Resolve a penalty choice on the given (design, response). CV falls back to
// the theory value when there are fewer rows than folds.
double resolve_penalty(const PenaltyChoice& choice, const TransferConfig& cfg, const Matrix& W,
                       const Vector& y, double theory_value) {
  switch (choice.mode) {
    case PenaltyChoice::Mode::Explicit:
      return choice.value;
    case PenaltyChoice::Mode::Theory:
      return theory_value;
    case PenaltyChoice::Mode::CrossValidation:
      if (W.rows() < cfg.cv_folds) return theory_value;
      return cv_lambda(W, y, cfg.cv_folds, default_cv_grid(cfg, W, y), cv_lasso(cfg));
  }
  return theory_value;
}

void check_tasks(const TaskDataset& target, const std::vector<TaskDataset>& sources) {
  if (target.horizon() == 0 || target.rows() == 0) {
    throw Error(ErrorCode::EmptyTarget, "target dataset has no trajectories");
  }
  target.validate();
  for (const auto& src : sources) {
    src.validate();
    if (src.horizon() != target.horizon()) {
      throw Error(ErrorCode::DimensionMismatch, "source horizon differs from target");
    }
    if (src.dim() != target.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "source covariate dimension differs from target");
    }
  }
}

const StageData* next_stage_of(const TaskDataset& task, std::size_t t) {
  // t is 1-based; stage t+1 lives at index t
  return t < task.horizon() ? &task.stages[t] : nullptr;
}

}  // namespace

TransLassoResult trans_lasso_step(const std::vector<DesignResponse>& sources,
                                  const DesignResponse& target, double lambda_src, double lambda_0,
                                  const LassoConfig& lasso, OffsetMode offset, PoolMode pool) {
  if (sources.empty()) throw Error(ErrorCode::InsufficientData, "trans-lasso step needs at least one source");
  if (target.W.cols() != sources.front().W.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "target and source designs disagree on columns");
  }
  if (target.y.size() != target.W.rows()) throw Error(ErrorCode::DimensionMismatch, "target response length != rows");
  const DesignResponse pooled = pool_tasks(sources, target, pool);

  TransLassoResult res;
  const LassoSolution b = lasso_fit(pooled.W, pooled.y, with_lambda(lasso, lambda_src));
  res.b_hat = b.coefficients;
  res.b_converged = b.converged;
  res.b_check = hard_threshold(res.b_hat, lambda_src);

  const Vector& base = offset == OffsetMode::Unthresholded ? res.b_hat : res.b_check;
  const LassoSolution d = lasso_fit_offset(target.W, target.y, base, with_lambda(lasso, lambda_0));
  res.delta_hat = d.coefficients;
  res.delta_converged = d.converged;
  res.delta_check = hard_threshold(res.delta_hat, lambda_0);
  res.theta = res.b_check + res.delta_check;
  return res;
}

std::pair<PolicySet, FitDiagnostics> transferred_q_learning(const TaskDataset& target,
                                                            const std::vector<TaskDataset>& sources,
                                                            const TransferConfig& cfg,
                                                            PseudoOutcomeLog* log) {
  cfg.validate();
  check_tasks(target, sources);

  const std::size_t T = target.horizon();
  const Eigen::Index p = target.dim();
  PolicySet policy = PolicySet::zeros(T, p, cfg.gamma);
  FitDiagnostics diag;
  diag.stages.resize(T);

  double n_src = 0.0;
  for (const auto& src : sources) n_src += static_cast<double>(src.rows());
  if (!sources.empty() && cfg.pool == PoolMode::TargetAndSources) n_src += static_cast<double>(target.rows());
  const PenaltyContext ctx{2.0 * static_cast<double>(p), static_cast<double>(target.rows()), n_src};
  const TheoryLambdas theory = theory_for(cfg, ctx);

  StageParams theta_next = StageParams::zeros(p);
  for (std::size_t t = T; t >= 1; --t) {
    const StageData& tgt = target.stages[t - 1];
    DesignResponse tgt_dr{build_design(tgt),
                          pseudo_outcomes(next_stage_of(target, t), tgt.r, theta_next, cfg.gamma)};
    if (log) log->push_back({t, target.task_id, theta_next, tgt_dr.y});

    // Re-targeting: every source is re-labelled with the target's theta_{t+1}.
    std::vector<DesignResponse> src_dr;
    src_dr.reserve(sources.size());
    for (const auto& src : sources) {
      const StageData& sd = src.stages[t - 1];
      src_dr.push_back({build_design(sd), pseudo_outcomes(next_stage_of(src, t), sd.r, theta_next, cfg.gamma)});
      if (log) log->push_back({t, src.task_id, theta_next, src_dr.back().y});
    }

    StageDiagnostics& sd = diag.stages[t - 1];
    sd.stage = t;
    Vector b_hat = Vector::Zero(2 * p);
    Vector b_check = b_hat;
    if (!src_dr.empty()) {
      const DesignResponse pooled = pool_tasks(src_dr, tgt_dr, cfg.pool);
      sd.lambda_src = resolve_penalty(cfg.lambda_src, cfg, pooled.W, pooled.y, theory.lambda_src);
      const LassoSolution b = lasso_fit(pooled.W, pooled.y, with_lambda(cfg.lasso, sd.lambda_src));
      b_hat = b.coefficients;
      b_check = hard_threshold(b_hat, sd.lambda_src);
      sd.b_converged = b.converged;
    }

    const Vector& base = cfg.offset == OffsetMode::Unthresholded ? b_hat : b_check;
    const Vector residual = tgt_dr.y - tgt_dr.W * base;
    sd.lambda_0 = resolve_penalty(cfg.lambda_0, cfg, tgt_dr.W, residual, theory.lambda_0);
    const LassoSolution d = lasso_fit(tgt_dr.W, residual, with_lambda(cfg.lasso, sd.lambda_0));
    const Vector delta_check = hard_threshold(d.coefficients, sd.lambda_0);
    sd.delta_converged = d.converged;
    sd.nnz_b = nnz(b_check);
    sd.nnz_delta = nnz(delta_check);

    policy.stages[t - 1] = StageParams::from_stacked(b_check + delta_check);
    theta_next = policy.stages[t - 1];
  }
  return {std::move(policy), std::move(diag)};
}

std::pair<PolicySet, FitDiagnostics> single_task_q_learning(const TaskDataset& target,
                                                            const TransferConfig& cfg) {
  return transferred_q_learning(target, {}, cfg);
}

PolicySet single_task_q_learning(const TaskDataset& target, double gamma, double lambda_0,
                                 const LassoConfig& lasso) {
  TransferConfig cfg;
  cfg.gamma = gamma;
  cfg.lambda_0 = PenaltyChoice::explicit_value(lambda_0);
  cfg.lasso = lasso;
  return transferred_q_learning(target, {}, cfg).first;
}

TheoryLambdas theory_lambdas(double p, double n0, double n_src, double s_hint, double h_hint,
                             double c1) {
  if (!(p >= 2.0) || !(n0 >= 1.0) || !(n_src >= 1.0) || !(s_hint >= 1.0) || !(h_hint >= 0.0) ||
      !(c1 > 0.0)) {
    throw Error(ErrorCode::DomainError,
                "theory penalties need p >= 2, n0 >= 1, N_src >= 1, s >= 1, h >= 0, c1 > 0");
  }
  const double log_p = std::log(p);
  TheoryLambdas out{};
  out.lambda_src = c1 * std::sqrt(log_p / n_src) + c1 * std::sqrt(h_hint / s_hint) * std::pow(log_p / n0, 0.25);
  out.lambda_0 = c1 * std::sqrt(log_p / n0);
  return out;
}

std::vector<double> lambda_grid(double lambda_max, int points, double ratio) {
  if (points < 1) throw Error(ErrorCode::DomainError, "grid needs at least one point");
  if (!(lambda_max > 0.0) || points == 1) return {lambda_max > 0.0 ? lambda_max : 0.0};
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double step = std::log(ratio) / static_cast<double>(points - 1);
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = lambda_max * std::exp(step * i);
  grid.front() = lambda_max;
  return grid;
}

double cv_lambda(const Matrix& design, const Vector& response, int folds,
                 const std::vector<double>& grid, const LassoConfig& lasso) {
  if (folds < 2) throw Error(ErrorCode::DomainError, "cv needs at least two folds");
  if (grid.empty()) throw Error(ErrorCode::DomainError, "cv grid is empty");
  if (design.rows() != response.size()) throw Error(ErrorCode::DimensionMismatch, "response length != rows");
  const Eigen::Index n = design.rows();
  if (n < folds) {
    throw Error(ErrorCode::InsufficientData,
                std::to_string(n) + " rows cannot fill " + std::to_string(folds) + " folds");
  }

  struct Fold {
    Matrix W_train, W_test;
    Vector y_train, y_test;
  };
  std::vector<Fold> parts(static_cast<std::size_t>(folds));
  for (int f = 0; f < folds; ++f) {
    const Eigen::Index lo = n * f / folds;
    const Eigen::Index hi = n * (f + 1) / folds;
    Fold& fold = parts[static_cast<std::size_t>(f)];
    fold.W_test = design.middleRows(lo, hi - lo);
    fold.y_test = response.segment(lo, hi - lo);
    fold.W_train.resize(n - (hi - lo), design.cols());
    fold.y_train.resize(n - (hi - lo));
    fold.W_train << design.topRows(lo), design.bottomRows(n - hi);
    fold.y_train << response.head(lo), response.tail(n - hi);
  }

  double best_lambda = grid.front();
  double best_err = std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    double err = 0.0;
    for (const auto& fold : parts) {
      const LassoSolution sol = lasso_fit(fold.W_train, fold.y_train, with_lambda(lasso, lambda));
      err += (fold.y_test - fold.W_test * sol.coefficients).squaredNorm();
    }
    err /= static_cast<double>(n);
    if (err < best_err || (err == best_err && lambda > best_lambda)) {
      best_err = err;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

}  // namespace transq
