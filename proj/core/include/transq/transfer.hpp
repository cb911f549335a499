#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "transq/lasso.hpp"
#include "transq/qmodel.hpp"

namespace transq {

// How a single penalty is chosen at each stage.
struct PenaltyChoice {
  enum class Mode { Explicit, Theory, CrossValidation };

  Mode mode = Mode::CrossValidation;
  double value = 0.0;  // used when mode == Explicit

  static PenaltyChoice explicit_value(double v) { return {Mode::Explicit, v}; }
  static PenaltyChoice theory() { return {Mode::Theory, 0.0}; }
  static PenaltyChoice cross_validation() { return {Mode::CrossValidation, 0.0}; }
};

// Which b-estimate is used as the offset in the target correction fit.
enum class OffsetMode {
  Unthresholded,  // b_hat, as written in the algorithm box
  Thresholded,    // hard_threshold(b_hat, lambda_src)
};

// Which tasks enter the pooled (aggregate) fit.
enum class PoolMode {
  TargetAndSources,  // target rows stacked with every source
  SourcesOnly,       // sources alone
};

struct TransferConfig {
  double gamma = 1.0;
  PenaltyChoice lambda_src = PenaltyChoice::cross_validation();
  PenaltyChoice lambda_0 = PenaltyChoice::cross_validation();
  int cv_folds = 5;
  int cv_grid_size = 30;
  // Smallest grid value as a fraction of lambda_max; nullopt picks 1e-3 when
  // rows >= columns and 1e-2 otherwise.
  std::optional<double> cv_grid_ratio;
  // Coefficient-change tolerance for the fits inside cross-validation.
  double cv_tol = 1e-5;
  double c1 = 1.0;
  // Sparsity hint for the theory formula; nullopt means sqrt(design columns).
  std::optional<double> s_hint;
  double h_hint = 0.0;
  OffsetMode offset = OffsetMode::Unthresholded;
  PoolMode pool = PoolMode::TargetAndSources;
  LassoConfig lasso;  // lambda is overwritten per fit

  void validate() const;
};

struct StageDiagnostics {
  std::size_t stage = 0;  // 1-based
  double lambda_src = 0.0;
  double lambda_0 = 0.0;
  Eigen::Index nnz_b = 0;
  Eigen::Index nnz_delta = 0;
  bool b_converged = true;
  bool delta_converged = true;
};

struct FitDiagnostics {
  std::vector<StageDiagnostics> stages;  // ordered t = 1..T
};

// Observer for the backward loop; used to check which parameter each task's
// pseudo-outcome was built from.
struct PseudoOutcomeRecord {
  std::size_t stage = 0;  // 1-based
  int task_id = 0;
  StageParams theta_next;
  Vector response;
};
using PseudoOutcomeLog = std::vector<PseudoOutcomeRecord>;

/// y_i = r_i + gamma * max_a Q(x_{t+1,i}, a; theta_next). Pass nullptr for
/// next_stage at the final stage, in which case y = r.
Vector pseudo_outcomes(const StageData* next_stage, const Vector& rewards,
                       const StageParams& theta_next, double gamma);

struct DesignResponse {
  Matrix W;
  Vector y;
};

struct TransLassoResult {
  Vector theta;  // b_check + delta_check, length 2p
  Vector b_hat;
  Vector delta_hat;
  Vector b_check;
  Vector delta_check;
  bool b_converged = true;
  bool delta_converged = true;
};

/// Pooled fit on the stacked tasks (see PoolMode), offset fit on the
/// target, then hard thresholds at the respective penalties.
TransLassoResult trans_lasso_step(const std::vector<DesignResponse>& sources,
                                  const DesignResponse& target, double lambda_src, double lambda_0,
                                  const LassoConfig& lasso = {},
                                  OffsetMode offset = OffsetMode::Unthresholded,
                                  PoolMode pool = PoolMode::TargetAndSources);

std::pair<PolicySet, FitDiagnostics> transferred_q_learning(
    const TaskDataset& target, const std::vector<TaskDataset>& sources, const TransferConfig& cfg,
    PseudoOutcomeLog* log = nullptr);

PolicySet single_task_q_learning(const TaskDataset& target, double gamma, double lambda_0,
                                 const LassoConfig& lasso = {});

// Same backward loop with lambda_0 chosen per stage from cfg.lambda_0.
std::pair<PolicySet, FitDiagnostics> single_task_q_learning(const TaskDataset& target,
                                                            const TransferConfig& cfg);

struct TheoryLambdas {
  double lambda_src;
  double lambda_0;
};

TheoryLambdas theory_lambdas(double p, double n0, double n_src, double s_hint, double h_hint,
                             double c1);

// 30-point style log grid from ratio * lambda_max to lambda_max, descending.
std::vector<double> lambda_grid(double lambda_max, int points, double ratio = 1e-3);

/// K-fold cross-validation over contiguous folds; returns the grid value with
/// the smallest pooled held-out squared error, ties going to the larger value.
double cv_lambda(const Matrix& design, const Vector& response, int folds,
                 const std::vector<double>& grid, const LassoConfig& lasso = {});

}  // namespace transq
