#include <cmath>
#include <limits>

#include "stats.hpp"
#include "transq/error.hpp"
#include "transq/tools/experiments.hpp"
#include "transq/tools/io.hpp"
#include "transq/tools/runner.hpp"

namespace transq::tools {

namespace {

struct Evaluation {
  double err[2] = {0.0, 0.0};
  double pred[2] = {0.0, 0.0};
  double acc_traj = 0.0;
  double acc_stage[2] = {0.0, 0.0};
  double value = 0.0;
};

Evaluation evaluate(const TwoStageMdpSpec& spec, const PolicySet& fit, const PolicySet& truth,
                    const TaskDataset& eval) {
  Evaluation ev;
  for (std::size_t t = 0; t < 2; ++t) {
    ev.err[t] = (fit.stages[t].stacked() - truth.stages[t].stacked()).squaredNorm();
  }
  const Eigen::Index n = eval.rows();
  Eigen::Index both = 0;
  Eigen::Index correct[2] = {0, 0};
  Eigen::Index pred_count[2] = {0, 0};
  double pred_sum[2] = {0.0, 0.0};
  double value_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    bool all = true;
    for (std::size_t t = 0; t < 2; ++t) {
      const Vector x = eval.stages[t].X.row(i).transpose();
      const bool ok = greedy_action(x, fit.stages[t]) == greedy_action(x, truth.stages[t]);
      correct[t] += ok;
      all = all && ok;
      const double q_star = max_q(x, truth.stages[t]);
      if (std::abs(q_star) > 1e-12) {
        pred_sum[t] += std::abs(max_q(x, fit.stages[t]) - q_star) / std::abs(q_star);
        ++pred_count[t];
      }
    }
    both += all;
    value_sum += expected_return(spec, fit, eval.stages[0].X.row(i).transpose(), eval.stages[1].X.row(i).transpose());
  }
  const double dn = static_cast<double>(n);
  for (std::size_t t = 0; t < 2; ++t) {
    ev.acc_stage[t] = static_cast<double>(correct[t]) / dn;
    ev.pred[t] = pred_count[t] ? pred_sum[t] / static_cast<double>(pred_count[t])
                               : std::numeric_limits<double>::quiet_NaN();
  }
  ev.acc_traj = static_cast<double>(both) / dn;
  ev.value = value_sum / dn;
  return ev;
}

double oracle_value(const TwoStageMdpSpec& spec, const PolicySet& truth, const TaskDataset& eval) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eval.rows(); ++i) {
    sum += expected_return(spec, truth, eval.stages[0].X.row(i).transpose(), eval.stages[1].X.row(i).transpose());
  }
  return sum / static_cast<double>(eval.rows());
}

OfflineRow make_row(int rep, const char* method, std::uint64_t seed, const Evaluation& ev, double v_oracle,
                    const FitDiagnostics& diag) {
  OfflineRow row;
  row.replication = rep;
  row.method = method;
  row.seed = seed;
  row.err_stage1 = ev.err[0];
  row.err_stage2 = ev.err[1];
  row.pred_error_stage1 = ev.pred[0];
  row.pred_error_stage2 = ev.pred[1];
  row.accuracy = ev.acc_traj;
  row.accuracy_stage1 = ev.acc_stage[0];
  row.accuracy_stage2 = ev.acc_stage[1];
  row.accuracy_decision = 0.5 * (ev.acc_stage[0] + ev.acc_stage[1]);
  row.value = ev.value;
  row.value_oracle = v_oracle;
  row.lambda_src_stage1 = diag.stages[0].lambda_src;
  row.lambda_0_stage1 = diag.stages[0].lambda_0;
  row.lambda_src_stage2 = diag.stages[1].lambda_src;
  row.lambda_0_stage2 = diag.stages[1].lambda_0;
  return row;
}

}  // namespace

const std::vector<std::string>& offline_metric_names() {
  static const std::vector<std::string> names{
      "err_stage1",      "err_stage2",      "pred_error_stage1", "pred_error_stage2",
      "accuracy",        "accuracy_stage1", "accuracy_stage2",   "accuracy_decision",
      "value",           "value_oracle",    "value_ratio"};
  return names;
}

double offline_metric(const OfflineRow& row, const std::string& name) {
  if (name == "err_stage1") return row.err_stage1;
  if (name == "err_stage2") return row.err_stage2;
  if (name == "pred_error_stage1") return row.pred_error_stage1;
  if (name == "pred_error_stage2") return row.pred_error_stage2;
  if (name == "accuracy") return row.accuracy;
  if (name == "accuracy_stage1") return row.accuracy_stage1;
  if (name == "accuracy_stage2") return row.accuracy_stage2;
  if (name == "accuracy_decision") return row.accuracy_decision;
  if (name == "value") return row.value;
  if (name == "value_oracle") return row.value_oracle;
  if (name == "value_ratio") return row.value_ratio;
  throw Error(ErrorCode::InvalidConfig, "unknown offline metric '" + name + "'");
}

OfflineResult run_offline(const ExperimentConfig& cfg, int workers) {
  const TrueParams truth = dp_true_params(cfg.target);
  const auto reps = static_cast<std::size_t>(cfg.replications);
  std::vector<OfflineRow> slots(2 * reps);

  parallel_for(reps, workers, [&](std::size_t r) {
    const std::uint64_t seed = derive_seed(cfg.seed, r, Stream::Target);
    const TaskDataset target = sample_trajectories(cfg.target, cfg.n0, seed, 0);
    std::vector<TaskDataset> sources;
    for (std::size_t k = 0; k < cfg.sources.size(); ++k) {
      const auto& src = cfg.sources[k];
      sources.push_back(sample_trajectories(src.spec, src.n, derive_seed(cfg.seed, r, Stream::Source, k),
                                            static_cast<int>(k + 1)));
    }
    const TaskDataset eval = sample_trajectories(cfg.target, cfg.eval_size, derive_seed(cfg.seed, r, Stream::Eval));

    const auto [tl, tl_diag] = transferred_q_learning(target, sources, cfg.transfer);
    const auto [st, st_diag] = single_task_q_learning(target, cfg.transfer);

    const double v_oracle = oracle_value(cfg.target, truth.embedded, eval);
    const Evaluation ev_tl = evaluate(cfg.target, tl, truth.embedded, eval);
    const Evaluation ev_st = evaluate(cfg.target, st, truth.embedded, eval);
    const int rep = static_cast<int>(r);
    OfflineRow row_tl = make_row(rep, "tl", seed, ev_tl, v_oracle, tl_diag);
    OfflineRow row_st = make_row(rep, "st", seed, ev_st, v_oracle, st_diag);
    row_tl.value_ratio = row_st.value_ratio = ev_tl.value / ev_st.value;
    slots[2 * r] = std::move(row_tl);
    slots[2 * r + 1] = std::move(row_st);
  });

  OfflineResult res;
  res.rows = std::move(slots);

  std::vector<std::string> header{"replication", "method", "seed"};
  for (const auto& m : offline_metric_names()) header.push_back(m);
  for (const char* c : {"lambda_src_stage1", "lambda_0_stage1", "lambda_src_stage2", "lambda_0_stage2"}) {
    header.emplace_back(c);
  }
  CsvWriter metrics(header);
  for (const auto& row : res.rows) {
    std::vector<std::string> cells{std::to_string(row.replication), row.method, std::to_string(row.seed)};
    for (const auto& m : offline_metric_names()) cells.push_back(format_real(offline_metric(row, m)));
    for (double v : {row.lambda_src_stage1, row.lambda_0_stage1, row.lambda_src_stage2, row.lambda_0_stage2}) {
      cells.push_back(format_real(v));
    }
    metrics.row(cells);
  }
  res.metrics_csv = metrics.str();

  CsvWriter summary({"metric", "method", "mean", "sd", "count"});
  for (const auto& m : offline_metric_names()) {
    for (const char* method : {"tl", "st"}) {
      std::vector<double> values;
      for (const auto& row : res.rows) {
        const double v = offline_metric(row, m);
        if (row.method == method && !std::isnan(v)) values.push_back(v);
      }
      const MeanSd s = mean_sd(values);
      summary.row({m, method, format_real(s.mean), format_real(s.sd), std::to_string(s.count)});
    }
  }
  // Paired comparisons: fraction of replications where transfer is strictly better.
  std::vector<double> acc_wins, err1_wins, err2_wins;
  for (std::size_t r = 0; r < reps; ++r) {
    const OfflineRow& a = res.rows[2 * r];
    const OfflineRow& b = res.rows[2 * r + 1];
    acc_wins.push_back(a.accuracy > b.accuracy ? 1.0 : 0.0);
    err1_wins.push_back(a.err_stage1 < b.err_stage1 ? 1.0 : 0.0);
    err2_wins.push_back(a.err_stage2 < b.err_stage2 ? 1.0 : 0.0);
  }
  for (const auto& [name, v] : {std::pair{"accuracy_win", &acc_wins}, std::pair{"err_stage1_win", &err1_wins},
                                std::pair{"err_stage2_win", &err2_wins}}) {
    const MeanSd s = mean_sd(*v);
    summary.row({name, "tl_vs_st", format_real(s.mean), format_real(s.sd), std::to_string(s.count)});
  }
  res.summary_csv = summary.str();
  return res;
}

void cmd_offline(const ExperimentConfig& cfg, const std::string& out_dir, int workers) {
  const OfflineResult res = run_offline(cfg, workers);
  ensure_directory(out_dir);
  write_text_file(out_dir + "/metrics.csv", res.metrics_csv);
  write_text_file(out_dir + "/summary.csv", res.summary_csv);
}

}  // namespace transq::tools
