#include <cmath>

#include "transq/tools/experiments.hpp"
#include "transq/tools/io.hpp"
#include "transq/tools/runner.hpp"

namespace transq::tools {

namespace {

// Flattens two-stage trajectories into stationary transitions: stage 1 leads
// to the stage-2 covariates, stage 2 is terminal.
FqiTask two_stage_task(const TaskDataset& ds, const FeatureProvider& fp, int task_id) {
  std::vector<Vector> states, next;
  std::vector<int> actions;
  std::vector<bool> terminal;
  const Eigen::Index n = ds.rows();
  Vector rewards(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < 2; ++t) {
      const StageData& sd = ds.stages[t];
      states.push_back(sd.X.row(i).transpose());
      actions.push_back(sd.a[i] == 1 ? 0 : 1);
      rewards[static_cast<Eigen::Index>(states.size()) - 1] = sd.r[i];
      if (t == 0) {
        next.push_back(ds.stages[1].X.row(i).transpose());
        terminal.push_back(false);
      } else {
        next.push_back(Vector::Zero(sd.X.cols()));
        terminal.push_back(true);
      }
    }
  }
  return make_fqi_task(fp, states, actions, rewards, next, terminal, task_id);
}

}  // namespace

FqiResult run_fqi(const ExperimentConfig& cfg) {
  const FqiSettings& f = cfg.fqi;
  FqiBuffer buf;
  double gamma = f.gamma;
  Vector q_star;
  if (f.env == FqiEnvironment::Chain) {
    gamma = f.chain.gamma;
    for (int k = 0; k <= f.tasks; ++k) buf.tasks.push_back(chain_task(f.chain, k));
    q_star = chain_q_star(f.chain);
  } else {
    const FeatureProvider fp = interaction_features(cfg.target.p);
    const TaskDataset target = sample_trajectories(cfg.target, cfg.n0, derive_seed(cfg.seed, 0, Stream::Target));
    buf.tasks.push_back(two_stage_task(target, fp, 0));
    for (std::size_t k = 0; k < cfg.sources.size(); ++k) {
      const auto& src = cfg.sources[k];
      const TaskDataset ds = sample_trajectories(src.spec, src.n, derive_seed(cfg.seed, 0, Stream::Source, k));
      buf.tasks.push_back(two_stage_task(ds, fp, static_cast<int>(k + 1)));
    }
  }

  FqiOptions opts;
  opts.subsample = f.subsample;
  opts.seed = derive_seed(cfg.seed, 0, Stream::Fqi);
  const std::vector<FqiState> history = fqi_iterate(buf, gamma, f.lambda_w, f.lambda_delta, f.iterations, opts);

  FqiResult res;
  const double q_norm = q_star.size() ? q_star.lpNorm<Eigen::Infinity>() : 0.0;
  CsvWriter w({"iteration", "task", "sup_error", "bound", "nnz_w", "nnz_delta", "delta_l1", "beta_change"});
  for (std::size_t it = 0; it < history.size(); ++it) {
    const FqiState& st = history[it];
    const auto nnz_w = (st.w_hat.array() != 0.0).count();
    for (std::size_t k = 0; k < st.beta_hat.size(); ++k) {
      std::string sup, bound;
      if (q_star.size()) {
        const double err = (st.beta_hat[k] - q_star).lpNorm<Eigen::Infinity>();
        if (k == 0) res.sup_error.push_back(err);
        sup = format_real(err);
        bound = format_real(std::pow(gamma, static_cast<double>(st.iteration)) * q_norm);
      }
      const double change =
          it == 0 ? 0.0 : (st.beta_hat[k] - history[it - 1].beta_hat[k]).lpNorm<Eigen::Infinity>();
      w.row({std::to_string(st.iteration), std::to_string(k), sup, bound, std::to_string(nnz_w),
             std::to_string((st.delta_hat[k].array() != 0.0).count()), format_real(st.delta_hat[k].lpNorm<1>()),
             format_real(change)});
    }
  }
  res.history_csv = w.str();
  return res;
}

void cmd_fqi(const ExperimentConfig& cfg, const std::string& out_dir) {
  const FqiResult res = run_fqi(cfg);
  ensure_directory(out_dir);
  write_text_file(out_dir + "/fqi_history.csv", res.history_csv);
}

}  // namespace transq::tools
