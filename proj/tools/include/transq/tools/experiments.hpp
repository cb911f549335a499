#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "transq/online.hpp"
#include "transq/tools/config.hpp"

namespace transq::tools {

struct OfflineRow {
  int replication = 0;
  std::string method;  // "tl" or "st"
  std::uint64_t seed = 0;  // target-data seed of the replication
  double err_stage1 = 0.0;  // ||theta_hat_t - theta_t||_2^2
  double err_stage2 = 0.0;
  double pred_error_stage1 = 0.0;  // mean |Qhat* - Q*| / |Q*| on the evaluation set
  double pred_error_stage2 = 0.0;
  double accuracy = 0.0;  // both stages' greedy actions optimal
  double accuracy_stage1 = 0.0;
  double accuracy_stage2 = 0.0;
  double accuracy_decision = 0.0;  // pooled over the two stages
  double value = 0.0;  // expected return of the greedy policy
  double value_oracle = 0.0;
  double value_ratio = 0.0;  // V(tl) / V(st), same on both rows
  double lambda_src_stage1 = 0.0;
  double lambda_0_stage1 = 0.0;
  double lambda_src_stage2 = 0.0;
  double lambda_0_stage2 = 0.0;
};

struct OfflineResult {
  std::vector<OfflineRow> rows;  // ordered by (replication, method), tl first
  std::string metrics_csv;
  std::string summary_csv;
};

OfflineResult run_offline(const ExperimentConfig& cfg, int workers);

// Metric columns summarised in summary.csv, in output order.
const std::vector<std::string>& offline_metric_names();
double offline_metric(const OfflineRow& row, const std::string& name);

struct OnlineRun {
  std::string mode;    // "etc" or "phased"
  std::string method;  // "tl" or "st"
  int replication = 0;
  std::uint64_t seed = 0;
  int n_e = 0;  // 0 for phased runs
  RegretTrace trace;
};

struct OnlineResult {
  std::vector<OnlineRun> runs;
  std::string regret_csv;
  std::string summary_csv;
};

OnlineResult run_online(const ExperimentConfig& cfg, bool etc, bool phased, int workers);

struct FqiResult {
  std::string history_csv;
  std::vector<double> sup_error;  // target task per iteration; empty without an oracle
};

FqiResult run_fqi(const ExperimentConfig& cfg);

struct SimulatedFile {
  std::string name;  // relative path inside the output directory
  std::string contents;
};

std::vector<SimulatedFile> run_simulate(const ExperimentConfig& cfg, const std::string& created_from);

std::string oracle_json(const ExperimentConfig& cfg);

// Command entry points: write their outputs under out_dir.
void cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir);
void cmd_offline(const ExperimentConfig& cfg, const std::string& out_dir, int workers);
void cmd_online(const ExperimentConfig& cfg, const std::string& out_dir, int workers);
void cmd_fqi(const ExperimentConfig& cfg, const std::string& out_dir);
std::string cmd_oracle(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace transq::tools
