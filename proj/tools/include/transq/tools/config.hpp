#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "transq/fqi.hpp"
#include "transq/sim.hpp"
#include "transq/transfer.hpp"

namespace transq::tools {

inline constexpr int kSchemaVersion = 1;

enum class ExperimentKind { Simulate, Offline, OnlineEtc, OnlinePhased, Online, Fqi, Oracle };

const char* to_string(ExperimentKind kind);

struct SourceSpec {
  TwoStageMdpSpec spec;
  Eigen::Index n = 0;
};

struct OnlineSettings {
  std::vector<int> n_e_grid{1, 5, 10, 20};
  int exploit = 100;  // greedy episodes after exploration
  int batch_size = 100;
  int n_phases = 10;
};

enum class FqiEnvironment { Chain, TwoStage };

struct FqiSettings {
  FqiEnvironment env = FqiEnvironment::Chain;
  ChainMdp chain;
  int tasks = 1;  // auxiliary copies of the chain
  int iterations = 30;
  double lambda_w = 0.0;
  double lambda_delta = 0.0;
  double gamma = 0.9;  // two-stage only; the chain carries its own
  std::optional<Eigen::Index> subsample;
};

struct ExperimentConfig {
  std::optional<ExperimentKind> kind;
  std::uint64_t seed = 20240101;
  int replications = 1;
  Eigen::Index n0 = 30;
  Eigen::Index eval_size = 200;
  TwoStageMdpSpec target;
  std::vector<SourceSpec> sources;
  TransferConfig transfer;
  OnlineSettings online;
  FqiSettings fqi;
  std::string source_name = "<memory>";  // for messages and manifests
};

/// Parses and validates a JSON config. Errors carry "<name>:<line>:" and name
/// the offending key path.
ExperimentConfig parse_config(const std::string& text, const std::string& name = "<memory>");
ExperimentConfig load_config(const std::string& path);

}  // namespace transq::tools
