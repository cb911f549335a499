#include <json.hpp>

#include "transq/tools/experiments.hpp"
#include "transq/tools/io.hpp"
#include "transq/tools/runner.hpp"

namespace transq::tools {

std::vector<SimulatedFile> run_simulate(const ExperimentConfig& cfg, const std::string& created_from) {
  std::vector<SimulatedFile> files;
  for (int r = 0; r < cfg.replications; ++r) {
    const std::string dir = cfg.replications > 1 ? "rep_" + std::to_string(r) + "/" : "";
    auto emit = [&](const std::string& name, const TwoStageMdpSpec& spec, Eigen::Index n, std::uint64_t seed,
                    int task_id) {
      const TaskDataset ds = sample_trajectories(spec, n, seed, task_id);
      files.push_back({dir + name + ".csv", dataset_to_csv(ds)});
      files.push_back({dir + name + ".manifest.json", manifest_json(spec, seed, n, created_from)});
    };
    const auto rep = static_cast<std::uint64_t>(r);
    emit("target", cfg.target, cfg.n0, derive_seed(cfg.seed, rep, Stream::Target), 0);
    for (std::size_t k = 0; k < cfg.sources.size(); ++k) {
      emit("source_" + std::to_string(k + 1), cfg.sources[k].spec, cfg.sources[k].n,
           derive_seed(cfg.seed, rep, Stream::Source, k), static_cast<int>(k + 1));
    }
  }
  return files;
}

void cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir) {
  const std::string from = "simulate:" + cfg.source_name.substr(cfg.source_name.find_last_of('/') + 1);
  for (const auto& file : run_simulate(cfg, from)) {
    const std::string path = out_dir + "/" + file.name;
    ensure_directory(path.substr(0, path.find_last_of('/')));
    write_text_file(path, file.contents);
  }
}

namespace {

nlohmann::ordered_json truth_object(const TwoStageMdpSpec& spec) {
  const TrueParams tp = dp_true_params(spec);
  nlohmann::ordered_json j;
  j["spec"] = nlohmann::ordered_json::parse(spec_to_json(spec));
  j["theta1"] = tp.theta1;
  j["theta2"] = tp.theta2;
  return j;
}

}  // namespace

std::string oracle_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["target"] = truth_object(cfg.target);
  j["sources"] = nlohmann::ordered_json::array();
  for (const auto& src : cfg.sources) j["sources"].push_back(truth_object(src.spec));
  return j.dump(2) + "\n";
}

std::string cmd_oracle(const ExperimentConfig& cfg, const std::string& out_dir) {
  std::string text = oracle_json(cfg);
  if (!out_dir.empty()) {
    ensure_directory(out_dir);
    write_text_file(out_dir + "/oracle.json", text);
  }
  return text;
}

}  // namespace transq::tools
