#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "transq/error.hpp"
#include "transq/tools/config.hpp"
#include "transq/tools/experiments.hpp"
#include "transq/tools/runner.hpp"

namespace {

using transq::tools::ExperimentKind;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

void check_kind(const transq::tools::ExperimentConfig& cfg, const std::string& command) {
  if (!cfg.kind) return;
  const std::string kind = transq::tools::to_string(*cfg.kind);
  const bool online = command == "online" && (kind == "online_etc" || kind == "online_phased");
  if (kind != command && !online) {
    throw transq::Error(transq::ErrorCode::InvalidConfig,
                        cfg.source_name + ": experiment '" + kind + "' cannot run under '" + command + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transferred Q-learning experiments"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opt.config, "JSON experiment config");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    else c->check(CLI::ExistingFile);
    auto* o = sub->add_option("--out", opt.out, "output directory");
    if (needs_config) o->required();
    sub->add_option("--seed", opt.seed, "base seed (overrides the config)");
    sub->add_option("--workers", opt.workers, "worker threads (default: TRANSQ_WORKERS, then all cores)")
        ->check(CLI::PositiveNumber);
  };
  auto* simulate = app.add_subcommand("simulate", "sample target and source datasets");
  auto* offline = app.add_subcommand("offline", "offline transfer vs single-task replications");
  auto* online = app.add_subcommand("online", "explore-then-commit regret experiments");
  auto* fqi = app.add_subcommand("fqi", "transferred fitted Q iteration");
  auto* oracle = app.add_subcommand("oracle", "print the true Q coefficients");
  for (auto* sub : {simulate, offline, online, fqi}) add_common(sub, true);
  add_common(oracle, false);

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string command = app.get_subcommands().front()->get_name();
    transq::tools::ExperimentConfig cfg;
    if (!opt.config.empty()) {
      cfg = transq::tools::load_config(opt.config);
      check_kind(cfg, command);
    }
    if (opt.seed) cfg.seed = *opt.seed;
    const int workers = transq::tools::resolve_workers(opt.workers);

    if (command == "simulate") {
      transq::tools::cmd_simulate(cfg, opt.out);
    } else if (command == "offline") {
      transq::tools::cmd_offline(cfg, opt.out, workers);
    } else if (command == "online") {
      transq::tools::cmd_online(cfg, opt.out, workers);
    } else if (command == "fqi") {
      transq::tools::cmd_fqi(cfg, opt.out);
    } else {
      std::cout << transq::tools::cmd_oracle(cfg, opt.out);
    }
  } catch (const transq::Error& e) {
    std::cerr << "transq: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "transq: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
