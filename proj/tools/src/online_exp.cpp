#include <map>
#include <tuple>

#include "stats.hpp"
#include "transq/tools/experiments.hpp"
#include "transq/tools/io.hpp"
#include "transq/tools/runner.hpp"

namespace transq::tools {

namespace {

std::vector<TaskDataset> offline_sources(const ExperimentConfig& cfg, std::size_t rep) {
  std::vector<TaskDataset> sources;
  for (std::size_t k = 0; k < cfg.sources.size(); ++k) {
    const auto& src = cfg.sources[k];
    sources.push_back(
        sample_trajectories(src.spec, src.n, derive_seed(cfg.seed, rep, Stream::Source, k), static_cast<int>(k + 1)));
  }
  return sources;
}

}  // namespace

OnlineResult run_online(const ExperimentConfig& cfg, bool etc, bool phased, int workers) {
  const TwoStageEnvironment env(cfg.target);
  const auto reps = static_cast<std::size_t>(cfg.replications);
  const std::size_t grid = etc ? cfg.online.n_e_grid.size() : 0;
  const std::size_t per_rep = 2 * grid + (phased ? 2 : 0);
  std::vector<OnlineRun> slots(reps * per_rep);

  parallel_for(reps, workers, [&](std::size_t r) {
    const std::vector<TaskDataset> sources = offline_sources(cfg, r);
    const std::vector<TaskDataset> none;
    const int rep = static_cast<int>(r);
    std::size_t slot = r * per_rep;
    for (std::size_t g = 0; g < grid; ++g) {
      const int n_e = cfg.online.n_e_grid[g];
      const std::uint64_t seed = derive_seed(cfg.seed, r, Stream::Online, g);
      for (const char* method : {"tl", "st"}) {
        // Same generator seed for both methods: the exploration episodes match.
        Rng rng(seed);
        const bool tl = method[0] == 't';
        EtcResult res = run_etc(env, tl ? sources : none, n_e, n_e + cfg.online.exploit, cfg.transfer, rng);
        slots[slot++] = OnlineRun{"etc", method, rep, seed, n_e, std::move(res.trace)};
      }
    }
    if (phased) {
      const std::uint64_t seed = derive_seed(cfg.seed, r, Stream::Phased);
      for (const char* method : {"tl", "st"}) {
        Rng rng(seed);
        const bool tl = method[0] == 't';
        PhasedResult res =
            run_phased_etc(env, sources, cfg.online.batch_size, cfg.online.n_phases, cfg.transfer, tl, rng);
        slots[slot++] = OnlineRun{"phased", method, rep, seed, 0, std::move(res.trace)};
      }
    }
  });

  OnlineResult out;
  out.runs = std::move(slots);

  CsvWriter regret({"mode", "method", "replication", "seed", "n_e", "phase", "episode", "instantaneous", "cumulative"});
  for (const auto& run : out.runs) {
    const auto& tr = run.trace;
    std::size_t phase = 0;
    for (std::size_t e = 0; e < tr.episodes(); ++e) {
      if (run.mode == "etc") {
        phase = e < static_cast<std::size_t>(run.n_e) ? 0 : 1;
      } else {
        while (phase + 1 < tr.phase_boundaries.size() && tr.phase_boundaries[phase + 1] <= e) ++phase;
      }
      regret.row({run.mode, run.method, std::to_string(run.replication), std::to_string(run.seed),
                  std::to_string(run.n_e), std::to_string(phase), std::to_string(e),
                  format_real(tr.instantaneous[e]), format_real(tr.cumulative[e])});
    }
  }
  out.regret_csv = regret.str();

  // Keyed by (mode, n_e, phase, metric, method) so rows come out in a fixed order.
  using Key = std::tuple<std::string, int, int, std::string, std::string>;
  std::map<Key, std::vector<double>> groups;
  for (const auto& run : out.runs) {
    const auto& tr = run.trace;
    if (run.mode == "etc") {
      const double explore = tr.cumulative[static_cast<std::size_t>(run.n_e) - 1];
      groups[{run.mode, run.n_e, -1, "explore_regret", run.method}].push_back(explore);
      groups[{run.mode, run.n_e, -1, "exploit_regret", run.method}].push_back(tr.exploitation_regret());
      groups[{run.mode, run.n_e, -1, "total_regret", run.method}].push_back(tr.cumulative.back());
    } else {
      for (std::size_t k = 0; k < tr.phase_boundaries.size(); ++k) {
        const std::size_t end = k + 1 < tr.phase_boundaries.size() ? tr.phase_boundaries[k + 1] : tr.episodes();
        groups[{run.mode, 0, static_cast<int>(k), "cumulative_regret", run.method}].push_back(tr.cumulative[end - 1]);
      }
    }
  }
  CsvWriter summary({"mode", "n_e", "phase", "metric", "method", "mean", "sd", "count"});
  for (const auto& [key, values] : groups) {
    const auto& [mode, n_e, phase, metric, method] = key;
    const MeanSd s = mean_sd(values);
    summary.row({mode, std::to_string(n_e), phase < 0 ? "all" : std::to_string(phase), metric, method,
                 format_real(s.mean), format_real(s.sd), std::to_string(s.count)});
  }
  out.summary_csv = summary.str();
  return out;
}

void cmd_online(const ExperimentConfig& cfg, const std::string& out_dir, int workers) {
  bool etc = true, phased = true;
  if (cfg.kind == ExperimentKind::OnlineEtc) phased = false;
  if (cfg.kind == ExperimentKind::OnlinePhased) etc = false;
  const OnlineResult res = run_online(cfg, etc, phased, workers);
  ensure_directory(out_dir);
  write_text_file(out_dir + "/regret.csv", res.regret_csv);
  write_text_file(out_dir + "/summary.csv", res.summary_csv);
}

}  // namespace transq::tools
