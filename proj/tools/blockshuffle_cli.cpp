// Command-line front end: every experiment writes CSV to stdout or a file.
// Flags override config-file keys; BLOCKSHUFFLE_SEED supplies a default seed.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "blockshuffle/experiment.hpp"
#include "blockshuffle/parallel.hpp"

using bshuf::ExperimentConfig;

namespace {

struct CommonFlags {
  std::string config_file;
  std::string N, k, t_grid, sample_times, eps_grid, estimators, variant, output;
  double eps = -1, delta = -1, T = -1, horizon = -1, rate_scale = -1, work_cap = -1;
  int K = -1, j = -1, y = -1, replicas = -1, k_max = -1, threads = 0;
  long long master_seed = -1;
  bool literal_block_range = false, force = false, adversarial = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_file, "key=value config file");
  cmd->add_option("--N", f.N, "deck sizes, comma separated");
  cmd->add_option("--k", f.k, "block sizes, comma separated");
  cmd->add_option("--variant", f.variant,
                  "plain|with_boundaries|boundaries_capped");
  cmd->add_option("--eps", f.eps, "target total-variation level");
  cmd->add_option("--delta", f.delta, "censoring-schedule delta / k exponent");
  cmd->add_option("--K", f.K, "projection size / censored anchor count");
  cmd->add_option("--j", f.j, "max Fourier mode");
  cmd->add_option("--y", f.y, "height threshold (0 = N/2)");
  cmd->add_option("--replicas", f.replicas, "Monte Carlo replicas");
  cmd->add_option("--master-seed", f.master_seed, "master seed");
  cmd->add_option("--t-grid", f.t_grid, "times, comma separated");
  cmd->add_option("--sample-times", f.sample_times, "observer times");
  cmd->add_option("--eps-grid", f.eps_grid, "epsilon grid");
  cmd->add_option("--T", f.T, "time horizon for trajectories");
  cmd->add_option("--horizon", f.horizon, "simulation horizon");
  cmd->add_flag("--literal-block-range", f.literal_block_range,
                "use the bulk range 1..N-k (position N never updated)");
  cmd->add_option("--rate-scale", f.rate_scale, "multiply all rates");
  cmd->add_option("--estimators", f.estimators, "mixing-mc estimator list");
  cmd->add_flag("--adversarial-start", f.adversarial,
                "couple from the reversal instead of a uniform state");
  cmd->add_option("--k-max", f.k_max, "verify grid extent");
  cmd->add_option("--work-cap", f.work_cap, "refusal threshold in events");
  cmd->add_flag("--force", f.force, "override the work cap");
  cmd->add_option("--threads", f.threads, "OpenMP thread count (0 = default)");
  cmd->add_option("-o,--output", f.output, "output path (default stdout)");
}

ExperimentConfig build_config(const std::string& experiment,
                              const CommonFlags& f) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  if (const char* env = std::getenv("BLOCKSHUFFLE_SEED")) {
    cfg.master_seed = std::strtoull(env, nullptr, 10);
    cfg.seed_source = "env";
  }
  if (!f.config_file.empty()) bshuf::apply_config_file(cfg, f.config_file);
  const auto set = [&](const char* key, const std::string& v) {
    if (!v.empty()) bshuf::apply_config_pair(cfg, key, v);
  };
  set("N", f.N);
  set("k", f.k);
  set("variant", f.variant);
  set("t_grid", f.t_grid);
  set("sample_times", f.sample_times);
  set("eps_grid", f.eps_grid);
  set("estimators", f.estimators);
  if (f.eps >= 0) cfg.eps = f.eps;
  if (f.delta >= 0) cfg.delta = f.delta;
  if (f.K >= 0) cfg.K = f.K;
  if (f.j >= 0) cfg.j = f.j;
  if (f.y >= 0) cfg.y = f.y;
  if (f.replicas >= 0) cfg.replicas = f.replicas;
  if (f.master_seed >= 0) {
    cfg.master_seed = static_cast<std::uint64_t>(f.master_seed);
    cfg.seed_source = "flag";
  }
  if (f.T >= 0) cfg.T = f.T;
  if (f.horizon >= 0) cfg.horizon = f.horizon;
  if (f.rate_scale > 0) cfg.rate_scale = f.rate_scale;
  if (f.k_max >= 0) cfg.k_max = f.k_max;
  if (f.work_cap >= 0) cfg.work_cap = f.work_cap;
  if (f.literal_block_range) cfg.literal_block_range = true;
  if (f.force) cfg.force = true;
  if (f.adversarial) cfg.adversarial_start = true;
  if (!f.output.empty()) cfg.output = f.output;
  if (f.threads > 0) bshuf::set_threads(f.threads);
  return cfg;
}

int dispatch(const ExperimentConfig& cfg,
             bool (*runner)(const ExperimentConfig&, std::ostream&)) {
  if (cfg.output.empty()) return runner(cfg, std::cout) ? 0 : 1;
  std::ofstream out(cfg.output, std::ios::binary);
  if (!out) {
    std::cerr << "cannot open output file: " << cfg.output << "\n";
    return 2;
  }
  return runner(cfg, out) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"block-shuffle Markov chain toolkit"};
  app.require_subcommand(1);

  CommonFlags flags[8];
  const char* names[] = {"verify",       "spectrum",   "mixing-exact",
                         "mixing-mc",    "cutoff-sweep", "no-precutoff",
                         "decay",        "plotdata"};
  bool (*runners[])(const ExperimentConfig&, std::ostream&) = {
      bshuf::run_verify,      bshuf::run_spectrum,  bshuf::run_mixing_exact,
      bshuf::run_mixing_mc,   bshuf::run_cutoff_sweep,
      bshuf::run_no_precutoff, bshuf::run_decay,     nullptr};
  CLI::App* cmds[8];
  std::string plot_kind, plot_input;
  for (int i = 0; i < 8; ++i) {
    cmds[i] = app.add_subcommand(names[i]);
    if (std::string(names[i]) == "plotdata") {
      cmds[i]->add_option("--kind", plot_kind,
                          "tv-curve|decay-curve|constant-vs-N")
          ->required();
      cmds[i]->add_option("--in", plot_input, "result CSV to reshape")
          ->required();
      cmds[i]->add_option("-o,--output", flags[i].output, "output path");
    } else {
      add_common(cmds[i], flags[i]);
    }
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (int i = 0; i < 8; ++i) {
      if (!cmds[i]->parsed()) continue;
      if (std::string(names[i]) == "plotdata") {
        if (flags[i].output.empty())
          return bshuf::emit_plotdata(plot_kind, plot_input, std::cout) ? 0 : 1;
        std::ofstream out(flags[i].output, std::ios::binary);
        return bshuf::emit_plotdata(plot_kind, plot_input, out) ? 0 : 1;
      }
      return dispatch(build_config(names[i], flags[i]), runners[i]);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
