#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "blockshuffle/rates.hpp"

namespace bshuf {

struct ExperimentConfig {
  std::string experiment;  // verify|spectrum|mixing-exact|mixing-mc|cutoff-sweep|no-precutoff|decay
  std::vector<int> N_list;
  std::vector<int> k_list;
  std::string variant = "with_boundaries";
  double eps = 0.5;
  double delta = 0.5;
  int K = 2;
  int j = 1;
  int y = 0;  // 0 means floor(N/2)
  int replicas = 200;
  std::uint64_t master_seed = 1;
  std::string seed_source = "default";  // default|flag|env
  std::vector<double> t_grid;
  std::vector<double> sample_times;
  std::vector<double> eps_grid;
  double T = 0.0;
  double horizon = 0.0;  // 0 means per-experiment default
  bool literal_block_range = false;
  double rate_scale = 1.0;
  std::string estimators = "tv_lower,tv_upper";
  bool adversarial_start = false;
  int k_max = 64;  // verify grid extent; < 3 gives a vacuous pass
  double work_cap = 5e10;
  bool force = false;
  std::string output;  // empty = stdout
};

// Key=value config file; '#' starts a comment. Returns keys it understood.
void apply_config_file(ExperimentConfig& cfg, const std::string& path);
void apply_config_pair(ExperimentConfig& cfg, const std::string& key,
                       const std::string& value);

std::string canonical_config_string(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

// Deterministic numeric formatting for CSV output ('.' decimal, %.12g).
std::string fmt(double v);

// Estimated event count for the configured run; the runners refuse work
// above cfg.work_cap unless cfg.force.
double estimate_events(const ExperimentConfig& cfg);

ShuffleSpec spec_for(const ExperimentConfig& cfg, int N, int k);

// Runners write CSV (header comments carry config hash and seed) and return
// false when a check failed or the run was refused.
bool run_verify(const ExperimentConfig& cfg, std::ostream& out);
bool run_spectrum(const ExperimentConfig& cfg, std::ostream& out);
bool run_mixing_exact(const ExperimentConfig& cfg, std::ostream& out);
bool run_mixing_mc(const ExperimentConfig& cfg, std::ostream& out);
bool run_cutoff_sweep(const ExperimentConfig& cfg, std::ostream& out);
bool run_no_precutoff(const ExperimentConfig& cfg, std::ostream& out);
bool run_decay(const ExperimentConfig& cfg, std::ostream& out);

// Reshapes result CSVs into tidy plot data with a self-describing header.
bool emit_plotdata(const std::string& kind, const std::string& input_path,
                   std::ostream& out);

struct SweepPoint {
  int N = 0;
  int k = 0;
  double t_lower = 0.0;    // statistic-TV crossing of eps
  double t_upper = 0.0;    // coupling-TV crossing of eps (inf if not reached)
  double c_lower = 0.0;    // normalized constants t * k(k^2-1) / (N^2 log N)
  double c_upper = 0.0;
};

// Core of the cutoff sweep, reused by the acceptance suite.
SweepPoint sweep_point(const ExperimentConfig& cfg, int N, int k);

double cutoff_constant_reference();  // 6/pi^2

}  // namespace bshuf
