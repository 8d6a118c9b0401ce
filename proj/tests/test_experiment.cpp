#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "blockshuffle/experiment.hpp"
#include "blockshuffle/parallel.hpp"

using namespace bshuf;

namespace {

std::string run_to_string(bool (*runner)(const ExperimentConfig&, std::ostream&),
                          const ExperimentConfig& cfg, bool* ok = nullptr) {
  std::ostringstream out;
  const bool r = runner(cfg, out);
  if (ok != nullptr) *ok = r;
  return out.str();
}

}  // namespace

TEST_CASE("config parsing, canonical string, hash") {
  ExperimentConfig cfg;
  apply_config_pair(cfg, "experiment", "mixing-mc");
  apply_config_pair(cfg, "N", "6,7");
  apply_config_pair(cfg, "k", "2");
  apply_config_pair(cfg, "t_grid", "0.5,1.5");
  apply_config_pair(cfg, "replicas", "32");
  apply_config_pair(cfg, "master_seed", "42");
  CHECK(cfg.N_list == std::vector<int>{6, 7});
  CHECK(cfg.seed_source == "flag");
  CHECK_THROWS(apply_config_pair(cfg, "bogus", "1"));

  const std::uint64_t h1 = config_hash(cfg);
  apply_config_pair(cfg, "replicas", "33");
  CHECK(config_hash(cfg) != h1);
  apply_config_pair(cfg, "replicas", "32");
  CHECK(config_hash(cfg) == h1);

  // Config file with comments; later flags override.
  const char* path = "test_experiment_config.tmp";
  {
    std::ofstream f(path);
    f << "# comment\nexperiment = spectrum\nN=4,5\nk = 2 # trailing\n";
  }
  ExperimentConfig c2;
  apply_config_file(c2, path);
  CHECK(c2.experiment == "spectrum");
  CHECK(c2.N_list == std::vector<int>{4, 5});
  apply_config_pair(c2, "N", "9");
  CHECK(c2.N_list == std::vector<int>{9});
  std::remove(path);
}

TEST_CASE("verify runner passes on the default grid") {
  ExperimentConfig cfg;
  cfg.experiment = "verify";
  cfg.k_max = 24;  // keep the unit-test run quick; acceptance uses 64
  bool ok = false;
  const std::string text = run_to_string(run_verify, cfg, &ok);
  CHECK(ok);
  CHECK(text.find("FAIL") == std::string::npos);
  CHECK(text.find("boundary-rate-values") != std::string::npos);
  CHECK(text.find("k2-gap") != std::string::npos);
}

TEST_CASE("verify runner flags the literal block range") {
  ExperimentConfig cfg;
  cfg.experiment = "verify";
  cfg.k_max = 3;
  cfg.literal_block_range = true;
  bool ok = false;
  const std::string text = run_to_string(run_verify, cfg, &ok);
  CHECK_FALSE(ok);
  CHECK(text.find("FAIL,k2-gap") != std::string::npos);
}

TEST_CASE("verify runner: empty grid is a vacuous pass") {
  ExperimentConfig cfg;
  cfg.experiment = "verify";
  cfg.k_max = 0;
  bool ok = false;
  const std::string text = run_to_string(run_verify, cfg, &ok);
  CHECK(ok);
  CHECK(text.find("warning") != std::string::npos);
}

TEST_CASE("spectrum runner emits the pinned columns") {
  ExperimentConfig cfg;
  cfg.experiment = "spectrum";
  cfg.N_list = {6};
  cfg.k_list = {2, 3};
  cfg.j = 2;
  const std::string text = run_to_string(run_spectrum, cfg);
  CHECK(text.find("N,k,variant,j,lambda_approx,lambda_leading,gap_exact,"
                  "residual_max") != std::string::npos);
  CHECK(text.find("6,2,with_boundaries,1,") != std::string::npos);
  CHECK(text.find("6,3,with_boundaries,2,") != std::string::npos);
}

TEST_CASE("mixing-exact runner emits full and projection rows") {
  ExperimentConfig cfg;
  cfg.experiment = "mixing-exact";
  cfg.N_list = {5};
  cfg.k_list = {2};
  cfg.K = 2;
  cfg.eps = 0.5;
  const std::string text = run_to_string(run_mixing_exact, cfg);
  CHECK(text.find("N,k,variant,eps,t_mix,method") != std::string::npos);
  CHECK(text.find(",full") != std::string::npos);
  CHECK(text.find(",projection") != std::string::npos);
}

TEST_CASE("mixing-mc runner: pinned columns and reproducibility") {
  ExperimentConfig cfg;
  cfg.experiment = "mixing-mc";
  cfg.N_list = {8};
  cfg.k_list = {2};
  cfg.t_grid = {1.0, 4.0};
  cfg.replicas = 60;
  cfg.estimators = "tv_lower,tv_upper,tv_exact";
  const std::string a = run_to_string(run_mixing_mc, cfg);
  CHECK(a.find("N,k,variant,t,estimator,point,ci_lo,ci_hi,replicas,seed") !=
        std::string::npos);
  CHECK(a.find("tv_lower") != std::string::npos);
  CHECK(a.find("tv_upper") != std::string::npos);
  CHECK(a.find("tv_exact") != std::string::npos);

  // Byte-identical across runs and across thread counts.
  const std::string b = run_to_string(run_mixing_mc, cfg);
  CHECK(a == b);
  set_threads(1);
  const std::string c = run_to_string(run_mixing_mc, cfg);
  set_threads(max_threads());
  CHECK(a == c);
}

TEST_CASE("mixing-mc runner: trajectory rows") {
  ExperimentConfig cfg;
  cfg.experiment = "mixing-mc";
  cfg.N_list = {6};
  cfg.k_list = {3};
  cfg.sample_times = {0.5, 1.0};
  cfg.T = 1.0;
  cfg.replicas = 3;
  cfg.estimators = "trajectory";
  const std::string text = run_to_string(run_mixing_mc, cfg);
  CHECK(text.find("replica,seed,t,observable,value") != std::string::npos);
  CHECK(text.find(",phi,") != std::string::npos);
  CHECK(text.find(",height_mid,") != std::string::npos);
}

TEST_CASE("work-cap refusal") {
  ExperimentConfig cfg;
  cfg.experiment = "cutoff-sweep";
  cfg.N_list = {4096};
  cfg.k_list = {2};
  cfg.replicas = 100000;
  cfg.work_cap = 1e6;
  bool ok = true;
  const std::string text = run_to_string(run_cutoff_sweep, cfg, &ok);
  CHECK_FALSE(ok);
  CHECK(text.find("refused") != std::string::npos);
}

TEST_CASE("rate rescaling halves estimated times exactly") {
  ExperimentConfig base;
  base.experiment = "cutoff-sweep";
  base.variant = "with_boundaries";
  base.N_list = {24};
  base.k_list = {2};
  base.replicas = 80;
  base.eps = 0.5;
  const SweepPoint p1 = sweep_point(base, 24, 2);

  ExperimentConfig scaled = base;
  scaled.rate_scale = 2.0;
  // Same Poisson draws: halve the grid and the coupling horizon.
  const double c6 = cutoff_constant_reference();
  const double t_ref = c6 * 24 * 24 * std::log(24.0) / (2 * 3);
  for (double f = 0.50; f <= 1.401; f += 0.10)
    scaled.t_grid.push_back(f * t_ref / 2.0);
  scaled.horizon = 3.0 * t_ref / 2.0;
  const SweepPoint p2 = sweep_point(scaled, 24, 2);

  CHECK(p2.t_lower == doctest::Approx(p1.t_lower / 2).epsilon(1e-12));
  // The reported constant folds the rate factor back in, so it is unchanged.
  CHECK(p2.c_lower == doctest::Approx(p1.c_lower).epsilon(1e-12));
}

TEST_CASE("plotdata reshaping") {
  const char* src = "test_plotdata_src.tmp";
  {
    ExperimentConfig cfg;
    cfg.experiment = "mixing-mc";
    cfg.N_list = {6};
    cfg.k_list = {2};
    cfg.t_grid = {0.5, 2.0};
    cfg.replicas = 40;
    cfg.estimators = "tv_lower,tv_upper,tv_exact";
    std::ofstream f(src);
    run_mixing_mc(cfg, f);
  }
  std::ostringstream out;
  CHECK(emit_plotdata("tv-curve", src, out));
  const std::string text = out.str();
  CHECK(text.find("t,lower,upper,exact") != std::string::npos);
  std::remove(src);

  // constant-vs-N includes the 6/pi^2 reference row.
  const char* sweep_src = "test_plotdata_sweep.tmp";
  {
    std::ofstream f(sweep_src);
    f << "N,k,variant,eps,t_lower,t_upper,c_lower,c_upper,replicas,seed\n"
      << "64,2,with_boundaries,0.5,100,200,0.5,0.9,10,1\n";
  }
  std::ostringstream out2;
  CHECK(emit_plotdata("constant-vs-N", sweep_src, out2));
  CHECK(out2.str().find("reference,,,0.607927101854") != std::string::npos);
  std::remove(sweep_src);

  CHECK_THROWS(emit_plotdata("bogus", sweep_src, out2));
}
