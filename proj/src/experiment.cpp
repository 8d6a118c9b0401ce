#include "blockshuffle/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "blockshuffle/censoring.hpp"
#include "blockshuffle/distribution.hpp"
#include "blockshuffle/dynamics.hpp"
#include "blockshuffle/estimators.hpp"
#include "blockshuffle/generator.hpp"
#include "blockshuffle/spectral.hpp"
#include "blockshuffle/stats.hpp"

namespace bshuf {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& t : split(s, ',')) out.push_back(std::stoi(t));
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split(s, ',')) out.push_back(std::stod(t));
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += fmt(v[i]);
  }
  return s;
}

// First grid time at which the decreasing curve drops below eps, linearly
// interpolated; +inf when it never does, 0 when already below at the start.
double crossing_time(const std::vector<double>& ts,
                     const std::vector<double>& vs, double eps) {
  if (vs.front() < eps) return 0.0;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (vs[i] < eps) {
      const double frac = (vs[i - 1] - eps) / (vs[i - 1] - vs[i]);
      return ts[i - 1] + frac * (ts[i] - ts[i - 1]);
    }
  }
  return std::numeric_limits<double>::infinity();
}

double normalized_constant(double t, int N, int k) {
  return t * k * (static_cast<double>(k) * k - 1.0) /
         (static_cast<double>(N) * N * std::log(static_cast<double>(N)));
}

void header_comments(const ExperimentConfig& cfg, std::ostream& out) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  out << "# config_hash=" << buf << "\n";
  out << "# master_seed=" << cfg.master_seed << " seed_source=" << cfg.seed_source
      << "\n";
  out << "# config " << canonical_config_string(cfg) << "\n";
}

bool refuse_work(const ExperimentConfig& cfg, std::ostream& out) {
  const double events = estimate_events(cfg);
  if (events > cfg.work_cap && !cfg.force) {
    out << "# refused: estimated events " << fmt(events) << " exceed cap "
        << fmt(cfg.work_cap) << " (use force=1 to override)\n";
    return true;
  }
  return false;
}

}  // namespace

double cutoff_constant_reference() {
  return 6.0 / (std::numbers::pi * std::numbers::pi);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::string(buf);
}

void apply_config_pair(ExperimentConfig& cfg, const std::string& key,
                       const std::string& value) {
  if (key == "experiment") cfg.experiment = value;
  else if (key == "N") cfg.N_list = parse_int_list(value);
  else if (key == "k") cfg.k_list = parse_int_list(value);
  else if (key == "variant") cfg.variant = value;
  else if (key == "eps") cfg.eps = std::stod(value);
  else if (key == "delta") cfg.delta = std::stod(value);
  else if (key == "K") cfg.K = std::stoi(value);
  else if (key == "j") cfg.j = std::stoi(value);
  else if (key == "y") cfg.y = std::stoi(value);
  else if (key == "replicas") cfg.replicas = std::stoi(value);
  else if (key == "master_seed") {
    cfg.master_seed = std::stoull(value);
    cfg.seed_source = "flag";
  } else if (key == "t_grid") cfg.t_grid = parse_double_list(value);
  else if (key == "sample_times") cfg.sample_times = parse_double_list(value);
  else if (key == "eps_grid") cfg.eps_grid = parse_double_list(value);
  else if (key == "T") cfg.T = std::stod(value);
  else if (key == "horizon") cfg.horizon = std::stod(value);
  else if (key == "literal_block_range") cfg.literal_block_range = value == "1" || value == "true";
  else if (key == "rate_scale") cfg.rate_scale = std::stod(value);
  else if (key == "estimators") cfg.estimators = value;
  else if (key == "adversarial_start") cfg.adversarial_start = value == "1" || value == "true";
  else if (key == "k_max") cfg.k_max = std::stoi(value);
  else if (key == "work_cap") cfg.work_cap = std::stod(value);
  else if (key == "force") cfg.force = value == "1" || value == "true";
  else if (key == "output") cfg.output = value;
  else throw std::invalid_argument("unknown config key: " + key);
}

void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) apply_config_pair(cfg, key, value);
  }
}

std::string canonical_config_string(const ExperimentConfig& cfg) {
  std::ostringstream s;
  s << "experiment=" << cfg.experiment << ";N=" << join_ints(cfg.N_list)
    << ";k=" << join_ints(cfg.k_list) << ";variant=" << cfg.variant
    << ";eps=" << fmt(cfg.eps) << ";delta=" << fmt(cfg.delta) << ";K=" << cfg.K
    << ";j=" << cfg.j << ";y=" << cfg.y << ";replicas=" << cfg.replicas
    << ";master_seed=" << cfg.master_seed << ";t_grid=" << join_doubles(cfg.t_grid)
    << ";sample_times=" << join_doubles(cfg.sample_times)
    << ";eps_grid=" << join_doubles(cfg.eps_grid) << ";T=" << fmt(cfg.T)
    << ";horizon=" << fmt(cfg.horizon)
    << ";literal_block_range=" << cfg.literal_block_range
    << ";rate_scale=" << fmt(cfg.rate_scale) << ";estimators=" << cfg.estimators
    << ";adversarial_start=" << cfg.adversarial_start << ";k_max=" << cfg.k_max;
  return s.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  return fnv1a64(canonical_config_string(cfg));
}

ShuffleSpec spec_for(const ExperimentConfig& cfg, int N, int k) {
  ShuffleSpec s;
  s.variant = variant_from_name(cfg.variant);
  s.N = N;
  s.k = k;
  s.literal_block_range = cfg.literal_block_range;
  s.rate_scale = cfg.rate_scale;
  return s;
}

double estimate_events(const ExperimentConfig& cfg) {
  double events = 0.0;
  const double c6 = cutoff_constant_reference();
  for (int N : cfg.N_list) {
    for (int k : cfg.k_list.empty() ? std::vector<int>{2} : cfg.k_list) {
      const double rate = static_cast<double>(N) * cfg.rate_scale;
      double t_max = cfg.T;
      for (double t : cfg.t_grid) t_max = std::max(t_max, t);
      if (cfg.experiment == "cutoff-sweep") {
        const double t_ref = c6 * N * N * std::log(static_cast<double>(N)) /
                             (k * (static_cast<double>(k) * k - 1.0));
        t_max = std::max(t_max, 3.0 * t_ref);
        events += 2.0 * cfg.replicas * rate * t_max;
      } else if (cfg.experiment == "no-precutoff") {
        const double horizon = cfg.horizon > 0.0 ? cfg.horizon : 200.0;
        events += 2.0 * cfg.replicas * k * horizon;  // single-card walker
      } else {
        events += cfg.replicas * rate * std::max(t_max, 1.0);
      }
    }
  }
  return events;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

namespace {

struct VerifyLedger {
  std::ostream& out;
  bool all_ok = true;
  void line(const std::string& name, bool ok, const std::string& detail) {
    out << (ok ? "PASS" : "FAIL") << "," << name << "," << detail << "\n";
    all_ok = all_ok && ok;
  }
};

}  // namespace

bool run_verify(const ExperimentConfig& cfg, std::ostream& out) {
  header_comments(cfg, out);
  out << "status,check,detail\n";
  VerifyLedger led{out};

  if (cfg.k_max < 3) {
    out << "# warning: empty verification grid (k_max < 3), vacuous pass\n";
    led.line("grid", true, "empty");
    return true;
  }

  {  // Hand-derived boundary rates and the offset-index form of the defining
     // expression, cross-checked in exact rationals.
    bool ok = boundary_rate(3, 2) == Rat(4, 3) &&
              boundary_rate(4, 2) == Rat(9, 5) && boundary_rate(4, 3) == Rat(6, 5);
    for (int k = 3; k <= cfg.k_max && ok; ++k) {
      for (int x = 2; x <= k - 1 && ok; ++x) {
        const long long i = k - x;  // offset index, i in [1, k-2]
        const Rat literal(4LL * k * k - 6 * i * k + 3 * i * i - 1,
                          (2LL * x + 1) * (2LL * x - 1));
        ok = literal == boundary_rate(k, x);
      }
    }
    led.line("boundary-rate-values", ok, ok ? "exact" : "mismatch");
  }

  {  // 1 <= delta_i <= 7k^2/(4i^2-1), and <= 8 once i >= k/4.
    bool ok = true;
    for (int k = 3; k <= cfg.k_max && ok; ++k) {
      for (int i = 2; i <= k - 1 && ok; ++i) {
        const Rat d = boundary_rate(k, i);
        ok = d >= Rat(1) && d <= Rat(7LL * k * k, 4LL * i * i - 1);
        if (4 * i >= k) ok = ok && d <= Rat(8);
      }
    }
    led.line("boundary-rate-bounds", ok, ok ? "exact" : "violated");
  }

  {  // Interior trigonometric identity.
    double worst = 0.0;
    for (int N : {10, 50, 200}) {
      for (int k = 2; k <= 8; ++k) {
        for (int j = 1; j <= 3; ++j) {
          for (int x = k; x <= N - k; ++x) {
            worst = std::max(worst, interior_identity_residual(N, k, j, x));
          }
        }
      }
    }
    led.line("interior-identity", worst <= 1e-12, "max_residual=" + fmt(worst));
  }

  {  // Boundary identity, exactly zero in rationals.
    bool ok = true;
    for (int k = 3; k <= std::min(cfg.k_max, 16) && ok; ++k) {
      for (int x = 1; x <= k - 1 && ok; ++x) {
        ok = boundary_identity_residual(k, x).is_zero();
      }
    }
    led.line("boundary-identity", ok, ok ? "exact_zero" : "nonzero");
  }

  {  // O(N*k) generator action against full block-permutation enumeration.
    double worst = 0.0;
    PermSpace space(6);
    std::vector<std::int32_t> labels;
    for (int k : {2, 3}) {
      for (Variant v : {Variant::plain, Variant::with_boundaries}) {
        ShuffleSpec s{v, 6, k, cfg.literal_block_range, 1.0};
        const RateTable table = make_rate_table(s);
        for (long long st = 0; st < space.n_states; ++st) {
          space.decode(st, labels);
          const Permutation p(labels);
          worst = std::max(worst,
                           std::fabs(generator_apply_phi(p, table, 1, 3) -
                                     generator_apply_phi_enumerated(p, table, 1, 3)));
        }
      }
    }
    led.line("generator-vs-enumeration", worst <= 1e-10,
             "max_residual=" + fmt(worst));
  }

  {  // Exclusion generator is the exact lumping of the full generator.
    bool ok = true;
    for (Variant v : {Variant::plain, Variant::with_boundaries}) {
      ShuffleSpec s{v, 5, 3, cfg.literal_block_range, 1.0};
      const SparseGenerator full = build_sparse_generator(s);
      const SparseGenerator proj = build_exclusion_generator(s, 2);
      PermSpace pspace(5);
      SubsetSpace sspace(5, 2);
      std::vector<std::int32_t> labels;
      std::vector<std::uint8_t> bits(5);
      for (long long a = 0; a < full.n_states && ok; ++a) {
        pspace.decode(a, labels);
        for (int x = 0; x < 5; ++x)
          bits[static_cast<std::size_t>(x)] =
              labels[static_cast<std::size_t>(x)] <= 2 ? 1 : 0;
        const long long pa = sspace.encode(bits);
        std::map<long long, Rat> lumped;
        for (std::int64_t e = full.row_ptr[static_cast<std::size_t>(a)];
             e < full.row_ptr[static_cast<std::size_t>(a) + 1]; ++e) {
          pspace.decode(full.col[static_cast<std::size_t>(e)], labels);
          for (int x = 0; x < 5; ++x)
            bits[static_cast<std::size_t>(x)] =
                labels[static_cast<std::size_t>(x)] <= 2 ? 1 : 0;
          const long long pb = sspace.encode(bits);
          if (pb == pa) continue;
          auto [it, ins] =
              lumped.emplace(pb, full.rate_exact[static_cast<std::size_t>(e)]);
          if (!ins) it->second += full.rate_exact[static_cast<std::size_t>(e)];
        }
        for (const auto& [pb, r] : lumped) ok = ok && r == proj.rate_between(pa, pb);
        for (std::int64_t e = proj.row_ptr[static_cast<std::size_t>(pa)];
             e < proj.row_ptr[static_cast<std::size_t>(pa) + 1]; ++e) {
          const long long pb = proj.col[static_cast<std::size_t>(e)];
          ok = ok && lumped.count(pb) > 0;
        }
      }
    }
    led.line("exclusion-lumping", ok, ok ? "exact" : "rate_deviation");
  }

  {  // k=2 exact eigenfunctions.
    double worst = 0.0;
    for (int N = 4; N <= 8; ++N) {
      ShuffleSpec s{Variant::plain, N, 2, cfg.literal_block_range, 1.0};
      const RateTable table = make_rate_table(s);
      Rng rng(derive_seed(cfg.master_seed, "verify-k2", N, 2, 0));
      for (int rep = 0; rep < 50; ++rep) {
        const Permutation p = uniform_perm(rng, N);
        worst = std::max(worst, eigen_residual(p, table, 1, N / 2));
      }
    }
    led.line("k2-eigen-residual", worst <= 1e-10, "max_residual=" + fmt(worst));
  }

  {  // k=2 spectral gap equals 1 - cos(pi/N). With the literal block range
     // position N is never updated and this check fails by construction.
    double worst = 0.0;
    bool converged = true;
    for (int N = 4; N <= 8; ++N) {
      ShuffleSpec s{Variant::plain, N, 2, cfg.literal_block_range, 1.0};
      const SparseGenerator gen = build_sparse_generator(s);
      PermSpace space(N);
      const GapResult g =
          spectral_gap(gen, 1e-12, phi_start_vector_full(gen, space));
      converged = converged && g.converged;
      worst = std::max(worst,
                       std::fabs(g.gap - (1.0 - std::cos(std::numbers::pi / N))));
    }
    led.line("k2-gap", converged && worst <= 1e-9, "max_gap_error=" + fmt(worst));
  }

  return led.all_ok;
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

bool run_spectrum(const ExperimentConfig& cfg, std::ostream& out) {
  header_comments(cfg, out);
  out << "N,k,variant,j,lambda_approx,lambda_leading,gap_exact,residual_max\n";
  for (int N : cfg.N_list) {
    for (int k : cfg.k_list) {
      const ShuffleSpec spec = spec_for(cfg, N, k);
      const RateTable table = make_rate_table(spec);
      // Exact gap when the state space is enumerable.
      std::string gap_str;
      {
        PermSpace space(N);
        if (space.n_states <= 500000) {
          const SparseGenerator gen = build_sparse_generator(spec);
          const GapResult g =
              spectral_gap(gen, 1e-11, phi_start_vector_full(gen, space));
          gap_str = g.converged ? fmt(g.gap) : "unconverged";
        }
      }
      for (int j = 1; j <= cfg.j; ++j) {
        Rng rng(derive_seed(cfg.master_seed, "spectrum", N, k,
                            static_cast<std::uint64_t>(j)));
        double res_max = 0.0;
        for (int rep = 0; rep < 100; ++rep) {
          const Permutation p = uniform_perm(rng, N);
          res_max = std::max(res_max, eigen_residual(p, table, j, N / 2));
        }
        out << N << ',' << k << ',' << variant_name(spec.variant) << ',' << j
            << ',' << fmt(lambda_approx(N, k, j)) << ','
            << fmt(lambda_leading(N, k, j)) << ',' << gap_str << ','
            << fmt(res_max) << "\n";
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// mixing-exact
// ---------------------------------------------------------------------------

bool run_mixing_exact(const ExperimentConfig& cfg, std::ostream& out) {
  header_comments(cfg, out);
  out << "N,k,variant,eps,t_mix,method\n";
  for (int N : cfg.N_list) {
    for (int k : cfg.k_list) {
      const ShuffleSpec spec = spec_for(cfg, N, k);
      PermSpace space(N);
      if (space.n_states <= 500000) {
        const SparseGenerator gen = build_sparse_generator(spec);
        // The chain is transitive, so the identity start (index 0) is
        // worst-case representative.
        const double t = exact_mixing_time(gen, 0, cfg.eps);
        out << N << ',' << k << ',' << variant_name(spec.variant) << ','
            << fmt(cfg.eps) << ',' << fmt(t) << ",full\n";
      }
      {
        const double t = projection_mixing_lower(spec, cfg.K, cfg.eps);
        out << N << ',' << k << ',' << variant_name(spec.variant) << ','
            << fmt(cfg.eps) << ',' << fmt(t) << ",projection\n";
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// mixing-mc
// ---------------------------------------------------------------------------

namespace {

void mc_row(std::ostream& out, int N, int k, const std::string& variant,
            double t, const std::string& estimator, double point, double lo,
            double hi, int replicas, std::uint64_t seed) {
  out << N << ',' << k << ',' << variant << ',' << fmt(t) << ',' << estimator
      << ',' << fmt(point) << ',' << fmt(lo) << ',' << fmt(hi) << ','
      << replicas << ',' << seed << "\n";
}

bool has_estimator(const ExperimentConfig& cfg, const std::string& name) {
  for (const auto& e : split(cfg.estimators, ',')) {
    if (e == name) return true;
  }
  return false;
}

}  // namespace

bool run_mixing_mc(const ExperimentConfig& cfg, std::ostream& out) {
  header_comments(cfg, out);
  if (refuse_work(cfg, out)) return false;

  if (has_estimator(cfg, "trajectory")) {
    if (cfg.sample_times.empty())
      throw std::invalid_argument("trajectory estimator needs sample_times");
    // Trajectory sampling output (per-replica observable rows).
    out << "replica,seed,t,observable,value\n";
    for (int N : cfg.N_list) {
      for (int k : cfg.k_list) {
        const ShuffleSpec spec = spec_for(cfg, N, k);
        const RateTable table = make_rate_table(spec);
        const Permutation id = Permutation::identity(N);
        for (int r = 0; r < cfg.replicas; ++r) {
          const std::uint64_t seed =
              derive_seed(cfg.master_seed, "trajectory", N, k,
                          static_cast<std::uint64_t>(r));
          Rng rng(seed);
          Observer obs;
          obs.times = cfg.sample_times;
          obs.fn = [&](double t, const Permutation& p) {
            out << r << ',' << seed << ',' << fmt(t) << ",phi,"
                << fmt(phi(p, 1, N / 2)) << "\n";
            out << r << ',' << seed << ',' << fmt(t) << ",height_mid,"
                << fmt(height(p, N / 2, N / 2)) << "\n";
          };
          simulate(id, cfg.T > 0.0 ? cfg.T : cfg.sample_times.back(), table,
                   nullptr, rng, {obs});
        }
      }
    }
    return true;
  }

  out << "N,k,variant,t,estimator,point,ci_lo,ci_hi,replicas,seed\n";
  for (int N : cfg.N_list) {
    for (int k : cfg.k_list) {
      const ShuffleSpec spec = spec_for(cfg, N, k);
      const std::string vn = variant_name(spec.variant);
      std::vector<double> grid = cfg.t_grid;
      if (grid.empty()) grid = {1.0};

      if (has_estimator(cfg, "tv_lower")) {
        const auto dyn = sample_phi_grid(spec, grid, cfg.replicas, cfg.master_seed);
        const auto stat =
            sample_phi_stationary(N, cfg.replicas, cfg.master_seed);
        for (std::size_t ti = 0; ti < grid.size(); ++ti) {
          const TvEstimate e = statistic_tv_lower(
              dyn[ti], stat,
              derive_seed(cfg.master_seed, "tv-boot", N, k, ti));
          mc_row(out, N, k, vn, grid[ti], "tv_lower", e.point, e.lo, e.hi,
                 cfg.replicas, cfg.master_seed);
        }
      }
      if (has_estimator(cfg, "tv_upper")) {
        const double horizon =
            cfg.horizon > 0.0 ? cfg.horizon : 1.5 * grid.back();
        const CouplingTaus taus = coupling_taus(spec, cfg.replicas, horizon,
                                                cfg.master_seed,
                                                cfg.adversarial_start);
        for (double t : grid) {
          const TvEstimate e = coupling_tv_upper(taus, t);
          mc_row(out, N, k, vn, t, "tv_upper", e.point, e.lo, e.hi,
                 cfg.replicas, cfg.master_seed);
        }
      }
      if (has_estimator(cfg, "tv_exact")) {
        PermSpace space(N);
        if (space.n_states <= 500000) {
          const SparseGenerator gen = build_sparse_generator(spec);
          const Dist start = point_mass(gen.n_states, 0);
          const Dist target = uniform_dist(gen.n_states);
          for (double t : grid) {
            const double tv = tv_distance(evolve(gen, start, t), target);
            mc_row(out, N, k, vn, t, "tv_exact", tv, tv, tv, 0, cfg.master_seed);
          }
        }
      }
      if (has_estimator(cfg, "variance")) {
        for (double t : grid) {
          const VarianceReport rep =
              phi_variance_estimate(spec, t, cfg.replicas, cfg.master_seed);
          mc_row(out, N, k, vn, t, "phi_variance", rep.var, rep.var - 3 * rep.se,
                 rep.ci_hi, cfg.replicas, cfg.master_seed);
        }
      }
      if (has_estimator(cfg, "negdep")) {
        for (double t : grid) {
          SubsetSpace space(N, cfg.K);
          if (space.n_states <= 500000) {
            const NegDepReport rep = negative_dependence_exact(spec, cfg.K, t);
            mc_row(out, N, k, vn, t, "negdep_exact_max_excess", rep.max_excess,
                   rep.max_excess, rep.max_excess, 0, cfg.master_seed);
          } else {
            const NegDepReport rep = negative_dependence_mc(
                spec, cfg.K, t, cfg.replicas, cfg.master_seed);
            mc_row(out, N, k, vn, t, "negdep_mc_max_z", rep.max_excess,
                   rep.max_excess, rep.max_excess, cfg.replicas,
                   cfg.master_seed);
          }
        }
      }
      if (has_estimator(cfg, "censor_dom")) {
        const CutoffCensoring cc = make_cutoff_censoring(N, k, cfg.K, cfg.delta);
        const double t = cfg.T > 0.0 ? cfg.T : cc.t1;
        const DominanceReport rep = censoring_dominance_check(
            spec, cc.schedule, t, cfg.replicas, cfg.master_seed, cfg.K);
        for (const auto& row : rep.rows) {
          mc_row(out, N, k, vn, t, "censor_dom_" + row.statistic, row.mean_diff,
                 row.mean_diff - 3 * row.se, row.mean_diff + 3 * row.se,
                 cfg.replicas, cfg.master_seed);
        }
      }
      if (has_estimator(cfg, "exit")) {
        const double horizon = cfg.horizon > 0.0 ? cfg.horizon : 200.0;
        for (int threshold : {4 * k, N / 2}) {
          if (threshold >= N) continue;
          const ExitSamples ex = boundary_exit_samples(spec, threshold,
                                                       cfg.replicas, horizon,
                                                       cfg.master_seed);
          std::vector<double> finite;
          for (double t : ex.taus)
            if (std::isfinite(t)) finite.push_back(t);
          if (finite.size() < ex.taus.size() / 2) continue;
          const double med = median(finite);
          mc_row(out, N, k, vn, horizon,
                 "exit_median_gt_" + std::to_string(threshold), med, med, med,
                 cfg.replicas, cfg.master_seed);
        }
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// cutoff-sweep
// ---------------------------------------------------------------------------

SweepPoint sweep_point(const ExperimentConfig& cfg, int N, int k) {
  const ShuffleSpec spec = spec_for(cfg, N, k);
  const double c6 = cutoff_constant_reference();
  const double t_ref = c6 * N * N * std::log(static_cast<double>(N)) /
                       (k * (static_cast<double>(k) * k - 1.0)) /
                       cfg.rate_scale;
  std::vector<double> grid = cfg.t_grid;
  if (grid.empty()) {
    for (double f = 0.50; f <= 1.401; f += 0.10) grid.push_back(f * t_ref);
  }

  const auto dyn = sample_phi_grid(spec, grid, cfg.replicas, cfg.master_seed);
  const auto stat = sample_phi_stationary(N, cfg.replicas, cfg.master_seed);
  std::vector<double> tv(grid.size());
  for (std::size_t ti = 0; ti < grid.size(); ++ti) {
    tv[ti] = statistic_tv_lower(
                 dyn[ti], stat,
                 derive_seed(cfg.master_seed, "tv-boot", N, k, ti))
                 .point;
  }

  SweepPoint pt;
  pt.N = N;
  pt.k = k;
  pt.t_lower = crossing_time(grid, tv, cfg.eps);

  const double horizon = cfg.horizon > 0.0 ? cfg.horizon : 3.0 * t_ref;
  const CouplingTaus taus =
      coupling_taus(spec, std::max(cfg.replicas / 2, 50), horizon,
                    cfg.master_seed, cfg.adversarial_start);
  std::vector<double> sorted = taus.taus;
  std::sort(sorted.begin(), sorted.end());
  const double q = quantile_sorted(sorted, 1.0 - cfg.eps);
  pt.t_upper = std::isfinite(q) ? q : std::numeric_limits<double>::infinity();

  pt.c_lower = normalized_constant(pt.t_lower * cfg.rate_scale, N, k);
  pt.c_upper = normalized_constant(pt.t_upper * cfg.rate_scale, N, k);
  return pt;
}

bool run_cutoff_sweep(const ExperimentConfig& cfg, std::ostream& out) {
  header_comments(cfg, out);
  if (refuse_work(cfg, out)) return false;
  out << "N,k,variant,eps,t_lower,t_upper,c_lower,c_upper,replicas,seed\n";
  std::map<int, std::vector<std::pair<int, double>>> by_k;
  for (int k : cfg.k_list) {
    for (int N : cfg.N_list) {
      const SweepPoint pt = sweep_point(cfg, N, k);
      out << N << ',' << k << ',' << cfg.variant << ',' << fmt(cfg.eps) << ','
          << fmt(pt.t_lower) << ',' << fmt(pt.t_upper) << ','
          << fmt(pt.c_lower) << ',' << fmt(pt.c_upper) << ',' << cfg.replicas
          << ',' << cfg.master_seed << "\n";
      by_k[k].emplace_back(N, pt.c_lower);
    }
  }
  // Fitted asymptote: c(N) regressed on 1/log N; the intercept estimates the
  // N->inf constant.
  for (const auto& [k, pts] : by_k) {
    if (pts.size() < 2) continue;
    std::vector<double> xs, ys;
    for (const auto& [N, c] : pts) {
      xs.push_back(1.0 / std::log(static_cast<double>(N)));
      ys.push_back(c);
    }
    const auto [slope, intercept] = fit_line(xs, ys);
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - (intercept + slope * xs[i]);
      rss += r * r;
    }
    const double se = xs.size() > 2
                          ? std::sqrt(rss / (static_cast<double>(xs.size()) - 2.0))
                          : 0.0;
    out << "# fit k=" << k << " asymptote=" << fmt(intercept)
        << " slope=" << fmt(slope) << " se=" << fmt(se)
        << " reference=" << fmt(cutoff_constant_reference()) << "\n";
  }
  return true;
}

// ---------------------------------------------------------------------------
// no-precutoff
// ---------------------------------------------------------------------------

bool run_no_precutoff(const ExperimentConfig& cfg, std::ostream& out) {
  header_comments(cfg, out);
  if (refuse_work(cfg, out)) return false;
  out << "N,k,variant,estimator,value,capped,replicas,seed\n";
  const double horizon = cfg.horizon > 0.0 ? cfg.horizon : 200.0;
  std::vector<double> log_ns;
  std::vector<std::vector<double>> plain_taus, control_taus;

  for (int N : cfg.N_list) {
    const int k = std::max(2, static_cast<int>(std::pow(N, cfg.delta)));
    const int threshold = N / 2;
    for (Variant v : {Variant::plain, Variant::with_boundaries}) {
      ShuffleSpec spec{v, N, k, cfg.literal_block_range, cfg.rate_scale};
      const ExitSamples ex = boundary_exit_samples(spec, threshold,
                                                   cfg.replicas, horizon,
                                                   cfg.master_seed);
      std::vector<double> finite;
      for (double t : ex.taus)
        if (std::isfinite(t)) finite.push_back(t);
      const bool enough = finite.size() * 2 > ex.taus.size();
      if (enough) {
        const double med = median(finite);
        out << N << ',' << k << ',' << variant_name(v) << ",exit_median,"
            << fmt(med) << ',' << ex.n_capped << ',' << cfg.replicas << ','
            << cfg.master_seed << "\n";
        for (double eps : cfg.eps_grid) {
          std::vector<double> sorted = ex.taus;
          std::sort(sorted.begin(), sorted.end());
          const double qv = quantile_sorted(sorted, 1.0 - eps);
          out << N << ',' << k << ',' << variant_name(v)
              << ",exit_quantile_eps=" << fmt(eps) << ','
              << (std::isfinite(qv) ? fmt(qv) : "") << ','
              << (std::isfinite(qv) ? 0 : 1) << ',' << cfg.replicas << ','
              << cfg.master_seed << "\n";
        }
        if (v == Variant::plain)
          plain_taus.push_back(finite);
        else
          control_taus.push_back(finite);
      }
    }
    log_ns.push_back(std::log(static_cast<double>(N)));
  }

  if (plain_taus.size() == log_ns.size() && log_ns.size() >= 2) {
    const SlopeCI s = bootstrap_median_slope(
        log_ns, plain_taus, derive_seed(cfg.master_seed, "slope", 0, 0, 0));
    out << "# plain log-median slope " << fmt(s.slope) << " ci [" << fmt(s.lo)
        << "," << fmt(s.hi) << "]\n";
  }
  if (control_taus.size() == log_ns.size() && log_ns.size() >= 2) {
    for (std::size_t i = 0; i < control_taus.size(); ++i) {
      const int N = cfg.N_list[i];
      const int k = std::max(2, static_cast<int>(std::pow(N, cfg.delta)));
      const double c = median(control_taus[i]) * k * k * k /
                       (static_cast<double>(N) * N * std::log(static_cast<double>(N)));
      out << "# control normalized constant N=" << N << " " << fmt(c) << "\n";
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// decay
// ---------------------------------------------------------------------------

bool run_decay(const ExperimentConfig& cfg, std::ostream& out) {
  header_comments(cfg, out);
  if (refuse_work(cfg, out)) return false;
  out << "N,k,variant,y,t,mid_mean_h,max_mean_h,fitted_rate,lambda_approx\n";
  for (int N : cfg.N_list) {
    for (int k : cfg.k_list) {
      const ShuffleSpec spec = spec_for(cfg, N, k);
      const int y = cfg.y > 0 ? cfg.y : N / 2;
      std::vector<double> ts = cfg.t_grid;
      if (ts.empty()) {
        const double lam = lambda_approx(N, k, 1);
        for (double f = 0.3; f <= 2.11; f += 0.3) ts.push_back(f / lam);
      }
      const DecayReport rep =
          height_decay_estimate(spec, y, ts, cfg.replicas, cfg.master_seed);
      for (std::size_t ti = 0; ti < ts.size(); ++ti) {
        out << N << ',' << k << ',' << cfg.variant << ',' << y << ','
            << fmt(ts[ti]) << ',' << fmt(rep.mid_mean_h[ti]) << ','
            << fmt(rep.max_mean_h[ti]) << ',' << fmt(rep.fitted_rate) << ','
            << fmt(rep.lambda_ref) << "\n";
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// plotdata
// ---------------------------------------------------------------------------

namespace {

struct CsvFile {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

CsvFile read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvFile f;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      f.comments.push_back(line);
      continue;
    }
    auto cells = split(line, ',');
    if (!header_seen) {
      f.columns = cells;
      header_seen = true;
    } else {
      f.rows.push_back(cells);
    }
  }
  return f;
}

int column_index(const CsvFile& f, const std::string& name) {
  for (std::size_t i = 0; i < f.columns.size(); ++i) {
    if (f.columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

bool emit_plotdata(const std::string& kind, const std::string& input_path,
                   std::ostream& out) {
  const CsvFile f = read_csv(input_path);
  out << "# plotdata kind=" << kind << " source=" << input_path << "\n";
  for (const auto& c : f.comments) out << c << "\n";

  if (kind == "tv-curve") {
    const int ct = column_index(f, "t");
    const int ce = column_index(f, "estimator");
    const int cp = column_index(f, "point");
    if (ct < 0 || ce < 0 || cp < 0)
      throw std::runtime_error("tv-curve: input lacks mixing-mc columns");
    std::map<double, std::array<std::string, 3>> by_t;
    for (const auto& r : f.rows) {
      const double t = std::stod(r[static_cast<std::size_t>(ct)]);
      const std::string& est = r[static_cast<std::size_t>(ce)];
      if (est == "tv_lower") by_t[t][0] = r[static_cast<std::size_t>(cp)];
      if (est == "tv_upper") by_t[t][1] = r[static_cast<std::size_t>(cp)];
      if (est == "tv_exact") by_t[t][2] = r[static_cast<std::size_t>(cp)];
    }
    out << "t,lower,upper,exact\n";
    for (const auto& [t, v] : by_t)
      out << fmt(t) << ',' << v[0] << ',' << v[1] << ',' << v[2] << "\n";
    return true;
  }
  if (kind == "decay-curve") {
    const int ct = column_index(f, "t");
    const int cm = column_index(f, "mid_mean_h");
    const int cr = column_index(f, "fitted_rate");
    const int cl = column_index(f, "lambda_approx");
    if (ct < 0 || cm < 0 || cr < 0 || cl < 0)
      throw std::runtime_error("decay-curve: input lacks decay columns");
    out << "t,mean_height,fitted_rate,lambda_approx\n";
    for (const auto& r : f.rows) {
      out << r[static_cast<std::size_t>(ct)] << ','
          << r[static_cast<std::size_t>(cm)] << ','
          << r[static_cast<std::size_t>(cr)] << ','
          << r[static_cast<std::size_t>(cl)] << "\n";
    }
    return true;
  }
  if (kind == "constant-vs-N") {
    const int cn = column_index(f, "N");
    const int ck = column_index(f, "k");
    const int cc = column_index(f, "c_lower");
    const int cu = column_index(f, "c_upper");
    if (cn < 0 || ck < 0 || cc < 0)
      throw std::runtime_error("constant-vs-N: input lacks sweep columns");
    out << "series,N,k,value,upper\n";
    for (const auto& r : f.rows) {
      out << "estimate," << r[static_cast<std::size_t>(cn)] << ','
          << r[static_cast<std::size_t>(ck)] << ','
          << r[static_cast<std::size_t>(cc)] << ','
          << (cu >= 0 ? r[static_cast<std::size_t>(cu)] : std::string()) << "\n";
    }
    out << "reference,,," << fmt(cutoff_constant_reference()) << ",\n";
    return true;
  }
  throw std::invalid_argument("emit_plotdata: unknown kind " + kind);
}

}  // namespace bshuf
