#pragma once

// Experiment loop: generate -> edges -> labels -> measure -> relax -> refine
// -> P_m, repeated over seeded trials and swept parameters.

#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "coloc/channel.hpp"
#include "coloc/metrics.hpp"
#include "coloc/network.hpp"
#include "coloc/refine.hpp"
#include "coloc/sdp.hpp"

namespace coloc {

inline std::string_view scenario_name(ChannelKind k) {
  switch (k) {
    case ChannelKind::Ideal: return "ideal";
    case ChannelKind::NoiseOnly: return "noise";
    default: return "multipath";
  }
}

inline ChannelKind parse_scenario(std::string_view s) {
  if (s == "ideal") return ChannelKind::Ideal;
  if (s == "noise") return ChannelKind::NoiseOnly;
  if (s == "multipath") return ChannelKind::NoisePlusMultipath;
  throw std::invalid_argument("unknown scenario: " + std::string(s));
}

enum class SweepKind { Single, Anchors, Density, NlosFraction };

inline std::string_view to_string(SweepKind k) {
  switch (k) {
    case SweepKind::Single: return "single";
    case SweepKind::Anchors: return "anchors";
    case SweepKind::Density: return "density";
    default: return "nlos";
  }
}

struct ScenarioConfig {
  ChannelKind scenario = ChannelKind::NoiseOnly;
  Box box{};
  std::size_t m = 50;
  std::size_t n_anchors = 10;
  double rho = 15.0;
  ChannelModel channel{};
  std::size_t trials = 100;
  std::uint64_t base_seed = 1;
  SolverOptions solver{};
  RefineOptions refine{};

  ChannelModel effective_channel() const {
    ChannelModel c = channel;
    c.enabled = scenario;
    return c;
  }

  void validate() const {
    if (!(box.width > 0.0) || !(box.height > 0.0)) throw std::invalid_argument("box must be positive");
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (solver.max_iter < 1 || refine.max_iter < 1) throw std::invalid_argument("iteration limits must be >= 1");
    if (!(solver.gap_tol > 0.0) || !(solver.feas_tol > 0.0) || !(refine.grad_tol > 0.0)) {
      throw std::invalid_argument("tolerances must be positive");
    }
    channel.validate();
  }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// seed = S(S(S(base) ^ bits(value)) ^ trial) with S = splitmix64. Each
/// (value, trial) pair owns its stream, so adding sweep points leaves the
/// other points untouched.
inline std::uint64_t trial_seed(std::uint64_t base_seed, double swept_value, std::size_t trial) {
  std::uint64_t h = splitmix64(base_seed);
  h = splitmix64(h ^ std::bit_cast<std::uint64_t>(swept_value + 0.0));
  return splitmix64(h ^ static_cast<std::uint64_t>(trial));
}

/// Everything a single trial produced, for plots and dumps.
struct TrialRun {
  TrialResult result;
  Network network;
  EdgeSets edges;
  RangeMeasurements measurements;
  ConnectivityReport connectivity;
  Points sdp_estimates;
  Points estimates;
  std::vector<double> trace_indicator;
  SolverStats solver;
  double slack_l1 = 0.0;
  bool psd_certified = false;
  RefineResult refinement;
};

/// Runs the pipeline on a given network; `seed` drives the channel draws.
inline TrialRun run_trial_on_network(const ScenarioConfig& config, Network network, std::size_t trial_index,
                                     std::uint64_t seed) {
  config.validate();
  TrialRun run;
  run.result.trial = trial_index;
  run.result.seed = seed;
  run.result.scenario = config.scenario;
  run.network = std::move(network);
  const std::size_t m = run.network.num_blind();
  run.edges = build_edge_sets(run.network, config.rho);
  run.connectivity = connectivity_report(run.network, run.edges);

  std::mt19937_64 channel_rng(splitmix64(seed ^ 1ULL));
  const ChannelModel model = config.effective_channel();
  const auto labels = assign_nlos(run.network, run.edges, model, channel_rng);
  run.measurements = measure_ranges(run.network, run.edges, labels, model, channel_rng);

  if (run.measurements.empty()) {
    run.result.solver_status = "empty_problem";
    return run;
  }
  const SdpProblem problem = build_relaxation(run.measurements, run.network.anchors, m);
  const SdpSolution sol = solve_sdp(problem, config.solver);
  run.solver = sol.stats;
  run.slack_l1 = sol.slack_l1;
  run.psd_certified = sol.psd_certified();
  run.sdp_estimates = sol.estimated_positions;
  run.trace_indicator = sol.trace_indicator;
  run.result.solver_status = std::string(to_string(sol.stats.status));
  if (sol.stats.status == SolverStatus::NumericalTrouble) {
    run.estimates = run.sdp_estimates;
    return run;
  }

  run.refinement = refine(run.sdp_estimates, run.measurements, run.network.anchors, config.refine);
  run.estimates = run.refinement.positions;
  if (m > 0) {
    run.result.errors = node_errors(run.estimates, run.network.blind);
    run.result.p_m = position_error(run.estimates, run.network.blind);
  }
  return run;
}

inline TrialRun run_trial_detailed(const ScenarioConfig& config, std::size_t trial_index,
                                   double swept_value = 0.0) {
  config.validate();
  const std::uint64_t seed = trial_seed(config.base_seed, swept_value, trial_index);
  return run_trial_on_network(config, generate_network(seed, config.box, config.m, config.n_anchors), trial_index,
                              seed);
}

inline TrialResult run_trial(const ScenarioConfig& config, std::size_t trial_index, double swept_value = 0.0) {
  return run_trial_detailed(config, trial_index, swept_value).result;
}

struct SweepSpec {
  SweepKind kind = SweepKind::Single;
  std::vector<double> values;
  std::vector<ChannelKind> scenarios;
  std::vector<double> rhos;  // empty: base.rho only
  ScenarioConfig base;
  unsigned threads = 1;      // 0: hardware concurrency
};

inline const std::vector<ChannelKind>& all_scenarios() {
  static const std::vector<ChannelKind> k{ChannelKind::Ideal, ChannelKind::NoiseOnly,
                                          ChannelKind::NoisePlusMultipath};
  return k;
}

inline SweepSpec anchors_sweep(ScenarioConfig base = {}) {
  SweepSpec s;
  s.kind = SweepKind::Anchors;
  for (int a = 3; a <= 25; ++a) s.values.push_back(a);
  s.scenarios = all_scenarios();
  base.m = 50;
  base.channel.nlos_mode = NlosMode::PerNode;
  s.base = base;
  return s;
}

inline SweepSpec density_sweep(ScenarioConfig base = {}) {
  SweepSpec s;
  s.kind = SweepKind::Density;
  s.values = {10, 20, 30, 40, 50, 60};
  s.scenarios = all_scenarios();
  base.channel.nlos_mode = NlosMode::PerNode;
  s.base = base;
  return s;
}

/// Non-NLOS links carry only AWGN here, so fraction 0 is the noise-only
/// channel.
inline SweepSpec nlos_sweep(ScenarioConfig base = {}) {
  SweepSpec s;
  s.kind = SweepKind::NlosFraction;
  for (int k = 0; k <= 10; ++k) s.values.push_back(k / 10.0);
  s.scenarios = {ChannelKind::NoisePlusMultipath};
  s.rhos = {15.0, 20.0, 25.0};
  base.n_anchors = 3;
  base.channel.nlos_mode = NlosMode::PerMeasurement;
  base.channel.los_bias = {0.0, 0.0};
  s.base = base;
  return s;
}

/// Config of one sweep point.
inline ScenarioConfig point_config(const SweepSpec& spec, ChannelKind scenario, double rho, double value) {
  ScenarioConfig c = spec.base;
  c.scenario = scenario;
  c.rho = rho;
  switch (spec.kind) {
    case SweepKind::Anchors:
      c.n_anchors = static_cast<std::size_t>(std::llround(value));
      break;
    case SweepKind::Density:
      c.m = static_cast<std::size_t>(std::llround(value));
      c.n_anchors = static_cast<std::size_t>(std::llround(0.3 * value));
      break;
    case SweepKind::NlosFraction:
      c.channel.nlos_fraction = value;
      break;
    case SweepKind::Single:
      break;
  }
  return c;
}

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Points are ordered scenario-major, then rho, then swept value. Trials run
/// on `threads` workers; results are keyed by index so the output does not
/// depend on scheduling.
inline std::vector<SweepPoint> run_sweep(const SweepSpec& spec, const ProgressFn& progress = {}) {
  const std::vector<double> values = spec.values.empty() ? std::vector<double>{0.0} : spec.values;
  const std::vector<double> rhos = spec.rhos.empty() ? std::vector<double>{spec.base.rho} : spec.rhos;
  const std::vector<ChannelKind> scenarios =
      spec.scenarios.empty() ? std::vector<ChannelKind>{spec.base.scenario} : spec.scenarios;

  std::vector<SweepPoint> points;
  std::vector<ScenarioConfig> configs;
  for (ChannelKind sc : scenarios) {
    for (double rho : rhos) {
      for (double v : values) {
        ScenarioConfig c = point_config(spec, sc, rho, v);
        c.validate();
        SweepPoint p;
        p.swept_value = v;
        p.scenario = sc;
        p.rho = rho;
        p.m = c.m;
        p.n_anchors = c.n_anchors;
        p.nlos_fraction = sc == ChannelKind::NoisePlusMultipath ? c.channel.nlos_fraction : 0.0;
        p.trials.resize(c.trials);
        points.push_back(std::move(p));
        configs.push_back(std::move(c));
      }
    }
  }

  struct Job {
    std::size_t point;
    std::size_t trial;
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (std::size_t t = 0; t < points[p].trials.size(); ++t) jobs.push_back({p, t});
  }

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      const Job job = jobs[k];
      points[job.point].trials[job.trial] =
          run_trial(configs[job.point], job.trial, points[job.point].swept_value);
      const std::size_t finished = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, jobs.size());
      }
    }
  };

  unsigned threads = spec.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : spec.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(jobs.size(), 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (auto& p : points) aggregate(p);
  return points;
}

// --- CSV ---------------------------------------------------------------

/// Shortest round-trip decimal form.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline constexpr std::string_view kTrialCsvHeader =
    "sweep_kind,swept_value,scenario,rho_m,m,n_anchors,nlos_fraction,trial,seed,P_m_m,solver_status";
inline constexpr std::string_view kAggregateCsvHeader =
    "sweep_kind,swept_value,scenario,rho_m,m,n_anchors,nlos_fraction,L,P_mu_m,variance_m2,excluded";

namespace detail {

inline void write_point_prefix(std::ostream& os, SweepKind kind, const SweepPoint& p) {
  os << to_string(kind) << ',' << format_number(p.swept_value) << ',' << scenario_name(p.scenario) << ','
     << format_number(p.rho) << ',' << p.m << ',' << p.n_anchors << ',' << format_number(p.nlos_fraction);
}

}  // namespace detail

inline void write_trials_csv(std::ostream& os, SweepKind kind, const std::vector<SweepPoint>& points,
                             bool header = true) {
  if (header) os << kTrialCsvHeader << '\n';
  for (const auto& p : points) {
    for (const auto& t : p.trials) {
      detail::write_point_prefix(os, kind, p);
      os << ',' << t.trial << ',' << t.seed << ',' << (t.p_m ? format_number(*t.p_m) : std::string{}) << ','
         << t.solver_status << '\n';
    }
  }
}

inline void write_aggregate_csv(std::ostream& os, SweepKind kind, const std::vector<SweepPoint>& points,
                                bool header = true) {
  if (header) os << kAggregateCsvHeader << '\n';
  for (const auto& p : points) {
    detail::write_point_prefix(os, kind, p);
    os << ',' << p.trials.size() << ',' << format_number(p.p_mu) << ',' << format_number(p.variance) << ','
       << p.excluded << '\n';
  }
}

}  // namespace coloc
