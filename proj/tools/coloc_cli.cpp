// coloc: command-line driver for network generation, single trials, sweeps
// and plots.
//
// exit codes: 0 success, 1 bad arguments or config, 2 I/O failure

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coloc/coloc.hpp"

namespace fs = std::filesystem;
using namespace coloc;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> m;
  std::optional<std::size_t> anchors;
  std::optional<double> rho;
  std::string scenario;
  std::optional<double> nlos;
  std::optional<std::size_t> trials;
  std::string out;
  unsigned threads = 1;
};

void add_common(CLI::App* app, CommonArgs& a) {
  app->add_option("--config", a.config_path, "JSON scenario config");
  app->add_option("--seed", a.seed, "base seed");
  app->add_option("--m", a.m, "blind nodes");
  app->add_option("--anchors", a.anchors, "anchor count");
  app->add_option("--rho", a.rho, "radio range (m)");
  app->add_option("--scenario", a.scenario, "ideal | noise | multipath (sweep also: all)");
  app->add_option("--nlos", a.nlos, "NLOS fraction in [0, 1]");
  app->add_option("--trials", a.trials, "trials per point (L)");
  app->add_option("--out", a.out, "output directory (default: $COLOC_OUT_DIR or .)");
  app->add_option("--threads", a.threads, "worker threads, 0 = all cores");
}

ScenarioConfig load_config(const CommonArgs& a) {
  ScenarioConfig c;
  if (!a.config_path.empty()) {
    std::ifstream in(a.config_path);
    if (!in) throw IoError("cannot read config " + a.config_path);
    c = read_config(in);
  }
  return c;
}

void apply_flags(const CommonArgs& a, ScenarioConfig& c) {
  if (a.seed) c.base_seed = *a.seed;
  if (a.m) c.m = *a.m;
  if (a.anchors) c.n_anchors = *a.anchors;
  if (a.rho) c.rho = *a.rho;
  if (!a.scenario.empty() && a.scenario != "all") c.scenario = parse_scenario(a.scenario);
  if (a.nlos) c.channel.nlos_fraction = *a.nlos;
  if (a.trials) c.trials = *a.trials;
  c.validate();
}

fs::path out_dir(const CommonArgs& a) {
  fs::path dir = ".";
  if (!a.out.empty()) dir = a.out;
  else if (const char* env = std::getenv("COLOC_OUT_DIR"); env && *env) dir = env;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

template <class Fn>
std::string capture(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

int cmd_gen(const CommonArgs& a) {
  ScenarioConfig c = load_config(a);
  apply_flags(a, c);
  const fs::path dir = out_dir(a);
  const std::uint64_t seed = trial_seed(c.base_seed, 0.0, 0);
  const TrialRun run = [&] {
    // network and measurements only; no solve
    TrialRun r;
    r.network = generate_network(seed, c.box, c.m, c.n_anchors);
    r.edges = build_edge_sets(r.network, c.rho);
    r.connectivity = connectivity_report(r.network, r.edges);
    std::mt19937_64 rng(splitmix64(seed ^ 1ULL));
    const auto model = c.effective_channel();
    const auto labels = assign_nlos(r.network, r.edges, model, rng);
    r.measurements = measure_ranges(r.network, r.edges, labels, model, rng);
    return r;
  }();
  write_file(dir / "network.txt", capture([&](std::ostream& os) { write_network(os, run.network); }));
  const std::string meas_name = "measurements_" + std::string(scenario_name(c.scenario)) + ".csv";
  write_file(dir / meas_name,
             capture([&](std::ostream& os) { write_measurements_csv(os, run.measurements, c.m); }));
  std::cout << "seed " << seed << ": " << c.m << " blind, " << c.n_anchors << " anchors, "
            << run.edges.blind_blind.size() << " blind-blind + " << run.edges.blind_anchor.size()
            << " blind-anchor edges, " << run.connectivity.isolated << " isolated, "
            << run.connectivity.under_anchored << " with fewer than 3 links, " << run.measurements.clamped
            << " clamped\n";
  std::cout << "wrote " << (dir / "network.txt").string() << " and " << (dir / meas_name).string() << '\n';
  return 0;
}

int cmd_trial(const CommonArgs& a, std::size_t trial_index, const std::string& network_path, bool verbose) {
  ScenarioConfig c = load_config(a);
  apply_flags(a, c);
  if (verbose) c.refine.record_trace = true;
  const fs::path dir = out_dir(a);

  TrialRun run;
  if (!network_path.empty()) {
    std::ifstream in(network_path);
    if (!in) throw IoError("cannot read network " + network_path);
    Network net;
    try {
      net = read_network(in);
    } catch (const FormatError& e) {
      throw IoError(e.what());
    }
    const std::uint64_t seed = net.seed;
    run = run_trial_on_network(c, std::move(net), trial_index, seed);
  } else {
    run = run_trial_detailed(c, trial_index);
  }

  const std::string stem = "trial_" + std::string(scenario_name(c.scenario)) + "_" + std::to_string(trial_index);
  SweepPoint point;
  point.scenario = c.scenario;
  point.rho = c.rho;
  point.m = run.network.num_blind();
  point.n_anchors = run.network.num_anchors();
  point.nlos_fraction = c.scenario == ChannelKind::NoisePlusMultipath ? c.channel.nlos_fraction : 0.0;
  point.trials = {run.result};
  write_file(dir / (stem + ".csv"),
             capture([&](std::ostream& os) { write_trials_csv(os, SweepKind::Single, {point}); }));
  write_file(dir / (stem + "_positions.csv"), capture([&](std::ostream& os) {
               write_positions_csv(os, run.network, run.estimates, run.trace_indicator);
             }));
  ScatterOptions so;
  so.title = std::string(scenario_name(c.scenario)) + " channel, P_m = " +
             (run.result.p_m ? format_number(*run.result.p_m) + " m" : std::string("n/a"));
  write_file(dir / (stem + ".svg"), render_scatter(run.network, run.estimates, so));
  write_file(dir / (stem + "_network.txt"), capture([&](std::ostream& os) { write_network(os, run.network); }));

  if (verbose) {
    write_file(dir / (stem + "_measurements.csv"),
               capture([&](std::ostream& os) { write_measurements_csv(os, run.measurements, point.m); }));
    write_file(dir / (stem + "_refine.csv"),
               capture([&](std::ostream& os) { write_refine_trace_csv(os, run.refinement); }));
    if (!run.measurements.empty()) {
      const SdpProblem prob = build_relaxation(run.measurements, run.network.anchors, point.m);
      const SdpSolution sol = solve_sdp(prob, c.solver);
      write_file(dir / (stem + "_sdp.txt"), capture([&](std::ostream& os) {
                   dump_problem(os, prob);
                   dump_solution(os, sol);
                 }));
    }
  }

  std::cout << "trial " << trial_index << " seed " << run.result.seed << " scenario " << scenario_name(c.scenario)
            << ": status " << run.result.solver_status << ", "
            << (run.result.p_m ? "P_m = " + format_number(*run.result.p_m) + " m" : std::string("failed"))
            << " (" << run.solver.iterations << " IPM iterations, " << run.refinement.iterations
            << " refinement iterations)\n";
  return 0;
}

int cmd_sweep(const CommonArgs& a, const std::string& kind, const std::vector<double>& values) {
  ScenarioConfig c = load_config(a);
  SweepSpec spec;
  if (kind == "anchors") spec = anchors_sweep(c);
  else if (kind == "density") spec = density_sweep(c);
  else spec = nlos_sweep(c);
  apply_flags(a, spec.base);
  if (!a.scenario.empty() && a.scenario != "all") spec.scenarios = {parse_scenario(a.scenario)};
  if (a.rho && spec.kind == SweepKind::NlosFraction) spec.rhos = {*a.rho};
  if (!values.empty()) spec.values = values;
  spec.threads = a.threads;
  const fs::path dir = out_dir(a);

  const auto points = run_sweep(spec, [](std::size_t done, std::size_t total) {
    if (done % 50 == 0 || done == total) std::cerr << "\r" << done << "/" << total << " trials" << std::flush;
  });
  std::cerr << '\n';

  const std::string stem = "sweep_" + kind;
  write_file(dir / (stem + "_trials.csv"),
             capture([&](std::ostream& os) { write_trials_csv(os, spec.kind, points); }));
  write_file(dir / (stem + ".csv"), capture([&](std::ostream& os) { write_aggregate_csv(os, spec.kind, points); }));
  write_file(dir / (stem + ".svg"), render_sweep_chart(spec.kind, points, stem));
  for (const auto& p : points) {
    std::cout << scenario_name(p.scenario) << " rho=" << format_number(p.rho) << " " << kind << "="
              << format_number(p.swept_value) << ": P_mu=" << format_number(p.p_mu)
              << " var=" << format_number(p.variance) << " excluded=" << p.excluded << '\n';
  }
  return 0;
}

int cmd_plot(const CommonArgs& a, const std::string& aggregate, const std::string& positions,
             const std::string& network_path) {
  const fs::path dir = out_dir(a);
  if (!aggregate.empty()) {
    std::ifstream in(aggregate);
    if (!in) throw IoError("cannot read " + aggregate);
    SweepKind kind = SweepKind::Single;
    std::vector<SweepPoint> points;
    try {
      points = read_aggregate_csv(in, &kind);
    } catch (const FormatError& e) {
      throw IoError(e.what());
    }
    const fs::path target = dir / (fs::path(aggregate).stem().string() + ".svg");
    write_file(target, render_sweep_chart(kind, points, fs::path(aggregate).stem().string()));
    std::cout << "wrote " << target.string() << '\n';
    return 0;
  }
  std::ifstream pin(positions);
  if (!pin) throw IoError("cannot read " + positions);
  std::ifstream nin(network_path);
  if (!nin) throw IoError("cannot read " + network_path);
  Network net;
  Points est;
  try {
    net = read_network(nin);
    est = read_positions_csv(pin).second;
  } catch (const FormatError& e) {
    throw IoError(e.what());
  }
  if (est.size() != net.blind.size()) throw std::invalid_argument("positions and network differ in node count");
  const fs::path target = dir / (fs::path(positions).stem().string() + ".svg");
  ScatterOptions so;
  so.title = "P_m = " + format_number(position_error(est, net.blind)) + " m";
  write_file(target, render_scatter(net, est, so));
  std::cout << "wrote " << target.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative localization by semidefinite relaxation: trials, sweeps and plots"};
  app.require_subcommand(1);

  CommonArgs gen_args, trial_args, sweep_args, plot_args;
  auto* gen = app.add_subcommand("gen", "generate a network and its range measurements");
  add_common(gen, gen_args);

  auto* trial = app.add_subcommand("trial", "run one trial and write CSV + SVG");
  add_common(trial, trial_args);
  std::size_t trial_index = 0;
  std::string trial_network;
  bool verbose = false;
  trial->add_option("--trial", trial_index, "trial index");
  trial->add_option("--network", trial_network, "run on a stored network file");
  trial->add_flag("--verbose", verbose, "also dump measurements, refinement trace and relaxation");

  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  add_common(sweep, sweep_args);
  std::string sweep_kind;
  std::vector<double> sweep_values;
  sweep->add_option("kind", sweep_kind, "anchors | density | nlos")
      ->required()
      ->check(CLI::IsMember({"anchors", "density", "nlos"}));
  sweep->add_option("--values", sweep_values, "override the swept values");

  auto* plot = app.add_subcommand("plot", "render SVG from CSV output");
  add_common(plot, plot_args);
  std::string plot_aggregate, plot_positions, plot_network;
  auto* agg_opt = plot->add_option("--aggregate", plot_aggregate, "aggregate sweep CSV");
  auto* pos_opt = plot->add_option("--positions", plot_positions, "trial positions CSV");
  auto* net_opt = plot->add_option("--network", plot_network, "network file for --positions");
  pos_opt->needs(net_opt);
  agg_opt->excludes(pos_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  try {
    if (*gen) return cmd_gen(gen_args);
    if (*trial) return cmd_trial(trial_args, trial_index, trial_network, verbose);
    if (*sweep) return cmd_sweep(sweep_args, sweep_kind, sweep_values);
    if (*plot) {
      if (plot_aggregate.empty() && plot_positions.empty()) {
        std::cerr << "plot: give --aggregate or --positions with --network\n";
        return 1;
      }
      return cmd_plot(plot_args, plot_aggregate, plot_positions, plot_network);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
