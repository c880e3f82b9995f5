#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coloc/coloc.hpp"

using namespace coloc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct PointStats {
  std::vector<double> p_m;      // refined, successful trials only
  std::vector<double> sdp_p_m;  // relaxation output before refinement
  std::size_t failed = 0;
  std::size_t isolated_instances = 0;
  std::size_t psd_violations = 0;
  double max_solve_seconds = 0;
  std::vector<TrialRun> runs;

  double mean() const { return mean_position_error(p_m).mean; }
  double variance() const { return mean_position_error(p_m).variance; }
  double sdp_mean() const { return mean_position_error(sdp_p_m).mean; }
  double max() const { return *std::max_element(p_m.begin(), p_m.end()); }
};

void progress(const std::string& label, std::size_t done, std::size_t total) {
  if (done == total) std::cerr << "  " << label << ' ' << done << '/' << total << '\n';
}

PointStats run_point(const ScenarioConfig& c, double swept_value, const std::string& label, bool keep_runs = false) {
  PointStats s;
  for (std::size_t t = 0; t < c.trials; ++t) {
    TrialRun run = run_trial_detailed(c, t, swept_value);
    s.max_solve_seconds = std::max(s.max_solve_seconds, run.solver.seconds);
    if (run.connectivity.isolated > 0) ++s.isolated_instances;
    if (!run.measurements.empty() && !run.psd_certified) ++s.psd_violations;
    if (run.result.p_m) {
      s.p_m.push_back(*run.result.p_m);
      s.sdp_p_m.push_back(position_error(run.sdp_estimates, run.network.blind));
    } else {
      ++s.failed;
    }
    if (keep_runs) s.runs.push_back(std::move(run));
    progress(label, t + 1, c.trials);
  }
  return s;
}

std::string num(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

std::string summary(const PointStats& s) {
  return "P_mu=" + num(s.mean()) + " m (SDP only " + num(s.sdp_mean()) + " m), var=" + num(s.variance()) +
         ", failed=" + std::to_string(s.failed);
}

ScenarioConfig base_config(ChannelKind k) {
  ScenarioConfig c;
  c.scenario = k;
  return c;
}

// Least-squares slope of y on x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) mx += x[k], my += y[k];
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  return sxy / sxx;
}

Outcome criterion1() {
  const ScenarioConfig c = base_config(ChannelKind::Ideal);
  const PointStats s = run_point(c, 0.0, "ideal", true);
  std::size_t connected = 0, exact = 0;
  double worst = 0;
  for (const auto& run : s.runs) {
    if (run.connectivity.isolated > 0) continue;
    ++connected;
    if (run.result.p_m && *run.result.p_m <= 1e-4) ++exact;
    if (run.result.p_m) worst = std::max(worst, *run.result.p_m);
  }
  const double share = connected ? static_cast<double>(exact) / static_cast<double>(connected) : 0.0;
  Outcome o;
  o.pass = connected > 0 && share >= 0.95 && s.max_solve_seconds <= 5.0;
  o.detail = std::to_string(exact) + "/" + std::to_string(connected) + " connected instances with P_m <= 1e-4 (" +
             std::to_string(s.isolated_instances) + " skipped for isolated nodes), worst P_m=" + num(worst) +
             " m, max solve " + num(s.max_solve_seconds, 3) + " s";
  return o;
}

Outcome criterion2() {
  const PointStats s = run_point(base_config(ChannelKind::NoiseOnly), 0.0, "noise");
  Outcome o;
  o.pass = !s.p_m.empty() && s.mean() >= 0.5 && s.mean() <= 5.0;
  o.detail = "noise-only " + summary(s) + ", band [0.5, 5]";
  return o;
}

Outcome criterion3() {
  ScenarioConfig c = base_config(ChannelKind::NoisePlusMultipath);
  c.channel.nlos_mode = NlosMode::PerNode;
  c.channel.nlos_fraction = 0.5;
  const PointStats s = run_point(c, 0.0, "multipath");
  Outcome o;
  o.pass = s.mean() >= 3.0 && s.mean() <= 15.0 && s.max() >= 10.0;
  o.detail = "multipath " + summary(s) + ", max P_m=" + num(s.max()) + " m, band [3, 15], max >= 10";
  return o;
}

Outcome criterion4() {
  const SweepSpec spec = anchors_sweep();
  const std::vector<double> anchors{5, 15, 25};
  const std::vector<double> targets{2.0, 1.0, 0.9};
  std::vector<double> noise, multipath, noise_sdp, multipath_sdp;
  for (double a : anchors) {
    const auto sn = run_point(point_config(spec, ChannelKind::NoiseOnly, 15, a), a, "anchors noise " + num(a));
    noise.push_back(sn.mean());
    noise_sdp.push_back(sn.sdp_mean());
    const auto sm =
        run_point(point_config(spec, ChannelKind::NoisePlusMultipath, 15, a), a, "anchors multipath " + num(a));
    multipath.push_back(sm.mean());
    multipath_sdp.push_back(sm.sdp_mean());
  }
  bool near = true;
  for (std::size_t k = 0; k < 3; ++k) near = near && std::abs(noise[k] - targets[k]) <= 1.0;
  const bool decreasing = noise[0] > noise[1] && noise[1] > noise[2];
  const auto [lo, hi] = std::minmax_element(multipath.begin(), multipath.end());
  const bool flat = *hi - *lo < 2.0;
  Outcome o;
  o.pass = near && decreasing && flat;
  o.detail = "noise P_mu at 5/15/25 anchors = " + num(noise[0]) + "/" + num(noise[1]) + "/" + num(noise[2]) +
             " (SDP only " + num(noise_sdp[0]) + "/" + num(noise_sdp[1]) + "/" + num(noise_sdp[2]) +
             "), within 1 of 2/1/0.9: " + (near ? "yes" : "no") + ", decreasing: " + (decreasing ? "yes" : "no") +
             "; multipath " + num(multipath[0]) + "/" + num(multipath[1]) + "/" + num(multipath[2]) + " (SDP only " +
             num(multipath_sdp[0]) + "/" + num(multipath_sdp[1]) + "/" + num(multipath_sdp[2]) + "), range " +
             num(*hi - *lo) + " < 2: " + (flat ? "yes" : "no");
  return o;
}

// Mean and variance are taken over the per-density P_mu values.
Outcome criterion5() {
  const SweepSpec spec = density_sweep();
  struct Series {
    std::vector<double> p_mu, sdp_p_mu, pooled;
  };
  Series noise, multipath;
  for (double m : spec.values) {
    for (auto [kind, series] :
         {std::pair{ChannelKind::NoiseOnly, &noise}, std::pair{ChannelKind::NoisePlusMultipath, &multipath}}) {
      const auto s = run_point(point_config(spec, kind, 15, m), m,
                               "density " + std::string(scenario_name(kind)) + " " + num(m));
      series->p_mu.push_back(s.mean());
      series->sdp_p_mu.push_back(s.sdp_mean());
      series->pooled.insert(series->pooled.end(), s.p_m.begin(), s.p_m.end());
    }
  }
  const auto n = mean_position_error(noise.p_mu), mp = mean_position_error(multipath.p_mu);
  const bool noise_ok = n.mean >= 1.5 && n.mean <= 5.0;
  const bool mp_ok = mp.mean >= 3.0 && mp.mean <= 9.0;
  const bool spread = mp.variance > n.variance;
  auto list = [](const std::vector<double>& v) {
    std::string out;
    for (double x : v) out += (out.empty() ? "" : "/") + num(x, 3);
    return out;
  };
  Outcome o;
  o.pass = noise_ok && mp_ok && spread;
  o.detail = "P_mu by density noise " + list(noise.p_mu) + " (SDP only " + list(noise.sdp_p_mu) + "), multipath " +
             list(multipath.p_mu) + " (SDP only " + list(multipath.sdp_p_mu) + "); mean noise " + num(n.mean) +
             " in [1.5, 5]: " + (noise_ok ? "yes" : "no") + "; mean multipath " + num(mp.mean) + " in [3, 9]: " +
             (mp_ok ? "yes" : "no") + "; variance multipath " + num(mp.variance) + " > noise " + num(n.variance) +
             ": " + (spread ? "yes" : "no") + "; pooled per-trial variance noise " +
             num(mean_position_error(noise.pooled).variance) + ", multipath " +
             num(mean_position_error(multipath.pooled).variance);
  return o;
}

Outcome criterion6() {
  const SweepSpec spec = nlos_sweep();
  bool rising = true;
  std::string detail;
  PointStats at_zero;
  for (double rho : spec.rhos) {
    std::vector<double> means;
    for (double f : spec.values) {
      auto s = run_point(point_config(spec, ChannelKind::NoisePlusMultipath, rho, f), f,
                         "nlos rho=" + num(rho) + " f=" + num(f));
      means.push_back(s.mean());
      if (rho == spec.rhos.front() && f == 0.0) at_zero = std::move(s);
    }
    const double b = slope(spec.values, means);
    rising = rising && b > 0;
    detail += "rho=" + num(rho) + " slope " + num(b) + " m per unit fraction (" + num(means.front()) + " -> " +
              num(means.back()) + "); ";
  }

  // Same geometry settings, noise-only channel, independent seeds.
  ScenarioConfig noise = point_config(spec, ChannelKind::NoiseOnly, spec.rhos.front(), 0.0);
  noise.base_seed = 0x5eedULL;
  const PointStats ref = run_point(noise, 0.0, "nlos reference");
  const double n0 = static_cast<double>(at_zero.p_m.size()), n1 = static_cast<double>(ref.p_m.size());
  const double se = std::sqrt(at_zero.variance() / n0 + ref.variance() / n1);
  const double diff = std::abs(at_zero.mean() - ref.mean());
  const bool matches = diff <= 2 * se;
  Outcome o;
  o.pass = rising && matches;
  o.detail = detail + "fraction 0 P_mu " + num(at_zero.mean()) + " vs independent noise-only " + num(ref.mean()) +
             ", |diff| " + num(diff) + " <= 2 SE " + num(2 * se) + ": " + (matches ? "yes" : "no");
  return o;
}

// --- property suites ---------------------------------------------------

struct Check {
  std::string name;
  std::function<bool(std::string&)> run;
};

bool trilateration(std::string& note) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  int checked = 0;
  double worst = 0;
  while (checked < 50) {
    Network net;
    net.anchors = {{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}};
    const Point2 a = net.anchors[1] - net.anchors[0], b = net.anchors[2] - net.anchors[0];
    if (std::abs(a.x * b.y - a.y * b.x) < 20.0) continue;
    net.blind = {{u(rng), u(rng)}};
    ChannelModel model;
    model.enabled = ChannelKind::Ideal;
    std::mt19937_64 r(0);
    const auto edges = build_edge_sets(net, 100);
    const auto meas = measure_ranges(net, edges, {}, model, r);
    Eigen::Matrix2d lhs;
    Eigen::Vector2d rhs;
    const auto& d = meas.records;
    for (int k = 1; k < 3; ++k) {
      lhs(k - 1, 0) = 2 * (net.anchors[k].x - net.anchors[0].x);
      lhs(k - 1, 1) = 2 * (net.anchors[k].y - net.anchors[0].y);
      rhs(k - 1) = squared_norm(net.anchors[k]) - squared_norm(net.anchors[0]) -
                   d[k].measured_distance * d[k].measured_distance + d[0].measured_distance * d[0].measured_distance;
    }
    const Eigen::Vector2d p = lhs.partialPivLu().solve(rhs);
    const auto sol = solve_sdp(build_relaxation(meas, net.anchors, 1));
    if (sol.stats.status != SolverStatus::Optimal) {
      note = "solver status " + std::string(to_string(sol.stats.status));
      return false;
    }
    worst = std::max(worst, distance(sol.estimated_positions[0], Point2{p(0), p(1)}));
    ++checked;
  }
  note = "50 triangles, worst deviation from the linear solve " + num(worst) + " m";
  return worst <= 1e-4;
}

bool psd_every_solve(std::string& note) {
  std::size_t solves = 0, bad = 0;
  for (ChannelKind k : all_scenarios()) {
    ScenarioConfig c = base_config(k);
    c.m = 30;
    c.n_anchors = 6;
    for (std::size_t t = 0; t < 20; ++t) {
      const auto run = run_trial_detailed(c, t);
      if (run.measurements.empty()) continue;
      ++solves;
      if (!run.psd_certified) ++bad;
    }
  }
  note = std::to_string(bad) + " of " + std::to_string(solves) + " solves without a PSD certificate";
  return bad == 0 && solves > 0;
}

bool gradient_fd(std::string& note) {
  std::mt19937_64 rng(3);
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const Network net = generate_network(rng(), Box{30, 30}, 12, 4);
    ChannelModel model;
    model.enabled = rep % 2 ? ChannelKind::NoisePlusMultipath : ChannelKind::NoiseOnly;
    std::mt19937_64 r(rng());
    const auto edges = build_edge_sets(net, 15);
    const auto labels = assign_nlos(net, edges, model, r);
    const auto meas = measure_ranges(net, edges, labels, model, r);
    std::uniform_real_distribution<double> u(-2, 2);
    Points s = net.blind;
    for (auto& p : s) p = p + Point2{u(r), u(r)};
    const Eigen::VectorXd g = gradient(s, meas, net.anchors);
    Eigen::VectorXd fd(g.size());
    const double h = 1e-5;
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      Points plus = s, minus = s;
      const auto node = static_cast<std::size_t>(k / 2);
      if (k % 2 == 0) plus[node].x += h, minus[node].x -= h;
      else plus[node].y += h, minus[node].y -= h;
      fd(k) = (objective(plus, meas, net.anchors) - objective(minus, meas, net.anchors)) / (2 * h);
    }
    worst = std::max(worst, (g - fd).norm() / std::max(1.0, g.norm()));
  }
  note = "100 configurations, worst relative gap " + num(worst);
  return worst <= 1e-5;
}

bool descent(std::string& note) {
  std::size_t runs = 0, increases = 0;
  ScenarioConfig c = base_config(ChannelKind::NoisePlusMultipath);
  c.m = 30;
  c.n_anchors = 6;
  for (std::size_t t = 0; t < 30; ++t) {
    const auto run = run_trial_detailed(c, t);
    if (!run.result.p_m) continue;
    ++runs;
    if (run.refinement.objective > run.refinement.initial_objective) ++increases;
  }
  note = std::to_string(increases) + " of " + std::to_string(runs) + " refinements raised the objective";
  return increases == 0 && runs > 0;
}

bool channel_distribution(std::string& note) {
  Network net;
  net.box = Box{100, 100};
  net.blind = {{50, 50}};
  constexpr double kPi = 3.14159265358979323846;
  for (int r = 0; r < 1000; ++r) {
    const double a = 2 * kPi * r / 1000.0;
    net.anchors.push_back({50 + 10 * std::cos(a), 50 + 10 * std::sin(a)});
  }
  const auto edges = build_edge_sets(net, 20);
  const ChannelModel defaults;
  struct Case {
    const char* name;
    ChannelKind kind;
    Propagation label;
    double mean, variance;
  };
  const std::vector<Case> cases{
      {"awgn", ChannelKind::NoiseOnly, Propagation::None, 0.0, defaults.awgn_variance},
      {"LOS", ChannelKind::NoisePlusMultipath, Propagation::LOS, defaults.los_bias.mean,
       defaults.los_bias.variance + defaults.awgn_variance},
      {"NLOS", ChannelKind::NoisePlusMultipath, Propagation::NLOS, defaults.nlos_bias.mean,
       defaults.nlos_bias.variance + defaults.awgn_variance}};
  constexpr std::size_t kSamples = 100000;
  bool ok = true;
  std::uint64_t seed = 1;
  for (const auto& c : cases) {
    ChannelModel model;
    model.enabled = c.kind;
    const PropagationLabels labels(c.kind == ChannelKind::NoiseOnly ? 0 : edges.size(), c.label);
    std::mt19937_64 rng(seed++);
    std::vector<double> e;
    while (e.size() < kSamples) {
      for (const auto& r : measure_ranges(net, edges, labels, model, rng).records) {
        e.push_back(r.measured_distance - r.true_distance);
      }
    }
    e.resize(kSamples);
    const auto mv = mean_position_error(e);
    const double n = static_cast<double>(kSamples);
    const double se_mean = std::sqrt(c.variance / n);
    const double se_var = c.variance * std::sqrt(2.0 / (n - 1));
    const bool pass = std::abs(mv.mean - c.mean) <= 3 * se_mean && std::abs(mv.variance - c.variance) <= 3 * se_var;
    ok = ok && pass;
    note += std::string(c.name) + " mean " + num(mv.mean, 5) + " (" + num(c.mean) + "), variance " +
            num(mv.variance, 5) + " (" + num(c.variance) + ")" + (pass ? "" : " out of 3 SE") + "; ";
  }
  return ok;
}

bool brute_force_edges(std::string& note) {
  std::mt19937_64 rng(9);
  std::size_t networks = 0;
  for (std::size_t m : {5u, 40u, 120u, 180u}) {
    for (double rho : {5.0, 15.0, 25.0}) {
      const Network net = generate_network(rng(), Box{30, 30}, m, 20);
      const auto edges = build_edge_sets(net, rho);
      std::set<std::pair<std::size_t, std::size_t>> bb, ba;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
          if (distance(net.blind[i], net.blind[j]) <= rho) bb.insert({i, j});
        }
        for (std::size_t r = 0; r < net.anchors.size(); ++r) {
          if (distance(net.blind[i], net.anchors[r]) <= rho) ba.insert({i, r});
        }
      }
      std::set<std::pair<std::size_t, std::size_t>> got_bb, got_ba;
      for (const auto& e : edges.blind_blind) got_bb.insert({e.i, e.j});
      for (const auto& e : edges.blind_anchor) got_ba.insert({e.i, e.r});
      if (got_bb != bb || got_ba != ba || got_bb.size() != edges.blind_blind.size()) {
        note = "mismatch at m=" + std::to_string(m) + " rho=" + num(rho);
        return false;
      }
      ++networks;
    }
  }
  note = std::to_string(networks) + " networks up to 200 nodes match the O(n^2) enumeration";
  return true;
}

bool reruns(std::string& note) {
  SweepSpec s = anchors_sweep();
  s.values = {4, 8};
  s.base.m = 15;
  s.base.trials = 3;
  auto csv = [&](unsigned threads) {
    s.threads = threads;
    const auto pts = run_sweep(s);
    std::ostringstream os;
    write_trials_csv(os, s.kind, pts);
    write_aggregate_csv(os, s.kind, pts);
    return os.str();
  };
  const std::string a = csv(1), b = csv(1), c = csv(4);
  note = "three sweeps of " + std::to_string(a.size()) + " bytes";
  return a == b && a == c;
}

Outcome criterion7() {
  const std::vector<Check> checks{{"trilateration", trilateration},   {"psd", psd_every_solve},
                                  {"gradient", gradient_fd},          {"descent", descent},
                                  {"channel", channel_distribution},  {"edges", brute_force_edges},
                                  {"reruns", reruns}};
  Outcome o{true, ""};
  for (const auto& c : checks) {
    std::cerr << "  property " << c.name << '\n';
    std::string note;
    const bool ok = c.run(note);
    o.pass = o.pass && ok;
    while (!note.empty() && (note.back() == ' ' || note.back() == ';')) note.pop_back();
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += c.name + (ok ? " ok" : " FAILED") + " (" + note + ")";
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int k = 1; k < argc; ++k) {
    if (std::strcmp(argv[k], "--only") == 0 && k + 1 < argc) {
      wanted.push_back(std::atoi(argv[++k]));
    } else {
      std::cerr << "usage: coloc_acceptance [--only N]...\n";
      return 2;
    }
  }
  if (wanted.empty()) wanted = {1, 2, 3, 4, 5, 6, 7};

  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7};
  bool all = true;
  for (int n : wanted) {
    if (n < 1 || n > static_cast<int>(criteria.size())) {
      std::cerr << "no criterion " << n << '\n';
      return 2;
    }
    std::cerr << "criterion " << n << '\n';
    const Outcome o = criteria[static_cast<std::size_t>(n - 1)]();
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << ": " << o.detail << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
