#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <string>

#include "coloc/harness.hpp"

using namespace coloc;

namespace {

std::string trials_csv(SweepKind kind, const std::vector<SweepPoint>& pts) {
  std::ostringstream os;
  write_trials_csv(os, kind, pts);
  return os.str();
}

std::string aggregate_csv(SweepKind kind, const std::vector<SweepPoint>& pts) {
  std::ostringstream os;
  write_aggregate_csv(os, kind, pts);
  return os.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Seeds, DeterministicAndDistinct) {
  EXPECT_EQ(trial_seed(1, 5.0, 3), trial_seed(1, 5.0, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t base : {1u, 2u}) {
    for (double v : {0.0, 0.1, 3.0, 25.0}) {
      for (std::size_t t = 0; t < 50; ++t) seen.insert(trial_seed(base, v, t));
    }
  }
  EXPECT_EQ(seen.size(), 2u * 4u * 50u);
  EXPECT_EQ(trial_seed(1, 0.0, 0), trial_seed(1, -0.0, 0));
}

TEST(SweepSpecs, DefaultDesigns) {
  const auto a = anchors_sweep();
  EXPECT_EQ(a.values.size(), 23u);
  EXPECT_EQ(a.values.front(), 3);
  EXPECT_EQ(a.values.back(), 25);
  EXPECT_EQ(a.base.m, 50u);
  EXPECT_EQ(a.scenarios.size(), 3u);

  const auto d = density_sweep();
  for (double m : d.values) {
    const auto c = point_config(d, ChannelKind::NoiseOnly, 15, m);
    EXPECT_EQ(c.m, static_cast<std::size_t>(m));
    EXPECT_EQ(c.n_anchors, static_cast<std::size_t>(std::llround(0.3 * m)));
  }

  const auto n = nlos_sweep();
  EXPECT_EQ(n.values.size(), 11u);
  EXPECT_EQ(n.rhos, (std::vector<double>{15, 20, 25}));
  EXPECT_EQ(n.base.n_anchors, 3u);
  EXPECT_EQ(n.base.channel.nlos_mode, NlosMode::PerMeasurement);
  const auto c = point_config(n, ChannelKind::NoisePlusMultipath, 20, 0.7);
  EXPECT_DOUBLE_EQ(c.channel.nlos_fraction, 0.7);
  EXPECT_DOUBLE_EQ(c.rho, 20);
}

TEST(Defaults, ScenarioConfig) {
  const ScenarioConfig c;
  EXPECT_EQ(c.box, (Box{30, 30}));
  EXPECT_DOUBLE_EQ(c.rho, 15);
  EXPECT_DOUBLE_EQ(c.channel.awgn_variance, 0.3);
  EXPECT_EQ(c.trials, 100u);
}

TEST(Trial, IdealDefaultNetworkIsExactAfterRefinement) {
  ScenarioConfig c;
  c.scenario = ChannelKind::Ideal;
  const auto run = run_trial_detailed(c, 0);
  ASSERT_TRUE(run.result.p_m.has_value());
  EXPECT_LE(*run.result.p_m, 1e-4);
  EXPECT_EQ(run.result.solver_status, "optimal");
  EXPECT_TRUE(run.psd_certified);
  EXPECT_EQ(run.result.seed, trial_seed(c.base_seed, 0.0, 0));
  EXPECT_EQ(run.network.seed, run.result.seed);
  EXPECT_EQ(run.result.errors.size(), 50u);
}

TEST(Trial, SameInputsSameResult) {
  ScenarioConfig c;
  c.scenario = ChannelKind::NoisePlusMultipath;
  c.m = 20;
  c.n_anchors = 5;
  const auto a = run_trial(c, 4, 1.5);
  const auto b = run_trial(c, 4, 1.5);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(a.p_m, b.p_m);
  EXPECT_EQ(a.errors, b.errors);
  EXPECT_EQ(a.solver_status, b.solver_status);
}

TEST(Trial, EmptyProblemIsFlaggedNotThrown) {
  ScenarioConfig c;
  c.m = 1;
  c.n_anchors = 0;
  const auto r = run_trial(c, 0);
  EXPECT_TRUE(r.failed());
  EXPECT_EQ(r.solver_status, "empty_problem");
}

TEST(Sweep, FailedTrialsAreCountedAndLeftBlank) {
  SweepSpec s;
  s.kind = SweepKind::Density;
  s.values = {1};  // one blind node, round(0.3) = 0 anchors: never any edge
  s.scenarios = {ChannelKind::NoiseOnly};
  s.base.trials = 3;
  const auto pts = run_sweep(s);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].excluded, 3u);
  const std::string csv = trials_csv(s.kind, pts);
  EXPECT_NE(csv.find(",,empty_problem\n"), std::string::npos);
  EXPECT_NE(aggregate_csv(s.kind, pts).find(",3,nan,nan,3\n"), std::string::npos);
}

TEST(Sweep, CsvHeadersAndShape) {
  SweepSpec s = anchors_sweep();
  s.values = {5, 6};
  s.scenarios = {ChannelKind::Ideal, ChannelKind::NoiseOnly};
  s.base.m = 12;
  s.base.trials = 2;
  const auto pts = run_sweep(s);
  ASSERT_EQ(pts.size(), 4u);
  const std::string t = trials_csv(s.kind, pts);
  const std::string a = aggregate_csv(s.kind, pts);
  EXPECT_EQ(t.substr(0, t.find('\n')),
            "sweep_kind,swept_value,scenario,rho_m,m,n_anchors,nlos_fraction,trial,seed,P_m_m,solver_status");
  EXPECT_EQ(a.substr(0, a.find('\n')),
            "sweep_kind,swept_value,scenario,rho_m,m,n_anchors,nlos_fraction,L,P_mu_m,variance_m2,excluded");
  EXPECT_EQ(count_lines(t), 1u + 4u * 2u);
  EXPECT_EQ(count_lines(a), 1u + 4u);
  EXPECT_EQ(a.find("anchors,5,ideal,15,12,5,0,2,"), a.find('\n') + 1);
}

TEST(Sweep, ByteIdenticalReruns) {
  SweepSpec s = nlos_sweep();
  s.values = {0.0, 0.5};
  s.rhos = {15};
  s.base.m = 15;
  s.base.trials = 2;
  const auto first = run_sweep(s);
  const auto second = run_sweep(s);
  s.threads = 3;
  const auto threaded = run_sweep(s);
  EXPECT_EQ(trials_csv(s.kind, first), trials_csv(s.kind, second));
  EXPECT_EQ(aggregate_csv(s.kind, first), aggregate_csv(s.kind, second));
  EXPECT_EQ(trials_csv(s.kind, first), trials_csv(s.kind, threaded));
}

TEST(Sweep, AddingValuesLeavesOtherPointsUntouched) {
  SweepSpec s = anchors_sweep();
  s.scenarios = {ChannelKind::NoiseOnly};
  s.base.m = 10;
  s.base.trials = 2;
  s.values = {4};
  const auto alone = run_sweep(s);
  s.values = {3, 4, 5};
  const auto more = run_sweep(s);
  ASSERT_EQ(more.size(), 3u);
  for (std::size_t t = 0; t < 2; ++t) {
    EXPECT_EQ(alone[0].trials[t].seed, more[1].trials[t].seed);
    EXPECT_EQ(alone[0].trials[t].p_m, more[1].trials[t].p_m);
  }
}

TEST(Sweep, NlosFractionZeroIsNoiseOnly) {
  SweepSpec s = nlos_sweep();
  s.values = {0.0};
  s.rhos = {15};
  s.base.m = 20;
  s.base.trials = 3;
  const auto nlos = run_sweep(s);

  SweepSpec noise = s;
  noise.kind = SweepKind::Single;
  noise.scenarios = {ChannelKind::NoiseOnly};
  const auto plain = run_sweep(noise);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(nlos[0].trials[t].p_m, plain[0].trials[t].p_m);
  EXPECT_EQ(nlos[0].p_mu, plain[0].p_mu);
}

TEST(Config, ValidateRejectsNonsense) {
  ScenarioConfig c;
  c.rho = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.trials = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_THROW(parse_scenario("loud"), std::invalid_argument);
  EXPECT_EQ(parse_scenario("multipath"), ChannelKind::NoisePlusMultipath);
}
