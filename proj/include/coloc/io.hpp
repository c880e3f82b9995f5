#pragma once

// Text formats: network files, measurement and trace CSVs, JSON scenario
// configs, and a readable dump of a relaxation and its solution.

#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "coloc/channel.hpp"
#include "coloc/harness.hpp"
#include "coloc/network.hpp"
#include "coloc/refine.hpp"
#include "coloc/sdp.hpp"

namespace coloc {

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string fixed6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Network file:
//   coloc-network 1
//   box <width> <height>
//   seed <seed>
//   blind <m>
//   <index> <x> <y>      (indices 1..m)
//   anchors <count>
//   <index> <x> <y>      (indices m+1..n)
inline void write_network(std::ostream& os, const Network& net) {
  os << "coloc-network 1\n";
  os << "box " << fixed6(net.box.width) << ' ' << fixed6(net.box.height) << '\n';
  os << "seed " << net.seed << '\n';
  os << "blind " << net.blind.size() << '\n';
  std::size_t idx = 1;
  for (const auto& p : net.blind) os << idx++ << ' ' << fixed6(p.x) << ' ' << fixed6(p.y) << '\n';
  os << "anchors " << net.anchors.size() << '\n';
  for (const auto& p : net.anchors) os << idx++ << ' ' << fixed6(p.x) << ' ' << fixed6(p.y) << '\n';
}

inline Network read_network(std::istream& is) {
  auto expect = [&](const char* word) {
    std::string tok;
    if (!(is >> tok) || tok != word) throw FormatError(std::string("network file: expected '") + word + "'");
  };
  Network net;
  int version = 0;
  expect("coloc-network");
  if (!(is >> version) || version != 1) throw FormatError("network file: unsupported version");
  expect("box");
  if (!(is >> net.box.width >> net.box.height)) throw FormatError("network file: bad box");
  expect("seed");
  if (!(is >> net.seed)) throw FormatError("network file: bad seed");
  std::size_t idx = 1;
  auto read_points = [&](Points& pts) {
    std::size_t count = 0;
    if (!(is >> count)) throw FormatError("network file: bad count");
    pts.resize(count);
    for (auto& p : pts) {
      std::size_t k = 0;
      if (!(is >> k >> p.x >> p.y) || k != idx) throw FormatError("network file: bad point line");
      ++idx;
    }
  };
  expect("blind");
  read_points(net.blind);
  expect("anchors");
  read_points(net.anchors);
  return net;
}

inline constexpr std::string_view kMeasurementCsvHeader = "edge_kind,i,j,true_m,label,measured_m";

/// Indices are written 1-based; anchors keep their network index m+r.
inline void write_measurements_csv(std::ostream& os, const RangeMeasurements& meas, std::size_t m) {
  os << kMeasurementCsvHeader << '\n';
  for (const auto& r : meas.records) {
    const std::size_t j = r.kind == EdgeKind::BlindBlind ? r.j + 1 : m + r.j + 1;
    os << to_string(r.kind) << ',' << r.i + 1 << ',' << j << ',' << format_number(r.true_distance) << ','
       << to_string(r.propagation) << ',' << format_number(r.measured_distance) << '\n';
  }
}

inline void write_positions_csv(std::ostream& os, const Network& net, const Points& estimates,
                                const std::vector<double>& trace_indicator = {}) {
  os << "node,true_x,true_y,est_x,est_y,error_m" << (trace_indicator.empty() ? "" : ",trace_indicator") << '\n';
  for (std::size_t i = 0; i < net.blind.size(); ++i) {
    os << i + 1 << ',' << format_number(net.blind[i].x) << ',' << format_number(net.blind[i].y) << ','
       << format_number(estimates[i].x) << ',' << format_number(estimates[i].y) << ','
       << format_number(distance(estimates[i], net.blind[i]));
    if (!trace_indicator.empty()) os << ',' << format_number(trace_indicator[i]);
    os << '\n';
  }
}

inline void write_refine_trace_csv(std::ostream& os, const RefineResult& res) {
  os << "iteration,objective_m4,grad_norm\n";
  for (const auto& row : res.trace) {
    os << row.iteration << ',' << format_number(row.objective) << ',' << format_number(row.grad_norm) << '\n';
  }
}

/// Human-readable dump of the constraint rows and the solution blocks.
inline void dump_problem(std::ostream& os, const SdpProblem& prob) {
  os << "# relaxation: m=" << prob.m << " dim=" << prob.dim() << " rows=" << prob.num_rows() << '\n';
  for (std::size_t k = 0; k < prob.rows.size(); ++k) {
    const auto& row = prob.rows[k];
    os << k << ' ';
    switch (row.kind) {
      case RowKind::BlindBlind: os << "blind_blind " << row.i + 1 << ' ' << row.j + 1; break;
      case RowKind::BlindAnchor: os << "blind_anchor " << row.i + 1 << ' ' << prob.m + row.j + 1; break;
      case RowKind::Pin: os << "pin"; break;
    }
    os << " rhs=" << format_number(row.rhs);
    for (const auto& t : row.terms) {
      os << " [" << format_number(t.weight) << ':';
      for (std::size_t q = 0; q < t.h.nnz; ++q) os << ' ' << t.h.index[q] << '=' << format_number(t.h.value[q]);
      os << ']';
    }
    os << '\n';
  }
}

inline void dump_solution(std::ostream& os, const SdpSolution& sol) {
  os << "# status=" << to_string(sol.stats.status) << " iterations=" << sol.stats.iterations
     << " gap=" << format_number(sol.stats.duality_gap) << " pinf=" << format_number(sol.stats.primal_infeasibility)
     << " dinf=" << format_number(sol.stats.dual_infeasibility) << '\n';
  os << "# slack_l1=" << format_number(sol.slack_l1) << " objective=" << format_number(sol.objective_value)
     << " min_eig=" << format_number(sol.min_eigenvalue) << '\n';
  os << "# X block (node x y trace_indicator)\n";
  for (std::size_t i = 0; i < sol.estimated_positions.size(); ++i) {
    os << i + 1 << ' ' << format_number(sol.estimated_positions[i].x) << ' '
       << format_number(sol.estimated_positions[i].y) << ' ' << format_number(sol.trace_indicator[i]) << '\n';
  }
  os << "# Y block\n";
  for (Eigen::Index r = 0; r < sol.gram_block.rows(); ++r) {
    for (Eigen::Index c = 0; c < sol.gram_block.cols(); ++c) {
      os << (c ? " " : "") << format_number(sol.gram_block(r, c));
    }
    os << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw FormatError("bad number: " + s);
  return v;
}

}  // namespace detail

/// Reads an aggregate CSV back into sweep points (without per-trial data).
inline std::vector<SweepPoint> read_aggregate_csv(std::istream& is, SweepKind* kind = nullptr) {
  std::string line;
  if (!std::getline(is, line) || line != kAggregateCsvHeader) throw FormatError("aggregate csv: bad header");
  std::vector<SweepPoint> points;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != 11) throw FormatError("aggregate csv: expected 11 columns");
    try {
      if (kind) {
        const std::string& k = cells[0];
        *kind = k == "anchors" ? SweepKind::Anchors
                : k == "density" ? SweepKind::Density
                : k == "nlos"    ? SweepKind::NlosFraction
                                 : SweepKind::Single;
      }
      SweepPoint p;
      p.swept_value = detail::parse_double(cells[1]);
      p.scenario = parse_scenario(cells[2]);
      p.rho = detail::parse_double(cells[3]);
      p.m = std::stoul(cells[4]);
      p.n_anchors = std::stoul(cells[5]);
      p.nlos_fraction = detail::parse_double(cells[6]);
      p.trials.resize(std::stoul(cells[7]));
      p.p_mu = detail::parse_double(cells[8]);
      p.variance = detail::parse_double(cells[9]);
      p.excluded = std::stoul(cells[10]);
      points.push_back(std::move(p));
    } catch (const std::invalid_argument& e) {
      throw FormatError(std::string("aggregate csv: ") + e.what());
    } catch (const std::out_of_range& e) {
      throw FormatError(std::string("aggregate csv: ") + e.what());
    }
  }
  return points;
}

/// Reads the positions CSV written by write_positions_csv: (truth, estimates).
inline std::pair<Points, Points> read_positions_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("node,true_x,true_y,est_x,est_y,error_m", 0) != 0) {
    throw FormatError("positions csv: bad header");
  }
  Points truth, est;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() < 6) throw FormatError("positions csv: short row");
    try {
      truth.push_back({detail::parse_double(cells[1]), detail::parse_double(cells[2])});
      est.push_back({detail::parse_double(cells[3]), detail::parse_double(cells[4])});
    } catch (const std::logic_error& e) {
      throw FormatError(std::string("positions csv: ") + e.what());
    }
  }
  return {truth, est};
}

// --- JSON config -------------------------------------------------------

inline std::string_view to_string(NlosMode m) { return m == NlosMode::PerNode ? "per_node" : "per_measurement"; }

inline NlosMode parse_nlos_mode(std::string_view s) {
  if (s == "per_node") return NlosMode::PerNode;
  if (s == "per_measurement") return NlosMode::PerMeasurement;
  throw std::invalid_argument("unknown nlos_mode: " + std::string(s));
}

inline std::string_view to_string(RefineMethod m) {
  return m == RefineMethod::GaussNewton ? "gauss_newton" : "gradient_descent";
}

inline RefineMethod parse_refine_method(std::string_view s) {
  if (s == "gradient_descent") return RefineMethod::GradientDescent;
  if (s == "gauss_newton") return RefineMethod::GaussNewton;
  throw std::invalid_argument("unknown refine method: " + std::string(s));
}

inline nlohmann::json to_json(const ScenarioConfig& c) {
  using nlohmann::json;
  auto bias = [](const BiasModel& b) { return json{{"mean", b.mean}, {"variance", b.variance}}; };
  return json{
      {"scenario", scenario_name(c.scenario)},
      {"box", {{"width", c.box.width}, {"height", c.box.height}}},
      {"m", c.m},
      {"n_anchors", c.n_anchors},
      {"rho", c.rho},
      {"trials", c.trials},
      {"base_seed", c.base_seed},
      {"channel",
       {{"awgn_variance", c.channel.awgn_variance},
        {"los_bias", bias(c.channel.los_bias)},
        {"nlos_bias", bias(c.channel.nlos_bias)},
        {"nlos_fraction", c.channel.nlos_fraction},
        {"nlos_mode", to_string(c.channel.nlos_mode)}}},
      {"solver",
       {{"max_iter", c.solver.max_iter},
        {"gap_tol", c.solver.gap_tol},
        {"feas_tol", c.solver.feas_tol},
        {"max_step_fraction", c.solver.max_step_fraction}}},
      {"refine",
       {{"method", to_string(c.refine.method)},
        {"max_iter", c.refine.max_iter},
        {"grad_tol", c.refine.grad_tol},
        {"shrink", c.refine.shrink},
        {"sufficient_decrease", c.refine.sufficient_decrease}}},
  };
}

namespace detail {

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> known,
                           const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) throw std::invalid_argument("config: unknown key '" + where + key + "'");
  }
}

inline void read_bias(const nlohmann::json& j, BiasModel& b, const std::string& where) {
  reject_unknown(j, {"mean", "variance"}, where);
  read_field(j, "mean", b.mean);
  read_field(j, "variance", b.variance);
}

}  // namespace detail

/// Applies the keys present in `j` on top of `base`. Unknown keys are errors.
inline ScenarioConfig config_from_json(const nlohmann::json& j, ScenarioConfig base = {}) {
  using detail::read_field;
  using detail::reject_unknown;
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  reject_unknown(j, {"scenario", "box", "m", "n_anchors", "rho", "trials", "base_seed", "channel", "solver", "refine"},
                 "");
  ScenarioConfig c = base;
  if (auto it = j.find("scenario"); it != j.end()) c.scenario = parse_scenario(it->get<std::string>());
  if (auto it = j.find("box"); it != j.end()) {
    reject_unknown(*it, {"width", "height"}, "box.");
    read_field(*it, "width", c.box.width);
    read_field(*it, "height", c.box.height);
  }
  read_field(j, "m", c.m);
  read_field(j, "n_anchors", c.n_anchors);
  read_field(j, "rho", c.rho);
  read_field(j, "trials", c.trials);
  read_field(j, "base_seed", c.base_seed);
  if (auto it = j.find("channel"); it != j.end()) {
    const auto& ch = *it;
    reject_unknown(ch, {"awgn_variance", "los_bias", "nlos_bias", "nlos_fraction", "nlos_mode"}, "channel.");
    read_field(ch, "awgn_variance", c.channel.awgn_variance);
    if (auto b = ch.find("los_bias"); b != ch.end()) detail::read_bias(*b, c.channel.los_bias, "channel.los_bias.");
    if (auto b = ch.find("nlos_bias"); b != ch.end()) detail::read_bias(*b, c.channel.nlos_bias, "channel.nlos_bias.");
    read_field(ch, "nlos_fraction", c.channel.nlos_fraction);
    if (auto m = ch.find("nlos_mode"); m != ch.end()) c.channel.nlos_mode = parse_nlos_mode(m->get<std::string>());
  }
  if (auto it = j.find("solver"); it != j.end()) {
    reject_unknown(*it, {"max_iter", "gap_tol", "feas_tol", "max_step_fraction"}, "solver.");
    read_field(*it, "max_iter", c.solver.max_iter);
    read_field(*it, "gap_tol", c.solver.gap_tol);
    read_field(*it, "feas_tol", c.solver.feas_tol);
    read_field(*it, "max_step_fraction", c.solver.max_step_fraction);
  }
  if (auto it = j.find("refine"); it != j.end()) {
    reject_unknown(*it, {"method", "max_iter", "grad_tol", "shrink", "sufficient_decrease"}, "refine.");
    if (auto m = it->find("method"); m != it->end()) c.refine.method = parse_refine_method(m->get<std::string>());
    read_field(*it, "max_iter", c.refine.max_iter);
    read_field(*it, "grad_tol", c.refine.grad_tol);
    read_field(*it, "shrink", c.refine.shrink);
    read_field(*it, "sufficient_decrease", c.refine.sufficient_decrease);
  }
  c.validate();
  return c;
}

inline ScenarioConfig read_config(std::istream& is, ScenarioConfig base = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return config_from_json(j, base);
}

}  // namespace coloc
