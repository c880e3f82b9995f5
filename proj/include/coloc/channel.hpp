#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "coloc/network.hpp"

namespace coloc {

enum class ChannelKind { Ideal, NoiseOnly, NoisePlusMultipath };
enum class NlosMode { PerNode, PerMeasurement };
enum class Propagation { None, LOS, NLOS };

/// Normal bias model; the second parameter is a variance (m^2), not a
/// standard deviation.
struct BiasModel {
  double mean = 0.0;
  double variance = 0.0;
};

struct ChannelModel {
  double awgn_variance = 0.3;
  BiasModel los_bias{6.98, 1.87};
  BiasModel nlos_bias{16.06, 0.68};
  double nlos_fraction = 0.5;
  NlosMode nlos_mode = NlosMode::PerNode;
  ChannelKind enabled = ChannelKind::NoisePlusMultipath;

  void validate() const {
    if (!(awgn_variance >= 0.0) || !(los_bias.variance >= 0.0) || !(nlos_bias.variance >= 0.0)) {
      throw std::invalid_argument("ChannelModel: variances must be non-negative");
    }
    if (!(nlos_fraction >= 0.0 && nlos_fraction <= 1.0)) {
      throw std::invalid_argument("ChannelModel: nlos_fraction must lie in [0, 1]");
    }
  }
};

enum class EdgeKind { BlindBlind, BlindAnchor };

/// One range measurement. For BlindAnchor edges `j` is the anchor index.
struct RangeRecord {
  EdgeKind kind = EdgeKind::BlindBlind;
  std::size_t i = 0;
  std::size_t j = 0;
  double true_distance = 0.0;
  Propagation propagation = Propagation::None;
  double measured_distance = 0.0;
};

/// Records are ordered as EdgeSets: blind-blind edges first, then
/// blind-anchor edges.
struct RangeMeasurements {
  std::vector<RangeRecord> records;
  std::size_t clamped = 0;  // measurements that came out negative and were set to 0

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

/// Per-edge propagation labels, aligned with the record order above.
using PropagationLabels = std::vector<Propagation>;

inline std::string_view to_string(Propagation p) {
  switch (p) {
    case Propagation::LOS: return "LOS";
    case Propagation::NLOS: return "NLOS";
    default: return "none";
  }
}

inline std::string_view to_string(EdgeKind k) {
  return k == EdgeKind::BlindBlind ? "blind_blind" : "blind_anchor";
}

namespace detail {

// Uniform choice of `count` distinct indices out of n (partial Fisher-Yates).
template <class Rng>
std::vector<bool> choose_subset(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<bool> chosen(n, false);
  for (std::size_t k = 0; k < count && k < n; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, n - 1);
    std::swap(idx[k], idx[pick(rng)]);
    chosen[idx[k]] = true;
  }
  return chosen;
}

inline std::size_t round_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

}  // namespace detail

/// Labels every edge LOS or NLOS. In PerNode mode round(fraction * m) blind
/// nodes are drawn as NLOS nodes and every edge touching one is NLOS. In
/// PerMeasurement mode round(fraction * |edges|) edges are drawn directly.
/// Channels other than NoisePlusMultipath get all-None labels and consume no
/// randomness.
template <class Rng>
PropagationLabels assign_nlos(const Network& net, const EdgeSets& edges,
                              const ChannelModel& model, Rng& rng) {
  model.validate();
  const std::size_t total = edges.size();
  if (model.enabled != ChannelKind::NoisePlusMultipath) {
    return PropagationLabels(total, Propagation::None);
  }
  PropagationLabels labels(total, Propagation::LOS);
  if (model.nlos_mode == NlosMode::PerNode) {
    const std::size_t m = net.num_blind();
    const auto nlos_node = detail::choose_subset(m, detail::round_count(model.nlos_fraction, m), rng);
    std::size_t k = 0;
    for (const auto& e : edges.blind_blind) {
      if (nlos_node[e.i] || nlos_node[e.j]) labels[k] = Propagation::NLOS;
      ++k;
    }
    for (const auto& e : edges.blind_anchor) {
      if (nlos_node[e.i]) labels[k] = Propagation::NLOS;
      ++k;
    }
  } else {
    const auto chosen = detail::choose_subset(total, detail::round_count(model.nlos_fraction, total), rng);
    for (std::size_t k = 0; k < total; ++k) {
      if (chosen[k]) labels[k] = Propagation::NLOS;
    }
  }
  return labels;
}

/// measured = true + AWGN + propagation bias, clamped below at zero. Per edge
/// the AWGN draw precedes the bias draw; Ideal consumes no randomness.
template <class Rng>
RangeMeasurements measure_ranges(const Network& net, const EdgeSets& edges,
                                 const PropagationLabels& labels,
                                 const ChannelModel& model, Rng& rng) {
  model.validate();
  const bool multipath = model.enabled == ChannelKind::NoisePlusMultipath;
  if (multipath && labels.size() != edges.size()) {
    throw std::invalid_argument("measure_ranges: labels do not cover the edge set");
  }
  // Zero variances are legal, so draw standard normals and scale.
  std::normal_distribution<double> std_normal(0.0, 1.0);
  const double awgn_sd = std::sqrt(model.awgn_variance);
  // A zero-variance bias is a constant and consumes no randomness.
  auto bias = [&](const BiasModel& b) {
    return b.variance == 0.0 ? b.mean : b.mean + std::sqrt(b.variance) * std_normal(rng);
  };

  RangeMeasurements out;
  out.records.reserve(edges.size());
  auto emit = [&](EdgeKind kind, std::size_t i, std::size_t j, double d, std::size_t k) {
    RangeRecord rec{kind, i, j, d, Propagation::None, d};
    if (model.enabled != ChannelKind::Ideal) {
      double err = awgn_sd == 0.0 ? 0.0 : awgn_sd * std_normal(rng);
      if (multipath) {
        rec.propagation = labels[k];
        err += bias(rec.propagation == Propagation::NLOS ? model.nlos_bias : model.los_bias);
      }
      rec.measured_distance = d + err;
      if (rec.measured_distance < 0.0) {
        rec.measured_distance = 0.0;
        ++out.clamped;
      }
    }
    out.records.push_back(rec);
  };
  std::size_t k = 0;
  for (const auto& e : edges.blind_blind) {
    emit(EdgeKind::BlindBlind, e.i, e.j, distance(net.blind[e.i], net.blind[e.j]), k++);
  }
  for (const auto& e : edges.blind_anchor) {
    emit(EdgeKind::BlindAnchor, e.i, e.r, distance(net.blind[e.i], net.anchors[e.r]), k++);
  }
  return out;
}

}  // namespace coloc
