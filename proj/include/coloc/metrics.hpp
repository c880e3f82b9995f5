#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coloc/channel.hpp"
#include "coloc/geometry.hpp"

namespace coloc {

struct LengthMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EmptyInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline std::vector<double> node_errors(const Points& estimated, const Points& truth) {
  if (estimated.size() != truth.size()) throw LengthMismatch("estimated and truth differ in length");
  std::vector<double> out(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) out[i] = distance(estimated[i], truth[i]);
  return out;
}

/// P_m: mean Euclidean error over blind nodes.
inline double position_error(const Points& estimated, const Points& truth) {
  if (estimated.size() != truth.size()) throw LengthMismatch("estimated and truth differ in length");
  if (truth.empty()) throw EmptyInput("no blind nodes");
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) sum += distance(estimated[i], truth[i]);
  return sum / static_cast<double>(truth.size());
}

struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;  // population (divisor L)
};

/// Welford accumulation; P_mu and the spread of the per-trial P_m list.
inline MeanVariance mean_position_error(std::span<const double> values) {
  if (values.empty()) throw EmptyInput("no trials");
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (double v : values) {
    ++k;
    const double delta = v - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (v - mean);
  }
  return {mean, m2 / static_cast<double>(k)};
}

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  ChannelKind scenario = ChannelKind::Ideal;
  std::vector<double> errors;
  std::optional<double> p_m;  // empty when the solve failed
  std::string solver_status;
  bool failed() const { return !p_m.has_value(); }
};

struct SweepPoint {
  double swept_value = 0.0;
  ChannelKind scenario = ChannelKind::Ideal;
  double rho = 0.0;
  std::size_t m = 0;
  std::size_t n_anchors = 0;
  double nlos_fraction = 0.0;
  std::vector<TrialResult> trials;
  double p_mu = 0.0;
  double variance = 0.0;
  std::size_t excluded = 0;
};

/// Fills p_mu, variance and excluded from the stored trials.
inline void aggregate(SweepPoint& point) {
  std::vector<double> values;
  values.reserve(point.trials.size());
  point.excluded = 0;
  for (const auto& t : point.trials) {
    if (t.p_m) values.push_back(*t.p_m);
    else ++point.excluded;
  }
  if (values.empty()) {
    point.p_mu = std::numeric_limits<double>::quiet_NaN();
    point.variance = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  const auto mv = mean_position_error(values);
  point.p_mu = mv.mean;
  point.variance = mv.variance;
}

}  // namespace coloc
