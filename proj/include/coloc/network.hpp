#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "coloc/geometry.hpp"

namespace coloc {

struct Box {
  double width = 30.0;
  double height = 30.0;

  double diagonal() const { return std::hypot(width, height); }
  bool contains(Point2 p) const {
    return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
  }
  friend bool operator==(const Box&, const Box&) = default;
};

/// Ground truth for one trial. Blind nodes are indexed 0..m-1 and anchors
/// 0..n_anchors-1; the 1-based convention where anchors follow the blind
/// nodes is only used in output files.
struct Network {
  Points blind;
  Points anchors;
  Box box;
  std::uint64_t seed = 0;

  std::size_t num_blind() const { return blind.size(); }
  std::size_t num_anchors() const { return anchors.size(); }
  friend bool operator==(const Network&, const Network&) = default;
};

/// Blind-blind pair with i < j.
struct BlindEdge {
  std::size_t i = 0;
  std::size_t j = 0;
  friend auto operator<=>(const BlindEdge&, const BlindEdge&) = default;
};

/// Blind node i linked to anchor r.
struct AnchorEdge {
  std::size_t i = 0;
  std::size_t r = 0;
  friend auto operator<=>(const AnchorEdge&, const AnchorEdge&) = default;
};

/// Radio-range-limited link sets, both sorted lexicographically.
struct EdgeSets {
  std::vector<BlindEdge> blind_blind;
  std::vector<AnchorEdge> blind_anchor;
  double rho = 0.0;

  std::size_t size() const { return blind_blind.size() + blind_anchor.size(); }
  bool empty() const { return size() == 0; }
};

/// Draws m blind nodes and then n_anchors anchors independently and
/// uniformly over the box. Each point consumes an x draw and then a y draw.
inline Network generate_network(std::uint64_t seed, Box box, std::size_t m,
                                std::size_t n_anchors) {
  if (!(box.width > 0.0) || !(box.height > 0.0)) {
    throw std::invalid_argument("generate_network: box dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, box.width);
  std::uniform_real_distribution<double> uy(0.0, box.height);
  Network net;
  net.box = box;
  net.seed = seed;
  net.blind.reserve(m);
  net.anchors.reserve(n_anchors);
  for (std::size_t k = 0; k < m; ++k) {
    const double x = ux(rng);
    const double y = uy(rng);
    net.blind.push_back({x, y});
  }
  for (std::size_t k = 0; k < n_anchors; ++k) {
    const double x = ux(rng);
    const double y = uy(rng);
    net.anchors.push_back({x, y});
  }
  return net;
}

/// Links every pair within radio range rho (inclusive).
inline EdgeSets build_edge_sets(const Network& net, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("build_edge_sets: rho must be positive");
  EdgeSets edges;
  edges.rho = rho;
  const double rho2 = rho * rho;
  const std::size_t m = net.num_blind();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (squared_distance(net.blind[i], net.blind[j]) <= rho2) edges.blind_blind.push_back({i, j});
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t r = 0; r < net.num_anchors(); ++r) {
      if (squared_distance(net.blind[i], net.anchors[r]) <= rho2) edges.blind_anchor.push_back({i, r});
    }
  }
  return edges;
}

struct ConnectivityReport {
  std::vector<std::size_t> blind_degree;   // neighbors among blind nodes
  std::vector<std::size_t> anchor_degree;  // anchors in range
  std::size_t isolated = 0;                // blind nodes with no link at all
  std::size_t under_anchored = 0;          // blind nodes with < 3 total links

  std::size_t degree(std::size_t i) const { return blind_degree[i] + anchor_degree[i]; }
};

inline ConnectivityReport connectivity_report(const Network& net, const EdgeSets& edges) {
  ConnectivityReport rep;
  const std::size_t m = net.num_blind();
  rep.blind_degree.assign(m, 0);
  rep.anchor_degree.assign(m, 0);
  for (const auto& e : edges.blind_blind) {
    ++rep.blind_degree[e.i];
    ++rep.blind_degree[e.j];
  }
  for (const auto& e : edges.blind_anchor) ++rep.anchor_degree[e.i];
  for (std::size_t i = 0; i < m; ++i) {
    if (rep.degree(i) == 0) ++rep.isolated;
    if (rep.degree(i) < 3) ++rep.under_anchored;
  }
  return rep;
}

}  // namespace coloc
