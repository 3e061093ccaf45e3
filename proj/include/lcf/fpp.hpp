#pragma once

// First passage percolation with vertex weights e^{γφ_v}.
//
// A path's passage time is the sum of the weights of all its vertices, both
// endpoints included; paths are 4-connected. Distances are therefore
// d(u, u) = e^{γφ_u} and d(u, v) ≥ max(e^{γφ_u}, e^{γφ_v}).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "lcf/field.hpp"
#include "lcf/grid.hpp"
#include "lcf/path.hpp"

namespace lcf {

inline constexpr std::int64_t kNoParent = -1;

struct DistanceMap {
  Vertex source;
  double gamma = 0.0;
  Grid<double> dist;
  Grid<std::int64_t> parent;  // flat index of the predecessor, kNoParent at the source

  /// Geodesic from the source to `target`, recovered from parents.
  LatticePath geodesic(Vertex target) const {
    std::vector<Vertex> rev;
    std::int64_t i = static_cast<std::int64_t>(dist.index(target));
    while (i != kNoParent) {
      const Vertex v = dist.vertex(static_cast<std::size_t>(i));
      rev.push_back(v);
      i = parent[v];
    }
    std::reverse(rev.begin(), rev.end());
    return LatticePath(std::move(rev));
  }
};

/// e^{γφ_v} for every site; rejects non-finite results.
inline std::vector<double> vertex_weights(const Grid<double>& field, double gamma) {
  if (!std::isfinite(gamma)) throw Error("fpp: gamma must be finite");
  std::vector<double> w(field.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(gamma * field.data()[i]);
    if (!std::isfinite(w[i]) || !(w[i] > 0.0)) throw Error("fpp: non-finite vertex weight");
  }
  return w;
}

namespace detail {

/// Dijkstra from `source`; stops once `stop` is settled when it is a valid index.
inline void dijkstra(const Grid<double>& field, const std::vector<double>& weight, std::size_t source,
                     std::int64_t stop, std::vector<double>& dist, std::vector<std::int64_t>& parent) {
  const std::size_t n = weight.size();
  dist.assign(n, std::numeric_limits<double>::infinity());
  parent.assign(n, kNoParent);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = weight[source];
  heap.emplace(dist[source], source);
  const Rect bounds = field.bounds();
  while (!heap.empty()) {
    const auto [d, i] = heap.top();
    heap.pop();
    if (d > dist[i]) continue;
    if (static_cast<std::int64_t>(i) == stop) break;
    for_each_neighbor(field.vertex(i), bounds, [&](Vertex w) {
      const std::size_t j = field.index(w);
      const double nd = d + weight[j];
      if (nd < dist[j]) {
        dist[j] = nd;
        parent[j] = static_cast<std::int64_t>(i);
        heap.emplace(nd, j);
      }
    });
  }
}

}  // namespace detail

inline DistanceMap fpp_sssp(const Grid<double>& field, double gamma, Vertex source) {
  if (!field.contains(source)) throw Error("fpp_sssp: source outside the grid");
  const auto weight = vertex_weights(field, gamma);
  std::vector<double> dist;
  std::vector<std::int64_t> parent;
  detail::dijkstra(field, weight, field.index(source), kNoParent, dist, parent);
  DistanceMap map;
  map.source = source;
  map.gamma = gamma;
  map.dist = Grid<double>(field.width(), field.height(), std::move(dist));
  map.parent = Grid<std::int64_t>(field.width(), field.height(), std::move(parent));
  return map;
}

inline DistanceMap fpp_sssp(const FieldSample& field, double gamma, Vertex source) {
  return fpp_sssp(field.values(), gamma, source);
}

struct FppResult {
  double distance = 0.0;
  LatticePath geodesic;
};

/// d_γ(u, v) and one geodesic; Dijkstra stops when v is settled.
inline FppResult fpp_distance(const Grid<double>& field, double gamma, Vertex u, Vertex v) {
  if (!field.contains(u) || !field.contains(v)) throw Error("fpp_distance: vertex outside the grid");
  const auto weight = vertex_weights(field, gamma);
  std::vector<double> dist;
  std::vector<std::int64_t> parent;
  const std::size_t target = field.index(v);
  detail::dijkstra(field, weight, field.index(u), static_cast<std::int64_t>(target), dist, parent);
  std::vector<Vertex> rev;
  for (std::int64_t i = static_cast<std::int64_t>(target); i != kNoParent; i = parent[static_cast<std::size_t>(i)])
    rev.push_back(field.vertex(static_cast<std::size_t>(i)));
  std::reverse(rev.begin(), rev.end());
  return {dist[target], LatticePath(std::move(rev))};
}

inline FppResult fpp_distance(const FieldSample& field, double gamma, Vertex u, Vertex v) {
  return fpp_distance(field.values(), gamma, u, v);
}

/// Passage time of a path: Σ_{w ∈ path} e^{γφ_w}.
inline double passage_time(const Grid<double>& field, double gamma, const LatticePath& path) {
  double s = 0.0;
  for (const auto& w : path.vertices()) s += std::exp(gamma * field[w]);
  return s;
}

/// Exhaustive minimum over all self-avoiding u→v paths; grids up to 4 × 4 only.
inline double fpp_oracle(const Grid<double>& field, double gamma, Vertex u, Vertex v) {
  if (field.width() > 4 || field.height() > 4) throw Error("fpp_oracle: grid larger than 4 x 4");
  if (!field.contains(u) || !field.contains(v)) throw Error("fpp_oracle: vertex outside the grid");
  const auto weight = vertex_weights(field, gamma);
  std::vector<char> on_path(field.size(), 0);
  double best = std::numeric_limits<double>::infinity();
  const Rect bounds = field.bounds();
  std::function<void(Vertex, double)> extend = [&](Vertex at, double acc) {
    if (at == v) {
      best = std::min(best, acc);
      return;
    }
    for_each_neighbor(at, bounds, [&](Vertex w) {
      const std::size_t j = field.index(w);
      if (on_path[j]) return;
      on_path[j] = 1;
      extend(w, acc + weight[j]);
      on_path[j] = 0;
    });
  };
  on_path[field.index(u)] = 1;
  extend(u, weight[field.index(u)]);
  return best;
}

enum class Direction { left_right, up_down };

struct CrossingMin {
  std::int64_t total = 0;
  LatticePath path;
};

/// Minimum total weight over 4-connected paths inside `rect` from its left
/// column to its right column (left_right) or from its top row to its bottom
/// row (up_down); endpoint weights count.
inline CrossingMin integer_weighted_crossing_min(const Grid<std::int64_t>& weights, const Rect& rect, Direction dir) {
  if (rect.empty()) throw Error("crossing_min: empty rectangle");
  if (!weights.contains({rect.x0, rect.y0}) || !weights.contains({rect.x1, rect.y1}))
    throw Error("crossing_min: rectangle outside the grid");
  const std::size_t n = weights.size();
  constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max();
  std::vector<std::int64_t> dist(n, inf);
  std::vector<std::int64_t> parent(n, kNoParent);
  using Item = std::pair<std::int64_t, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  auto is_source = [&](Vertex v) { return dir == Direction::left_right ? v.x == rect.x0 : v.y == rect.y1; };
  auto is_target = [&](Vertex v) { return dir == Direction::left_right ? v.x == rect.x1 : v.y == rect.y0; };
  for (std::int64_t y = rect.y0; y <= rect.y1; ++y)
    for (std::int64_t x = rect.x0; x <= rect.x1; ++x) {
      const Vertex v{x, y};
      if (!is_source(v)) continue;
      const std::int64_t w = weights[v];
      if (w < 0) throw Error("crossing_min: negative weight");
      dist[weights.index(v)] = w;
      heap.emplace(w, weights.index(v));
    }
  while (!heap.empty()) {
    const auto [d, i] = heap.top();
    heap.pop();
    if (d > dist[i]) continue;
    const Vertex at = weights.vertex(i);
    if (is_target(at)) {
      std::vector<Vertex> rev;
      for (std::int64_t p = static_cast<std::int64_t>(i); p != kNoParent; p = parent[static_cast<std::size_t>(p)])
        rev.push_back(weights.vertex(static_cast<std::size_t>(p)));
      std::reverse(rev.begin(), rev.end());
      return {d, LatticePath(std::move(rev))};
    }
    for_each_neighbor(at, rect, [&](Vertex w) {
      const std::size_t j = weights.index(w);
      const std::int64_t wt = weights[w];
      if (wt < 0) throw Error("crossing_min: negative weight");
      if (d + wt < dist[j]) {
        dist[j] = d + wt;
        parent[j] = static_cast<std::int64_t>(i);
        heap.emplace(dist[j], j);
      }
    });
  }
  throw Error("crossing_min: no crossing found");  // unreachable for a non-empty rectangle
}

}  // namespace lcf
