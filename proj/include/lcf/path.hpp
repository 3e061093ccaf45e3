#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "lcf/grid.hpp"

namespace lcf {

struct VertexHash {
  std::size_t operator()(Vertex v) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(v.x) << 32) ^ static_cast<std::uint64_t>(v.y));
  }
};

/// Ordered nearest-neighbour vertex sequence.
class LatticePath {
 public:
  LatticePath() = default;

  /// Throws unless consecutive vertices are 4-neighbours; with
  /// `require_self_avoiding`, also rejects repeated vertices.
  explicit LatticePath(std::vector<Vertex> vertices, bool require_self_avoiding = false)
      : vertices_(std::move(vertices)) {
    for (std::size_t i = 1; i < vertices_.size(); ++i)
      if (!adjacent(vertices_[i - 1], vertices_[i]))
        throw Error("path: vertices " + std::to_string(i - 1) + " and " + std::to_string(i) + " are not 4-neighbours");
    std::unordered_set<Vertex, VertexHash> seen;
    seen.reserve(vertices_.size());
    for (const auto& v : vertices_) {
      if (!seen.insert(v).second) {
        self_avoiding_ = false;
        break;
      }
    }
    if (require_self_avoiding && !self_avoiding_) throw Error("path: not self-avoiding");
  }

  const std::vector<Vertex>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  bool empty() const { return vertices_.empty(); }
  const Vertex& operator[](std::size_t i) const { return vertices_[i]; }
  const Vertex& front() const { return vertices_.front(); }
  const Vertex& back() const { return vertices_.back(); }
  bool self_avoiding() const { return self_avoiding_; }

  /// ℓ∞ distance between the endpoints.
  std::int64_t distance() const { return empty() ? 0 : linf(front(), back()); }

  /// Largest ℓ∞ distance between any two vertices (the bounding box's longer side minus one).
  std::int64_t diameter() const {
    if (empty()) return 0;
    auto [xmin, xmax] = std::minmax_element(vertices_.begin(), vertices_.end(),
                                            [](const Vertex& a, const Vertex& b) { return a.x < b.x; });
    auto [ymin, ymax] = std::minmax_element(vertices_.begin(), vertices_.end(),
                                            [](const Vertex& a, const Vertex& b) { return a.y < b.y; });
    return std::max(xmax->x - xmin->x, ymax->y - ymin->y);
  }

  LatticePath slice(std::size_t first, std::size_t last) const {
    return LatticePath(std::vector<Vertex>(vertices_.begin() + static_cast<std::ptrdiff_t>(first),
                                           vertices_.begin() + static_cast<std::ptrdiff_t>(last) + 1));
  }

  friend bool operator==(const LatticePath& a, const LatticePath& b) { return a.vertices_ == b.vertices_; }

 private:
  std::vector<Vertex> vertices_;
  bool self_avoiding_ = true;
};

}  // namespace lcf
