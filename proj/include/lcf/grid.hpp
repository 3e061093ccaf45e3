#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace lcf {

/// Raised for violated preconditions and malformed inputs throughout the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Vertex {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend bool operator==(const Vertex&, const Vertex&) = default;
  friend auto operator<=>(const Vertex&, const Vertex&) = default;
};

/// ℓ∞ distance max(|Δx|, |Δy|).
inline std::int64_t linf(Vertex a, Vertex b) {
  return std::max(std::llabs(a.x - b.x), std::llabs(a.y - b.y));
}

inline std::int64_t l1(Vertex a, Vertex b) {
  return std::llabs(a.x - b.x) + std::llabs(a.y - b.y);
}

inline bool adjacent(Vertex a, Vertex b) { return l1(a, b) == 1; }

/// Parameter bundle of one K-coarse field: N = 2^n, K = 2^k, m = ⌊n/k⌋.
struct GridSpec {
  int n = 0;
  int k = 0;
  std::int64_t N = 0;
  std::int64_t K = 0;
  int m = 0;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

  bool contains(Vertex v) const { return v.x >= 0 && v.y >= 0 && v.x < N && v.y < N; }
  std::size_t vertex_count() const { return static_cast<std::size_t>(N * N); }
  /// Total variance k·m of every site.
  double variance() const { return static_cast<double>(k) * m; }
};

inline GridSpec build_grid_spec(int n, int k) {
  if (n <= 0) throw Error("grid spec: n must be positive, got " + std::to_string(n));
  if (k <= 0 || k > n)
    throw Error("grid spec: need 1 <= k <= n, got n=" + std::to_string(n) + " k=" + std::to_string(k));
  if (n > 30) throw Error("grid spec: n > 30 is not addressable");
  GridSpec s;
  s.n = n;
  s.k = k;
  s.N = std::int64_t{1} << n;
  s.K = std::int64_t{1} << k;
  s.m = n / k;
  return s;
}

/// Axis-aligned lattice rectangle [x0, x1] × [y0, y1], inclusive.
struct Rect {
  std::int64_t x0 = 0, y0 = 0, x1 = -1, y1 = -1;

  friend bool operator==(const Rect&, const Rect&) = default;

  bool empty() const { return x1 < x0 || y1 < y0; }
  std::int64_t width() const { return empty() ? 0 : x1 - x0 + 1; }
  std::int64_t height() const { return empty() ? 0 : y1 - y0 + 1; }
  bool contains(Vertex v) const { return v.x >= x0 && v.x <= x1 && v.y >= y0 && v.y <= y1; }
  /// Inner boundary: member vertices with a 4-neighbour outside the rectangle.
  bool on_boundary(Vertex v) const {
    return contains(v) && (v.x == x0 || v.x == x1 || v.y == y0 || v.y == y1);
  }
  Rect dilate(std::int64_t r) const { return {x0 - r, y0 - r, x1 + r, y1 + r}; }
  Rect intersect(const Rect& o) const {
    return {std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
  }
};

/// ℓ∞ set distance between two rectangles (0 when they overlap).
inline std::int64_t distance(const Rect& a, const Rect& b) {
  const std::int64_t gx = std::max<std::int64_t>({0, a.x0 - b.x1, b.x0 - a.x1});
  const std::int64_t gy = std::max<std::int64_t>({0, a.y0 - b.y1, b.y0 - a.y1});
  return std::max(gx, gy);
}

inline std::int64_t distance(Vertex v, const Rect& r) { return distance(Rect{v.x, v.y, v.x, v.y}, r); }

/// Dense row-major grid (x fastest) of width × height cells.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::int64_t width, std::int64_t height, T fill = T{})
      : width_(width), height_(height), data_(checked_size(width, height), fill) {}
  Grid(std::int64_t width, std::int64_t height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != checked_size(width, height)) throw Error("grid: data size mismatch");
  }

  std::int64_t width() const { return width_; }
  std::int64_t height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  Rect bounds() const { return {0, 0, width_ - 1, height_ - 1}; }
  bool contains(Vertex v) const { return v.x >= 0 && v.y >= 0 && v.x < width_ && v.y < height_; }

  std::size_t index(Vertex v) const { return static_cast<std::size_t>(v.y * width_ + v.x); }
  Vertex vertex(std::size_t i) const {
    const auto w = static_cast<std::size_t>(width_);
    return {static_cast<std::int64_t>(i % w), static_cast<std::int64_t>(i / w)};
  }

  T& operator()(std::int64_t x, std::int64_t y) { return data_[static_cast<std::size_t>(y * width_ + x)]; }
  const T& operator()(std::int64_t x, std::int64_t y) const {
    return data_[static_cast<std::size_t>(y * width_ + x)];
  }
  T& operator[](Vertex v) { return (*this)(v.x, v.y); }
  const T& operator[](Vertex v) const { return (*this)(v.x, v.y); }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static std::size_t checked_size(std::int64_t w, std::int64_t h) {
    if (w < 0 || h < 0) throw Error("grid: negative extent");
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  }

  std::int64_t width_ = 0;
  std::int64_t height_ = 0;
  std::vector<T> data_;
};

/// Calls f(neighbour) for each of the 4-neighbours of v inside `bounds`.
template <typename F>
void for_each_neighbor(Vertex v, const Rect& bounds, F&& f) {
  constexpr std::int64_t dx[4] = {1, -1, 0, 0};
  constexpr std::int64_t dy[4] = {0, 0, 1, -1};
  for (int d = 0; d < 4; ++d) {
    const Vertex w{v.x + dx[d], v.y + dy[d]};
    if (bounds.contains(w)) f(w);
  }
}

}  // namespace lcf
