#pragma once

// K-coarse modified branching random walk.
//
// Level j of a K-coarse field places an independent N(0, 2^{-2jk}) variable on
// every box of side L = 2^{jk} meeting V_N; a box with lower-left corner c is
// the point set [c, c+L-1]^2. Corners range over [-(L-1), N-1]^2, stored in a
// W × W layer (W = N + L - 1) at index c + (L - 1). The level field
// ψ_j(z) = √k Σ_{B ∋ z} b_B is then a window sum over the layer, computed with
// separable prefix sums (a summed-area table built one row at a time).

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lcf/grid.hpp"
#include "lcf/random.hpp"

namespace lcf {

enum class FieldKind : std::uint8_t { coarse_mbrw = 0, mbrw = 1, conditional = 2 };

inline const char* to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::coarse_mbrw: return "coarse-mbrw";
    case FieldKind::mbrw: return "mbrw";
    case FieldKind::conditional: return "conditional";
  }
  return "unknown";
}

/// One level of box variables.
struct NoiseLayer {
  int level = 0;
  std::int64_t side = 1;    // L, the box side
  std::int64_t extent = 0;  // W = N + L - 1 corners per axis
  double stddev = 1.0;      // 2^{-jk}
  std::vector<double> values;

  double at_corner(std::int64_t cx, std::int64_t cy) const {
    return values[static_cast<std::size_t>((cy + side - 1) * extent + (cx + side - 1))];
  }
};

namespace detail {

inline constexpr std::uint64_t kMbrwStreamTag = std::uint64_t{1} << 32;

inline std::uint64_t level_key(std::uint64_t seed, std::uint64_t stream) { return derive_seed(seed, stream); }

/// Fills `out` with row r of a noise layer. Entry c uses half of the Box–Muller
/// pair with index (r << 32) | (c >> 1): cosine for even c, sine for odd c.
inline void noise_row(std::uint64_t key, double stddev, std::int64_t r, std::span<double> out) {
  const auto width = static_cast<std::int64_t>(out.size());
  const std::uint64_t row_base = static_cast<std::uint64_t>(r) << 32;
  for (std::int64_t c = 0; c < width; c += 2) {
    auto [a, b] = normal_pair(key, row_base | static_cast<std::uint64_t>(c >> 1));
    out[static_cast<std::size_t>(c)] = stddev * a;
    if (c + 1 < width) out[static_cast<std::size_t>(c + 1)] = stddev * b;
  }
}

/// out(x, y) = weight · Σ_{i ∈ [x, x+L-1], r ∈ [y, y+L-1]} row_r[i] for x, y ∈ [0, N).
/// `row(r, span)` must fill corner row r (length N + L - 1).
template <typename RowSource>
Grid<double> window_sum_field(std::int64_t N, std::int64_t L, double weight, RowSource&& row) {
  const std::int64_t W = N + L - 1;
  const auto n = static_cast<std::size_t>(N);
  const auto ring = static_cast<std::size_t>(L + 1);
  Grid<double> out(N, N);
  std::vector<double> buf(static_cast<std::size_t>(W));
  std::vector<double> prefix(static_cast<std::size_t>(W) + 1);
  // cumulative column sums CP_r = Σ_{r' < r} hs_{r'}, kept for the last L + 1 rows
  std::vector<double> cp(ring * n, 0.0);
  std::vector<double> running(n, 0.0);
  for (std::int64_t r = 0; r < W; ++r) {
    row(r, std::span<double>(buf));
    prefix[0] = 0.0;
    for (std::size_t c = 0; c < buf.size(); ++c) prefix[c + 1] = prefix[c] + buf[c];
    for (std::size_t x = 0; x < n; ++x) running[x] += prefix[x + static_cast<std::size_t>(L)] - prefix[x];
    const std::size_t slot = static_cast<std::size_t>(r + 1) % ring;
    std::copy(running.begin(), running.end(), cp.begin() + static_cast<std::ptrdiff_t>(slot * n));
    const std::int64_t y = r + 1 - L;  // CP_{y+L} now available
    if (y >= 0) {
      const std::size_t lo = static_cast<std::size_t>(y) % ring;
      const double* top = &cp[slot * n];
      const double* bottom = &cp[lo * n];
      for (std::size_t x = 0; x < n; ++x) out(static_cast<std::int64_t>(x), y) = weight * (top[x] - bottom[x]);
    }
  }
  return out;
}

inline void accumulate(Grid<double>& total, const Grid<double>& level) {
  auto& t = total.data();
  const auto& l = level.data();
  for (std::size_t i = 0; i < t.size(); ++i) t[i] += l[i];
}

/// Runs f(j) for j in [0, count) on up to `threads` workers.
template <typename F>
void parallel_levels(int count, int threads, F&& f) {
  if (threads <= 1 || count <= 1) {
    for (int j = 0; j < count; ++j) f(j);
    return;
  }
  std::vector<std::thread> pool;
  const int workers = std::min(threads, count);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int j = w; j < count; j += workers) f(j);
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Independent box variables b_{jk,B} for levels j = 0..m-1, fully materialized.
class NoiseHierarchy {
 public:
  NoiseHierarchy(GridSpec spec, std::uint64_t seed, std::vector<NoiseLayer> layers)
      : spec_(spec), seed_(seed), layers_(std::move(layers)) {}

  const GridSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<NoiseLayer>& layers() const { return layers_; }
  const NoiseLayer& layer(int j) const {
    if (j < 0 || j >= static_cast<int>(layers_.size()))
      throw Error("noise: level " + std::to_string(j) + " out of range [0, " + std::to_string(layers_.size()) + ")");
    return layers_[static_cast<std::size_t>(j)];
  }

 private:
  GridSpec spec_;
  std::uint64_t seed_;
  std::vector<NoiseLayer> layers_;
};

/// A realized field on V_N. Values are immutable once constructed.
class FieldSample {
 public:
  FieldSample(GridSpec spec, std::uint64_t seed, FieldKind kind, Grid<double> values)
      : spec_(spec), seed_(seed), kind_(kind), values_(std::move(values)) {
    if (values_.width() != spec_.N || values_.height() != spec_.N) throw Error("field: values are not N x N");
  }

  const GridSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  FieldKind kind() const { return kind_; }
  const Grid<double>& values() const { return values_; }
  double operator[](Vertex v) const { return values_[v]; }
  double at(Vertex v) const {
    if (!spec_.contains(v)) throw Error("field: vertex outside V_N");
    return values_[v];
  }

  friend bool operator==(const FieldSample&, const FieldSample&) = default;

 private:
  GridSpec spec_;
  std::uint64_t seed_;
  FieldKind kind_;
  Grid<double> values_;
};

inline NoiseLayer coarse_noise_layer(const GridSpec& spec, std::uint64_t seed, int j) {
  if (j < 0 || j >= spec.m) throw Error("noise: level out of range");
  NoiseLayer layer;
  layer.level = j;
  layer.side = std::int64_t{1} << (j * spec.k);
  layer.extent = spec.N + layer.side - 1;
  layer.stddev = std::ldexp(1.0, -j * spec.k);
  layer.values.resize(static_cast<std::size_t>(layer.extent * layer.extent));
  const std::uint64_t key = detail::level_key(seed, static_cast<std::uint64_t>(j));
  for (std::int64_t r = 0; r < layer.extent; ++r)
    detail::noise_row(key, layer.stddev,
                      r, std::span<double>(layer.values).subspan(static_cast<std::size_t>(r * layer.extent),
                                                                 static_cast<std::size_t>(layer.extent)));
  return layer;
}

inline NoiseHierarchy sample_noise(const GridSpec& spec, std::uint64_t seed) {
  std::vector<NoiseLayer> layers;
  layers.reserve(static_cast<std::size_t>(spec.m));
  for (int j = 0; j < spec.m; ++j) layers.push_back(coarse_noise_layer(spec, seed, j));
  return NoiseHierarchy(spec, seed, std::move(layers));
}

/// ψ_j on V_N from a materialized hierarchy.
inline Grid<double> level_field(const NoiseHierarchy& noise, int j) {
  const NoiseLayer& layer = noise.layer(j);
  const auto W = static_cast<std::size_t>(layer.extent);
  return detail::window_sum_field(noise.spec().N, layer.side, std::sqrt(static_cast<double>(noise.spec().k)),
                                  [&](std::int64_t r, std::span<double> out) {
                                    const auto* src = layer.values.data() + static_cast<std::size_t>(r) * W;
                                    std::copy(src, src + W, out.begin());
                                  });
}

/// ψ_j generated on the fly from (spec, seed); bit-identical to level_field(sample_noise(spec, seed), j).
inline Grid<double> level_field(const GridSpec& spec, std::uint64_t seed, int j) {
  if (j < 0 || j >= spec.m) throw Error("level_field: level " + std::to_string(j) + " out of range");
  const std::int64_t L = std::int64_t{1} << (j * spec.k);
  const double stddev = std::ldexp(1.0, -j * spec.k);
  const std::uint64_t key = detail::level_key(seed, static_cast<std::uint64_t>(j));
  return detail::window_sum_field(spec.N, L, std::sqrt(static_cast<double>(spec.k)),
                                  [&](std::int64_t r, std::span<double> out) { detail::noise_row(key, stddev, r, out); });
}

/// φ = Σ_{j<m} ψ_j, summed in increasing j.
inline FieldSample coarse_mbrw(const NoiseHierarchy& noise) {
  const GridSpec& spec = noise.spec();
  Grid<double> total(spec.N, spec.N, 0.0);
  for (int j = 0; j < spec.m; ++j) detail::accumulate(total, level_field(noise, j));
  return FieldSample(spec, noise.seed(), FieldKind::coarse_mbrw, std::move(total));
}

/// Streaming synthesis without materializing the noise; levels may run on
/// `threads` workers. Output is independent of `threads`.
inline FieldSample coarse_mbrw(const GridSpec& spec, std::uint64_t seed, int threads = 1) {
  Grid<double> total(spec.N, spec.N, 0.0);
  if (threads <= 1) {
    for (int j = 0; j < spec.m; ++j) detail::accumulate(total, level_field(spec, seed, j));
  } else {
    std::vector<Grid<double>> levels(static_cast<std::size_t>(spec.m));
    detail::parallel_levels(spec.m, threads,
                            [&](int j) { levels[static_cast<std::size_t>(j)] = level_field(spec, seed, j); });
    for (const auto& level : levels) detail::accumulate(total, level);
  }
  return FieldSample(spec, seed, FieldKind::coarse_mbrw, std::move(total));
}

/// Plain MBRW S_{N,z} = Σ_{j=0}^{n} Σ_{B ∋ z, side 2^j} b_{j,B}, Var b = 4^{-j}.
/// The returned sample carries spec (n, k = 1).
inline FieldSample mbrw(int n, std::uint64_t seed) {
  const GridSpec spec = build_grid_spec(n, 1);
  Grid<double> total(spec.N, spec.N, 0.0);
  for (int j = 0; j <= n; ++j) {
    const std::int64_t L = std::int64_t{1} << j;
    const double stddev = std::ldexp(1.0, -j);
    const std::uint64_t key = detail::level_key(seed, detail::kMbrwStreamTag | static_cast<std::uint64_t>(j));
    detail::accumulate(total, detail::window_sum_field(spec.N, L, 1.0, [&](std::int64_t r, std::span<double> out) {
                         detail::noise_row(key, stddev, r, out);
                       }));
  }
  return FieldSample(spec, seed, FieldKind::mbrw, std::move(total));
}

// ---------------------------------------------------------------------------
// Analytic covariance

/// Covariance of one level: k(1 - |Δx|/L)(1 - |Δy|/L) when |z - w| < L = 2^{jk}, else 0.
inline double level_covariance(int k, int j, Vertex z, Vertex w) {
  const double L = std::ldexp(1.0, j * k);
  const auto dx = static_cast<double>(std::llabs(z.x - w.x));
  const auto dy = static_cast<double>(std::llabs(z.y - w.y));
  if (std::max(dx, dy) >= L) return 0.0;
  return k * (1.0 - dx / L) * (1.0 - dy / L);
}

/// Exact σ_{z,w} = E φ_z φ_w of the K-coarse field.
inline double cov_analytic(const GridSpec& spec, Vertex z, Vertex w) {
  if (!spec.contains(z) || !spec.contains(w)) throw Error("cov_analytic: vertex outside V_N");
  double s = 0.0;
  for (int j = 0; j < spec.m; ++j) s += level_covariance(spec.k, j, z, w);
  return s;
}

/// Exact covariance of the plain MBRW (levels 0..n, unit k, no √k factor).
inline double mbrw_cov_analytic(int n, Vertex z, Vertex w) {
  double s = 0.0;
  for (int j = 0; j <= n; ++j) s += level_covariance(1, j, z, w);
  return s;
}

struct CovarianceReport {
  double max_violation_low = 0.0;   // max of -(gap), gap = km - log2(|z-w| ∨ 1) - σ
  double max_violation_high = 0.0;  // max of gap - (5k + 1)
  double a1_constant = 0.0;         // sup |σ - (n - log2(|z-w| ∨ 1))|
  double a1_bound = 0.0;            // 6k + 1
  std::uint64_t pairs_checked = 0;
  Vertex worst_low_z, worst_low_w;
  bool pass = true;
  bool a1_within_bound = true;
};

namespace detail {

inline void accumulate_bounds(CovarianceReport& rep, const GridSpec& spec, Vertex z, Vertex w, double sigma) {
  const double d = std::log2(static_cast<double>(std::max<std::int64_t>(linf(z, w), 1)));
  const double gap = spec.variance() - d - sigma;
  const double upper = 5.0 * spec.k + 1.0;
  if (-gap > rep.max_violation_low) {
    rep.max_violation_low = -gap;
    rep.worst_low_z = z;
    rep.worst_low_w = w;
  }
  rep.max_violation_high = std::max(rep.max_violation_high, gap - upper);
  rep.a1_constant = std::max(rep.a1_constant, std::abs(sigma - (spec.n - d)));
  ++rep.pairs_checked;
}

inline void finish(CovarianceReport& rep, const GridSpec& spec) {
  rep.a1_bound = 6.0 * spec.k + 1.0;
  rep.pass = rep.max_violation_low <= 0.0 && rep.max_violation_high <= 0.0;
  rep.a1_within_bound = rep.a1_constant <= rep.a1_bound;
}

}  // namespace detail

/// Checks 0 ≤ km − log2(|z−w| ∨ 1) − σ_{z,w} ≤ 5k + 1 on the given pairs.
inline CovarianceReport verify_log_bounds(const GridSpec& spec, std::span<const std::pair<Vertex, Vertex>> pairs) {
  CovarianceReport rep;
  for (const auto& [z, w] : pairs) detail::accumulate_bounds(rep, spec, z, w, cov_analytic(spec, z, w));
  detail::finish(rep, spec);
  return rep;
}

/// All pairs of V_N. σ depends on (z, w) only through (|Δx|, |Δy|), and every
/// offset in [0, N)^2 is realized, so offsets are enumerated instead of pairs.
inline CovarianceReport verify_log_bounds(const GridSpec& spec) {
  CovarianceReport rep;
  const Vertex origin{0, 0};
  for (std::int64_t dy = 0; dy < spec.N; ++dy)
    for (std::int64_t dx = 0; dx < spec.N; ++dx) {
      const Vertex w{dx, dy};
      detail::accumulate_bounds(rep, spec, origin, w, cov_analytic(spec, origin, w));
    }
  detail::finish(rep, spec);
  return rep;
}

// ---------------------------------------------------------------------------
// Conditioning on two sites

struct ConditionalCoefficients {
  double a = 0.0;
  double b = 0.0;
};

/// Solves km·a + σ_uv·b = σ_zu, σ_uv·a + km·b = σ_zv.
inline ConditionalCoefficients conditional_coeffs(const GridSpec& spec, Vertex u, Vertex v, Vertex z) {
  if (u == v) throw Error("conditional_coeffs: u == v makes the system singular");
  const double km = spec.variance();
  const double suv = cov_analytic(spec, u, v);
  const double szu = cov_analytic(spec, z, u);
  const double szv = cov_analytic(spec, z, v);
  const double den = km * km - suv * suv;
  if (!(den > 0.0)) throw Error("conditional_coeffs: non-positive determinant");
  return {(km * szu - szv * suv) / den, (km * szv - szu * suv) / den};
}

/// φ conditioned on φ_u = x, φ_v = y: φ_z + a_z (x − φ_u) + b_z (y − φ_v).
/// Sites u and v are set to x and y exactly.
inline FieldSample conditional_field(const FieldSample& field, Vertex u, Vertex v, double x, double y) {
  const GridSpec& spec = field.spec();
  if (u == v) throw Error("conditional_field: u == v");
  if (!spec.contains(u) || !spec.contains(v)) throw Error("conditional_field: vertex outside V_N");
  const double du = x - field[u];
  const double dv = y - field[v];
  Grid<double> out(spec.N, spec.N);
  for (std::int64_t zy = 0; zy < spec.N; ++zy)
    for (std::int64_t zx = 0; zx < spec.N; ++zx) {
      const Vertex z{zx, zy};
      if (z == u) {
        out[z] = x;
      } else if (z == v) {
        out[z] = y;
      } else {
        const auto c = conditional_coeffs(spec, u, v, z);
        out[z] = field[z] + (c.a * du + c.b * dv);
      }
    }
  return FieldSample(spec, field.seed(), FieldKind::conditional, std::move(out));
}

}  // namespace lcf
