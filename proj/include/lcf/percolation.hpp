#pragma once

// Site percolation on level sets: q-dependent open-site masks, good masks,
// box crossings and good paths joining two far-apart vertices.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "lcf/blocknest.hpp"
#include "lcf/field.hpp"
#include "lcf/fpp.hpp"
#include "lcf/grid.hpp"
#include "lcf/path.hpp"
#include "lcf/random.hpp"

namespace lcf {

struct SiteMask {
  Grid<std::uint8_t> open;
  std::string provenance = "custom";  // single token: ones, iid(p), dilated(p,r), good(c), ...

  bool operator[](Vertex v) const { return open[v] != 0; }
  std::int64_t width() const { return open.width(); }
  std::int64_t height() const { return open.height(); }
  std::size_t count() const { return static_cast<std::size_t>(std::count(open.data().begin(), open.data().end(), 1)); }

  friend bool operator==(const SiteMask&, const SiteMask&) = default;
};

inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

struct XiMode {
  enum class Kind { ones, iid, dilated } kind = Kind::ones;
  double p = 1.0;
  std::int64_t r = 0;

  std::string tag() const {
    switch (kind) {
      case Kind::ones: return "ones";
      case Kind::iid: return "iid(" + format_real(p) + ")";
      case Kind::dilated: return "dilated(" + format_real(p) + "," + std::to_string(r) + ")";
    }
    return "ones";
  }
  /// Dependence range: ξ at ℓ∞ distance greater than this are independent.
  std::int64_t dependence_range() const { return kind == Kind::dilated ? 2 * r : 0; }
  /// P(ξ_w = 1).
  double marginal() const {
    switch (kind) {
      case Kind::ones: return 1.0;
      case Kind::iid: return p;
      case Kind::dilated: return std::pow(p, static_cast<double>((2 * r + 1) * (2 * r + 1)));
    }
    return 1.0;
  }
};

/// Parses "ones", "iid(p)" or "dilated(p,r)".
inline XiMode parse_xi_mode(const std::string& s) {
  XiMode m;
  auto bad = [&] { return Error("xi mode: cannot parse '" + s + "'"); };
  auto arg = [&](const std::string& prefix) -> std::string {
    if (s.rfind(prefix, 0) != 0 || s.back() != ')') throw bad();
    return s.substr(prefix.size(), s.size() - prefix.size() - 1);
  };
  try {
    if (s == "ones") return m;
    if (s.rfind("iid(", 0) == 0) {
      m.kind = XiMode::Kind::iid;
      std::size_t used = 0;
      const std::string a = arg("iid(");
      m.p = std::stod(a, &used);
      if (used != a.size()) throw bad();
    } else if (s.rfind("dilated(", 0) == 0) {
      m.kind = XiMode::Kind::dilated;
      const std::string a = arg("dilated(");
      const auto comma = a.find(',');
      if (comma == std::string::npos) throw bad();
      std::size_t used = 0;
      m.p = std::stod(a.substr(0, comma), &used);
      if (used != comma) throw bad();
      const std::string rs = a.substr(comma + 1);
      m.r = std::stoll(rs, &used);
      if (used != rs.size()) throw bad();
    } else {
      throw bad();
    }
  } catch (const std::logic_error&) {
    throw bad();
  }
  if (!(m.p >= 0.0 && m.p <= 1.0)) throw Error("xi mode: p must lie in [0, 1]");
  if (m.r < 0) throw Error("xi mode: r must be >= 0");
  return m;
}

namespace detail {

inline constexpr std::uint64_t kXiStreamTag = std::uint64_t{3} << 40;

/// out(x, y) = min of in over the ℓ∞ ball of radius r, restricted to `in`'s extent.
inline Grid<std::uint8_t> ball_min(const Grid<std::uint8_t>& in, std::int64_t r) {
  if (r == 0) return in;
  const std::int64_t W = in.width(), H = in.height();
  Grid<std::uint8_t> rows(W, H);
  for (std::int64_t y = 0; y < H; ++y)
    for (std::int64_t x = 0; x < W; ++x) {
      std::uint8_t v = 1;
      for (std::int64_t i = std::max<std::int64_t>(0, x - r); i <= std::min(W - 1, x + r) && v; ++i) v = in(i, y);
      rows(x, y) = v;
    }
  Grid<std::uint8_t> out(W, H);
  for (std::int64_t y = 0; y < H; ++y)
    for (std::int64_t x = 0; x < W; ++x) {
      std::uint8_t v = 1;
      for (std::int64_t j = std::max<std::int64_t>(0, y - r); j <= std::min(H - 1, y + r) && v; ++j) v = rows(x, j);
      out(x, y) = v;
    }
  return out;
}

}  // namespace detail

/// Open-site mask ξ. Dilated masks take the minimum of an iid(p′) parent over
/// each (2r+1)² ball; the parent lives on [−r, N−1+r]² so every site sees a full ball.
inline SiteMask gen_xi(const GridSpec& spec, const XiMode& mode, std::uint64_t seed) {
  if (!(mode.p >= 0.0 && mode.p <= 1.0)) throw Error("gen_xi: p must lie in [0, 1]");
  if (mode.r < 0) throw Error("gen_xi: r must be >= 0");
  SiteMask mask;
  mask.provenance = mode.tag();
  const std::uint64_t key = derive_seed(seed, detail::kXiStreamTag);
  if (mode.kind == XiMode::Kind::ones) {
    mask.open = Grid<std::uint8_t>(spec.N, spec.N, 1);
    return mask;
  }
  const std::int64_t r = mode.kind == XiMode::Kind::dilated ? mode.r : 0;
  const std::int64_t W = spec.N + 2 * r;
  Grid<std::uint8_t> parent(W, W);
  for (std::size_t i = 0; i < parent.size(); ++i) parent.data()[i] = to_unit(stream_bits(key, i)) < mode.p ? 1 : 0;
  const Grid<std::uint8_t> dilated = detail::ball_min(parent, r);
  mask.open = Grid<std::uint8_t>(spec.N, spec.N);
  for (std::int64_t y = 0; y < spec.N; ++y)
    for (std::int64_t x = 0; x < spec.N; ++x) mask.open(x, y) = dilated(x + r, y + r);
  return mask;
}

/// ξ*_w = 1 iff ξ_z = 1 for every z ∈ V with |z − w| ≤ r.
inline SiteMask close_dilation(const SiteMask& mask, std::int64_t r) {
  if (r < 0) throw Error("close_dilation: r must be >= 0");
  if (r == 0) return mask;
  SiteMask out;
  out.open = detail::ball_min(mask.open, r);
  out.provenance = "closed(" + mask.provenance + "," + std::to_string(r) + ")";
  return out;
}

enum class LevelSide { upper, lower };

/// {φ ≤ c log N} ∧ ξ for `upper`, {φ ≥ c log N} ∧ ξ for `lower`.
inline SiteMask good_mask(const FieldSample& field, double c, const SiteMask& xi, LevelSide side = LevelSide::upper) {
  const GridSpec& spec = field.spec();
  if (xi.width() != spec.N || xi.height() != spec.N) throw Error("good_mask: mask and field sizes differ");
  const double t = c * spec.n * std::numbers::ln2;
  SiteMask out;
  out.provenance = "good(" + format_real(c) + ")";
  out.open = Grid<std::uint8_t>(spec.N, spec.N);
  const auto& phi = field.values().data();
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const bool level = side == LevelSide::upper ? phi[i] <= t : phi[i] >= t;
    out.open.data()[i] = (level && xi.open.data()[i]) ? 1 : 0;
  }
  return out;
}

/// Minimum number of open sites over all 4-connected crossings of `rect`.
inline CrossingMin min_good_count(const SiteMask& mask, const Rect& rect, Direction dir) {
  if (rect.empty()) throw Error("min_good_count: degenerate rectangle");
  Grid<std::int64_t> w(mask.width(), mask.height());
  for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = mask.open.data()[i];
  return integer_weighted_crossing_min(w, rect, dir);
}

// ---------------------------------------------------------------------------
// Breadth-first crossings

/// Shortest (by vertex count) path inside `rect` through allowed sites from
/// any of `sources` to a vertex with is_target; sources must already be allowed.
template <typename Allowed, typename IsTarget>
std::optional<LatticePath> bfs_path(const Rect& rect, const std::vector<Vertex>& sources, Allowed&& allowed,
                                    IsTarget&& is_target) {
  if (rect.empty()) return std::nullopt;
  const std::int64_t W = rect.width();
  auto local = [&](Vertex v) { return static_cast<std::size_t>((v.y - rect.y0) * W + (v.x - rect.x0)); };
  auto global = [&](std::size_t i) {
    return Vertex{rect.x0 + static_cast<std::int64_t>(i) % W, rect.y0 + static_cast<std::int64_t>(i) / W};
  };
  std::vector<std::int64_t> parent(static_cast<std::size_t>(W * rect.height()), -2);
  std::vector<std::size_t> queue;
  for (const Vertex& s : sources) {
    if (!rect.contains(s) || !allowed(s)) continue;
    const std::size_t i = local(s);
    if (parent[i] != -2) continue;
    parent[i] = -1;
    queue.push_back(i);
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t i = queue[head];
    const Vertex at = global(i);
    if (is_target(at)) {
      std::vector<Vertex> rev;
      for (std::int64_t p = static_cast<std::int64_t>(i); p != -1; p = parent[static_cast<std::size_t>(p)])
        rev.push_back(global(static_cast<std::size_t>(p)));
      std::reverse(rev.begin(), rev.end());
      return LatticePath(std::move(rev));
    }
    for_each_neighbor(at, rect, [&](Vertex w) {
      const std::size_t j = local(w);
      if (parent[j] != -2 || !allowed(w)) return;
      parent[j] = static_cast<std::int64_t>(i);
      queue.push_back(j);
    });
  }
  return std::nullopt;
}

/// Shortest open crossing of `rect`: top row to bottom row (up_down) or left column to right column (left_right).
inline std::optional<LatticePath> shortest_crossing(const SiteMask& mask, const Rect& rect, Direction dir) {
  std::vector<Vertex> sources;
  if (dir == Direction::up_down)
    for (std::int64_t x = rect.x0; x <= rect.x1; ++x) sources.push_back({x, rect.y1});
  else
    for (std::int64_t y = rect.y0; y <= rect.y1; ++y) sources.push_back({rect.x0, y});
  return bfs_path(
      rect, sources, [&](Vertex w) { return mask[w]; },
      [&](Vertex w) { return dir == Direction::up_down ? w.y == rect.y0 : w.x == rect.x1; });
}

/// The 4L × L rectangle B́ = ∪_{a=0}^{3} (B + (aL, 0)).
inline Rect acute(const DyadicBox& box) {
  const Rect b = box.rect();
  return {b.x0, b.y0, b.x0 + 4 * box.side() - 1, b.y1};
}

struct CrossingResult {
  DyadicBox box;
  Rect acute_rect;
  bool exists = false;
  std::optional<LatticePath> vertical;    // Q^V ∈ UD(B)
  std::optional<LatticePath> horizontal;  // Q^H ∈ LR(B́)
  std::size_t cardinality = 0;            // |Q^V| + |Q^H| when found
  bool vertical_bound = false;            // |Q^V| ≤ 4 L^{1+δ}
  bool horizontal_bound = false;          // |Q^H| ≤ 16 L^{1+δ}
};

inline CrossingResult find_crossing(const SiteMask& mask, const DyadicBox& box, double delta) {
  CrossingResult res;
  res.box = box;
  res.acute_rect = acute(box);
  const Rect grid = mask.open.bounds();
  if (grid.intersect(res.acute_rect) != res.acute_rect) throw Error("find_crossing: B or its 4L x L extension leaves the grid");
  res.vertical = shortest_crossing(mask, box.rect(), Direction::up_down);
  res.horizontal = shortest_crossing(mask, res.acute_rect, Direction::left_right);
  res.exists = res.vertical.has_value() && res.horizontal.has_value();
  const double L1d = std::pow(static_cast<double>(box.side()), 1.0 + delta);
  if (res.vertical) res.vertical_bound = static_cast<double>(res.vertical->size()) <= 4.0 * L1d;
  if (res.horizontal) res.horizontal_bound = static_cast<double>(res.horizontal->size()) <= 16.0 * L1d;
  if (res.exists) res.cardinality = res.vertical->size() + res.horizontal->size();
  return res;
}

struct CrossingFrequency {
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double frequency = 0.0;
  double bound = 0.0;  // 1 − 9 e^{−ζ1 ℓ}, ζ1 = (log² 2 / 2) δ²
};

/// Monte Carlo frequency of a B-crossing in the good set {φ ≤ 7δ log N} ∧ ξ, for the level-ell box at the origin.
inline CrossingFrequency crossing_frequency(const GridSpec& spec, double delta, const XiMode& xi, int ell,
                                            std::uint64_t trials, std::uint64_t seed) {
  if (ell < 0 || (std::int64_t{4} << ell) > spec.N) throw Error("crossing_frequency: box level out of range");
  CrossingFrequency f;
  f.trials = trials;
  const DyadicBox box{ell, {0, 0}};
  for (std::uint64_t t = 0; t < trials; ++t) {
    const std::uint64_t s = derive_seed(seed, t);
    const auto field = coarse_mbrw(spec, s);
    const auto good = good_mask(field, 7.0 * delta, gen_xi(spec, xi, s));
    if (find_crossing(good, box, delta).exists) ++f.successes;
  }
  f.frequency = trials ? static_cast<double>(f.successes) / static_cast<double>(trials) : 0.0;
  const double zeta1 = 0.5 * std::numbers::ln2 * std::numbers::ln2 * delta * delta;
  f.bound = 1.0 - 9.0 * std::exp(-zeta1 * ell);
  return f;
}

// ---------------------------------------------------------------------------
// Good paths

/// One of the eight lattice symmetries of V_N; frame = flips ∘ transpose (original).
struct Frame {
  std::int64_t N = 0;
  bool transpose = false;
  bool flip_x = false;
  bool flip_y = false;

  Vertex to_frame(Vertex p) const {
    if (transpose) std::swap(p.x, p.y);
    if (flip_x) p.x = N - 1 - p.x;
    if (flip_y) p.y = N - 1 - p.y;
    return p;
  }
  Vertex to_original(Vertex p) const {
    if (flip_y) p.y = N - 1 - p.y;
    if (flip_x) p.x = N - 1 - p.x;
    if (transpose) std::swap(p.x, p.y);
    return p;
  }
  Rect to_original(const Rect& r) const {
    const Vertex a = to_original(Vertex{r.x0, r.y0});
    const Vertex b = to_original(Vertex{r.x1, r.y1});
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x), std::max(a.y, b.y)};
  }
};

struct GoodPathBounds {
  double pn_bound = 0.0;  // 40 N^{(1+δ)δ²}
  double pf_bound = 0.0;  // N^{1+2δ}
  std::size_t pn_size = 0;
  std::size_t pf_size = 0;
  std::vector<std::size_t> q_sizes;  // |Q^ℓ| for ℓ = ℓ0+1..ℓ1
  std::vector<double> q_bounds;      // 40 · 2^{(1+δ)ℓ}
  double pf_cov_max = 0.0;           // max σ_{z,u} + σ_{z,v} over P^F
  double pf_cov_bound = 0.0;         // 4 n κ
  std::vector<double> q_cov_max;     // per ℓ
  std::vector<double> q_cov_bounds;  // n(1+κ) + 1 − ℓ
  bool cardinality_ok = true;        // (i)
  bool covariance_ok = true;         // (ii)
  bool path_ok = true;               // |P| ≤ N^{1+2δ}
};

struct GoodPathResult {
  bool found = false;
  std::string failure;  // which construction step lacked a crossing
  LatticePath path;
  int ell0 = 0, ell1 = 0, ell2 = 0;
  std::int64_t C = 0;  // ⌈N^{1−2κ}⌉
  std::vector<Vertex> PN, PF;
  std::vector<std::vector<Vertex>> Q;  // Q[i] is Q^ℓ, ℓ = ℓ0 + 1 + i
  bool u_good = true, v_good = true;   // endpoints are admitted regardless
  double cardinality_bound = 0.0;      // N^{1+2δ}
  GoodPathBounds bounds;
};

namespace detail {

struct Ladder {
  std::vector<std::vector<Vertex>> crossings;  // crossings[i]: Q^{·, ℓ0 + i} (vertical ∪ horizontal)
  std::string failure;
  int ell2 = 0;
};

/// Ladder of crossings from `a` to the column X (frame coordinates), with a
/// left of X and a in the lower half. All outputs are in original coordinates.
inline Ladder build_ladder(const SiteMask& good, const Frame& f, Vertex a_orig, Vertex target_orig, int ell0,
                           std::int64_t X, const std::string& side) {
  Ladder lad;
  const Vertex a = f.to_frame(a_orig);
  auto allowed = [&](Vertex w) { return good[w] || w == a_orig || w == target_orig; };
  auto in_frame_ud = [&](const Rect& rect) -> std::optional<LatticePath> {
    std::vector<Vertex> sources;
    for (std::int64_t x = rect.x0; x <= rect.x1; ++x) sources.push_back(f.to_original(Vertex{x, rect.y1}));
    return bfs_path(f.to_original(rect), sources, allowed, [&](Vertex w) { return f.to_frame(w).y == rect.y0; });
  };
  auto in_frame_lr = [&](const Rect& rect) -> std::optional<LatticePath> {
    std::vector<Vertex> sources;
    for (std::int64_t y = rect.y0; y <= rect.y1; ++y) sources.push_back(f.to_original(Vertex{rect.x0, y}));
    return bfs_path(f.to_original(rect), sources, allowed, [&](Vertex w) { return f.to_frame(w).x == rect.x1; });
  };
  const double span = static_cast<double>(X - a.x + (std::int64_t{2} << ell0) + 1) / 6.0;
  lad.ell2 = static_cast<int>(std::ceil(std::log2(span)));
  if (lad.ell2 < ell0) throw Error("stitch_good_path: ladder degenerates (l2 < l0)");
  if (a.y + (std::int64_t{1} << lad.ell2) > f.N) throw Error("stitch_good_path: ladder leaves V_N");
  for (int ell = ell0; ell <= lad.ell2; ++ell) {
    const std::int64_t L = std::int64_t{1} << ell;
    const std::int64_t x0 = a.x + (L << 1) - (std::int64_t{2} << ell0);
    const Rect box{x0, a.y, x0 + L - 1, a.y + L - 1};
    Rect wide{x0, a.y, x0 + 4 * L - 1, a.y + L - 1};
    if (ell == lad.ell2) wide.x1 = std::min(wide.x1, X);
    if (box.x1 > X || wide.x1 > f.N - 1) throw Error("stitch_good_path: ladder box crosses the target column");
    std::optional<LatticePath> vert;
    if (ell == ell0) {
      const Rect box_orig = f.to_original(box);
      vert = bfs_path(box_orig, {a_orig}, allowed, [&](Vertex w) { return f.to_frame(w).y == box.y1; });
    } else {
      vert = in_frame_ud(box);
    }
    auto horiz = in_frame_lr(wide);
    if (!vert || !horiz) {
      lad.failure = side + " ladder: no crossing of the level-" + std::to_string(ell) + " box";
      return lad;
    }
    std::vector<Vertex> q = vert->vertices();
    q.insert(q.end(), horiz->vertices().begin(), horiz->vertices().end());
    lad.crossings.push_back(std::move(q));
  }
  return lad;
}

}  // namespace detail

/// Good path from u to v assembled from ladders of box crossings around each
/// endpoint and one vertical crossing of the middle strip, with the P^N / P^F /
/// Q^ℓ decomposition and its cardinality and covariance bounds evaluated.
/// Sites are good when φ ≤ 7δ log N and ξ = 1; u and v are admitted regardless.
inline GoodPathResult stitch_good_path(const FieldSample& field, const SiteMask& xi, Vertex u, Vertex v, double delta,
                                       double kappa) {
  const GridSpec& spec = field.spec();
  if (!(delta > 0.0 && delta < 1.0)) throw Error("stitch_good_path: delta must lie in (0, 1)");
  if (!(kappa > 0.0 && kappa < 0.25 * delta * delta)) throw Error("stitch_good_path: need 0 < kappa < delta^2/4");
  if (!spec.contains(u) || !spec.contains(v)) throw Error("stitch_good_path: endpoint outside V_N");
  const double Nd = static_cast<double>(spec.N);
  if (static_cast<double>(linf(u, v)) <= std::pow(Nd, 1.0 - kappa))
    throw Error("stitch_good_path: endpoints too close (|u-v| <= N^{1-kappa})");

  GoodPathResult res;
  const SiteMask good = good_mask(field, 7.0 * delta, xi);
  res.u_good = good[u];
  res.v_good = good[v];
  res.ell0 = spec.k * static_cast<int>(std::floor(delta * delta * spec.m));
  res.C = static_cast<std::int64_t>(std::ceil(std::pow(Nd, 1.0 - 2.0 * kappa)));
  res.ell1 = static_cast<int>(std::floor(std::log2(static_cast<double>(res.C + (std::int64_t{2} << res.ell0))))) - 1;
  res.cardinality_bound = std::pow(Nd, 1.0 + 2.0 * delta);

  // base frame: v1 − u1 = |u − v|
  Frame base{spec.N};
  base.transpose = std::llabs(v.y - u.y) > std::llabs(v.x - u.x);
  base.flip_x = base.to_frame(v).x < base.to_frame(u).x;
  const Vertex ub = base.to_frame(u), vb = base.to_frame(v);
  const std::int64_t left = ub.x + res.C, right = vb.x - res.C;
  if (left > right) throw Error("stitch_good_path: parameter regime invalid (|u-v| <= 2 ceil(N^{1-2kappa}))");

  Frame fu = base;
  fu.flip_y = ub.y >= spec.N / 2;
  Frame fv = base;
  fv.flip_x = !base.flip_x;
  fv.flip_y = vb.y >= spec.N / 2;

  auto lu = detail::build_ladder(good, fu, u, v, res.ell0, right, "u");
  if (!lu.failure.empty()) {
    res.failure = lu.failure;
    return res;
  }
  // in v's frame x is mirrored, so the strip edge u1 + C sits at N − 1 − (u1 + C)
  auto lv = detail::build_ladder(good, fv, v, u, res.ell0, spec.N - 1 - left, "v");
  if (!lv.failure.empty()) {
    res.failure = lv.failure;
    return res;
  }
  res.ell2 = lu.ell2;

  auto allowed = [&](Vertex w) { return good[w] || w == u || w == v; };
  const Rect strip{left, 0, right, spec.N - 1};
  std::vector<Vertex> sources;
  for (std::int64_t x = strip.x0; x <= strip.x1; ++x) sources.push_back(base.to_original(Vertex{x, strip.y1}));
  auto pv = bfs_path(base.to_original(strip), sources, allowed, [&](Vertex w) { return base.to_frame(w).y == 0; });
  if (!pv) {
    res.failure = "no vertical crossing of the middle strip";
    return res;
  }

  // union of all pieces, then the shortest u–v path inside it
  Grid<std::uint8_t> in_union(spec.N, spec.N, 0);
  for (const auto* lad : {&lu, &lv})
    for (const auto& q : lad->crossings)
      for (const auto& w : q) in_union[w] = 1;
  for (const auto& w : pv->vertices()) in_union[w] = 1;
  auto p = bfs_path(
      Rect{0, 0, spec.N - 1, spec.N - 1}, {u}, [&](Vertex w) { return in_union[w] != 0; },
      [&](Vertex w) { return w == v; });
  if (!p) {
    res.failure = "pieces do not connect u and v";
    return res;
  }
  res.found = true;
  res.path = std::move(*p);

  // P^N: level-ℓ0 crossings; Q^ℓ: level-ℓ crossings, ℓ0 < ℓ ≤ ℓ1; P^F: the rest of the pieces
  const int nq = std::max(0, res.ell1 - res.ell0);
  Grid<std::uint8_t> covered(spec.N, spec.N, 0);
  auto collect = [&](int ell) {
    std::vector<Vertex> out;
    for (const auto* lad : {&lu, &lv}) {
      const auto i = static_cast<std::size_t>(ell - res.ell0);
      if (i < lad->crossings.size()) out.insert(out.end(), lad->crossings[i].begin(), lad->crossings[i].end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    for (const auto& w : out) covered[w] = 1;
    return out;
  };
  res.PN = collect(res.ell0);
  for (int ell = res.ell0 + 1; ell <= res.ell0 + nq; ++ell) res.Q.push_back(collect(ell));
  for (std::int64_t y = 0; y < spec.N; ++y)
    for (std::int64_t x = 0; x < spec.N; ++x)
      if (in_union(x, y) && !covered(x, y)) res.PF.push_back({x, y});

  GoodPathBounds& b = res.bounds;
  b.pn_bound = 40.0 * std::pow(Nd, (1.0 + delta) * delta * delta);
  b.pf_bound = std::pow(Nd, 1.0 + 2.0 * delta);
  b.pn_size = res.PN.size();
  b.pf_size = res.PF.size();
  b.pf_cov_bound = 4.0 * spec.n * kappa;
  b.cardinality_ok = static_cast<double>(b.pn_size) <= b.pn_bound && static_cast<double>(b.pf_size) <= b.pf_bound;
  auto cov_sum = [&](Vertex z) { return cov_analytic(spec, z, u) + cov_analytic(spec, z, v); };
  for (const auto& z : res.PF) b.pf_cov_max = std::max(b.pf_cov_max, cov_sum(z));
  b.covariance_ok = b.pf_cov_max <= b.pf_cov_bound;
  for (int i = 0; i < nq; ++i) {
    const int ell = res.ell0 + 1 + i;
    const auto& q = res.Q[static_cast<std::size_t>(i)];
    b.q_sizes.push_back(q.size());
    b.q_bounds.push_back(40.0 * std::pow(2.0, (1.0 + delta) * ell));
    if (static_cast<double>(q.size()) > b.q_bounds.back()) b.cardinality_ok = false;
    double mx = 0.0;
    for (const auto& z : q) mx = std::max(mx, cov_sum(z));
    b.q_cov_max.push_back(mx);
    b.q_cov_bounds.push_back(spec.n * (1.0 + kappa) + 1.0 - ell);
    if (mx > b.q_cov_bounds.back()) b.covariance_ok = false;
  }
  b.path_ok = static_cast<double>(res.path.size()) <= res.cardinality_bound;
  return res;
}

/// Shortest path from u to v inside good_mask(field, c, xi) ∪ {u, v}; absence is reported, not thrown.
inline GoodPathResult find_good_path(const FieldSample& field, const SiteMask& xi, Vertex u, Vertex v, double c,
                                     double delta = 0.0) {
  const GridSpec& spec = field.spec();
  if (!spec.contains(u) || !spec.contains(v)) throw Error("find_good_path: endpoint outside V_N");
  const SiteMask good = good_mask(field, c, xi);
  GoodPathResult res;
  res.u_good = good[u];
  res.v_good = good[v];
  res.cardinality_bound = std::pow(static_cast<double>(spec.N), 1.0 + 2.0 * delta);
  auto p = bfs_path(
      Rect{0, 0, spec.N - 1, spec.N - 1}, {u}, [&](Vertex w) { return good[w] || w == u || w == v; },
      [&](Vertex w) { return w == v; });
  if (!p) {
    res.failure = "u and v lie in different good components";
    return res;
  }
  res.found = true;
  res.path = std::move(*p);
  res.bounds.path_ok = static_cast<double>(res.path.size()) <= res.cardinality_bound;
  return res;
}

}  // namespace lcf
