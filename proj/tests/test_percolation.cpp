#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "lcf/percolation.hpp"

using namespace lcf;

namespace {

SiteMask random_mask(std::int64_t w, std::int64_t h, double p, Rng& rng) {
  SiteMask m;
  m.open = Grid<std::uint8_t>(w, h);
  for (auto& x : m.open.data()) x = rng.bernoulli(p) ? 1 : 0;
  return m;
}

// All self-avoiding crossings, minimum open count.
std::int64_t brute_min_good(const SiteMask& m, const Rect& r, Direction dir) {
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  std::vector<char> on(m.open.size(), 0);
  std::function<void(Vertex, std::int64_t)> go = [&](Vertex at, std::int64_t acc) {
    if (acc >= best) return;
    if (dir == Direction::left_right ? at.x == r.x1 : at.y == r.y0) {
      best = acc;
      return;
    }
    for_each_neighbor(at, r, [&](Vertex nb) {
      if (on[m.open.index(nb)]) return;
      on[m.open.index(nb)] = 1;
      go(nb, acc + m[nb]);
      on[m.open.index(nb)] = 0;
    });
  };
  for (std::int64_t y = r.y0; y <= r.y1; ++y)
    for (std::int64_t x = r.x0; x <= r.x1; ++x) {
      if (dir == Direction::left_right ? x != r.x0 : y != r.y1) continue;
      on[m.open.index({x, y})] = 1;
      go({x, y}, m[{x, y}]);
      on[m.open.index({x, y})] = 0;
    }
  return best;
}

}  // namespace

TEST(XiMode, ParseAndTag) {
  EXPECT_EQ(parse_xi_mode("ones").kind, XiMode::Kind::ones);
  const auto a = parse_xi_mode("iid(0.9)");
  EXPECT_EQ(a.kind, XiMode::Kind::iid);
  EXPECT_DOUBLE_EQ(a.p, 0.9);
  const auto b = parse_xi_mode("dilated(0.95,1)");
  EXPECT_EQ(b.r, 1);
  EXPECT_EQ(b.tag(), "dilated(0.95,1)");
  EXPECT_NEAR(b.marginal(), std::pow(0.95, 9), 1e-15);
  EXPECT_EQ(b.dependence_range(), 2);
  EXPECT_THROW(parse_xi_mode("iid(1.5)"), Error);
  EXPECT_THROW(parse_xi_mode("dilated(0.9)"), Error);
  EXPECT_THROW(parse_xi_mode("iid(x)"), Error);
  EXPECT_THROW(parse_xi_mode("bernoulli"), Error);
}

TEST(Xi, OnesAndIidMarginal) {
  const auto spec = build_grid_spec(7, 1);
  EXPECT_EQ(gen_xi(spec, XiMode{}, 1).count(), spec.vertex_count());
  const auto m = gen_xi(spec, parse_xi_mode("iid(0.7)"), 1);
  const double f = m.count() / double(spec.vertex_count());
  EXPECT_NEAR(f, 0.7, 5.0 * std::sqrt(0.21 / spec.vertex_count()));
  EXPECT_EQ(m.provenance, "iid(0.7)");
}

TEST(Xi, DilatedIsBallMinimumOfParent) {
  const auto spec = build_grid_spec(4, 1);
  const XiMode mode = parse_xi_mode("dilated(0.8,1)");
  const auto m = gen_xi(spec, mode, 33);
  // regenerate the parent on [−1, N]² from the documented stream
  const std::uint64_t key = derive_seed(33, detail::kXiStreamTag);
  const std::int64_t W = spec.N + 2;
  auto parent = [&](std::int64_t x, std::int64_t y) {
    return to_unit(stream_bits(key, static_cast<std::uint64_t>((y + 1) * W + (x + 1)))) < 0.8;
  };
  for (std::int64_t y = 0; y < spec.N; ++y)
    for (std::int64_t x = 0; x < spec.N; ++x) {
      bool all = true;
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dx = -1; dx <= 1; ++dx) all = all && parent(x + dx, y + dy);
      EXPECT_EQ((m[{x, y}]), all);
    }
}

TEST(Xi, DilatedMarginal) {
  const auto spec = build_grid_spec(6, 1);
  const XiMode mode = parse_xi_mode("dilated(0.95,1)");
  double open = 0, total = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    open += gen_xi(spec, mode, s).count();
    total += spec.vertex_count();
  }
  const double p = mode.marginal();
  // sites within range 2 are correlated; allow for it with a wide window
  EXPECT_NEAR(open / total, p, 25.0 * std::sqrt(p * (1 - p) / total));
}

TEST(Xi, DilatedIndependenceBeyondRange) {
  const auto spec = build_grid_spec(3, 1);
  const XiMode mode = parse_xi_mode("dilated(0.9,1)");
  const int M = 100000;
  double sa = 0, sb = 0, sab = 0, sc = 0, sac = 0;
  for (int s = 0; s < M; ++s) {
    const auto m = gen_xi(spec, mode, static_cast<std::uint64_t>(s));
    const double a = m[{2, 2}], b = m[{5, 2}], c = m[{4, 3}];
    sa += a;
    sb += b;
    sab += a * b;
    sc += c;
    sac += a * c;
  }
  auto corr = [&](double x, double y, double xy) {
    const double mx = x / M, my = y / M;
    return (xy / M - mx * my) / std::sqrt(mx * (1 - mx) * my * (1 - my));
  };
  EXPECT_LT(std::abs(corr(sa, sb, sab)), 5.0 / std::sqrt(M));  // separation 3 > 2r
  EXPECT_GT(corr(sa, sc, sac), 10.0 / std::sqrt(M));           // separation 2: overlapping balls
}

TEST(CloseDilation, Definition) {
  Rng rng(8);
  auto m = random_mask(9, 9, 0.85, rng);
  EXPECT_EQ(close_dilation(m, 0), m);
  const auto d = close_dilation(m, 1);
  for (std::int64_t y = 0; y < 9; ++y)
    for (std::int64_t x = 0; x < 9; ++x) {
      bool all = true;
      for (std::int64_t yy = 0; yy < 9; ++yy)
        for (std::int64_t xx = 0; xx < 9; ++xx)
          if (linf({x, y}, {xx, yy}) <= 1) all = all && m[{xx, yy}];
      EXPECT_EQ((d[{x, y}]), all);
    }
  SiteMask one;
  one.open = Grid<std::uint8_t>(5, 5, 1);
  EXPECT_EQ(close_dilation(one, 2).count(), 25u);
  one.open(2, 2) = 0;
  const auto c = close_dilation(one, 1);
  EXPECT_EQ(c.count(), 16u);
  for (std::int64_t y = 1; y <= 3; ++y)
    for (std::int64_t x = 1; x <= 3; ++x) EXPECT_FALSE((c[{x, y}]));
}

TEST(GoodMask, Thresholds) {
  const auto spec = build_grid_spec(3, 1);
  const auto f = coarse_mbrw(spec, 4);
  const auto ones = gen_xi(spec, XiMode{}, 0);
  const auto& v = f.values().data();
  const double mx = *std::max_element(v.begin(), v.end()), mn = *std::min_element(v.begin(), v.end());
  const double logN = spec.n * std::log(2.0);
  EXPECT_EQ(good_mask(f, mx / logN + 1e-9, ones).count(), 64u);
  EXPECT_EQ(good_mask(f, mn / logN - 1e-9, ones).count(), 0u);
  const double delta = 0.3;
  std::size_t brute = 0;
  for (double x : v) brute += x <= 4 * delta * logN;
  EXPECT_EQ(good_mask(f, 4 * delta, ones).count(), brute);
  std::size_t lower = 0;
  for (double x : v) lower += x >= -4 * delta * logN;
  EXPECT_EQ(good_mask(f, -4 * delta, ones, LevelSide::lower).count(), lower);
}

TEST(MinGoodCount, MatchesBruteForce) {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const auto m = random_mask(5, 5, 0.5, rng);
    const auto dir = t % 2 ? Direction::left_right : Direction::up_down;
    const auto res = min_good_count(m, {0, 0, 4, 4}, dir);
    EXPECT_EQ(res.total, brute_min_good(m, {0, 0, 4, 4}, dir));
  }
}

TEST(MinGoodCount, Trivial) {
  SiteMask m;
  m.open = Grid<std::uint8_t>(7, 4, 1);
  EXPECT_EQ(min_good_count(m, {0, 0, 6, 3}, Direction::left_right).total, 7);
  m.open = Grid<std::uint8_t>(7, 4, 0);
  EXPECT_EQ(min_good_count(m, {0, 0, 6, 3}, Direction::left_right).total, 0);
  EXPECT_THROW(min_good_count(m, {3, 0, 2, 3}, Direction::left_right), Error);
}

TEST(Crossing, FullAndBlocked) {
  SiteMask m;
  m.open = Grid<std::uint8_t>(32, 32, 1);
  const DyadicBox b{3, {0, 8}};
  auto r = find_crossing(m, b, 0.3);
  EXPECT_TRUE(r.exists);
  EXPECT_EQ(r.vertical->size(), 8u);
  EXPECT_EQ(r.horizontal->size(), 32u);
  EXPECT_TRUE(r.vertical_bound && r.horizontal_bound);
  for (std::int64_t y = 0; y < 32; ++y) m.open(20, y) = 0;
  r = find_crossing(m, b, 0.3);
  EXPECT_FALSE(r.exists);
  EXPECT_TRUE(r.vertical.has_value());
  EXPECT_FALSE(r.horizontal.has_value());
  EXPECT_THROW(find_crossing(m, DyadicBox{3, {8, 0}}, 0.3), Error);
}

TEST(Crossing, PathsStayInMaskAndCross) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto m = random_mask(64, 16, 0.75, rng);
    const DyadicBox b{4, {0, 0}};
    const auto r = find_crossing(m, b, 0.3);
    for (const auto* p : {&r.vertical, &r.horizontal}) {
      if (!*p) continue;
      for (const auto& v : (*p)->vertices()) EXPECT_TRUE(m[v]);
    }
    if (r.vertical) {
      EXPECT_EQ(r.vertical->front().y, 15);
      EXPECT_EQ(r.vertical->back().y, 0);
    }
    if (r.horizontal) {
      EXPECT_EQ(r.horizontal->front().x, 0);
      EXPECT_EQ(r.horizontal->back().x, 63);
    }
  }
}

TEST(Frame, RoundTrip) {
  for (unsigned s = 0; s < 8; ++s) {
    const Frame f{16, bool(s & 4), bool(s & 1), bool(s & 2)};
    for (const Vertex v : {Vertex{0, 0}, Vertex{3, 11}, Vertex{15, 2}}) EXPECT_EQ(f.to_original(f.to_frame(v)), v);
    const Rect r{2, 3, 5, 9};
    const Rect o = f.to_original(r);
    EXPECT_EQ(o.width() * o.height(), r.width() * r.height());
  }
}

TEST(GoodPath, BfsOnOpenGrid) {
  const auto spec = build_grid_spec(5, 1);
  const auto f = coarse_mbrw(spec, 1);
  const auto ones = gen_xi(spec, XiMode{}, 0);
  const auto r = find_good_path(f, ones, {1, 2}, {20, 30}, 1e9);
  ASSERT_TRUE(r.found);
  EXPECT_EQ(r.path.size(), static_cast<std::size_t>(l1({1, 2}, {20, 30}) + 1));
}

TEST(GoodPath, SeparatedComponentsReportedAbsent) {
  const auto spec = build_grid_spec(4, 1);
  const auto f = coarse_mbrw(spec, 1);
  auto xi = gen_xi(spec, XiMode{}, 0);
  for (std::int64_t y = 0; y < 16; ++y) xi.open(8, y) = 0;
  const auto r = find_good_path(f, xi, {0, 0}, {15, 15}, 1e9);
  EXPECT_FALSE(r.found);
  EXPECT_FALSE(r.failure.empty());
}

TEST(GoodPath, StitchedPathOnOpenGrid) {
  const auto spec = build_grid_spec(12, 5);
  const auto f = coarse_mbrw(spec, 17);
  const auto ones = gen_xi(spec, XiMode{}, 0);
  const Vertex u{100, 3000}, v{3900, 2500};
  const auto r = stitch_good_path(f, ones, u, v, 0.45, 0.05);
  ASSERT_TRUE(r.found) << r.failure;
  EXPECT_EQ(r.ell0, 0);
  EXPECT_EQ(r.ell1, 9);
  EXPECT_EQ(r.C, 1783);
  EXPECT_EQ(r.path.front(), u);
  EXPECT_EQ(r.path.back(), v);
  EXPECT_TRUE(r.bounds.cardinality_ok);
  EXPECT_TRUE(r.bounds.covariance_ok);
  EXPECT_TRUE(r.bounds.path_ok);
  const auto good = good_mask(f, 7 * 0.45, ones);
  for (const auto& w : r.path.vertices()) EXPECT_TRUE(good[w] || w == u || w == v);
  // the path is covered by the decomposition
  Grid<std::uint8_t> cover(spec.N, spec.N, 0);
  for (const auto& w : r.PN) cover[w] = 1;
  for (const auto& w : r.PF) cover[w] = 1;
  for (const auto& q : r.Q)
    for (const auto& w : q) cover[w] = 1;
  for (const auto& w : r.path.vertices()) EXPECT_TRUE(cover[w]);
  const auto bfs = find_good_path(f, ones, u, v, 7 * 0.45);
  ASSERT_TRUE(bfs.found);
  EXPECT_LE(bfs.path.size(), r.path.size());
}

TEST(GoodPath, StitchRejectsBadParameters) {
  const auto spec = build_grid_spec(12, 5);
  const auto f = coarse_mbrw(spec, 1);
  const auto ones = gen_xi(spec, XiMode{}, 0);
  EXPECT_THROW(stitch_good_path(f, ones, {0, 0}, {100, 100}, 0.45, 0.05), Error);     // too close
  EXPECT_THROW(stitch_good_path(f, ones, {0, 0}, {4000, 0}, 0.45, 0.06), Error);      // κ ≥ δ²/4
  EXPECT_THROW(stitch_good_path(f, ones, {0, 0}, {3000, 0}, 0.45, 0.05), Error);      // strip empty
}
