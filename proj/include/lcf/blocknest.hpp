#pragma once

// The k-block-nest program: extracts from a long lattice path a subset Q that
// stretches uniformly across dyadic scales.
//
// Starting from a traversing of the dyadic box of level j0 containing the
// path's first vertex, each induction step cuts a traversing of a level-(j+1)
// box into K1 = 2^{k-2} traversings of level-j boxes (the j-sections). The next
// section starts where the path leaves the union of the B** of the blocks
// chosen so far for good, which makes the blocks coherent and j-separated.
// At j = 0 the blocks are single points with neighbourhoods of radius q, and
// K2 = ⌊2^k / (q + 1)⌋ points are kept per 1-section. Their union is Q.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "lcf/grid.hpp"
#include "lcf/path.hpp"
#include "lcf/random.hpp"

namespace lcf {

/// Box of side 2^ell; dyadic when the corner lies in 2^ell · Z².
struct DyadicBox {
  int ell = 0;
  Vertex corner;

  friend bool operator==(const DyadicBox&, const DyadicBox&) = default;
  friend auto operator<=>(const DyadicBox&, const DyadicBox&) = default;

  std::int64_t side() const { return std::int64_t{1} << ell; }
  Rect rect() const { return {corner.x, corner.y, corner.x + side() - 1, corner.y + side() - 1}; }
  /// B* = {z : d(z, B) ≤ side}, a box of side 3·side.
  Rect star() const { return rect().dilate(side()); }
  /// B** = {z : d(z, B) ≤ 3·side}, a box of side 7·side.
  Rect double_star() const { return rect().dilate(3 * side()); }
  bool is_dyadic() const {
    const std::int64_t s = side();
    return corner.x % s == 0 && corner.y % s == 0;
  }
};

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

/// The unique dyadic box of side 2^ell containing z.
inline DyadicBox dyadic_box_containing(Vertex z, int ell) {
  const std::int64_t s = std::int64_t{1} << ell;
  return {ell, {floor_div(z.x, s) * s, floor_div(z.y, s) * s}};
}

inline std::pair<Rect, Rect> enlargements(const DyadicBox& box) { return {box.star(), box.double_star()}; }

/// A section path[first..last] traversing `box`: inside B*, from ∂B to ∂B*.
struct Traversing {
  std::size_t first = 0;
  std::size_t last = 0;
  DyadicBox box;

  friend bool operator==(const Traversing&, const Traversing&) = default;
};

inline bool is_traversing(const LatticePath& path, const Traversing& t) {
  if (t.first >= t.last || t.last >= path.size()) return false;
  const Rect b = t.box.rect();
  const Rect star = t.box.star();
  if (!b.on_boundary(path[t.first]) || !star.on_boundary(path[t.last])) return false;
  for (std::size_t i = t.first; i <= t.last; ++i)
    if (!star.contains(path[i])) return false;
  return linf(path[t.first], path[t.last]) >= t.box.side();
}

/// Cuts `path` to the piece from its first visit of ∂B to the subsequent first visit of ∂B*.
inline Traversing extract_traversing(const LatticePath& path, const DyadicBox& box) {
  const Rect b = box.rect();
  const Rect star = box.star();
  std::size_t i = 0;
  while (i < path.size() && !b.on_boundary(path[i])) ++i;
  if (i == path.size()) throw Error("extract_traversing: path never reaches the boundary of B");
  std::size_t j = i + 1;
  while (j < path.size() && !star.on_boundary(path[j])) ++j;
  if (j >= path.size()) throw Error("extract_traversing: path never reaches the boundary of B*");
  return {i, j, box};
}

enum class Spacing { box_level, q_level };

struct SectionFamily {
  int level = 0;
  std::vector<Traversing> sections;  // box level
  std::vector<DyadicBox> blocks;     // box level, blocks[h] = sections[h].box
  std::vector<std::size_t> points;   // q level: selected path indices
};

struct NestParams {
  int n = 0, k = 0, m = 0;
  double delta = 0.0;
  std::int64_t q = 0;
  int j0 = 0;
  std::int64_t K1 = 0;
  std::int64_t K2 = 0;
};

/// Validated block-nest parameters: j0 = ⌊(1 − δ²/2) m⌋, K1 = 2^{k−2}, K2 = ⌊2^k/(q+1)⌋.
inline NestParams nest_params(const GridSpec& spec, double delta, std::int64_t q) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error("block_nest: delta must lie in (0, 1)");
  if (q < 1) throw Error("block_nest: q must be a positive integer");
  if (spec.k < 2) throw Error("block_nest: k >= 2 required so that K1 = 2^{k-2} >= 1");
  NestParams p;
  p.n = spec.n;
  p.k = spec.k;
  p.m = spec.m;
  p.delta = delta;
  p.q = q;
  p.j0 = static_cast<int>(std::floor((1.0 - 0.5 * delta * delta) * spec.m));
  p.K1 = std::int64_t{1} << (spec.k - 2);
  p.K2 = (std::int64_t{1} << spec.k) / (q + 1);
  if (p.K2 < 1) throw Error("block_nest: K2 = floor(2^k/(q+1)) is zero");
  if (p.j0 < 1) throw Error("block_nest: j0 < 1, grid too small for this delta");
  return p;
}

/// One induction operation on the traversing `parent` of a level-(j+1) box.
/// Box level: exactly K1 j-sections with coherent blocks. q level (j = 0):
/// exactly K2 path indices pairwise more than q apart. Throws when the path
/// yields fewer (τ < K1), which only happens for invalid inputs.
inline SectionFamily induction_step(const LatticePath& path, const Traversing& parent, int j, Spacing spacing,
                                    const NestParams& params) {
  SectionFamily fam;
  fam.level = j;
  const std::size_t end = parent.last;
  std::size_t s = parent.first;
  if (spacing == Spacing::q_level) {
    if (j != 0) throw Error("induction_step: q-level spacing is only defined at j = 0");
    for (std::int64_t h = 0; h < params.K2; ++h) {
      if (s > end) throw Error("induction_step: fewer than K2 points in a 1-section");
      fam.points.push_back(s);
      const Vertex centre = path[s];
      // last visit of the q-neighbourhood; the path departs it forever after
      std::size_t r = end;
      while (linf(path[r], centre) > params.q) --r;
      s = r + 1;
    }
    return fam;
  }
  if (j < 1) throw Error("induction_step: box-level spacing needs j >= 1");
  const int ell = j * params.k;
  for (std::int64_t h = 0; h < params.K1; ++h) {
    if (s > end) throw Error("induction_step: tau < K1 (path departs before K1 sections)");
    const DyadicBox block = dyadic_box_containing(path[s], ell);
    const Rect star = block.star();
    std::size_t t = s + 1;
    while (t <= end && !star.on_boundary(path[t])) ++t;
    if (t > end) throw Error("induction_step: tau < K1 (section never reaches the boundary of B*)");
    fam.sections.push_back({s, t, block});
    fam.blocks.push_back(block);
    // earlier B** are left for good before s, so the last visit of the union
    // is the last visit of this block's B**
    const Rect dstar = block.double_star();
    std::size_t r = end;
    while (!dstar.contains(path[r])) --r;
    s = r + 1;
  }
  return fam;
}

struct BlockNestOutput {
  NestParams params;
  std::vector<Vertex> Q;
  std::vector<std::size_t> q_indices;
  /// families[i] holds level j0 − i, from j0 down to 1.
  std::vector<SectionFamily> families;

  const SectionFamily& family(int j) const {
    if (j < 1 || j > params.j0) throw Error("block_nest: no family at level " + std::to_string(j));
    return families[static_cast<std::size_t>(params.j0 - j)];
  }
};

/// Runs the program on a self-avoiding path whose endpoint distance exceeds 4 · 2^{j0 k}.
inline BlockNestOutput block_nest(const LatticePath& path, const GridSpec& spec, double delta, std::int64_t q) {
  BlockNestOutput out;
  out.params = nest_params(spec, delta, q);
  const NestParams& p = out.params;
  if (!path.self_avoiding()) throw Error("block_nest: input path must be self-avoiding");
  if (path.empty()) throw Error("block_nest: empty path");
  const std::int64_t needed = 4 * (std::int64_t{1} << (p.j0 * p.k));
  if (path.distance() <= needed)
    throw Error("block_nest: path too short (distance " + std::to_string(path.distance()) + " <= 4*2^{j0 k} = " +
                std::to_string(needed) + ")");
  const DyadicBox top = dyadic_box_containing(path.front(), p.j0 * p.k);
  SectionFamily first;
  first.level = p.j0;
  first.sections.push_back(extract_traversing(path, top));
  first.blocks.push_back(top);
  out.families.push_back(std::move(first));
  for (int j = p.j0 - 1; j >= 1; --j) {
    SectionFamily next;
    next.level = j;
    for (const auto& parent : out.families.back().sections) {
      auto fam = induction_step(path, parent, j, Spacing::box_level, p);
      next.sections.insert(next.sections.end(), fam.sections.begin(), fam.sections.end());
      next.blocks.insert(next.blocks.end(), fam.blocks.begin(), fam.blocks.end());
    }
    out.families.push_back(std::move(next));
  }
  for (const auto& parent : out.families.back().sections) {
    auto fam = induction_step(path, parent, 0, Spacing::q_level, p);
    for (std::size_t idx : fam.points) {
      out.q_indices.push_back(idx);
      out.Q.push_back(path[idx]);
    }
  }
  return out;
}

struct BlockNestReport {
  bool separated_points = true;  // (a)
  bool separated_blocks = true;  // (b)
  bool counts = true;            // (c)
  bool coherent = true;
  bool on_path = true;  // Q ⊂ P in path order, sections are traversings
  std::string first_failure;

  bool pass() const { return separated_points && separated_blocks && counts && coherent && on_path; }
};

inline std::int64_t ipow(std::int64_t b, std::int64_t e) {
  std::int64_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

/// Checks the structural guarantees of an output: (a) Q points pairwise more
/// than q apart, (b) j-blocks have B* more than 2^{jk} apart, (c) the counts
/// |Q| = K1^{j0−1} K2 and |Q ∩ B*_{j,h}| = K1^{j−1} K2 with Q covered by the
/// B*_{j,h}, and coherence of each group of K1 consecutive blocks.
inline BlockNestReport verify_output(const BlockNestOutput& out) {
  BlockNestReport rep;
  const NestParams& p = out.params;
  auto fail = [&](bool& flag, const std::string& what) {
    flag = false;
    if (rep.first_failure.empty()) rep.first_failure = what;
  };
  auto vstr = [](Vertex v) { return "(" + std::to_string(v.x) + "," + std::to_string(v.y) + ")"; };

  for (std::size_t i = 0; i < out.Q.size() && rep.separated_points; ++i)
    for (std::size_t j = i + 1; j < out.Q.size(); ++j)
      if (linf(out.Q[i], out.Q[j]) <= p.q) {
        fail(rep.separated_points, "(a) Q points " + vstr(out.Q[i]) + " and " + vstr(out.Q[j]) + " within q");
        break;
      }

  if (static_cast<int>(out.families.size()) != p.j0) fail(rep.counts, "(c) wrong number of block families");
  for (int j = 1; j <= p.j0 && j <= static_cast<int>(out.families.size()); ++j) {
    const auto& blocks = out.family(j).blocks;
    const std::int64_t spacing = std::int64_t{1} << (j * p.k);
    if (static_cast<std::int64_t>(blocks.size()) != ipow(p.K1, p.j0 - j))
      fail(rep.counts, "(c) level " + std::to_string(j) + " has " + std::to_string(blocks.size()) + " blocks");
    if (j <= p.j0 - 1) {
      for (std::size_t a = 0; a < blocks.size() && rep.separated_blocks; ++a)
        for (std::size_t b = a + 1; b < blocks.size(); ++b)
          if (distance(blocks[a].star(), blocks[b].star()) <= spacing) {
            fail(rep.separated_blocks, "(b) level " + std::to_string(j) + " blocks " + std::to_string(a) + " and " +
                                           std::to_string(b) + " not separated");
            break;
          }
      for (std::size_t g = 0; g < blocks.size(); g += static_cast<std::size_t>(p.K1))
        for (std::size_t h = g + 1; h < g + static_cast<std::size_t>(p.K1) && h < blocks.size(); ++h) {
          std::int64_t d = std::numeric_limits<std::int64_t>::max();
          for (std::size_t s = g; s < h; ++s) d = std::min(d, distance(blocks[h].rect(), blocks[s].double_star()));
          if (d != 1) fail(rep.coherent, "coherence: level " + std::to_string(j) + " block " + std::to_string(h));
        }
    }
    const std::int64_t expected = ipow(p.K1, j - 1) * p.K2;
    std::vector<int> covered(out.Q.size(), 0);
    for (std::size_t h = 0; h < blocks.size(); ++h) {
      const Rect star = blocks[h].star();
      std::int64_t c = 0;
      for (std::size_t i = 0; i < out.Q.size(); ++i)
        if (star.contains(out.Q[i])) {
          ++c;
          ++covered[i];
        }
      if (c != expected)
        fail(rep.counts, "(c) |Q ∩ B*| = " + std::to_string(c) + " at level " + std::to_string(j) + " block " +
                             std::to_string(h) + ", expected " + std::to_string(expected));
    }
    for (std::size_t i = 0; i < out.Q.size(); ++i)
      if (covered[i] == 0) fail(rep.counts, "(c) Q point " + vstr(out.Q[i]) + " outside every level-" + std::to_string(j) + " B*");
  }
  if (static_cast<std::int64_t>(out.Q.size()) != ipow(p.K1, p.j0 - 1) * p.K2)
    fail(rep.counts, "(c) |Q| = " + std::to_string(out.Q.size()) + ", expected " +
                         std::to_string(ipow(p.K1, p.j0 - 1) * p.K2));
  return rep;
}

/// As above, plus consistency with the path the output was extracted from.
inline BlockNestReport verify_output(const BlockNestOutput& out, const LatticePath& path) {
  BlockNestReport rep = verify_output(out);
  auto fail = [&](const std::string& what) {
    rep.on_path = false;
    if (rep.first_failure.empty()) rep.first_failure = what;
  };
  if (out.q_indices.size() != out.Q.size()) fail("Q and its path indices differ in length");
  for (std::size_t i = 0; i < out.Q.size() && i < out.q_indices.size(); ++i) {
    if (out.q_indices[i] >= path.size() || path[out.q_indices[i]] != out.Q[i]) {
      fail("Q point " + std::to_string(i) + " is not on the path at its index");
      break;
    }
    if (i > 0 && out.q_indices[i] <= out.q_indices[i - 1]) {
      fail("Q indices are not increasing");
      break;
    }
  }
  for (const auto& fam : out.families)
    for (const auto& s : fam.sections)
      if (s.last >= path.size() || !is_traversing(path, s)) {
        fail("level " + std::to_string(fam.level) + " section is not a traversing");
        return rep;
      }
  return rep;
}

struct CountBoundReport {
  int level = 0;
  std::uint64_t paths = 0;
  std::uint64_t observed_families = 0;
  std::uint64_t observed_outputs = 0;
  double log2_family_bound = 0.0;  // (m + 1 − j0) k + 6 K1^{j0 − j}
  double log2_output_bound = 0.0;  // (m − j0) k + K1^{j0−1} K2 log2(8q + 5)
  bool kprime_condition = false;   // k ≥ 6 and 2^{(k+7)/K2} ≤ (8q+5)/(8q+4)
  bool within_bounds = true;
};

/// Number of distinct j-block families and outputs over a path corpus, next to the counting bounds.
inline CountBoundReport count_bound_check(const GridSpec& spec, double delta, std::int64_t q, int j,
                                          const std::vector<LatticePath>& corpus) {
  const NestParams p = nest_params(spec, delta, q);
  if (j < 1 || j > p.j0) throw Error("count_bound_check: level out of range [1, j0]");
  CountBoundReport rep;
  rep.level = j;
  rep.log2_family_bound = static_cast<double>((p.m + 1 - p.j0) * p.k) + 6.0 * static_cast<double>(ipow(p.K1, p.j0 - j));
  rep.log2_output_bound = static_cast<double>((p.m - p.j0) * p.k) +
                          static_cast<double>(ipow(p.K1, p.j0 - 1) * p.K2) * std::log2(8.0 * q + 5.0);
  rep.kprime_condition = p.k >= 6 && std::pow(2.0, (p.k + 7.0) / static_cast<double>(p.K2)) <=
                                         (8.0 * q + 5.0) / (8.0 * q + 4.0);
  std::set<std::vector<DyadicBox>> families;
  std::set<std::vector<Vertex>> outputs;
  for (const auto& path : corpus) {
    const auto out = block_nest(path, spec, delta, q);
    families.insert(out.family(j).blocks);
    outputs.insert(out.Q);
    ++rep.paths;
  }
  rep.observed_families = families.size();
  rep.observed_outputs = outputs.size();
  rep.within_bounds = std::log2(static_cast<double>(std::max<std::uint64_t>(rep.observed_families, 1))) <=
                          rep.log2_family_bound &&
                      std::log2(static_cast<double>(std::max<std::uint64_t>(rep.observed_outputs, 1))) <=
                          rep.log2_output_bound;
  return rep;
}

// ---------------------------------------------------------------------------
// Random path corpus

namespace detail {

/// Applies one of the eight lattice symmetries of [0, N)^2 to every vertex.
inline void apply_symmetry(std::vector<Vertex>& vs, std::int64_t N, unsigned sym) {
  for (auto& v : vs) {
    if (sym & 1u) v.x = N - 1 - v.x;
    if (sym & 2u) v.y = N - 1 - v.y;
    if (sym & 4u) std::swap(v.x, v.y);
  }
}

}  // namespace detail

/// Monotone staircase (steps +x or +y, then a random lattice symmetry) whose
/// endpoint distance exceeds `min_distance`.
inline LatticePath random_staircase_path(const GridSpec& spec, Rng& rng, std::int64_t min_distance) {
  const std::int64_t room = spec.N - 2 - min_distance;
  if (room < 0) throw Error("random_staircase_path: grid too small for the requested distance");
  Vertex at{static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(room) + 1)),
            static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(room) + 1))};
  const Vertex start = at;
  const double px = 0.25 + 0.5 * rng.uniform();
  std::vector<Vertex> vs{at};
  while (linf(at, start) <= min_distance) {
    if (rng.uniform() < px) ++at.x;
    else ++at.y;
    vs.push_back(at);
  }
  detail::apply_symmetry(vs, spec.N, static_cast<unsigned>(rng.below(8)));
  return LatticePath(std::move(vs), true);
}

/// Loop-erased drifted walk, reflected at the grid boundary, stopped once its
/// distance from the start exceeds `min_distance`.
inline LatticePath random_loop_erased_path(const GridSpec& spec, Rng& rng, std::int64_t min_distance) {
  const std::int64_t room = spec.N - 2 - min_distance;
  if (room < 0) throw Error("random_loop_erased_path: grid too small for the requested distance");
  Vertex at{static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(room) + 1)),
            static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(spec.N)))};
  const Vertex start = at;
  std::vector<Vertex> vs{at};
  std::unordered_map<Vertex, std::size_t, VertexHash> pos{{at, 0}};
  const Rect bounds{0, 0, spec.N - 1, spec.N - 1};
  while (linf(at, start) <= min_distance) {
    const double u = rng.uniform();
    Vertex next = at;
    if (u < 0.4) ++next.x;
    else if (u < 0.5) --next.x;
    else if (u < 0.75) ++next.y;
    else --next.y;
    if (!bounds.contains(next)) next = {2 * at.x - next.x, 2 * at.y - next.y};
    at = next;
    if (auto it = pos.find(at); it != pos.end()) {
      for (std::size_t i = it->second + 1; i < vs.size(); ++i) pos.erase(vs[i]);
      vs.resize(it->second + 1);
    } else {
      pos.emplace(at, vs.size());
      vs.push_back(at);
    }
  }
  detail::apply_symmetry(vs, spec.N, static_cast<unsigned>(rng.below(8)));
  return LatticePath(std::move(vs), true);
}

}  // namespace lcf
