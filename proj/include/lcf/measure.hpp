#pragma once

// Discrete Liouville measure μ_γ(v) = e^{γφ_v} / Z.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "lcf/field.hpp"
#include "lcf/grid.hpp"
#include "lcf/random.hpp"

namespace lcf {

struct WeightTable {
  double gamma = 0.0;
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::vector<double> log_weights;  // γ φ_v
  double log_Z = 0.0;
  std::vector<double> prefix;  // prefix[i] = Σ_{j ≤ i} μ(j); prefix.back() == 1

  std::size_t size() const { return log_weights.size(); }
  Vertex vertex(std::size_t i) const {
    const auto w = static_cast<std::size_t>(width);
    return {static_cast<std::int64_t>(i % w), static_cast<std::int64_t>(i / w)};
  }
  std::size_t index(Vertex v) const { return static_cast<std::size_t>(v.y * width + v.x); }
  double probability(std::size_t i) const { return std::exp(log_weights[i] - log_Z); }
  double probability(Vertex v) const { return probability(index(v)); }
};

/// log Σ exp(a_i) with the max shifted out.
inline double log_sum_exp(const std::vector<double>& a) {
  if (a.empty()) return -std::numeric_limits<double>::infinity();
  const double mx = *std::max_element(a.begin(), a.end());
  double s = 0.0;
  for (double x : a) s += std::exp(x - mx);
  return mx + std::log(s);
}

inline WeightTable build_measure(const Grid<double>& field, double gamma) {
  if (!std::isfinite(gamma) || gamma < 0.0) throw Error("build_measure: gamma must be finite and >= 0");
  if (field.size() == 0) throw Error("build_measure: empty field");
  WeightTable t;
  t.gamma = gamma;
  t.width = field.width();
  t.height = field.height();
  t.log_weights.resize(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double phi = field.data()[i];
    if (!std::isfinite(phi)) throw Error("build_measure: non-finite field value");
    t.log_weights[i] = gamma * phi;
  }
  t.log_Z = log_sum_exp(t.log_weights);
  t.prefix.resize(field.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    acc += std::exp(t.log_weights[i] - t.log_Z);
    t.prefix[i] = acc;
  }
  // absorb the rounding residue so inverse-CDF lookups never run off the end
  for (auto& p : t.prefix) p /= acc;
  t.prefix.back() = 1.0;
  return t;
}

inline WeightTable build_measure(const FieldSample& field, double gamma) { return build_measure(field.values(), gamma); }

/// Inverse-CDF draw of one vertex.
inline Vertex sample_vertex(const WeightTable& table, Rng& rng) {
  const double u = rng.uniform();
  auto it = std::upper_bound(table.prefix.begin(), table.prefix.end(), u);
  if (it == table.prefix.end()) --it;
  return table.vertex(static_cast<std::size_t>(it - table.prefix.begin()));
}

struct SampledPair {
  Vertex u, v;
  std::int64_t linf = 0;
};

inline SampledPair sample_pair(const WeightTable& table, Rng& rng) {
  SampledPair p;
  p.u = sample_vertex(table, rng);
  p.v = sample_vertex(table, rng);
  p.linf = lcf::linf(p.u, p.v);
  return p;
}

/// Leading-order expected maximum 2√(log 2)·n − 3/(4√(log 2))·log n.
inline double expected_max_leading(int n) {
  const double s = std::sqrt(std::numbers::ln2);
  return 2.0 * s * n - 3.0 / (4.0 * s) * std::log(static_cast<double>(n));
}

struct PartitionStats {
  double log_Z = 0.0;
  double max_phi = 0.0;
  double m_N = 0.0;
  std::vector<double> fractions;      // r / R
  std::vector<double> thresholds;     // (r / R) · m_N
  std::vector<std::uint64_t> counts;  // |{w : φ_w ≥ threshold}|
  /// log of the reference N² e^{γ² n / 2}; log_Z compares against it minus τ n.
  double log_reference = 0.0;
};

inline PartitionStats partition_stats(const FieldSample& field, double gamma, const std::vector<double>& fractions) {
  if (!std::isfinite(gamma) || gamma < 0.0) throw Error("partition_stats: gamma must be finite and >= 0");
  PartitionStats s;
  const int n = field.spec().n;
  const auto& v = field.values().data();
  std::vector<double> lw(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) lw[i] = gamma * v[i];
  s.log_Z = log_sum_exp(lw);
  s.max_phi = *std::max_element(v.begin(), v.end());
  s.m_N = expected_max_leading(n);
  s.log_reference = 2.0 * n * std::numbers::ln2 + 0.5 * gamma * gamma * n;
  s.fractions = fractions;
  for (double f : fractions) {
    const double t = f * s.m_N;
    s.thresholds.push_back(t);
    s.counts.push_back(static_cast<std::uint64_t>(std::count_if(v.begin(), v.end(), [t](double x) { return x >= t; })));
  }
  return s;
}

enum class FractionMode { exact, monte_carlo };

/// μ_γ × μ_γ mass of {(u, v) : |u − v| < threshold}.
/// Exact mode sums μ(u)μ(v) over all close pairs and is limited to N ≤ 64.
inline double pair_distance_fraction(const WeightTable& table, std::int64_t threshold, FractionMode mode,
                                     std::uint64_t samples = 0, std::uint64_t seed = 0) {
  if (threshold >= std::max(table.width, table.height)) return 1.0;
  if (threshold <= 0) return 0.0;
  if (mode == FractionMode::exact) {
    if (table.width > 64 || table.height > 64) throw Error("pair_distance_fraction: exact mode needs N <= 64");
    std::vector<double> mu(table.size());
    for (std::size_t i = 0; i < mu.size(); ++i) mu[i] = table.probability(i);
    double num = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const Vertex a = table.vertex(i);
      double row = 0.0;
      for (std::size_t j = 0; j < mu.size(); ++j)
        if (lcf::linf(a, table.vertex(j)) < threshold) row += mu[j];
      num += mu[i] * row;
    }
    return num;
  }
  if (samples == 0) throw Error("pair_distance_fraction: Monte Carlo mode needs samples > 0");
  Rng rng(seed);
  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < samples; ++s)
    if (sample_pair(table, rng).linf < threshold) ++hits;
  return static_cast<double>(hits) / static_cast<double>(samples);
}

}  // namespace lcf
