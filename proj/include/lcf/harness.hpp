#pragma once

// Seeded experiments: exponent fits of the FPP distance between μ_γ-sampled
// pairs, and the growth of the field maximum.
//
// Trial (n, k, t) uses seed derive_seed(master_seed, trial_key(n, k, t)); the
// key packs n, k and t into disjoint bit ranges, so seeds are distinct for
// t < 2^40. Trials may run on several threads (LCF_THREADS); each trial is a
// pure function of its seed and results are stored by index, so output bytes
// never depend on the thread count.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lcf/field.hpp"
#include "lcf/fpp.hpp"
#include "lcf/grid.hpp"
#include "lcf/measure.hpp"
#include "lcf/percolation.hpp"
#include "lcf/random.hpp"

namespace lcf {

struct ExperimentConfig {
  double gamma = 0.2;
  std::vector<int> n_list{7, 8, 9, 10, 11};
  std::vector<int> k_list{1, 4};
  std::uint64_t trials = 20;
  std::uint64_t master_seed = 1;
  double epsilon = 0.5;
  double kappa = 0.05;
  double delta = 0.45;
  double zeta = 0.001;
  double tau = 0.0;
  double rho = 0.0;
  std::string xi = "ones";
  std::string output;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Throws on any violated constraint: 0 ≤ γ < ½ (γ = 0 is the Euclidean
/// control), valid (n, k) cells, κ ∈ (0, δ²/2), 0 < ζ < δ⁴ log²2 / 4.
inline void validate(const ExperimentConfig& c) {
  if (!std::isfinite(c.gamma) || c.gamma < 0.0 || c.gamma >= 0.5)
    throw Error("config: gamma must satisfy 0 <= gamma < 1/2, got " + format_real(c.gamma));
  if (c.n_list.empty() || c.k_list.empty()) throw Error("config: n_list and k_list must be non-empty");
  for (int n : c.n_list) {
    if (n > 13) throw Error("config: n > 13 exceeds the supported grid size");
    for (int k : c.k_list) build_grid_spec(n, k);
  }
  if (c.trials == 0) throw Error("config: trials must be positive");
  if (!(c.epsilon > 0.0)) throw Error("config: epsilon must be positive");
  if (!(c.delta > 0.0 && c.delta < 1.0)) throw Error("config: delta must lie in (0, 1)");
  if (!(c.kappa > 0.0 && c.kappa < 0.5 * c.delta * c.delta)) throw Error("config: kappa must lie in (0, delta^2/2)");
  const double zmax = 0.25 * std::pow(c.delta, 4) * std::numbers::ln2 * std::numbers::ln2;
  if (!(c.zeta > 0.0 && c.zeta < zmax)) throw Error("config: zeta must lie in (0, delta^4 log^2 2 / 4)");
  parse_xi_mode(c.xi);
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream is(v);
  T out{};
  std::string rest;
  if (!(is >> out) || (is >> rest)) throw Error("config: invalid value for " + key + ": '" + v + "'");
  return out;
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, trim(item)));
  if (out.empty()) throw Error("config: empty list for " + key);
  return out;
}

inline std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

inline std::string exact(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

/// "key = value" lines; blank lines and lines starting with '#' are skipped.
inline ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw Error("config: line " + std::to_string(lineno) + " is not 'key = value'");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string val = detail::trim(t.substr(eq + 1));
    if (key == "gamma") c.gamma = detail::parse_number<double>(key, val);
    else if (key == "n_list") c.n_list = detail::parse_int_list(key, val);
    else if (key == "k_list") c.k_list = detail::parse_int_list(key, val);
    else if (key == "trials") c.trials = detail::parse_number<std::uint64_t>(key, val);
    else if (key == "master_seed") c.master_seed = detail::parse_number<std::uint64_t>(key, val);
    else if (key == "epsilon") c.epsilon = detail::parse_number<double>(key, val);
    else if (key == "kappa") c.kappa = detail::parse_number<double>(key, val);
    else if (key == "delta") c.delta = detail::parse_number<double>(key, val);
    else if (key == "zeta") c.zeta = detail::parse_number<double>(key, val);
    else if (key == "tau") c.tau = detail::parse_number<double>(key, val);
    else if (key == "rho") c.rho = detail::parse_number<double>(key, val);
    else if (key == "xi") c.xi = val;
    else if (key == "output") c.output = val;
    else throw Error("config: unknown key '" + key + "'");
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open config '" + path + "'");
  return parse_config(is);
}

inline void write_config(std::ostream& os, const ExperimentConfig& c) {
  os << "gamma = " << detail::exact(c.gamma) << '\n'
     << "n_list = " << detail::join(c.n_list) << '\n'
     << "k_list = " << detail::join(c.k_list) << '\n'
     << "trials = " << c.trials << '\n'
     << "master_seed = " << c.master_seed << '\n'
     << "epsilon = " << detail::exact(c.epsilon) << '\n'
     << "kappa = " << detail::exact(c.kappa) << '\n'
     << "delta = " << detail::exact(c.delta) << '\n'
     << "zeta = " << detail::exact(c.zeta) << '\n'
     << "tau = " << detail::exact(c.tau) << '\n'
     << "rho = " << detail::exact(c.rho) << '\n'
     << "xi = " << c.xi << '\n';
  if (!c.output.empty()) os << "output = " << c.output << '\n';
}

// ---------------------------------------------------------------------------
// Seeds and threads

inline std::uint64_t trial_key(int n, int k, std::uint64_t trial) {
  if (trial >= (std::uint64_t{1} << 40)) throw Error("trial index exceeds 2^40");
  return (static_cast<std::uint64_t>(n) << 48) | (static_cast<std::uint64_t>(k) << 40) | trial;
}

inline std::uint64_t trial_seed(std::uint64_t master, int n, int k, std::uint64_t trial) {
  return derive_seed(master, trial_key(n, k, trial));
}

/// Worker count from LCF_THREADS (default 1).
inline int thread_count() {
  const char* s = std::getenv("LCF_THREADS");
  if (!s || !*s) return 1;
  const int t = std::atoi(s);
  return std::clamp(t, 1, 256);
}

/// Runs f(i) for i in [0, count) on `threads` workers with dynamic scheduling.
template <typename F>
void parallel_for(std::size_t count, int threads, F&& f) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  for (int w = 0; w < std::min<int>(threads, static_cast<int>(count)); ++w)
    pool.emplace_back([&] {
      for (std::size_t i; !failed && (i = next++) < count;) {
        try {
          f(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Exponent experiment

struct TrialRecord {
  int n = 0;
  int k = 0;
  double gamma = 0.0;
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  Vertex u, v;
  std::int64_t linf = 0;
  double dist = 0.0;
  double log2_dist = 0.0;
  double wall_seconds = 0.0;  // not serialized

  /// Equality over the serialized columns.
  friend bool operator==(const TrialRecord& a, const TrialRecord& b) {
    return a.n == b.n && a.k == b.k && a.gamma == b.gamma && a.trial == b.trial && a.seed == b.seed && a.u == b.u &&
           a.v == b.v && a.linf == b.linf && a.dist == b.dist && a.log2_dist == b.log2_dist;
  }
};

/// One trial: field from the trial seed, a μ_γ × μ_γ pair, and d_γ between them.
inline TrialRecord run_trial(int n, int k, double gamma, std::uint64_t trial, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const GridSpec spec = build_grid_spec(n, k);
  const FieldSample field = coarse_mbrw(spec, seed);
  const WeightTable table = build_measure(field, gamma);
  Rng rng(derive_seed(seed, std::uint64_t{1} << 62));
  const SampledPair pair = sample_pair(table, rng);
  TrialRecord r;
  r.n = n;
  r.k = k;
  r.gamma = gamma;
  r.trial = trial;
  r.seed = seed;
  r.u = pair.u;
  r.v = pair.v;
  r.linf = pair.linf;
  r.dist = fpp_distance(field, gamma, pair.u, pair.v).distance;
  r.log2_dist = std::log2(r.dist);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;
};

/// Ordinary least squares y = slope·x + intercept.
inline LineFit ols(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("ols: need at least two points");
  const double nx = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= nx;
  my /= nx;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error("ols: x values are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) f.residuals.push_back(y[i] - (f.slope * x[i] + f.intercept));
  return f;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw Error("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

struct FitResult {
  int k = 0;
  std::vector<int> ns;
  std::vector<double> log2_median;  // per n
  std::vector<double> log2_mean;    // per n
  double beta_hat = 0.0;            // slope of log2(median d) against n
  double intercept = 0.0;
  std::vector<double> residuals;
  double beta_mean = 0.0;  // slope of log2(mean d) against n
  double intercept_mean = 0.0;
  double jackknife_se = 0.0;  // leave-one-trial-out
  double ci_low = 0.0, ci_high = 0.0;
};

namespace detail {

inline LineFit median_fit(const std::map<int, std::vector<double>>& by_n) {
  std::vector<double> x, y;
  for (const auto& [n, d] : by_n) {
    x.push_back(n);
    y.push_back(std::log2(median(d)));
  }
  return ols(x, y);
}

}  // namespace detail

/// Per-k fits of log2(median d) and log2(mean d) against n; needs ≥ 3 sizes per k.
inline std::vector<FitResult> fit_exponent(const std::vector<TrialRecord>& records) {
  std::map<int, std::map<int, std::vector<const TrialRecord*>>> groups;
  for (const auto& r : records) groups[r.k][r.n].push_back(&r);
  std::vector<FitResult> fits;
  for (const auto& [k, by_n] : groups) {
    if (by_n.size() < 3) throw Error("fit_exponent: fewer than 3 distinct n for k = " + std::to_string(k));
    FitResult f;
    f.k = k;
    std::map<int, std::vector<double>> dists;
    std::vector<double> x, ymean;
    for (const auto& [n, rs] : by_n) {
      auto& d = dists[n];
      double sum = 0.0;
      for (const auto* r : rs) {
        d.push_back(r->dist);
        sum += r->dist;
      }
      f.ns.push_back(n);
      f.log2_median.push_back(std::log2(median(d)));
      f.log2_mean.push_back(std::log2(sum / static_cast<double>(d.size())));
      x.push_back(n);
      ymean.push_back(f.log2_mean.back());
    }
    const LineFit med = detail::median_fit(dists);
    f.beta_hat = med.slope;
    f.intercept = med.intercept;
    f.residuals = med.residuals;
    const LineFit mean = ols(x, ymean);
    f.beta_mean = mean.slope;
    f.intercept_mean = mean.intercept;

    std::vector<std::uint64_t> trials;
    for (const auto& [n, rs] : by_n)
      for (const auto* r : rs) trials.push_back(r->trial);
    std::sort(trials.begin(), trials.end());
    trials.erase(std::unique(trials.begin(), trials.end()), trials.end());
    std::vector<double> loo;
    for (std::uint64_t t : trials) {
      std::map<int, std::vector<double>> kept;
      bool ok = true;
      for (const auto& [n, rs] : by_n) {
        for (const auto* r : rs)
          if (r->trial != t) kept[n].push_back(r->dist);
        if (kept[n].empty()) ok = false;
      }
      if (ok) loo.push_back(detail::median_fit(kept).slope);
    }
    if (loo.size() >= 2) {
      const double T = static_cast<double>(loo.size());
      double mean_loo = 0.0;
      for (double b : loo) mean_loo += b;
      mean_loo /= T;
      double ss = 0.0;
      for (double b : loo) ss += (b - mean_loo) * (b - mean_loo);
      f.jackknife_se = std::sqrt((T - 1.0) / T * ss);
    }
    f.ci_low = f.beta_hat - 1.96 * f.jackknife_se;
    f.ci_high = f.beta_hat + 1.96 * f.jackknife_se;
    fits.push_back(std::move(f));
  }
  return fits;
}

struct MassReport {
  int n = 0;
  int k = 0;
  double fraction = 0.0;  // share of sampled pairs with N^{1−ε} ≤ d ≤ N^{1+ε}
};

inline std::vector<MassReport> mass_in_window(const std::vector<TrialRecord>& records, double epsilon) {
  std::map<std::pair<int, int>, std::pair<std::uint64_t, std::uint64_t>> counts;
  for (const auto& r : records) {
    auto& [in, total] = counts[{r.n, r.k}];
    ++total;
    if (r.log2_dist >= (1.0 - epsilon) * r.n && r.log2_dist <= (1.0 + epsilon) * r.n) ++in;
  }
  std::vector<MassReport> out;
  for (const auto& [nk, c] : counts)
    out.push_back({nk.first, nk.second, static_cast<double>(c.first) / static_cast<double>(c.second)});
  return out;
}

struct ExperimentResult {
  std::vector<TrialRecord> records;  // ordered by (n, k, trial) as listed in the config
  std::vector<FitResult> fits;
  std::vector<MassReport> mass;
};

inline ExperimentResult run_exponent_experiment(const ExperimentConfig& config, int threads = thread_count()) {
  validate(config);
  struct Job {
    int n, k;
    std::uint64_t t;
  };
  std::vector<Job> jobs;
  for (int n : config.n_list)
    for (int k : config.k_list)
      for (std::uint64_t t = 0; t < config.trials; ++t) jobs.push_back({n, k, t});
  ExperimentResult res;
  res.records.resize(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const Job& j = jobs[i];
    res.records[i] = run_trial(j.n, j.k, config.gamma, j.t, trial_seed(config.master_seed, j.n, j.k, j.t));
  });
  std::vector<int> distinct_n = config.n_list;
  std::sort(distinct_n.begin(), distinct_n.end());
  distinct_n.erase(std::unique(distinct_n.begin(), distinct_n.end()), distinct_n.end());
  if (distinct_n.size() >= 3) res.fits = fit_exponent(res.records);
  res.mass = mass_in_window(res.records, config.epsilon);
  return res;
}

inline constexpr const char* kTrialCsvHeader = "n,k,gamma,trial,seed,u_x,u_y,v_x,v_y,linf,dist,log2_dist";

inline void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
  os << kTrialCsvHeader << '\n';
  for (const auto& r : records)
    os << r.n << ',' << r.k << ',' << detail::exact(r.gamma) << ',' << r.trial << ',' << r.seed << ',' << r.u.x << ','
       << r.u.y << ',' << r.v.x << ',' << r.v.y << ',' << r.linf << ',' << detail::exact(r.dist) << ','
       << detail::exact(r.log2_dist) << '\n';
  if (!os) throw Error("csv write failed");
}

inline std::vector<TrialRecord> read_trials_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || detail::trim(line) != kTrialCsvHeader) throw Error("csv: unexpected header");
  std::vector<TrialRecord> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(detail::trim(line));
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 12) throw Error("csv: line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) + " columns");
    const std::string where = "csv line " + std::to_string(lineno);
    TrialRecord r;
    r.n = detail::parse_number<int>(where, cells[0]);
    r.k = detail::parse_number<int>(where, cells[1]);
    r.gamma = detail::parse_number<double>(where, cells[2]);
    r.trial = detail::parse_number<std::uint64_t>(where, cells[3]);
    r.seed = detail::parse_number<std::uint64_t>(where, cells[4]);
    r.u = {detail::parse_number<std::int64_t>(where, cells[5]), detail::parse_number<std::int64_t>(where, cells[6])};
    r.v = {detail::parse_number<std::int64_t>(where, cells[7]), detail::parse_number<std::int64_t>(where, cells[8])};
    r.linf = detail::parse_number<std::int64_t>(where, cells[9]);
    r.dist = detail::parse_number<double>(where, cells[10]);
    r.log2_dist = detail::parse_number<double>(where, cells[11]);
    if (!std::isfinite(r.dist) || !std::isfinite(r.log2_dist) || !std::isfinite(r.gamma))
      throw Error(where + ": non-finite value");
    out.push_back(r);
  }
  return out;
}

/// Human-readable trend table: one row per k.
inline void write_fit_table(std::ostream& os, const std::vector<FitResult>& fits) {
  os << "k,beta_hat,intercept,beta_mean,jackknife_se,ci_low,ci_high\n";
  for (const auto& f : fits)
    os << f.k << ',' << detail::exact(f.beta_hat) << ',' << detail::exact(f.intercept) << ','
       << detail::exact(f.beta_mean) << ',' << detail::exact(f.jackknife_se) << ',' << detail::exact(f.ci_low) << ','
       << detail::exact(f.ci_high) << '\n';
}

// ---------------------------------------------------------------------------
// Maximum experiment

struct MaxRecord {
  int n = 0;
  int k = 0;
  std::uint64_t trials = 0;
  double mean_max = 0.0;
  double stderr_max = 0.0;
  double m_N = 0.0;
};

inline std::vector<MaxRecord> run_max_experiment(const ExperimentConfig& config, int threads = thread_count()) {
  validate(config);
  std::vector<MaxRecord> out;
  for (int n : config.n_list)
    for (int k : config.k_list) {
      const GridSpec spec = build_grid_spec(n, k);
      std::vector<double> maxima(config.trials);
      parallel_for(maxima.size(), threads, [&](std::size_t t) {
        const auto field = coarse_mbrw(spec, trial_seed(config.master_seed, n, k, t));
        const auto& v = field.values().data();
        maxima[t] = *std::max_element(v.begin(), v.end());
      });
      MaxRecord r;
      r.n = n;
      r.k = k;
      r.trials = config.trials;
      double s = 0.0, ss = 0.0;
      for (double m : maxima) s += m;
      r.mean_max = s / static_cast<double>(maxima.size());
      for (double m : maxima) ss += (m - r.mean_max) * (m - r.mean_max);
      r.stderr_max = maxima.size() > 1 ? std::sqrt(ss / static_cast<double>(maxima.size() - 1) /
                                                   static_cast<double>(maxima.size()))
                                       : 0.0;
      r.m_N = expected_max_leading(n);
      out.push_back(r);
    }
  return out;
}

inline void write_max_csv(std::ostream& os, const std::vector<MaxRecord>& records) {
  os << "n,k,trials,mean_max,stderr,m_N\n";
  for (const auto& r : records)
    os << r.n << ',' << r.k << ',' << r.trials << ',' << detail::exact(r.mean_max) << ','
       << detail::exact(r.stderr_max) << ',' << detail::exact(r.m_N) << '\n';
  if (!os) throw Error("csv write failed");
}

}  // namespace lcf
