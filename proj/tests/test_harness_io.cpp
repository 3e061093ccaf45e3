#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <unordered_set>

#include "lcf/lcf.hpp"

using namespace lcf;

namespace {

std::string field_bytes(const FieldSample& f) {
  std::ostringstream os(std::ios::binary);
  write_field(os, f);
  return os.str();
}

FieldSample field_from(const std::string& bytes) {
  std::istringstream is(bytes, std::ios::binary);
  return read_field(is);
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.gamma = 0.2;
  c.n_list = {4, 5, 6};
  c.k_list = {1, 2};
  c.trials = 4;
  c.master_seed = 11;
  return c;
}

}  // namespace

TEST(FieldIo, RoundTripIsBitIdentical) {
  const auto f = coarse_mbrw(build_grid_spec(6, 2), 42);
  const auto g = field_from(field_bytes(f));
  EXPECT_EQ(f, g);
  EXPECT_EQ(field_bytes(g), field_bytes(f));
  EXPECT_EQ(field_bytes(f).size(), 4u + 4 + 4 + 4 + 8 + 1 + 8 * 4096);
}

TEST(FieldIo, RejectsCorruptInput) {
  const auto good = field_bytes(coarse_mbrw(build_grid_spec(3, 1), 1));
  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(field_from(bad_magic), Error);
  auto bad_version = good;
  bad_version[4] = 9;
  EXPECT_THROW(field_from(bad_version), Error);
  EXPECT_THROW(field_from(good.substr(0, good.size() - 3)), Error);
  EXPECT_THROW(field_from(good.substr(0, 10)), Error);
  auto nan = good;
  const double q = std::nan("");
  std::memcpy(nan.data() + 25, &q, 8);
  EXPECT_THROW(field_from(nan), Error);
  auto bad_kind = good;
  bad_kind[24] = 7;
  EXPECT_THROW(field_from(bad_kind), Error);
}

TEST(FieldIo, FileRoundTrip) {
  const auto path = ::testing::TempDir() + "lcf_field.bin";
  const auto f = coarse_mbrw(build_grid_spec(5, 1), 3);
  save_field(path, f);
  EXPECT_EQ(load_field(path), f);
  EXPECT_THROW(load_field(path + ".missing"), Error);
}

TEST(MaskIo, RoundTrip) {
  const auto m = gen_xi(build_grid_spec(5, 1), parse_xi_mode("iid(0.6)"), 4);
  std::stringstream ss;
  write_mask(ss, m);
  const auto r = read_mask(ss);
  EXPECT_EQ(r.open, m.open);
  EXPECT_EQ(r.provenance, "iid(0.6)");
  std::istringstream bad("MASK 1 ones\n11\n12\n");
  EXPECT_THROW(read_mask(bad), Error);
  std::istringstream short_rows("MASK 2 ones\n1111\n1111\n");
  EXPECT_THROW(read_mask(short_rows), Error);
}

TEST(PathIo, RoundTrip) {
  const LatticePath p(std::vector<Vertex>{{0, 0}, {1, 0}, {1, 1}, {2, 1}}, true);
  std::stringstream ss;
  write_path(ss, p);
  EXPECT_EQ(read_path(ss, true).vertices(), p.vertices());
  std::istringstream gap("0 0\n2 0\n");
  EXPECT_THROW(read_path(gap), Error);
  std::istringstream junk("0 0 0\n");
  EXPECT_THROW(read_path(junk), Error);
}

TEST(Config, ParseWriteRoundTrip) {
  auto c = small_config();
  c.xi = "dilated(0.95,1)";
  c.output = "out.csv";
  std::stringstream ss;
  write_config(ss, c);
  const auto r = parse_config(ss);
  EXPECT_EQ(r.gamma, c.gamma);
  EXPECT_EQ(r.n_list, c.n_list);
  EXPECT_EQ(r.k_list, c.k_list);
  EXPECT_EQ(r.trials, c.trials);
  EXPECT_EQ(r.master_seed, c.master_seed);
  EXPECT_EQ(r.xi, c.xi);
  EXPECT_EQ(r.output, c.output);
  EXPECT_EQ(r.delta, c.delta);
}

TEST(Config, RejectsInvalid) {
  std::istringstream unknown("gamma = 0.2\nfoo = 1\n");
  EXPECT_THROW(parse_config(unknown), Error);
  std::istringstream high("gamma = 0.7\n");
  EXPECT_THROW(validate(parse_config(high)), Error);
  std::istringstream big("n_list = 7,14\n");
  EXPECT_THROW(validate(parse_config(big)), Error);
  std::istringstream noeq("gamma 0.2\n");
  EXPECT_THROW(parse_config(noeq), Error);
  auto c = small_config();
  c.kappa = 0.2;
  EXPECT_THROW(validate(c), Error);
  c = small_config();
  c.xi = "iid(2)";
  EXPECT_THROW(validate(c), Error);
  c = small_config();
  c.gamma = 0.0;
  EXPECT_NO_THROW(validate(c));
}

TEST(Seeds, TrialSeedsDoNotCollide) {
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(1'100'000);
  for (int n = 7; n <= 11; ++n)
    for (int k : {1, 2, 4, 5})
      for (std::uint64_t t = 0; t < 50'000; ++t) ASSERT_TRUE(seen.insert(trial_seed(1, n, k, t)).second);
  EXPECT_EQ(seen.size(), 1'000'000u);
  EXPECT_NE(trial_key(7, 1, 0), trial_key(7, 2, 0));
  EXPECT_THROW(trial_key(7, 1, std::uint64_t{1} << 40), Error);
}

TEST(Parallel, ForCoversAllIndicesAndPropagates) {
  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(100, 3,
                            [](std::size_t i) {
                              if (i == 57) throw Error("boom");
                            }),
               Error);
}

TEST(Fit, OlsRecoversExactLine) {
  std::vector<double> x{7, 8, 9, 10, 11}, y;
  for (double v : x) y.push_back(1.3 * v + 2.0);
  const auto f = ols(x, y);
  EXPECT_NEAR(f.slope, 1.3, 1e-9);
  EXPECT_NEAR(f.intercept, 2.0, 1e-9);
  for (double r : f.residuals) EXPECT_NEAR(r, 0.0, 1e-9);
}

TEST(Fit, OlsNormalEquationsAndDuplication) {
  Rng rng(6);
  std::vector<double> x, y;
  for (int i = 0; i < 12; ++i) {
    x.push_back(i);
    y.push_back(0.7 * i + rng.normal());
  }
  const auto f = ols(x, y);
  double s0 = 0, s1 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s0 += f.residuals[i];
    s1 += f.residuals[i] * x[i];
  }
  EXPECT_NEAR(s0, 0.0, 1e-9);
  EXPECT_NEAR(s1, 0.0, 1e-9);
  auto x2 = x, y2 = y;
  x2.insert(x2.end(), x.begin(), x.end());
  y2.insert(y2.end(), y.begin(), y.end());
  const auto g = ols(x2, y2);
  EXPECT_NEAR(g.slope, f.slope, 1e-12);
  EXPECT_NEAR(g.intercept, f.intercept, 1e-12);
}

TEST(Fit, NeedsThreeSizes) {
  std::vector<TrialRecord> recs;
  for (int n : {5, 6})
    for (int t = 0; t < 3; ++t) {
      TrialRecord r;
      r.n = n;
      r.k = 1;
      r.trial = static_cast<std::uint64_t>(t);
      r.dist = 1 << n;
      recs.push_back(r);
    }
  EXPECT_THROW(fit_exponent(recs), Error);
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 2, 3}), 2.5);
}

TEST(Fit, SyntheticPowerLaw) {
  // d = 2^{0.8 n} exactly: slope 0.8 and zero jackknife spread.
  std::vector<TrialRecord> recs;
  for (int n : {6, 7, 8, 9})
    for (int t = 0; t < 5; ++t) {
      TrialRecord r;
      r.n = n;
      r.k = 2;
      r.trial = static_cast<std::uint64_t>(t);
      r.dist = std::exp2(0.8 * n);
      recs.push_back(r);
    }
  const auto fits = fit_exponent(recs);
  ASSERT_EQ(fits.size(), 1u);
  EXPECT_NEAR(fits[0].beta_hat, 0.8, 1e-12);
  EXPECT_NEAR(fits[0].beta_mean, 0.8, 1e-12);
  EXPECT_NEAR(fits[0].jackknife_se, 0.0, 1e-12);
}

TEST(Experiment, GammaZeroGivesUnitExponent) {
  ExperimentConfig c;
  c.gamma = 0.0;
  c.n_list = {5, 6, 7, 8, 9};
  c.k_list = {1};
  c.trials = 60;
  c.master_seed = 3;
  const auto res = run_exponent_experiment(c, 1);
  for (const auto& r : res.records) EXPECT_EQ(r.dist, static_cast<double>(l1(r.u, r.v) + 1));
  ASSERT_EQ(res.fits.size(), 1u);
  EXPECT_NEAR(res.fits[0].beta_hat, 1.0, 0.05);
  EXPECT_LE(res.fits[0].ci_low, res.fits[0].beta_hat);
  EXPECT_GE(res.fits[0].ci_high, res.fits[0].beta_hat);
}

TEST(Experiment, ThreadCountDoesNotChangeCsv) {
  const auto c = small_config();
  std::ostringstream a, b;
  write_trials_csv(a, run_exponent_experiment(c, 1).records);
  write_trials_csv(b, run_exponent_experiment(c, 3).records);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Experiment, CsvRoundTrip) {
  const auto res = run_exponent_experiment(small_config(), 1);
  std::stringstream ss;
  write_trials_csv(ss, res.records);
  const auto back = read_trials_csv(ss);
  ASSERT_EQ(back.size(), res.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(back[i], res.records[i]);
  std::istringstream bad(std::string(kTrialCsvHeader) + "\n1,2,3\n");
  EXPECT_THROW(read_trials_csv(bad), Error);
}

TEST(Experiment, TrialMatchesIndependentRecomputation) {
  const auto c = small_config();
  const auto res = run_exponent_experiment(c, 1);
  const auto& r = res.records[5];
  const auto f = coarse_mbrw(build_grid_spec(r.n, r.k), trial_seed(c.master_seed, r.n, r.k, r.trial));
  EXPECT_EQ(r.dist, fpp_distance(f, c.gamma, r.u, r.v).distance);
  EXPECT_EQ(r.linf, linf(r.u, r.v));
}

TEST(MaxExperiment, RecordsMatchFields) {
  ExperimentConfig c;
  c.n_list = {4, 5};
  c.k_list = {1};
  c.trials = 3;
  const auto recs = run_max_experiment(c, 1);
  ASSERT_EQ(recs.size(), 2u);
  double s = 0;
  for (std::uint64_t t = 0; t < 3; ++t) {
    const auto f = coarse_mbrw(build_grid_spec(4, 1), trial_seed(c.master_seed, 4, 1, t));
    s += *std::max_element(f.values().data().begin(), f.values().data().end());
  }
  EXPECT_NEAR(recs[0].mean_max, s / 3, 1e-12);
  EXPECT_DOUBLE_EQ(recs[1].m_N, expected_max_leading(5));
}
