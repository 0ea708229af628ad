#include "rank1/experiments.hpp"

#include <gtest/gtest.h>

using namespace rank1;

namespace {

const ArithmeticTable& mu_table() {
  static const ArithmeticTable t = sieve(TableKind::mu, 1000000);
  return t;
}

const ArithmeticTable& lambda_table() {
  static const ArithmeticTable t = sieve(TableKind::lambda, 1000000);
  return t;
}

Bits random_bits(std::size_t n, std::uint64_t seed, double d = 0.5) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution b(d);
  Bits x(n);
  for (auto& v : x) v = b(rng) ? 1 : 0;
  return x;
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.system = SystemKind::random;
  c.schedule = {1000, 4000, 16000};
  c.statistics = {"moebius", "bilinear", "pnt", "residue", "l1_integral"};
  c.prime_pairs = {{2, 3}, {5, 7}};
  return c;
}

}  // namespace

TEST(Experiments, MoebiusAgainstBruteForce) {
  auto x = random_bits(3000, 11);
  double m = 0;
  for (auto v : x) m += v;
  m /= 3000;
  double c = 0, r = 0;
  for (std::uint64_t n = 1; n <= 3000; ++n) {
    c += mu_bruteforce(n) * (x[n - 1] - m);
    r += mu_bruteforce(n) * x[n - 1];
  }
  auto got = moebius_correlation(x, mu_table());
  EXPECT_NEAR(got.centered, std::abs(c) / 3000, 1e-12);
  EXPECT_NEAR(got.raw, std::abs(r) / 3000, 1e-12);
}

TEST(Experiments, MoebiusConstantAndControl) {
  Bits ones(100000, 1);
  auto c = moebius_correlation(ones, mu_table());
  EXPECT_EQ(c.centered, 0.0);
  EXPECT_GT(c.raw, 0.0);  // the Mertens term
  Bits ind(100000, 0);
  for (std::size_t n = 1; n <= ind.size(); ++n) ind[n - 1] = mu_table().mu(n) == 1;
  double d = 6 / (M_PI * M_PI);
  double v = moebius_correlation(ind, mu_table()).centered;
  EXPECT_GT(v, 0.5 * (d / 2 - d * d / 4));  // order one, no decay
  EXPECT_LT(v, 1.0);
  EXPECT_THROW(moebius_correlation(Bits(2000001, 0), mu_table()), BoundsError);
}

TEST(Experiments, ChaconMoebiusDecreasing) {
  ExperimentConfig cfg;
  auto w = orbit_word(cfg, 1000000);
  double prev = 1e9;
  for (std::size_t N : {10000u, 100000u, 1000000u}) {
    double v = moebius_correlation(w.bits, mu_table(), N).centered;
    EXPECT_LT(v, prev) << N;
    prev = v;
  }
}

TEST(Experiments, BilinearControls) {
  auto x = random_bits(800000, 5);
  // p = q: density of ones along the progression
  auto same = bilinear_prime_correlation(x, 3, 3, 100000);
  std::size_t ones = 0;
  for (std::size_t n = 1; n <= 100000; ++n) ones += x[3 * n - 1];
  EXPECT_DOUBLE_EQ(same.raw, static_cast<double>(ones) / 100000);
  // independent bits: centered value O(N^{-1/2})
  auto ind = bilinear_prime_correlation(x, 3, 7, 100000);
  EXPECT_LT(ind.centered, 4 / std::sqrt(1e5));
  EXPECT_THROW(bilinear_prime_correlation(x, 9, 2, 100000), CapacityError);
  EXPECT_THROW(bilinear_prime_correlation(x, 0, 2, 10), DomainError);
}

TEST(Experiments, ChaconBilinearDecay) {
  ExperimentConfig cfg;
  auto w = orbit_word(cfg, 13000000);
  EXPECT_LT(bilinear_prime_correlation(w.bits, 7, 13, 1000000).raw,
            bilinear_prime_correlation(w.bits, 7, 13, 10000).raw);
}

TEST(Experiments, PNTStatistic) {
  Bits ones(1000000, 1);
  auto s = pnt_statistic(ones, lambda_table(), 1);
  EXPECT_NEAR(s.lhs, 999587, 1.0);  // psi(10^6)
  EXPECT_DOUBLE_EQ(s.main, 1e6);
  EXPECT_LT(s.rel_main, 0.03);
  EXPECT_TRUE(std::isnan(s.error_scale_ratio));
  auto z = pnt_statistic(Bits(1000, 0), lambda_table(), 3, 5);
  EXPECT_EQ(z.lhs, 0.0);
  EXPECT_EQ(z.main, 0.0);
  EXPECT_EQ(z.plain, 0.0);
  // small case by hand against the brute-force oracle
  auto x = random_bits(5000, 3);
  double lhs = 0, coprime = 0;
  for (std::uint64_t j = 1; j <= 5000; ++j)
    if (x[j - 1]) {
      lhs += lambda_bruteforce(j + 17);
      coprime += std::gcd<std::uint64_t>(j + 17, 12) == 1;
    }
  auto t = pnt_statistic(x, lambda_table(), 12, 17);
  EXPECT_NEAR(t.lhs, lhs, 1e-9);
  EXPECT_DOUBLE_EQ(t.main, 3 * coprime);
  EXPECT_GT(t.error_scale_ratio, 0);
  EXPECT_THROW(pnt_statistic(Bits(10, 1), lambda_table(), 0), DomainError);
}

TEST(Experiments, PNTForExchangeWord) {
  auto P = params_from_periodic({{5, 5, 1}});
  EXPECT_TRUE(check_conditions({{5, 5, 1}}, 4).both_hold());
  auto x = project01(orbit_coding(P, kZero, 200000), '1');
  EXPECT_LT(pnt_statistic(x, lambda_table(), 1).rel_plain, 0.1);
}

TEST(Experiments, ResidueInequality) {
  EXPECT_EQ(residue_equidistribution(random_bits(1000, 1), 1, 0).discrepancy, 0.0);
  for (std::int64_t q : {2, 5, 12}) {
    Bits x(12000, 0);
    for (std::size_t j = 1; j <= x.size(); ++j) x[j - 1] = static_cast<std::int64_t>(j % q) == 1;
    auto r = residue_equidistribution(x, q, 1);
    EXPECT_NEAR(r.discrepancy, static_cast<double>(q - 1) / (q * q), 1e-12);
    EXPECT_NEAR(r.bound, 1.0 / q, 1e-12);
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto x = random_bits(3001, seed, 0.1 + 0.04 * static_cast<double>(seed));
    for (std::int64_t q : {2, 3, 7, 10})
      for (std::int64_t a = 0; a < q; ++a) {
        auto r = residue_equidistribution(x, q, a);
        EXPECT_LE(r.discrepancy, r.bound + 1e-12);
      }
  }
  EXPECT_THROW(residue_equidistribution(Bits(5, 0), 3, 3), DomainError);
}

TEST(Experiments, ChaconResidueDecay) {
  ExperimentConfig cfg;
  auto w = orbit_word(cfg, 1000000);
  double prev = 1e9;
  for (std::size_t N : {10000u, 100000u, 1000000u}) {
    double v = residue_equidistribution(w.bits, 5, 0, N).discrepancy;
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Experiments, OrbitWords) {
  ExperimentConfig c;
  auto b4 = word_of(make_classical_chacon(), 4);
  EXPECT_EQ(orbit_word(c, 40).bits, Bits(b4.begin(), b4.begin() + 40));
  auto b = block_word(c, 10000);
  EXPECT_EQ(b.bits.size(), 9841u);  // h_8
  c.system = SystemKind::iet;
  auto w = orbit_word(c, 500);
  IETParams P(c.iet_alpha, c.iet_beta);
  EXPECT_EQ(w.bits, project01(orbit_coding(P, kZero, 500), '1'));
  c.system = SystemKind::random;
  EXPECT_EQ(orbit_word(c, 100).bits, orbit_word(c, 100).bits);
}

TEST(Experiments, Validation) {
  auto c = small_config();
  EXPECT_NO_THROW(validate(c));
  auto bad = c;
  bad.schedule = {100, 100};
  EXPECT_THROW(validate(bad), DomainError);
  bad = c;
  bad.tau = 0.5;
  EXPECT_THROW(validate(bad), DomainError);
  bad = c;
  bad.statistics = {"moebuis"};
  try {
    validate(bad);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("moebius"), std::string::npos);
  }
  bad = c;
  bad.system = SystemKind::spec;
  bad.spec_file = "/nonexistent/x.spec";
  EXPECT_THROW(validate(bad), DomainError);
  bad = c;
  bad.assert_decay = {"major_arcs"};
  EXPECT_THROW(validate(bad), DomainError);
}

TEST(Experiments, RunIsDeterministic) {
  auto c = small_config();
  c.assert_decay = {"moebius"};
  auto a = run_experiment(c), b = run_experiment(c);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  // per N: moebius, 2 pairs x 2 variants, 2 pnt, 2 residue, l1_integral
  EXPECT_EQ(a.rows.size(), 3u * 10);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].value, b.rows[i].value);
    EXPECT_EQ(a.rows[i].statistic, b.rows[i].statistic);
  }
  std::size_t asserted = 0;
  for (const auto& v : a.verdicts) {
    asserted += v.asserted;
    if (v.statistic == "moebius") {
      EXPECT_TRUE(v.asserted);
    }
  }
  EXPECT_EQ(asserted, 1u);
  // i.i.d. bits: the centered correlation falls roughly like N^{-1/2}
  auto it = std::find_if(a.verdicts.begin(), a.verdicts.end(), [](const auto& v) { return v.statistic == "moebius"; });
  EXPECT_EQ(it->decays, a.passed());
}

TEST(Experiments, VerdictsComeFromTheSeries) {
  auto c = small_config();
  c.statistics = {"residue"};
  c.assert_decay = {"residue"};
  c.decay_factor = 1e9;  // unreachable
  auto r = run_experiment(c);
  EXPECT_FALSE(r.passed());
  c.decay_factor = 1;
  c.assert_decay.clear();
  EXPECT_TRUE(run_experiment(c).passed());
}
