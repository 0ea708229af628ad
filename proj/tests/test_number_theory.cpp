#include "rank1/number_theory.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace rank1;

TEST(NumberTheory, SmallValues) {
  auto mu = sieve(TableKind::mu, 100);
  EXPECT_EQ(mu.mu(1), 1);
  EXPECT_EQ(mu.mu(2), -1);
  EXPECT_EQ(mu.mu(4), 0);
  EXPECT_EQ(mu.mu(6), 1);
  auto la = sieve(TableKind::lambda, 100);
  EXPECT_NEAR(la.lambda(8), std::log(2.0), 1e-15);
  EXPECT_EQ(la.lambda(6), 0.0);
  EXPECT_EQ(la.lambda(1), 0.0);
  EXPECT_THROW(mu.mu(101), BoundsError);
  EXPECT_THROW(mu.lambda(5), DomainError);
}

TEST(NumberTheory, MatchesBruteForce) {
  const std::uint64_t N = 100000;
  // small blocks force many segments
  auto mu = sieve(TableKind::mu, N, 4096);
  auto la = sieve(TableKind::lambda, N, 4096);
  for (std::uint64_t n = 1; n <= N; ++n) {
    ASSERT_EQ(mu.mu(n), mu_bruteforce(n)) << n;
    ASSERT_NEAR(la.lambda(n), lambda_bruteforce(n), 1e-12) << n;
  }
}

TEST(NumberTheory, Mertens) {
  auto mu = sieve(TableKind::mu, 10000);
  long s = 0;
  for (std::uint64_t n = 1; n <= 10000; ++n) s += mu.mu(n);
  EXPECT_EQ(s, -23);
  EXPECT_NEAR(mu_exp_sum(mu, 0.0, 10000).real(), -23.0, 1e-9);
}

TEST(NumberTheory, ChebyshevAndSquarefree) {
  auto la = sieve(TableKind::lambda, 1000000);
  double psi = 0;
  for (std::uint64_t n = 1; n <= 1000000; ++n) psi += la.lambda(n);
  EXPECT_NEAR(psi, 999587.0, 1.0);
  auto mu = sieve(TableKind::mu, 1000000);
  std::uint64_t sf = 0;
  for (std::uint64_t n = 1; n <= 1000000; ++n) sf += mu.mu(n) != 0;
  EXPECT_NEAR(static_cast<double>(sf), 6.0 / (M_PI * M_PI) * 1e6, 3 * 1000.0);
}

TEST(NumberTheory, ExpSums) {
  auto mu = sieve(TableKind::mu, 100000);
  double th = 0.3;
  auto one = mu_exp_sum(mu, th, 1);
  EXPECT_NEAR(std::abs(one - e1(th)), 0.0, 1e-15);
  // theta = 1/2: sum mu(m)(-1)^m over m <= 10
  int expect = 0;
  for (int m = 1; m <= 10; ++m) expect += mu_bruteforce(m) * (m % 2 ? -1 : 1);
  EXPECT_NEAR(mu_exp_sum(mu, 0.5, 10).real(), expect, 1e-12);
  // rotation vs direct phases over a long range
  double theta = std::sqrt(2.0) - 1;
  cplx direct = 0;
  for (std::uint64_t m = 1; m <= 100000; ++m) {
    long double ph = static_cast<long double>(theta) * m;
    ph -= std::floor(ph);
    direct += static_cast<double>(mu.mu(m)) * e1(static_cast<double>(ph));
  }
  EXPECT_NEAR(std::abs(mu_exp_sum(mu, theta, 100000) - direct), 0.0, 1e-7);
  EXPECT_LE(std::abs(mu_exp_sum(mu, theta, 100000)), 100000.0);
}

TEST(NumberTheory, MertensScaleDecay) {
  auto mu = sieve(TableKind::mu, 1000000);
  double prev = 1e9;
  for (std::uint64_t N : {10000u, 100000u, 1000000u}) {
    double r = std::abs(mu_exp_sum(mu, 0.0, N)) * std::log(static_cast<double>(N)) / static_cast<double>(N);
    EXPECT_LT(r, prev);
    prev = r;
  }
}

TEST(NumberTheory, DirichletApprox) {
  auto a = dirichlet_approx(0.14159265, 100);
  EXPECT_EQ(a.a, 1);
  EXPECT_EQ(a.q, 7);
  auto b = dirichlet_approx(1.0 / 3.0, 3);
  EXPECT_EQ(b.a, 1);
  EXPECT_EQ(b.q, 3);
  EXPECT_NEAR(b.beta, 0.0, 1e-15);
  auto c = dirichlet_approx(0.5 + 1e-9, 10);
  EXPECT_EQ(c.a, 1);
  EXPECT_EQ(c.q, 2);
  for (double th : {0.0, 0.999, 0.61803398875, 0.2718281828, 1e-7}) {
    for (std::int64_t M : {1, 2, 10, 1000, 1000000}) {
      auto r = dirichlet_approx(th, M);
      EXPECT_LE(r.q, M);
      EXPECT_EQ(std::gcd(r.a, r.q), 1);
      EXPECT_LE(std::abs(r.beta), 1.0 / (static_cast<double>(r.q) * static_cast<double>(M)) * (1 + 1e-9));
    }
  }
}

TEST(NumberTheory, VinogradovBounds) {
  auto b = vinogradov_bound(1e6, 100, 0, 0.25);
  double inner = 0.01 + 0.1 + std::pow(10.0, -1.2);
  EXPECT_NEAR(inner, 0.1731, 1e-4);
  double l = std::log(1e6);
  EXPECT_NEAR(b.b1 / (std::pow(l, 4) * 1e6), 0.4161, 1e-4);
  auto t = vinogradov_bound(1e6, 1, 0, 0.25);
  EXPECT_GE(t.b1, 1e6);
  auto c = vinogradov_bound(1e6, 10, 1e-3, 0.25);
  EXPECT_NEAR(std::pow(1010.0, -0.25), 0.1774, 1e-4);
  EXPECT_NEAR(c.b2 / (1e6 * std::pow(l, 4)), std::pow(1010.0, -0.25) + std::pow(1e6, -0.25 / 4), 1e-12);
  EXPECT_THROW(vinogradov_bound(1.5, 1, 0, 0.25), DomainError);
  EXPECT_THROW(vinogradov_bound(1e6, 1, 0, 0.5), DomainError);
}

TEST(NumberTheory, VinogradovInteriorMinimum) {
  double x = 1e8;
  std::vector<double> vals;
  for (int k = 0; (1ULL << k) <= static_cast<std::uint64_t>(x); ++k)
    vals.push_back(vinogradov_bound(x, std::ldexp(1.0, k), 0, 0.25).b1);
  auto it = std::min_element(vals.begin(), vals.end());
  EXPECT_NE(it, vals.begin());
  EXPECT_NE(it, vals.end() - 1);
  EXPECT_GE(vinogradov_bound(x, 1, 0, 0.25).b1, vinogradov_bound(x, std::sqrt(x), 0, 0.25).b1);
}

TEST(NumberTheory, AdmissiblePrimes) {
  std::vector<std::int64_t> want{7, 13, 19, 31, 37, 43};
  EXPECT_EQ(admissible_primes(3, {3}, 5, 50, 6), want);
  EXPECT_EQ(admissible_primes(3, {2, 3}, 5, 50, 6), want);
  EXPECT_EQ(admissible_primes(10, {}, 1, 100, 3), (std::vector<std::int64_t>{11, 13, 17}));
  EXPECT_THROW(admissible_primes(3, {3}, 5, 50, 7), ExhaustionError);
}

TEST(NumberTheory, BinaryTableRoundTrip) {
  auto mu = sieve(TableKind::mu, 12345);
  std::stringstream ss;
  write_mu_table(mu, ss);
  std::string bytes = ss.str();
  EXPECT_EQ(bytes.substr(0, 8), std::string(kMuMagic, 8));
  EXPECT_EQ(bytes.size(), 16u + (12345 + 3) / 4);
  auto back = read_mu_table(ss);
  ASSERT_EQ(back.size(), 12345u);
  for (std::uint64_t n = 1; n <= 12345; ++n) ASSERT_EQ(back.mu(n), mu.mu(n));
  std::stringstream bad("NOTMAGIC");
  EXPECT_THROW(read_mu_table(bad), DomainError);
}

TEST(NumberTheory, CacheDirectory) {
  auto dir = std::filesystem::temp_directory_path() / "rank1_cache_test";
  std::filesystem::remove_all(dir);
  setenv("RANK1_CACHE_DIR", dir.c_str(), 1);
  auto a = cached_mu(5000);
  EXPECT_TRUE(std::filesystem::exists(dir / "mu_5000.bin"));
  auto b = cached_mu(5000);
  for (std::uint64_t n = 1; n <= 5000; ++n) ASSERT_EQ(a.mu(n), b.mu(n));
  unsetenv("RANK1_CACHE_DIR");
  std::filesystem::remove_all(dir);
}

TEST(NumberTheory, Totient) {
  EXPECT_EQ(euler_phi(1), 1);
  EXPECT_EQ(euler_phi(12), 4);
  EXPECT_EQ(euler_phi(97), 96);
}
