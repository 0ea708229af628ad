#include "rank1/symbolic_class.hpp"

#include <gtest/gtest.h>

using namespace rank1;

namespace {

RigidParams top(std::size_t n) {
  RigidParams r;
  r.top_level = n;
  return r;
}

WordSystem doubling(std::size_t levels) {
  WordSystem sys(4);
  WordRef w = sys.add_base(string_to_bits("01"));
  for (std::size_t n = 1; n <= levels; ++n) w = sys.add_word(n, {{w, 2}});
  return sys;
}

// L_n = ||D_n||_1 for the kernel with 2n+1 terms, in closed form
double lebesgue_constant(std::int64_t n) {
  double s = 1.0 / static_cast<double>(2 * n + 1);
  for (std::int64_t k = 1; k <= n; ++k)
    s += 2.0 / M_PI / static_cast<double>(k) * std::tan(M_PI * static_cast<double>(k) / static_cast<double>(2 * n + 1));
  return s;
}

}  // namespace

TEST(SymbolicClass, DecompositionReproducesWords) {
  auto spec = make_classical_chacon();
  auto rc = from_rank_one_rigid(spec, top(9));
  EXPECT_EQ(rc.start_level, 1u);
  for (std::size_t s = 0; s < rc.chain.size(); ++s)
    EXPECT_EQ(rc.system.materialize(rc.chain[s]), word_of(spec, rc.start_level + s)) << s;
  for (std::size_t s = 1; s < rc.chain.size(); ++s)
    EXPECT_EQ(rc.system.word(rc.chain[s]).parts.size(), 3u);  // W^2 1 W
}

TEST(SymbolicClass, GeneralizedChaconHasThreeParts) {
  auto spec = make_chacon(IntSeq(IntExpr("n+1")), IntSeq(IntExpr("n+1")));
  auto rc = from_rank_one_rigid(spec, RigidParams{6, 0});
  for (std::size_t s = 1; s < rc.chain.size(); ++s) {
    const auto& parts = rc.system.word(rc.chain[s]).parts;
    ASSERT_EQ(parts.size(), 3u);
    EXPECT_EQ(parts[0].k, static_cast<std::int64_t>(s));
    EXPECT_EQ(parts[1].ref, rc.spacer);
    EXPECT_EQ(parts[2].k, static_cast<std::int64_t>(s));
    EXPECT_EQ(rc.system.materialize(rc.chain[s]), word_of(spec, s));
  }
}

TEST(SymbolicClass, KatokHasTwoRuns) {
  auto rc = from_rank_one_rigid(make_katok(1), RigidParams{8, 0});
  for (std::size_t s = 1; s < rc.chain.size(); ++s) EXPECT_EQ(rc.system.word(rc.chain[s]).parts.size(), 2u);
  // general p: B^{p+1} 1 (B 1)^{p-1} gives 2p runs
  auto r3 = from_rank_one_rigid(make_katok(3), RigidParams{5, 0});
  EXPECT_EQ(r3.system.word(r3.chain[1]).parts.size(), 6u);
  EXPECT_THROW(from_rank_one_rigid(make_katok(3), RigidParams{5, 0, 6}), StructureError);
}

TEST(SymbolicClass, NonRigidSpecRejected) {
  // alternating spacer values give one run per copy
  auto s = RankOneSpec::from_levels({LevelRule{12, {1, 2, 1, 2, 1, 2, 1, 2, 1, 2, 1}, 0}});
  EXPECT_THROW(from_rank_one_rigid(s, RigidParams{3, 0, 16}), StructureError);
}

TEST(SymbolicClass, ChainRatioShrinks) {
  auto rc = from_rank_one_rigid(make_classical_chacon(), top(12));
  EXPECT_LT(rc.top_ratio, 0.1);
}

TEST(SymbolicClass, ConstructionErrors) {
  WordSystem sys(3);
  auto a = sys.add_base(string_to_bits("1"));
  EXPECT_THROW(sys.add_word(1, {{a, 1}, {a, 2}, {a, 1}}), StructureError);  // r = 3 is not < 3
  EXPECT_THROW(sys.add_word(1, {{{1, 0}, 1}}), StructureError);
  EXPECT_THROW(sys.add_word(2, {{a, 1}}), StructureError);
  EXPECT_THROW(sys.add_word(1, {{a, 0}}), StructureError);
  EXPECT_THROW(sys.add_word(1, {{{0, 5}, 1}}), BoundsError);
}

TEST(SymbolicClass, DoublingChainGrowth) {
  auto sys = doubling(12);
  auto rep = check_growth(sys, 3.0);
  for (std::size_t s = 1; s <= 12; ++s) EXPECT_DOUBLE_EQ(rep.beta[s], std::ldexp(1.0, static_cast<int>(s)));
  ASSERT_TRUE(rep.passes());
  EXPECT_EQ(*rep.s0, 4u);  // 2^s > 3s from s = 4 on
  auto strict = check_growth(sys, 1000.0);
  EXPECT_FALSE(strict.passes());
}

TEST(SymbolicClass, ChaconGrowth) {
  auto rc = from_rank_one_rigid(make_classical_chacon(), top(10));
  auto rep = check_growth(rc.system, 1.0);
  EXPECT_TRUE(rep.passes());
  for (std::size_t s = 1; s + 1 < rep.beta.size(); ++s) EXPECT_GT(rep.beta[s + 1], rep.beta[s]);
}

TEST(SymbolicClass, DirichletKernel) {
  std::vector<double> expo;
  for (std::int64_t n : {50, 500, 5000, 50000}) {
    Bits ones(static_cast<std::size_t>(2 * n + 1), 1);
    auto est = word_l1_norm(ones);
    EXPECT_NEAR(est.value, lebesgue_constant(n), 2e-3 * lebesgue_constant(n));
    EXPECT_NEAR(est.value, 4 / (M_PI * M_PI) * std::log(static_cast<double>(2 * n + 1)), 1.5);
    expo.push_back(l1_exponent(est.value, static_cast<double>(ones.size())));
  }
  for (std::size_t i = 1; i < expo.size(); ++i) EXPECT_LT(expo[i], expo[i - 1]);
}

TEST(SymbolicClass, ChaconExponentColumn) {
  auto rc = from_rank_one_rigid(make_classical_chacon(), top(12));
  // chain index s holds B_{s+1}; h in [1e3, 1e6] means B_6 .. B_12
  auto rows = l1_growth_check(rc.system, 5, 11);
  ASSERT_EQ(rows.size(), 7u);
  // beta(s) = 3^s misses log beta(s)/s -> infinity: the exponent creeps up, with shrinking steps
  EXPECT_FALSE(exponent_decreasing(rows));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_TRUE(rows[i].converged);
    EXPECT_LT(rows[i].exponent, 0.5);
    if (i >= 2) {
      EXPECT_LT(rows[i].exponent - rows[i - 1].exponent, rows[i - 1].exponent - rows[i - 2].exponent);
    }
  }
}

TEST(SymbolicClass, GrowingChainMeetsProductBound) {
  // p_n = q_n = n + 1 gives beta(s) growing faster than any exponential
  auto spec = make_chacon(IntSeq(IntExpr("n+1")), IntSeq(IntExpr("n+1")));
  auto rc = from_rank_one_rigid(spec, RigidParams{7, 0});
  auto rows = l1_growth_check(rc.system, 4, 7);
  ASSERT_EQ(rows.size(), 4u);
  double prev = 1e9;
  for (const auto& r : rows) {
    double ratio = r.l1 / r.product_bound;
    EXPECT_LT(ratio, 1.0) << r.ref.level;
    EXPECT_LT(ratio, prev) << r.ref.level;
    prev = ratio;
  }
}

TEST(SymbolicClass, IteratedBoundIdentity) {
  WordSystem sys;
  auto v = sys.add_base(string_to_bits("0110"));
  auto one = sys.add_word(1, {{v, 1}});
  auto r = iterate_l1_bound(sys, one);
  EXPECT_NEAR(r.bound, std::log(3.0) * word_l1_norm(string_to_bits("0110")).value, 1e-12);
  EXPECT_NEAR(r.ratio, 1 / std::log(3.0), 1e-3);
}

TEST(SymbolicClass, IteratedBoundPower) {
  WordSystem sys;
  auto vb = string_to_bits("01101");
  auto v = sys.add_base(vb);
  const std::int64_t k = 7;
  auto w = sys.add_word(1, {{v, k}});
  auto r = iterate_l1_bound(sys, w);
  double pv = word_l1_norm(vb).value;
  EXPECT_NEAR(r.bound, std::log(2.0 + k) * pv, 1e-12);
  // the measured norm is the quadrature of |P_V(theta) sum_{j<k} e(j l theta)|
  auto pw = build_PW(vb) * dirichlet_factor(k, static_cast<std::int64_t>(vb.size()));
  EXPECT_NEAR(r.measured, l1_norm_converged(pw).value, 2e-3 * r.measured);
}

TEST(SymbolicClass, ChaconBoundRatio) {
  auto rc = from_rank_one_rigid(make_classical_chacon(), top(12));
  for (const auto& ref : rc.chain) {
    auto r = iterate_l1_bound(rc.system, ref);
    EXPECT_LE(r.ratio, 1.0 + 1e-9) << ref.level;
  }
}

TEST(SymbolicClass, FileRoundTrip) {
  auto rc = from_rank_one_rigid(make_classical_chacon(), top(5));
  auto text = serialize_system(rc.system);
  auto back = parse_system(text);
  EXPECT_EQ(serialize_system(back), text);
  EXPECT_EQ(back.materialize({4, 0}), word_of(make_classical_chacon(), 5));
  auto sys = parse_system("# doubling\nr_bound = 4\n0: 01 | 1\n1: W[0,0]^2 | W[0,1] W[0,0]\n2: W[1,0]^2\n");
  EXPECT_EQ(bits_to_string(sys.materialize({2, 0})), "01010101");
  EXPECT_EQ(bits_to_string(sys.materialize({1, 1})), "101");
  try {
    parse_system("0: 01\n1: W[0,3]\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line, 2);
  }
  EXPECT_THROW(parse_system("r_bnd = 3\n0: 1\n"), ConfigError);
  EXPECT_THROW(parse_system("0: 1\n2: W[0,0]\n"), ConfigError);
  EXPECT_THROW(parse_system("r_bound = 2\n0: 1\n1: W[0,0] W[0,0]\n"), ConfigError);
}
