#include "rank1/word_engine.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace rank1;

namespace {

// Straight expansion of B_{n+1} = B_n 1^{a_1} ... B_n 1^{top}.
std::string expand(const RankOneSpec& s, std::size_t n) {
  std::string b = "0";
  for (std::size_t k = 0; k < n; ++k) {
    auto r = s.level(k);
    std::string nb;
    for (std::int64_t j = 0; j < r.w; ++j) {
      nb += b;
      if (j + 1 < r.w) nb += std::string(static_cast<std::size_t>(r.spacers[j]), '1');
    }
    nb += std::string(static_cast<std::size_t>(r.top), '1');
    b = nb;
  }
  return b;
}

std::string pow_str(const std::string& s, std::int64_t k) {
  std::string r;
  for (std::int64_t i = 0; i < k; ++i) r += s;
  return r;
}

}  // namespace

TEST(WordEngine, ChaconHeights) {
  auto c = make_classical_chacon();
  EXPECT_EQ(height(c, 0), 1);
  EXPECT_EQ(height(c, 1), 4);
  EXPECT_EQ(height(c, 2), 13);
  EXPECT_EQ(height(c, 2), BigInt(bits_to_string(word_of(c, 2)).size()));
}

TEST(WordEngine, ChaconWords) {
  auto c = make_classical_chacon();
  EXPECT_EQ(bits_to_string(word_of(c, 0)), "0");
  EXPECT_EQ(bits_to_string(word_of(c, 1)), "0010");
  EXPECT_EQ(bits_to_string(word_of(c, 2)), "0010001010010");
}

TEST(WordEngine, GeneralizedChaconFollowsItsRule) {
  // B^p 1 B^q literally: p = q = 1 gives B 1 B.
  EXPECT_EQ(bits_to_string(word_of(make_chacon(1, 1), 1)), "010");
  EXPECT_EQ(bits_to_string(word_of(make_chacon(2, 1), 1)), "0010");
  auto g = make_chacon(IntSeq(IntExpr("n+1")), IntSeq(IntExpr("n+2")));
  std::string b = "0";
  for (std::size_t n = 0; n < 6; ++n) {
    b = pow_str(b, static_cast<std::int64_t>(n) + 1) + "1" + pow_str(b, static_cast<std::int64_t>(n) + 2);
    if (b.size() > (1u << 20)) break;
    EXPECT_EQ(bits_to_string(word_of(g, n + 1)), b) << "level " << n + 1;
  }
}

TEST(WordEngine, KatokFollowsItsRule) {
  EXPECT_EQ(bits_to_string(word_of(make_katok(1), 1)), "001");
  for (std::int64_t p : {1, 2, 3}) {
    auto k = make_katok(p);
    std::string b = "0";
    for (std::size_t n = 0; n < 8 && b.size() < (1u << 18); ++n) {
      b = pow_str(b, p) + pow_str(b + "1", p);
      EXPECT_EQ(bits_to_string(word_of(k, n + 1)), b) << "p=" << p << " level " << n + 1;
    }
  }
}

TEST(WordEngine, LevelZero) {
  EXPECT_EQ(bits_to_string(word_of(make_katok(3), 0)), "0");
  EXPECT_EQ(bits_to_string(SymbolicWord(make_classical_chacon(), 0).materialize(0, 1)), "0");
}

TEST(WordEngine, SpacerProfiles) {
  auto p = spacer_profile(make_classical_chacon(), 5);
  EXPECT_EQ(p.min, 0);
  EXPECT_EQ(p.max, 1);
  EXPECT_FALSE(p.uniform);
  auto u = RankOneSpec::from_levels({LevelRule{4, {1, 1, 1}, 0}});
  auto pu = spacer_profile(u, 3);
  EXPECT_EQ(pu.min, 1);
  EXPECT_EQ(pu.max, 1);
  EXPECT_TRUE(pu.uniform);
  auto pk = spacer_profile(make_katok(1), 2);
  EXPECT_EQ(pk.min, 0);
  EXPECT_EQ(pk.max, 1);
  EXPECT_FALSE(pk.uniform);
}

TEST(WordEngine, RangesMatchFullWord) {
  std::mt19937_64 rng(7);
  std::vector<RankOneSpec> specs{make_classical_chacon(), make_katok(2),
                                 RankOneSpec::from_levels({LevelRule{3, {2, 0}, 0}, LevelRule{2, {3}, 1}})};
  for (const auto& s : specs) {
    for (std::size_t n = 0; n <= 12; ++n) {
      SymbolicWord w(s, n);
      if (w.length() > (1 << 20)) break;
      std::string full = expand(s, n);
      ASSERT_EQ(BigInt(full.size()), w.length());
      ASSERT_EQ(bits_to_string(w.materialize()), full);
      for (int t = 0; t < 20; ++t) {
        std::uniform_int_distribution<std::size_t> d(0, full.size());
        std::size_t a = d(rng), b = d(rng);
        if (a > b) std::swap(a, b);
        EXPECT_EQ(bits_to_string(w.materialize(a, b)), full.substr(a, b - a));
      }
    }
  }
}

TEST(WordEngine, RecursionConsistency) {
  auto s = make_classical_chacon();
  for (std::size_t n = 0; n < 8; ++n) {
    std::string lower = bits_to_string(word_of(s, n));
    std::string upper = bits_to_string(word_of(s, n + 1));
    EXPECT_EQ(upper, lower + lower + "1" + lower);
  }
}

TEST(WordEngine, DeepRangesUseBigHeights) {
  auto s = make_classical_chacon();
  SymbolicWord w(s, 60);
  EXPECT_GT(w.length(), BigInt(1) << 90);
  // the last symbols of B_n end with B_1 = "0010"
  auto tail = w.materialize(w.length() - 4, w.length());
  EXPECT_EQ(bits_to_string(tail), "0010");
  // the prefix of any level is a prefix of B_8
  EXPECT_EQ(bits_to_string(w.materialize(0, 1000)), bits_to_string(word_of(s, 8)).substr(0, 1000));
}

TEST(WordEngine, Errors) {
  SymbolicWord w(make_classical_chacon(), 3);
  EXPECT_THROW(w.materialize(0, 41), BoundsError);
  EXPECT_THROW(w.materialize(5, 4), BoundsError);
  SymbolicWord big(make_classical_chacon(), 30);
  EXPECT_THROW(big.materialize(0, BigInt(1) << 27), CapacityError);
  EXPECT_THROW(RankOneSpec::from_levels({LevelRule{1, {}, 0}}).level(0), DomainError);
  EXPECT_THROW(RankOneSpec::from_levels({LevelRule{3, {1}, 0}}).level(0), DomainError);
}

TEST(WordEngine, Summability) {
  auto s = make_classical_chacon();
  auto ps = summability_partial_sums(s, 20);
  double bound = 0;
  auto hs = heights(s, 20);
  for (std::size_t n = 0; n < ps.size(); ++n) {
    if (n) {
      EXPECT_GE(ps[n], ps[n - 1]);
    }
    bound += 1.0 / hs[n].convert_to<double>();
    EXPECT_LE(ps[n], 1.0 * bound + 1e-15);
  }
}

TEST(WordEngine, SpecFile) {
  auto cfg = KVConfig::parse("family = custom\ncuts = 3\nspacers = 0,1\n", spec_file_keys());
  auto s = parse_spec(cfg);
  EXPECT_EQ(bits_to_string(word_of(s, 2)), "0010001010010");
  auto k = parse_spec(KVConfig::parse("family = katok\np = 1\n", spec_file_keys()));
  EXPECT_EQ(bits_to_string(word_of(k, 1)), "001");
  auto g = parse_spec(KVConfig::parse("family = custom\ncuts = n+2\nspacers = 1*\n", spec_file_keys()));
  EXPECT_EQ(g.level(3).w, 5);
  EXPECT_EQ(g.level(3).spacers, (std::vector<std::int64_t>{1, 1, 1, 1}));
  auto multi = parse_spec(KVConfig::parse("family=custom\ncuts=2,3\nspacers=1;0,2\n", spec_file_keys()));
  EXPECT_EQ(bits_to_string(word_of(multi, 2)), "010" "010" "11" "010");
  EXPECT_THROW(KVConfig::parse("famly = chacon\n", spec_file_keys()), ConfigError);
  try {
    KVConfig::parse("family = chacon\n\ncutz = 3\n", spec_file_keys());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line, 3);
    EXPECT_NE(std::string(e.what()).find("cuts"), std::string::npos);
  }
}
