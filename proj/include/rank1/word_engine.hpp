#pragma once

// Rank-one cutting-and-stacking words. B_0 = "0" and
//   B_{n+1} = B_n 1^{a_{n,1}} B_n ... B_n 1^{a_{n,w_n-1}} B_n 1^{t_n}
// where t_n is an optional top spacer (zero unless a family needs it).

#include "rank1/common.hpp"
#include "rank1/config.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <unordered_map>

namespace rank1 {

// An integer sequence indexed by level: a list whose last entry repeats,
// or an expression in n.
class IntSeq {
 public:
  IntSeq() : list_{0} {}
  IntSeq(std::int64_t c) : list_{c} {}  // NOLINT: implicit on purpose
  explicit IntSeq(std::vector<std::int64_t> l) : list_(std::move(l)) {
    if (list_.empty()) throw DomainError("empty integer sequence");
  }
  explicit IntSeq(IntExpr e) : expr_(std::move(e)) {}

  static IntSeq parse(const std::string& text) {
    std::string t = trim(text);
    if (t.find('n') != std::string::npos || t.find_first_of("+*/^()") != std::string::npos)
      return IntSeq(IntExpr(t));
    std::vector<std::int64_t> l;
    for (const auto& tok : split(t, ',')) {
      if (tok.empty()) throw DomainError("empty entry in '" + text + "'");
      l.push_back(IntExpr(tok)(0));
    }
    return IntSeq(std::move(l));
  }

  std::int64_t operator()(std::size_t n) const {
    if (expr_) return (*expr_)(static_cast<std::int64_t>(n));
    return n < list_.size() ? list_[n] : list_.back();
  }

  std::string text() const {
    if (expr_) return expr_->source();
    std::string s;
    for (std::size_t i = 0; i < list_.size(); ++i) s += (i ? "," : "") + std::to_string(list_[i]);
    return s;
  }

 private:
  std::vector<std::int64_t> list_;
  std::optional<IntExpr> expr_;
};

struct LevelRule {
  std::int64_t w = 2;
  std::vector<std::int64_t> spacers;  // a_{n,1..w-1}
  std::int64_t top = 0;               // spacer after the last block

  std::int64_t spacer_sum() const {
    std::int64_t s = top;
    for (auto a : spacers) s = checked_add(s, a);
    return s;
  }
};

struct SpecBounds {
  std::int64_t max_cut = 0;
  std::int64_t max_spacer = 0;
};

class RankOneSpec {
 public:
  using Generator = std::function<LevelRule(std::size_t)>;

  RankOneSpec(std::string family, Generator gen, std::optional<SpecBounds> bounds = std::nullopt)
      : family_(std::move(family)), gen_(std::move(gen)), bounds_(bounds) {}

  // Explicit per-level rules; the last one repeats forever.
  static RankOneSpec from_levels(std::vector<LevelRule> levels,
                                 std::optional<SpecBounds> bounds = std::nullopt) {
    if (levels.empty()) throw DomainError("spec needs at least one level");
    auto shared = std::make_shared<std::vector<LevelRule>>(std::move(levels));
    return RankOneSpec(
        "custom",
        [shared](std::size_t n) { return n < shared->size() ? (*shared)[n] : shared->back(); },
        bounds);
  }

  LevelRule level(std::size_t n) const {
    LevelRule r = gen_(n);
    if (r.w < 2) throw DomainError("cut w_" + std::to_string(n) + " must be >= 2");
    if (static_cast<std::int64_t>(r.spacers.size()) != r.w - 1)
      throw DomainError("level " + std::to_string(n) + " needs w-1 = " + std::to_string(r.w - 1) +
                        " spacers, got " + std::to_string(r.spacers.size()));
    if (r.top < 0) throw DomainError("negative top spacer");
    for (auto a : r.spacers)
      if (a < 0) throw DomainError("negative spacer at level " + std::to_string(n));
    if (bounds_) {
      if (r.w > bounds_->max_cut) throw DomainError("cut exceeds declared bound at level " + std::to_string(n));
      for (auto a : r.spacers)
        if (a > bounds_->max_spacer) throw DomainError("spacer exceeds declared bound at level " + std::to_string(n));
      if (r.top > bounds_->max_spacer) throw DomainError("spacer exceeds declared bound at level " + std::to_string(n));
    }
    return r;
  }

  const std::string& family() const { return family_; }
  const std::optional<SpecBounds>& bounds() const { return bounds_; }

  // Canonical description used in run manifests.
  std::string description() const { return description_.empty() ? family_ : description_; }
  void set_description(std::string d) { description_ = std::move(d); }

 private:
  std::string family_;
  Generator gen_;
  std::optional<SpecBounds> bounds_;
  std::string description_;
};

inline BigInt height(const RankOneSpec& spec, std::size_t n) {
  BigInt h = 1;
  for (std::size_t k = 0; k < n; ++k) {
    auto r = spec.level(k);
    h = h * r.w + r.spacer_sum();
  }
  return h;
}

inline std::vector<BigInt> heights(const RankOneSpec& spec, std::size_t n) {
  std::vector<BigInt> hs{BigInt(1)};
  for (std::size_t k = 0; k < n; ++k) {
    auto r = spec.level(k);
    hs.push_back(hs.back() * r.w + r.spacer_sum());
  }
  return hs;
}

// Heights as int64, throwing once they leave machine range.
inline std::vector<std::int64_t> heights64(const RankOneSpec& spec, std::size_t n) {
  std::vector<std::int64_t> hs{1};
  for (std::size_t k = 0; k < n; ++k) {
    auto r = spec.level(k);
    hs.push_back(checked_add(checked_mul(hs.back(), r.w), r.spacer_sum()));
  }
  return hs;
}

struct SpacerProfile {
  std::int64_t min = 0;
  std::int64_t max = 0;
  bool uniform = true;
};

// Min and max over all spacer slots of level n, including a nonzero top spacer.
inline SpacerProfile spacer_profile(const RankOneSpec& spec, std::size_t n) {
  auto r = spec.level(n);
  std::vector<std::int64_t> all = r.spacers;
  if (r.top != 0) all.push_back(r.top);
  SpacerProfile p;
  p.min = *std::min_element(all.begin(), all.end());
  p.max = *std::max_element(all.begin(), all.end());
  p.uniform = p.min == p.max;
  return p;
}

// Partial sums of sum_j a_{n,j} / (w_n h_n) for levels 0..n-1.
inline std::vector<double> summability_partial_sums(const RankOneSpec& spec, std::size_t n) {
  std::vector<double> out;
  double acc = 0;
  BigInt h = 1;
  for (std::size_t k = 0; k < n; ++k) {
    auto r = spec.level(k);
    acc += static_cast<double>(r.spacer_sum()) / (static_cast<double>(r.w) * h.convert_to<double>());
    out.push_back(acc);
    h = h * r.w + r.spacer_sum();
  }
  return out;
}

// B^p 1 B^q
inline RankOneSpec make_chacon(IntSeq p, IntSeq q) {
  RankOneSpec s("chacon", [p, q](std::size_t n) {
    auto pn = p(n), qn = q(n);
    if (pn < 1 || qn < 1) throw DomainError("chacon needs p_n, q_n >= 1");
    LevelRule r;
    r.w = pn + qn;
    r.spacers.assign(static_cast<std::size_t>(r.w - 1), 0);
    r.spacers[static_cast<std::size_t>(pn - 1)] = 1;
    return r;
  });
  s.set_description("chacon p=" + p.text() + " q=" + q.text());
  return s;
}

// Classical Chacon: B B 1 B.
inline RankOneSpec make_classical_chacon() { return make_chacon(2, 1); }

// B^p (B 1)^p
inline RankOneSpec make_katok(IntSeq p) {
  RankOneSpec s("katok", [p](std::size_t n) {
    auto pn = p(n);
    if (pn < 1) throw DomainError("katok needs p_n >= 1");
    LevelRule r;
    r.w = 2 * pn;
    r.spacers.assign(static_cast<std::size_t>(r.w - 1), 0);
    for (std::int64_t j = pn; j < r.w - 1; ++j) r.spacers[static_cast<std::size_t>(j)] = 1;
    r.top = 1;
    return r;
  });
  s.set_description("katok p=" + p.text());
  return s;
}

inline const std::vector<std::string>& spec_file_keys() {
  static const std::vector<std::string> keys{"family", "p", "q", "cuts", "spacers", "top", "max_cut", "max_spacer"};
  return keys;
}

// family = chacon (p, q) | katok (p) | custom (cuts, spacers, top).
// spacers lists one level per ';' group; "k*" fills a level with k.
inline RankOneSpec parse_spec(const KVConfig& cfg) {
  std::string fam = cfg.get("family", "custom");
  std::optional<SpecBounds> bounds;
  if (cfg.has("max_cut") || cfg.has("max_spacer"))
    bounds = SpecBounds{cfg.get_int("max_cut", INT64_MAX), cfg.get_int("max_spacer", INT64_MAX)};
  auto seq = [&](const std::string& key, const std::string& def) {
    try {
      return IntSeq::parse(cfg.get(key, def));
    } catch (const DomainError& e) {
      throw ConfigError(e.what(), cfg.line_of(key));
    }
  };
  if (fam == "chacon") {
    for (auto k : {"cuts", "spacers", "top"})
      if (cfg.has(k)) throw ConfigError(std::string("key '") + k + "' not used by family chacon", cfg.line_of(k));
    return make_chacon(seq("p", "2"), seq("q", "1"));
  }
  if (fam == "katok") {
    for (auto k : {"cuts", "spacers", "top", "q"})
      if (cfg.has(k)) throw ConfigError(std::string("key '") + k + "' not used by family katok", cfg.line_of(k));
    return make_katok(seq("p", "1"));
  }
  if (fam != "custom") throw ConfigError("family must be chacon, katok or custom", cfg.line_of("family"));
  if (!cfg.has("cuts")) throw ConfigError("custom family needs 'cuts'", 0);
  IntSeq cuts = seq("cuts", "2");
  IntSeq top = seq("top", "0");
  std::vector<std::string> groups = split(cfg.get("spacers", "0*"), ';');
  int line = cfg.line_of("spacers");
  std::string text = "custom cuts=" + cfg.get("cuts") + " spacers=" + cfg.get("spacers", "0*");
  RankOneSpec s(
      "custom",
      [cuts, top, groups, line](std::size_t n) {
        LevelRule r;
        r.w = cuts(n);
        r.top = top(n);
        const std::string& g = groups[std::min(n, groups.size() - 1)];
        if (!g.empty() && g.back() == '*') {
          std::int64_t v = IntExpr(g.substr(0, g.size() - 1))(static_cast<std::int64_t>(n));
          r.spacers.assign(static_cast<std::size_t>(std::max<std::int64_t>(r.w - 1, 0)), v);
        } else {
          for (const auto& tok : split(g, ',')) {
            if (tok.empty()) throw ConfigError("empty spacer entry", line);
            r.spacers.push_back(IntExpr(tok)(static_cast<std::int64_t>(n)));
          }
        }
        return r;
      },
      bounds);
  s.set_description(text);
  return s;
}

inline RankOneSpec load_spec(const std::string& path) {
  return parse_spec(KVConfig::load(path, spec_file_keys()));
}

// One step of the word structure: either `count` copies of the lower block
// or a spacer run of `count` ones.
struct Part {
  bool block = true;
  std::int64_t count = 1;
};

// Parts of B_{n+1} in terms of B_n, with runs of adjacent blocks merged.
inline std::vector<Part> level_parts(const LevelRule& r) {
  std::vector<Part> out;
  auto push = [&](bool block, std::int64_t c) {
    if (c == 0) return;
    if (!out.empty() && out.back().block == block) out.back().count += c;
    else out.push_back({block, c});
  };
  for (std::int64_t k = 0; k < r.w; ++k) {
    push(true, 1);
    if (k + 1 < r.w) push(false, r.spacers[static_cast<std::size_t>(k)]);
  }
  push(false, r.top);
  return out;
}

inline constexpr std::size_t kDefaultMaterializeCap = std::size_t{1} << 26;

class SymbolicWord {
 public:
  SymbolicWord(std::shared_ptr<const RankOneSpec> spec, std::size_t level)
      : spec_(std::move(spec)), level_(level) {
    heights_ = heights(*spec_, level_);
    for (std::size_t k = 0; k < level_; ++k) rules_.push_back(spec_->level(k));
  }
  SymbolicWord(const RankOneSpec& spec, std::size_t level)
      : SymbolicWord(std::make_shared<const RankOneSpec>(spec), level) {}

  const RankOneSpec& spec() const { return *spec_; }
  std::size_t level() const { return level_; }
  const BigInt& length() const { return heights_.back(); }
  const BigInt& height_at(std::size_t k) const { return heights_.at(k); }
  const LevelRule& rule(std::size_t k) const { return rules_.at(k); }

  // Symbols [start, end) of B_level, found by descending the recursion.
  Bits materialize(const BigInt& start, const BigInt& end, std::size_t cap = kDefaultMaterializeCap) const {
    if (start < 0 || end < start || end > length())
      throw BoundsError("range [" + start.str() + ", " + end.str() + ") outside [0, " + length().str() + ")");
    BigInt len = end - start;
    if (len > BigInt(cap)) throw CapacityError("range of " + len.str() + " symbols exceeds cap " + std::to_string(cap));
    Bits out;
    out.reserve(len.convert_to<std::size_t>());
    std::unordered_map<std::size_t, Bits> leaf;
    emit(level_, start, end, out, leaf);
    return out;
  }

  Bits materialize(std::size_t cap = kDefaultMaterializeCap) const { return materialize(0, length(), cap); }

 private:
  static constexpr std::size_t kLeafLimit = std::size_t{1} << 14;

  const Bits& leaf_word(std::size_t n, std::unordered_map<std::size_t, Bits>& leaf) const {
    auto it = leaf.find(n);
    if (it != leaf.end()) return it->second;
    Bits w;
    if (n == 0) {
      w = {0};
    } else {
      const Bits& lower = leaf_word(n - 1, leaf);
      for (const auto& pt : level_parts(rules_[n - 1]))
        for (std::int64_t c = 0; c < pt.count; ++c) {
          if (pt.block) w.insert(w.end(), lower.begin(), lower.end());
          else w.push_back(1);
        }
    }
    return leaf.emplace(n, std::move(w)).first->second;
  }

  void emit(std::size_t n, BigInt lo, BigInt hi, Bits& out, std::unordered_map<std::size_t, Bits>& leaf) const {
    if (lo >= hi) return;
    if (heights_[n] <= kLeafLimit) {
      const Bits& w = leaf_word(n, leaf);
      out.insert(out.end(), w.begin() + lo.convert_to<std::ptrdiff_t>(), w.begin() + hi.convert_to<std::ptrdiff_t>());
      return;
    }
    const BigInt& hb = heights_[n - 1];
    BigInt pos = 0;
    for (const auto& pt : level_parts(rules_[n - 1])) {
      BigInt span = pt.block ? hb * pt.count : BigInt(pt.count);
      BigInt end_pos = pos + span;
      BigInt a = lo > pos ? lo : pos, b = hi < end_pos ? hi : end_pos;
      if (a < b) {
        if (!pt.block) {
          out.insert(out.end(), (b - a).convert_to<std::size_t>(), 1);
        } else {
          BigInt first = (a - pos) / hb, last = (b - pos - 1) / hb;
          for (BigInt k = first; k <= last; ++k) {
            BigInt base = pos + k * hb;
            BigInt top = base + hb;
            emit(n - 1, (a > base ? a : base) - base, (b < top ? b : top) - base, out, leaf);
          }
        }
      }
      pos += span;
      if (pos >= hi) break;
    }
  }

  std::shared_ptr<const RankOneSpec> spec_;
  std::size_t level_;
  std::vector<BigInt> heights_;
  std::vector<LevelRule> rules_;
};

inline Bits materialize(const SymbolicWord& w, const BigInt& start, const BigInt& end,
                        std::size_t cap = kDefaultMaterializeCap) {
  return w.materialize(start, end, cap);
}

// Full word B_n.
inline Bits word_of(const RankOneSpec& spec, std::size_t n, std::size_t cap = kDefaultMaterializeCap) {
  return SymbolicWord(spec, n).materialize(cap);
}

// Smallest level whose height reaches `target`.
inline std::size_t level_reaching(const RankOneSpec& spec, const BigInt& target, std::size_t max_level = 200) {
  BigInt h = 1;
  for (std::size_t n = 0; n <= max_level; ++n) {
    if (h >= target) return n;
    auto r = spec.level(n);
    h = h * r.w + r.spacer_sum();
  }
  throw CapacityError("no level up to " + std::to_string(max_level) + " reaches the target height");
}

}  // namespace rank1
