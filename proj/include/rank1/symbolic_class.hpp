#pragma once

// Symbolic systems W = W_1^{k_1} ... W_r^{k_r} with parts from lower levels,
// their growth hypotheses and the L1 growth of P_W.

#include "rank1/config.hpp"
#include "rank1/poly_engine.hpp"
#include "rank1/word_engine.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace rank1 {

struct WordRef {
  std::size_t level = 0, index = 0;
  bool operator==(const WordRef&) const = default;
  auto operator<=>(const WordRef&) const = default;
};

struct SysPart {
  WordRef ref;
  std::int64_t k = 1;
};

struct SysWord {
  Bits explicit_bits;          // level-0 words only
  std::vector<SysPart> parts;  // empty for explicit words
  bool is_base() const { return parts.empty(); }
};

class WordSystem {
 public:
  explicit WordSystem(std::int64_t r_bound = 16) : r_bound_(r_bound) {
    if (r_bound < 2) throw DomainError("r_bound must be at least 2");
  }

  std::int64_t r_bound() const { return r_bound_; }
  std::size_t num_levels() const { return levels_.size(); }
  std::size_t level_size(std::size_t n) const { return levels_.at(n).size(); }
  const SysWord& word(const WordRef& r) const {
    if (r.level >= levels_.size() || r.index >= levels_[r.level].size())
      throw BoundsError("no word W[" + std::to_string(r.level) + "," + std::to_string(r.index) + "]");
    return levels_[r.level][r.index];
  }

  WordRef add_base(Bits bits) {
    if (bits.empty()) throw DomainError("empty base word");
    if (levels_.empty()) levels_.emplace_back();
    if (levels_.size() > 1) throw StructureError("base words belong to level 0");
    levels_[0].push_back({std::move(bits), {}});
    lengths_.clear();
    return {0, levels_[0].size() - 1};
  }

  // Appends a word to `level`, whose parts must sit strictly below it.
  WordRef add_word(std::size_t level, std::vector<SysPart> parts) {
    if (level == 0) throw StructureError("level 0 holds explicit words only");
    if (parts.empty()) throw StructureError("a decomposition needs at least one part");
    if (static_cast<std::int64_t>(parts.size()) >= r_bound_)
      throw StructureError("decomposition has r = " + std::to_string(parts.size()) + " parts, bound is r < " +
                           std::to_string(r_bound_));
    for (const auto& p : parts) {
      if (p.k < 1) throw StructureError("exponents must be positive");
      if (p.ref.level >= level) throw StructureError("parts must come from lower levels");
      word(p.ref);
    }
    if (level > levels_.size()) throw StructureError("levels must be filled in order");
    if (level == levels_.size()) levels_.emplace_back();
    levels_[level].push_back({{}, std::move(parts)});
    return {level, levels_[level].size() - 1};
  }

  BigInt length(const WordRef& r) const {
    auto it = lengths_.find(r);
    if (it != lengths_.end()) return it->second;
    const auto& w = word(r);
    BigInt L = 0;
    if (w.is_base()) L = static_cast<unsigned long long>(w.explicit_bits.size());
    else
      for (const auto& p : w.parts) L += length(p.ref) * p.k;
    lengths_[r] = L;
    return L;
  }

  Bits materialize(const WordRef& r, std::size_t cap = kDefaultMaterializeCap) const {
    BigInt L = length(r);
    if (L > cap) throw CapacityError("word of length " + L.str() + " exceeds cap " + std::to_string(cap));
    Bits out;
    out.reserve(static_cast<std::size_t>(L));
    append(r, out);
    return out;
  }

  std::vector<WordRef> all_words() const {
    std::vector<WordRef> v;
    for (std::size_t n = 0; n < levels_.size(); ++n)
      for (std::size_t i = 0; i < levels_[n].size(); ++i) v.push_back({n, i});
    return v;
  }

 private:
  void append(const WordRef& r, Bits& out) const {
    const auto& w = word(r);
    if (w.is_base()) {
      out.insert(out.end(), w.explicit_bits.begin(), w.explicit_bits.end());
      return;
    }
    for (const auto& p : w.parts) {
      std::size_t start = out.size();
      append(p.ref, out);
      std::size_t len = out.size() - start;
      for (std::int64_t j = 1; j < p.k; ++j) out.insert(out.end(), out.begin() + static_cast<std::ptrdiff_t>(start),
                                                        out.begin() + static_cast<std::ptrdiff_t>(start + len));
    }
  }

  std::int64_t r_bound_;
  std::vector<std::vector<SysWord>> levels_;
  mutable std::map<WordRef, BigInt> lengths_;
};

// ---- chains from rigid rank-one specs ----

struct RigidParams {
  std::size_t top_level = 8;                        // the chain ends at B_{top_level}
  std::optional<std::size_t> start_level;           // W_0 = B_start; default: first level with a spacer
  std::int64_t r_bound = 16;
  std::int64_t chain_C = 3;                          // |W_{s-C}| / |W_s| is reported for this C
};

struct RigidChain {
  WordSystem system;
  std::size_t start_level = 0;
  std::vector<WordRef> chain;  // W_0, ..., W_r
  WordRef spacer;              // the word "1"
  double top_ratio = 0;        // |W_{r-C}| / |W_r|
};

// W_0 = {1, W_0}, W_s = {W_s}, each W_{s+1} cut into runs of W_s and of 1.
inline RigidChain from_rank_one_rigid(const RankOneSpec& spec, const RigidParams& prm = {}) {
  std::size_t start = 0;
  if (prm.start_level) {
    start = *prm.start_level;
  } else {
    while (start < prm.top_level) {
      auto w = word_of(spec, start);
      if (std::find(w.begin(), w.end(), 1) != w.end()) break;
      ++start;
    }
  }
  if (start > prm.top_level) throw DomainError("start level above the top of the chain");
  RigidChain rc{WordSystem(prm.r_bound), start, {}, {}, 0};
  rc.spacer = rc.system.add_base(Bits{1});
  rc.chain.push_back(rc.system.add_base(word_of(spec, start)));
  for (std::size_t n = start; n < prm.top_level; ++n) {
    auto rule = spec.level(n);
    std::vector<SysPart> parts;
    for (const auto& p : level_parts(rule)) parts.push_back({p.block ? rc.chain.back() : rc.spacer, p.count});
    if (static_cast<std::int64_t>(parts.size()) >= prm.r_bound)
      throw StructureError("level " + std::to_string(n) + " splits into " + std::to_string(parts.size()) +
                           " runs; not in the rigid regime for r_bound = " + std::to_string(prm.r_bound));
    rc.chain.push_back(rc.system.add_word(n - start + 1, std::move(parts)));
  }
  auto C = static_cast<std::size_t>(std::max<std::int64_t>(prm.chain_C, 0));
  if (rc.chain.size() > C) {
    auto& top = rc.chain.back();
    auto& low = rc.chain[rc.chain.size() - 1 - C];
    rc.top_ratio = (rc.system.length(low).convert_to<double>()) / rc.system.length(top).convert_to<double>();
  }
  return rc;
}

// ---- growth hypotheses ----

struct GrowthRow {
  std::size_t n = 0, s = 0;
  double beta = 0;
};

struct GrowthReport {
  double C0 = 1;
  std::vector<GrowthRow> rows;
  std::vector<double> beta;        // beta[s] = min over n of |W| / max |W'|, s >= 1 (beta[0] unused)
  std::optional<std::size_t> s0;   // beta(s) > C0 s for all s >= s0 in range
  bool passes() const { return s0.has_value(); }
};

// Words reached from `r` by descending decompositions until the level is <= target.
inline void constituents(const WordSystem& sys, const WordRef& r, std::size_t target, std::set<WordRef>& out) {
  if (r.level <= target) {
    out.insert(r);
    return;
  }
  for (const auto& p : sys.word(r).parts) constituents(sys, p.ref, target, out);
}

inline GrowthReport check_growth(const WordSystem& sys, double C0) {
  GrowthReport rep;
  rep.C0 = C0;
  std::size_t top = sys.num_levels() ? sys.num_levels() - 1 : 0;
  rep.beta.assign(top + 1, std::numeric_limits<double>::infinity());
  for (std::size_t n = 1; n <= top; ++n)
    for (std::size_t i = 0; i < sys.level_size(n); ++i)
      for (std::size_t s = 1; s <= n; ++s) {
        std::set<WordRef> cs;
        constituents(sys, {n, i}, n - s, cs);
        BigInt mx = 0;
        for (const auto& c : cs) mx = std::max(mx, sys.length(c));
        double b = sys.length({n, i}).convert_to<double>() / mx.convert_to<double>();
        rep.rows.push_back({n, s, b});
        rep.beta[s] = std::min(rep.beta[s], b);
      }
  for (std::size_t s = top; s >= 1; --s) {
    if (!(rep.beta[s] > C0 * static_cast<double>(s))) break;
    rep.s0 = s;
  }
  return rep;
}

struct L1GrowthRow {
  WordRef ref;
  BigInt length;
  double l1 = 0;
  double exponent = 0;  // log ||P_W||_1 / log |W|
  double product_bound = 0;    // (C log|W| / n)^n
  bool converged = false;
};

inline double l1_exponent(double l1, double len) { return len > 1 ? std::log(l1) / std::log(len) : 0.0; }

inline double product_bound(double len, std::size_t n, double C = 1.0) {
  if (n == 0) return 1.0;
  auto nd = static_cast<double>(n);
  return std::pow(C * std::log(len) / nd, nd);
}

inline std::vector<L1GrowthRow> l1_growth_check(const WordSystem& sys, std::size_t lo, std::size_t hi,
                                                double C = 1.0, std::size_t cap = kDefaultMaterializeCap) {
  std::vector<L1GrowthRow> rows;
  for (std::size_t n = lo; n <= hi && n < sys.num_levels(); ++n)
    for (std::size_t i = 0; i < sys.level_size(n); ++i) {
      WordRef r{n, i};
      auto w = sys.materialize(r, cap);
      auto est = word_l1_norm(w);
      auto len = static_cast<double>(w.size());
      rows.push_back({r, sys.length(r), est.value, l1_exponent(est.value, len), product_bound(len, n, C),
                      est.converged});
    }
  return rows;
}

inline bool exponent_decreasing(const std::vector<L1GrowthRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].ref.level > rows[i - 1].ref.level && !(rows[i].exponent < rows[i - 1].exponent)) return false;
  return true;
}

// Right side of ||P_W||_1 <~ sum_i log(2 + k_i) ||P_{W_i}||_1 with constant 1,
// unrolled to the explicit words, where measured norms are used.
class L1BoundIterator {
 public:
  explicit L1BoundIterator(const WordSystem& sys, std::size_t cap = kDefaultMaterializeCap) : sys_(sys), cap_(cap) {}

  double bound(const WordRef& r) {
    auto it = memo_.find(r);
    if (it != memo_.end()) return it->second;
    const auto& w = sys_.word(r);
    double b = 0;
    if (w.is_base()) b = word_l1_norm(w.explicit_bits).value;
    else
      for (const auto& p : w.parts) b += std::log(2.0 + static_cast<double>(p.k)) * bound(p.ref);
    memo_[r] = b;
    return b;
  }
  double measured(const WordRef& r) { return word_l1_norm(sys_.materialize(r, cap_)).value; }

 private:
  const WordSystem& sys_;
  std::size_t cap_;
  std::map<WordRef, double> memo_;
};

struct L1BoundResult {
  double bound = 0, measured = 0, ratio = 0;
};

inline L1BoundResult iterate_l1_bound(const WordSystem& sys, const WordRef& r) {
  L1BoundIterator it(sys);
  L1BoundResult res;
  res.bound = it.bound(r);
  res.measured = it.measured(r);
  res.ratio = res.bound > 0 ? res.measured / res.bound : std::numeric_limits<double>::infinity();
  return res;
}

// ---- system files ----
//
//   # comment
//   r_bound = 8
//   0: 1 | 0010
//   1: W[0,1]^2 W[0,0] W[0,1]
//
// Words on one level are separated by '|'; level 0 lists bit strings.

inline WordSystem parse_system(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  std::int64_t r_bound = 16;
  std::vector<std::pair<int, std::string>> body;
  while (std::getline(in, raw)) {
    ++lineno;
    auto line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    auto eq = line.find('=');
    auto colon = line.find(':');
    if (eq != std::string::npos && (colon == std::string::npos || eq < colon)) {
      auto key = trim(line.substr(0, eq));
      if (key != "r_bound") {
        auto near = nearest_key(key, {"r_bound"});
        throw ConfigError("unknown key '" + key + "'" + (near.empty() ? "" : ", did you mean '" + near + "'?"),
                          lineno);
      }
      try {
        r_bound = std::stoll(trim(line.substr(eq + 1)));
      } catch (const std::exception&) {
        throw ConfigError("r_bound needs an integer", lineno);
      }
      continue;
    }
    body.push_back({lineno, line});
  }
  WordSystem sys(r_bound);
  std::size_t expect = 0;
  for (const auto& [ln, line] : body) {
    auto colon = line.find(':');
    if (colon == std::string::npos) throw ConfigError("expected 'n: ...'", ln);
    std::size_t n = 0;
    try {
      n = static_cast<std::size_t>(std::stoull(trim(line.substr(0, colon))));
    } catch (const std::exception&) {
      throw ConfigError("bad level number", ln);
    }
    if (n != expect) throw ConfigError("levels must appear in order; expected " + std::to_string(expect), ln);
    ++expect;
    for (const auto& item : split(line.substr(colon + 1), '|')) {
      auto w = trim(item);
      if (w.empty()) throw ConfigError("empty word", ln);
      try {
        if (n == 0) {
          sys.add_base(string_to_bits(w));
          continue;
        }
        std::vector<SysPart> parts;
        std::istringstream ws(w);
        std::string tok;
        while (ws >> tok) {
          std::size_t lev = 0, idx = 0;
          std::int64_t k = 1;
          char tail[8] = {0};
          int got = std::sscanf(tok.c_str(), "W[%zu,%zu]%7s", &lev, &idx, tail);
          if (got < 2) throw ConfigError("bad reference '" + tok + "'", ln);
          if (got == 3) {
            if (tail[0] != '^') throw ConfigError("bad reference '" + tok + "'", ln);
            k = std::stoll(tail + 1);
          }
          parts.push_back({{lev, idx}, k});
        }
        sys.add_word(n, std::move(parts));
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        throw ConfigError(e.what(), ln);
      }
    }
  }
  return sys;
}

inline WordSystem load_system(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_system(ss.str());
}

inline std::string serialize_system(const WordSystem& sys) {
  std::ostringstream o;
  o << "r_bound = " << sys.r_bound() << "\n";
  for (std::size_t n = 0; n < sys.num_levels(); ++n) {
    o << n << ":";
    for (std::size_t i = 0; i < sys.level_size(n); ++i) {
      o << (i ? " |" : "");
      const auto& w = sys.word({n, i});
      if (w.is_base()) {
        o << " " << bits_to_string(w.explicit_bits);
        continue;
      }
      for (const auto& p : w.parts) {
        o << " W[" << p.ref.level << "," << p.ref.index << "]";
        if (p.k != 1) o << "^" << p.k;
      }
    }
    o << "\n";
  }
  return o.str();
}

}  // namespace rank1
