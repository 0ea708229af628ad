#pragma once

// End-to-end statistics on orbit words: Moebius correlations, bilinear
// prime-pair correlations, the arc integral, the prime number theorem
// statistic and residue-class equidistribution.

#include "rank1/arcs.hpp"
#include "rank1/iet.hpp"
#include "rank1/number_theory.hpp"
#include "rank1/word_engine.hpp"

#include <filesystem>
#include <random>

namespace rank1 {

// ---- statistics ----

struct Correlation {
  double centered = 0;
  double raw = 0;
};

inline double mean_of(const Bits& x, std::size_t n) {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return n ? static_cast<double>(s) / static_cast<double>(n) : 0.0;
}

// x_1..x_N are x[0..N-1]; mu(n) pairs with x_n.
inline Correlation moebius_correlation(const Bits& x, const ArithmeticTable& mu, std::size_t N = 0) {
  if (N == 0) N = x.size();
  if (N > x.size()) throw CapacityError("word shorter than N");
  if (mu.size() < N) throw BoundsError("mu table shorter than N");
  double m = mean_of(x, N);
  double c = 0, r = 0;
  for (std::size_t n = 1; n <= N; ++n) {
    int u = mu.mu(n);
    if (!u) continue;
    c += u * (x[n - 1] - m);
    r += u * x[n - 1];
  }
  return {std::abs(c) / static_cast<double>(N), std::abs(r) / static_cast<double>(N)};
}

inline Correlation bilinear_prime_correlation(const Bits& x, std::int64_t p, std::int64_t q, std::size_t N) {
  if (p < 1 || q < 1) throw DomainError("p, q must be positive");
  auto top = static_cast<std::size_t>(std::max(p, q)) * N;
  if (top > x.size())
    throw CapacityError("index " + std::to_string(top) + " beyond word length " + std::to_string(x.size()));
  double m = mean_of(x, top);
  double c = 0;
  std::int64_t r = 0;
  for (std::size_t n = 1; n <= N; ++n) {
    int a = x[static_cast<std::size_t>(p) * n - 1], b = x[static_cast<std::size_t>(q) * n - 1];
    r += a * b;
    c += (a - m) * (b - m);
  }
  return {std::abs(c) / static_cast<double>(N), static_cast<double>(r) / static_cast<double>(N)};
}

struct PNTStatistic {
  double lhs = 0;        // sum x_j Lambda(j + n)
  double main = 0;       // q/phi(q) sum x_j [gcd(j + n, q) = 1]
  double plain = 0;      // sum x_j
  double rel_main = 0;   // |lhs - main| / main
  double rel_plain = 0;  // |lhs - plain| / plain
  double error_scale_ratio = std::nan("");  // |lhs - main| / ((N + n) / sqrt(log q)), q >= 2
};

inline PNTStatistic pnt_statistic(const Bits& x, const ArithmeticTable& lambda, std::int64_t q,
                                  std::int64_t offset = 0, std::size_t N = 0) {
  if (q < 1 || offset < 0) throw DomainError("need q >= 1 and offset >= 0");
  if (N == 0) N = x.size();
  if (N > x.size()) throw CapacityError("word shorter than N");
  if (lambda.size() < N + static_cast<std::uint64_t>(offset)) throw BoundsError("Lambda table shorter than N + n");
  PNTStatistic s;
  std::uint64_t coprime = 0, ones = 0;
  for (std::size_t j = 1; j <= N; ++j) {
    if (!x[j - 1]) continue;
    auto t = j + static_cast<std::uint64_t>(offset);
    ++ones;
    s.lhs += lambda.lambda(t);
    if (std::gcd(t, static_cast<std::uint64_t>(q)) == 1) ++coprime;
  }
  s.plain = static_cast<double>(ones);
  s.main = static_cast<double>(q) / static_cast<double>(euler_phi(q)) * static_cast<double>(coprime);
  s.rel_main = s.main > 0 ? std::abs(s.lhs - s.main) / s.main : 0;
  s.rel_plain = s.plain > 0 ? std::abs(s.lhs - s.plain) / s.plain : 0;
  if (q >= 2)
    s.error_scale_ratio = std::abs(s.lhs - s.main) / (static_cast<double>(N + static_cast<std::size_t>(offset)) /
                                                      std::sqrt(std::log(static_cast<double>(q))));
  return s;
}

struct ResidueStatistic {
  double discrepancy = 0;  // |sum_{j = a (q)} x_j - (1/q) sum x_j| / N
  double bound = 0;        // max_{0<k<q} |(1/N) sum e_q(kj) x_j|
};

inline ResidueStatistic residue_equidistribution(const Bits& x, std::int64_t q, std::int64_t a, std::size_t N = 0) {
  if (q < 1 || a < 0 || a >= q) throw DomainError("need q >= 1 and 0 <= a < q");
  if (N == 0) N = x.size();
  if (N > x.size()) throw CapacityError("word shorter than N");
  auto Q = static_cast<std::size_t>(q);
  std::vector<std::uint64_t> cls(Q, 0);
  std::uint64_t total = 0;
  for (std::size_t j = 1; j <= N; ++j)
    if (x[j - 1]) {
      ++cls[j % Q];
      ++total;
    }
  ResidueStatistic r;
  double Nd = static_cast<double>(N);
  r.discrepancy = std::abs(static_cast<double>(cls[static_cast<std::size_t>(a)]) - static_cast<double>(total) / q) / Nd;
  for (std::size_t k = 1; k < Q; ++k) {
    cplx s = 0;
    for (std::size_t c = 0; c < Q; ++c)
      if (cls[c]) s += static_cast<double>(cls[c]) * e1(static_cast<double>((k * c) % Q) / q);
    r.bound = std::max(r.bound, std::abs(s) / Nd);
  }
  return r;
}

// ---- configuration ----

enum class SystemKind { chacon, katok, spec, iet, random };

inline const char* to_string(SystemKind k) {
  switch (k) {
    case SystemKind::chacon: return "chacon";
    case SystemKind::katok: return "katok";
    case SystemKind::spec: return "spec";
    case SystemKind::iet: return "iet";
    case SystemKind::random: return "random";
  }
  return "?";
}

inline const std::vector<std::string>& statistic_names() {
  static const std::vector<std::string> s{"moebius", "moebius_raw", "l1_integral", "bilinear", "pnt", "residue", "major_arcs"};
  return s;
}

struct ExperimentConfig {
  std::string name = "experiment";
  SystemKind system = SystemKind::chacon;
  std::string spec_file;
  std::int64_t katok_p = 1;
  std::string iet_alpha = "(sqrt(5)-1)/8";
  std::string iet_beta = "sqrt(2)/10";
  std::int64_t iet_bits = kDefaultIETBits;
  char iet_letter = '1';
  double random_density = 0.5;
  std::vector<std::int64_t> schedule{10000, 100000};
  std::vector<std::string> statistics{"moebius", "l1_integral"};
  std::vector<std::pair<std::int64_t, std::int64_t>> prime_pairs{{7, 13}};
  double tau = 0.25;
  std::int64_t Q0 = 0;  // 0: N^{1/8}
  std::int64_t oversample = 16;
  std::int64_t pnt_q = 1;
  std::int64_t pnt_offset = 0;
  std::int64_t residue_q = 5;
  std::int64_t residue_a = 0;
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  bool svg = true;
  std::vector<std::string> assert_decay;
  double decay_factor = 2.0;

  bool operator==(const ExperimentConfig&) const = default;
};

inline void validate(const ExperimentConfig& c) {
  if (c.schedule.empty()) throw DomainError("schedule is empty");
  for (std::size_t i = 0; i < c.schedule.size(); ++i) {
    if (c.schedule[i] < 1) throw DomainError("schedule entries must be positive");
    if (i && c.schedule[i] <= c.schedule[i - 1]) throw DomainError("schedule must be strictly increasing");
  }
  if (!(c.tau > 0 && c.tau < 1.0 / 3)) throw DomainError("tau must satisfy 0 < tau < 1/3");
  for (const auto& s : c.statistics)
    if (std::find(statistic_names().begin(), statistic_names().end(), s) == statistic_names().end())
      throw DomainError("unknown statistic '" + s + "' (did you mean '" + nearest_key(s, statistic_names()) + "'?)");
  for (const auto& s : c.assert_decay)
    if (std::find(c.statistics.begin(), c.statistics.end(), s) == c.statistics.end())
      throw DomainError("assert_decay names '" + s + "', which is not among the statistics");
  for (auto [p, q] : c.prime_pairs)
    if (p < 1 || q < 1) throw DomainError("prime pairs must be positive");
  if (c.system == SystemKind::spec && !std::filesystem::exists(c.spec_file))
    throw DomainError("spec file '" + c.spec_file + "' not found");
  if (c.katok_p < 1) throw DomainError("katok_p must be >= 1");
  if (c.iet_letter < '1' || c.iet_letter > '3') throw DomainError("iet_letter must be 1, 2 or 3");
  if (!(c.random_density >= 0 && c.random_density <= 1)) throw DomainError("random_density must lie in [0, 1]");
  if (c.oversample < 2) throw DomainError("oversample must be >= 2");
  if (c.pnt_q < 1 || c.pnt_offset < 0) throw DomainError("need pnt_q >= 1 and pnt_offset >= 0");
  if (c.residue_q < 1 || c.residue_a < 0 || c.residue_a >= c.residue_q)
    throw DomainError("need residue_q >= 1 and 0 <= residue_a < residue_q");
  if (c.Q0 < 0) throw DomainError("Q0 must be >= 0");
  if (!(c.decay_factor >= 1)) throw DomainError("decay_factor must be >= 1");
  if (c.iet_bits < 64) throw DomainError("iet_bits must be >= 64");
}

// ---- orbit words ----

struct OrbitWord {
  Bits bits;
  std::string source;
};

inline RankOneSpec system_spec(const ExperimentConfig& c) {
  switch (c.system) {
    case SystemKind::chacon: return make_classical_chacon();
    case SystemKind::katok: return make_katok(IntSeq(c.katok_p));
    case SystemKind::spec: return load_spec(c.spec_file);
    default: throw DomainError("system is not rank-one");
  }
}

inline bool is_rank_one(SystemKind k) { return k == SystemKind::chacon || k == SystemKind::katok || k == SystemKind::spec; }

// Prefix of length N of the system's orbit word: B_n for rank-one systems,
// the projected coding from 0 for the exchange, seeded bits for random.
inline OrbitWord orbit_word(const ExperimentConfig& c, std::size_t N) {
  OrbitWord w;
  if (is_rank_one(c.system)) {
    auto spec = system_spec(c);
    std::size_t lvl = level_reaching(spec, BigInt(N));
    SymbolicWord sw(spec, lvl);
    w.bits = materialize(sw, 0, BigInt(N));
    w.source = spec.description() + " B_" + std::to_string(lvl) + " prefix";
  } else if (c.system == SystemKind::iet) {
    IETParams P(c.iet_alpha, c.iet_beta, static_cast<unsigned>(c.iet_bits));
    w.bits = project01(orbit_coding(P, kZero, N), c.iet_letter);
    w.source = "3-IET alpha=" + c.iet_alpha + " beta=" + c.iet_beta;
  } else {
    std::mt19937_64 rng(c.seed);
    std::bernoulli_distribution b(c.random_density);
    w.bits.resize(N);
    for (auto& v : w.bits) v = b(rng) ? 1 : 0;
    w.source = "random seed=" + std::to_string(c.seed);
  }
  return w;
}

// Whole level word whose height is nearest N (rank-one), else the prefix.
inline OrbitWord block_word(const ExperimentConfig& c, std::size_t N) {
  if (!is_rank_one(c.system)) return orbit_word(c, N);
  auto spec = system_spec(c);
  std::size_t lvl = level_reaching(spec, BigInt(N));
  if (lvl > 0) {
    auto lo = height(spec, lvl - 1), hi = height(spec, lvl);
    if (BigInt(N) * BigInt(N) < lo * hi) --lvl;  // nearest on a log scale
  }
  return {word_of(spec, lvl), spec.description() + " B_" + std::to_string(lvl)};
}

// ---- runs ----

struct ResultRow {
  std::int64_t N = 0;         // scheduled length
  std::int64_t used = 0;      // length actually used
  std::string statistic;
  std::string variant;        // e.g. p:q pair
  double value = 0;
};

struct DecayVerdict {
  std::string statistic, variant;
  double first = 0, last = 0;
  bool monotone = false;
  bool decays = false;     // last <= first / factor
  bool asserted = false;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<DecayVerdict> verdicts;
  bool passed() const {
    for (const auto& v : verdicts)
      if (v.asserted && !v.decays) return false;
    return true;
  }
};

inline std::int64_t default_Q0(std::int64_t N) {
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(std::pow(static_cast<double>(N), 0.125))));
}

inline ExperimentResult run_experiment(const ExperimentConfig& c) {
  validate(c);
  ExperimentResult res;
  auto has = [&](const char* s) { return std::find(c.statistics.begin(), c.statistics.end(), s) != c.statistics.end(); };
  auto Nmax = static_cast<std::size_t>(c.schedule.back());
  std::int64_t reach = 1;
  if (has("bilinear"))
    for (auto [p, q] : c.prime_pairs) reach = std::max({reach, p, q});
  OrbitWord long_word = orbit_word(c, Nmax * static_cast<std::size_t>(reach));

  std::size_t table_n = Nmax + static_cast<std::size_t>(c.pnt_offset);
  bool need_block = has("l1_integral") || has("major_arcs");
  std::vector<OrbitWord> blocks;
  if (need_block)
    for (auto N : c.schedule) {
      blocks.push_back(block_word(c, static_cast<std::size_t>(N)));
      table_n = std::max(table_n, blocks.back().bits.size());
    }
  std::optional<ArithmeticTable> mu, lambda;
  if (has("moebius") || has("moebius_raw") || need_block) mu = cached_mu(table_n);
  if (has("pnt")) lambda = sieve(TableKind::lambda, table_n);

  for (std::size_t i = 0; i < c.schedule.size(); ++i) {
    auto N = c.schedule[i];
    auto Nu = static_cast<std::size_t>(N);
    auto row = [&](const std::string& st, const std::string& var, double v, std::int64_t used) {
      res.rows.push_back({N, used, st, var, v});
    };
    if (has("moebius") || has("moebius_raw")) {
      auto m = moebius_correlation(long_word.bits, *mu, Nu);
      if (has("moebius")) row("moebius", "centered", m.centered, N);
      if (has("moebius_raw")) row("moebius_raw", "raw", m.raw, N);
    }
    if (has("bilinear"))
      for (auto [p, q] : c.prime_pairs) {
        auto b = bilinear_prime_correlation(long_word.bits, p, q, Nu);
        std::string pq = std::to_string(p) + ":" + std::to_string(q);
        row("bilinear", pq + " raw", b.raw, N);
        row("bilinear", pq + " centered", b.centered, N);
      }
    if (has("pnt")) {
      auto s = pnt_statistic(long_word.bits, *lambda, c.pnt_q, c.pnt_offset, Nu);
      row("pnt", "rel_main", s.rel_main, N);
      row("pnt", "rel_plain", s.rel_plain, N);
    }
    if (has("residue")) {
      auto r = residue_equidistribution(long_word.bits, c.residue_q, c.residue_a, Nu);
      row("residue", "discrepancy", r.discrepancy, N);
      row("residue", "bound", r.bound, N);
    }
    if (need_block) {
      const auto& w = blocks[i].bits;
      auto used = static_cast<std::int64_t>(w.size());
      if (has("l1_integral"))
        row("l1_integral", "normalized",
            moebius_disjointness_integral(w, *mu, static_cast<std::size_t>(c.oversample)) / static_cast<double>(used),
            used);
      if (has("major_arcs")) {
        BreakdownOptions o;
        o.tau = c.tau;
        o.Qmax = c.Q0 ? c.Q0 : default_Q0(used);
        o.oversample = static_cast<std::size_t>(c.oversample);
        auto br = per_family_breakdown(w, *mu, o);
        double major = 0;
        for (const auto& cell : br.cells)
          if (!cell.rejected) major += cell.integral;
        row("major_arcs", "normalized", major / static_cast<double>(used), used);
      }
    }
  }

  // verdicts per (statistic, variant), in order of first appearance
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& r : res.rows)
    if (std::find(keys.begin(), keys.end(), std::pair{r.statistic, r.variant}) == keys.end())
      keys.push_back({r.statistic, r.variant});
  for (const auto& [st, var] : keys) {
    std::vector<double> series;
    for (const auto& r : res.rows)
      if (r.statistic == st && r.variant == var) series.push_back(r.value);
    DecayVerdict v{st, var, series.front(), series.back(), true, false, false};
    for (std::size_t i = 1; i < series.size(); ++i)
      if (series[i] > series[i - 1]) v.monotone = false;
    v.decays = series.size() > 1 && v.last <= v.first / c.decay_factor;
    v.asserted = std::find(c.assert_decay.begin(), c.assert_decay.end(), st) != c.assert_decay.end() &&
                 !(st == "residue" && var == "bound") && !(st == "pnt" && var == "rel_plain") &&
                 !(st == "bilinear" && var.ends_with("centered"));
    res.verdicts.push_back(v);
  }
  return res;
}

}  // namespace rank1
