#pragma once

// Disjointness certificate for a spacer pattern: the exact resultant test on
// f(x, y), the Puiseux exponent screen, and the numerical rho defect.

#include "rank1/common.hpp"
#include "rank1/number_theory.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>

namespace rank1 {

struct SpacerPattern {
  std::int64_t v = 2;
  std::vector<std::int64_t> a;  // a(1..v-1); a(0) = 0 is implicit

  SpacerPattern() = default;
  SpacerPattern(std::int64_t v_, std::vector<std::int64_t> a_) : v(v_), a(std::move(a_)) { validate(); }

  void validate() const {
    if (v < 2) throw DomainError("pattern needs v >= 2");
    if (static_cast<std::int64_t>(a.size()) != v - 1) throw DomainError("pattern needs v-1 spacer values");
    for (auto x : a)
      if (x < 0) throw DomainError("spacer values must be nonnegative");
  }
  std::int64_t a_plus() const { return *std::max_element(a.begin(), a.end()); }
  std::int64_t a_minus() const { return *std::min_element(a.begin(), a.end()); }
  bool degenerate() const { return a_plus() == a_minus(); }
  std::int64_t sum() const {
    std::int64_t s = 0;
    for (auto x : a) s += x;
    return s;
  }
  // s(k) = a(1) + ... + a(k)
  std::int64_t partial(std::int64_t k) const {
    std::int64_t s = 0;
    for (std::int64_t i = 0; i < k; ++i) s += a[static_cast<std::size_t>(i)];
    return s;
  }
};

// Exact Laurent polynomial in x, y with integer coefficients.
class LaurentPoly2 {
 public:
  using Exp = std::pair<std::int64_t, std::int64_t>;  // (x exponent, y exponent)

  void add_term(std::int64_t i, std::int64_t j, const BigInt& c) {
    if (c == 0) return;
    auto& slot = terms_[{i, j}];
    slot += c;
    if (slot == 0) terms_.erase({i, j});
  }

  const std::map<Exp, BigInt>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  BigInt coef(std::int64_t i, std::int64_t j) const {
    auto it = terms_.find({i, j});
    return it == terms_.end() ? BigInt(0) : it->second;
  }

  friend LaurentPoly2 operator+(const LaurentPoly2& a, const LaurentPoly2& b) {
    LaurentPoly2 r = a;
    for (const auto& [e, c] : b.terms_) r.add_term(e.first, e.second, c);
    return r;
  }
  friend LaurentPoly2 operator-(const LaurentPoly2& a, const LaurentPoly2& b) {
    LaurentPoly2 r = a;
    for (const auto& [e, c] : b.terms_) r.add_term(e.first, e.second, -c);
    return r;
  }
  friend LaurentPoly2 operator*(const LaurentPoly2& a, const LaurentPoly2& b) {
    LaurentPoly2 r;
    for (const auto& [e1_, c1] : a.terms_)
      for (const auto& [e2_, c2] : b.terms_) r.add_term(e1_.first + e2_.first, e1_.second + e2_.second, c1 * c2);
    return r;
  }
  friend bool operator==(const LaurentPoly2& a, const LaurentPoly2& b) { return a.terms_ == b.terms_; }

  LaurentPoly2 times_monomial(std::int64_t i, std::int64_t j) const {
    LaurentPoly2 r;
    for (const auto& [e, c] : terms_) r.add_term(e.first + i, e.second + j, c);
    return r;
  }

  // f(1/x, 1/y)
  LaurentPoly2 inverted() const {
    LaurentPoly2 r;
    for (const auto& [e, c] : terms_) r.add_term(-e.first, -e.second, c);
    return r;
  }

  // f(x, x^k): a Laurent polynomial in x alone, exponent -> coefficient.
  std::map<std::int64_t, BigInt> on_monomial_curve(std::int64_t k) const {
    std::map<std::int64_t, BigInt> r;
    for (const auto& [e, c] : terms_) {
      auto& s = r[e.first + k * e.second];
      s += c;
    }
    for (auto it = r.begin(); it != r.end();) it = it->second == 0 ? r.erase(it) : std::next(it);
    return r;
  }

  std::int64_t min_x() const { return extreme(true, true); }
  std::int64_t max_x() const { return extreme(true, false); }
  std::int64_t min_y() const { return extreme(false, true); }
  std::int64_t max_y() const { return extreme(false, false); }

 private:
  std::int64_t extreme(bool xs, bool lo) const {
    if (terms_.empty()) return 0;
    std::int64_t best = lo ? INT64_MAX : INT64_MIN;
    for (const auto& [e, c] : terms_) {
      std::int64_t v = xs ? e.first : e.second;
      best = lo ? std::min(best, v) : std::max(best, v);
    }
    return best;
  }
  std::map<Exp, BigInt> terms_;
};

// f = y^p sum_k x^{a(k)p} + y^{-(v-1)p} x^{-p sum a} - (same with q).
// `shuffle_seed` permutes the order in which monomials are inserted.
inline LaurentPoly2 build_f(const SpacerPattern& pat, std::int64_t p, std::int64_t q,
                            std::optional<std::uint64_t> shuffle_seed = std::nullopt) {
  pat.validate();
  struct T {
    std::int64_t i, j, c;
  };
  std::vector<T> ts;
  std::int64_t sa = pat.sum();
  for (auto ak : pat.a) ts.push_back({ak * p, p, 1});
  ts.push_back({-p * sa, -(pat.v - 1) * p, 1});
  for (auto ak : pat.a) ts.push_back({ak * q, q, -1});
  ts.push_back({-q * sa, -(pat.v - 1) * q, -1});
  if (shuffle_seed) {
    std::mt19937_64 rng(*shuffle_seed);
    std::shuffle(ts.begin(), ts.end(), rng);
  }
  LaurentPoly2 f;
  for (const auto& t : ts) f.add_term(t.i, t.j, t.c);
  return f;
}

// Polynomial in y whose coefficients are dense polynomials in x.
struct YPoly {
  std::vector<std::vector<BigInt>> coef;  // coef[j][i] = coefficient of x^i y^j

  std::int64_t deg_y() const { return static_cast<std::int64_t>(coef.size()) - 1; }
  std::int64_t deg_x() const {
    std::size_t d = 0;
    for (const auto& c : coef) d = std::max(d, c.size());
    return static_cast<std::int64_t>(d) - 1;
  }
  BigInt abs_sum() const {
    BigInt s = 0;
    for (const auto& c : coef)
      for (const auto& v : c) s += abs(v);
    return s;
  }
};

// Shift exponents so the smallest x and y exponents are 0.
inline YPoly to_ypoly(const LaurentPoly2& g) {
  if (g.min_y() < 0) throw StructureError("negative y exponent left after clearing");
  std::int64_t sx = g.min_x();
  YPoly r;
  r.coef.resize(static_cast<std::size_t>(g.max_y() + 1));
  for (const auto& [e, c] : g.terms()) {
    auto& row = r.coef[static_cast<std::size_t>(e.second)];
    auto i = static_cast<std::size_t>(e.first - sx);
    if (row.size() <= i) row.resize(i + 1, BigInt(0));
    row[i] += c;
  }
  return r;
}

// g1 = y^{(v-1)q} f(x, y), g2 = y^q f(1/x, 1/y).
inline std::pair<YPoly, YPoly> resultant_inputs(const LaurentPoly2& f, const SpacerPattern& pat, std::int64_t q) {
  return {to_ypoly(f.times_monomial(0, (pat.v - 1) * q)), to_ypoly(f.inverted().times_monomial(0, q))};
}

// ---- arithmetic modulo a 61-bit prime ----

struct ModField {
  std::uint64_t p;

  static constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

  // p = 2^61 - c with small c folds the high part back in instead of dividing
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
    unsigned __int128 t = static_cast<unsigned __int128>(a) * b;
    std::uint64_t c = kMersenne61 + 1 - p;
    if (p <= kMersenne61 && c < (std::uint64_t{1} << 20)) {
      t = (t & kMersenne61) + (t >> 61) * c;
      t = (t & kMersenne61) + (t >> 61) * c;
      auto s = static_cast<std::uint64_t>(t);
      while (s >= p) s -= p;
      return s;
    }
    return static_cast<std::uint64_t>(t % p);
  }
  std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
    std::uint64_t s = a + b;
    return s >= p ? s - p : s;
  }
  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const { return a >= b ? a - b : a + p - b; }
  std::uint64_t neg(std::uint64_t a) const { return a ? p - a : 0; }
  std::uint64_t pow(std::uint64_t b, std::uint64_t e) const {
    std::uint64_t r = 1;
    while (e) {
      if (e & 1) r = mul(r, b);
      b = mul(b, b);
      e >>= 1;
    }
    return r;
  }
  std::uint64_t inv(std::uint64_t a) const {
    if (a == 0) throw DomainError("inverse of zero");
    return pow(a, p - 2);
  }
  std::uint64_t reduce(const BigInt& v) const {
    BigInt r = v % p;
    if (r < 0) r += p;
    return r.convert_to<std::uint64_t>();
  }
};

inline bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t sp : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % sp == 0) return n == sp;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  ModField F{n};
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = F.pow(a, d);
    if (x == 1 || x == n - 1) continue;
    bool comp = true;
    for (int r = 1; r < s; ++r) {
      x = F.mul(x, x);
      if (x == n - 1) {
        comp = false;
        break;
      }
    }
    if (comp) return false;
  }
  return true;
}

// Primes just below 2^61, largest first (the first is 2^61 - 1).
inline std::vector<std::uint64_t> big_primes(std::size_t count) {
  std::vector<std::uint64_t> ps;
  for (std::uint64_t c = ModField::kMersenne61; ps.size() < count; c -= 2)
    if (is_prime_u64(c)) ps.push_back(c);
  return ps;
}

using ModPoly = std::vector<std::uint64_t>;  // dense, low degree first

inline void trim(ModPoly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

// Res(A, B) over F_p by the Euclidean algorithm, with the Sylvester sign
// convention. Degrees are taken from the given (trimmed) vectors.
inline std::uint64_t resultant_mod(ModPoly A, ModPoly B, const ModField& F) {
  trim(A);
  trim(B);
  if (A.empty() || B.empty()) return 0;
  std::uint64_t res = 1;
  for (;;) {
    std::size_t m = A.size() - 1, n = B.size() - 1;
    if (n == 0) return F.mul(res, F.pow(B[0], m));
    // A <- A mod B
    std::uint64_t lcinv = F.inv(B.back());
    while (A.size() >= B.size() && !A.empty()) {
      std::uint64_t c = F.mul(A.back(), lcinv);
      std::size_t off = A.size() - B.size();
      if (c)
        for (std::size_t i = 0; i + 1 < B.size(); ++i) A[off + i] = F.sub(A[off + i], F.mul(c, B[i]));
      A.pop_back();
      trim(A);
    }
    if (A.empty()) return 0;
    std::size_t r = A.size() - 1;
    if ((m & 1) && (n & 1)) res = F.neg(res);
    res = F.mul(res, F.pow(B.back(), m - r));
    std::swap(A, B);
  }
}

// g with its integer coefficients reduced mod p once.
struct YPolyMod {
  std::vector<ModPoly> coef;
  YPolyMod(const YPoly& g, const ModField& F) : coef(g.coef.size()) {
    for (std::size_t j = 0; j < g.coef.size(); ++j)
      for (const auto& c : g.coef[j]) coef[j].push_back(F.reduce(c));
  }
  ModPoly at(std::uint64_t x0, const ModField& F) const {
    ModPoly r(coef.size(), 0);
    for (std::size_t j = 0; j < coef.size(); ++j) {
      std::uint64_t acc = 0;
      for (std::size_t i = coef[j].size(); i-- > 0;) acc = F.add(F.mul(acc, x0), coef[j][i]);
      r[j] = acc;
    }
    return r;
  }
};

inline std::optional<std::uint64_t> resultant_at(const YPolyMod& g1, const YPolyMod& g2, std::uint64_t x0,
                                                 const ModField& F) {
  ModPoly a = g1.at(x0, F), b = g2.at(x0, F);
  if (a.empty() || b.empty() || a.back() == 0 || b.back() == 0) return std::nullopt;
  return resultant_mod(std::move(a), std::move(b), F);
}

// Specializes x = x0; returns nothing when a y-degree drops at x0.
inline std::optional<std::uint64_t> resultant_at(const YPoly& g1, const YPoly& g2, std::uint64_t x0,
                                                 const ModField& F) {
  return resultant_at(YPolyMod(g1, F), YPolyMod(g2, F), x0, F);
}

// Degree bound in x and coefficient bit bound for Res_y(g1, g2).
inline std::int64_t resultant_degree_bound(const YPoly& g1, const YPoly& g2) {
  return g2.deg_y() * g1.deg_x() + g1.deg_y() * g2.deg_x();
}

inline double resultant_log2_bound(const YPoly& g1, const YPoly& g2) {
  auto lg = [](const BigInt& v) { return v <= 1 ? 0.0 : static_cast<double>(msb(v)) + 1.0; };
  return static_cast<double>(g2.deg_y()) * lg(g1.abs_sum()) + static_cast<double>(g1.deg_y()) * lg(g2.abs_sum());
}

// Interpolates Res mod p from D+1 specializations (Newton form).
inline std::vector<std::uint64_t> resultant_poly_mod(const YPoly& g1, const YPoly& g2, const ModField& F,
                                                     std::int64_t D) {
  YPolyMod m1(g1, F), m2(g2, F);
  std::vector<std::uint64_t> xs, ys;
  for (std::uint64_t x0 = 1; static_cast<std::int64_t>(xs.size()) < D + 1; ++x0) {
    auto r = resultant_at(m1, m2, x0, F);
    if (!r) continue;
    xs.push_back(x0);
    ys.push_back(*r);
  }
  std::size_t n = xs.size();
  // the nodes are small integers, so differences have tabulated inverses
  std::vector<std::uint64_t> inv(xs.back() + 1, 0);
  inv[1] = 1;
  for (std::uint64_t i = 2; i < inv.size(); ++i) inv[i] = F.neg(F.mul(F.p / i, inv[F.p % i]));
  std::vector<std::uint64_t> c = ys;  // divided differences
  for (std::size_t k = 1; k < n; ++k)
    for (std::size_t i = n - 1; i >= k; --i) {
      c[i] = F.mul(F.sub(c[i], c[i - 1]), inv[xs[i] - xs[i - k]]);
      if (i == k) break;
    }
  std::vector<std::uint64_t> poly(1, c[n - 1]);
  for (std::size_t k = n - 1; k-- > 0;) {
    // poly <- poly * (x - xs[k]) + c[k]
    std::vector<std::uint64_t> next(poly.size() + 1, 0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i + 1] = F.add(next[i + 1], poly[i]);
      next[i] = F.sub(next[i], F.mul(poly[i], xs[k]));
    }
    next[0] = F.add(next[0], c[k]);
    poly = std::move(next);
  }
  return poly;
}

// Exact Res_y(g1, g2) in Z[x] by evaluation, interpolation and CRT; the
// number of primes is fixed by a Hadamard-type coefficient bound.
inline std::vector<BigInt> resultant_multimodular(const YPoly& g1, const YPoly& g2) {
  std::int64_t D = resultant_degree_bound(g1, g2);
  double bits = resultant_log2_bound(g1, g2) + 2;
  auto nprimes = static_cast<std::size_t>(std::ceil(bits / 60.0)) + 1;
  auto primes = big_primes(nprimes);
  std::vector<BigInt> acc(static_cast<std::size_t>(D + 1), BigInt(0));
  BigInt modulus = 1;
  for (auto p : primes) {
    ModField F{p};
    auto r = resultant_poly_mod(g1, g2, F, D);
    r.resize(acc.size(), 0);
    BigInt mod_inv_term = modulus % p;
    std::uint64_t minv = F.inv(F.reduce(mod_inv_term));
    for (std::size_t i = 0; i < acc.size(); ++i) {
      std::uint64_t cur = F.reduce(acc[i]);
      std::uint64_t t = F.mul(F.sub(r[i], cur), minv);
      acc[i] += modulus * t;
    }
    modulus *= p;
  }
  BigInt half = modulus / 2;
  for (auto& c : acc)
    if (c > half) c -= modulus;
  while (!acc.empty() && acc.back() == 0) acc.pop_back();
  return acc;
}

// ---- exact Sylvester determinant over Z[x] by Bareiss elimination ----

using ZPoly = std::vector<BigInt>;

inline void trim(ZPoly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

inline ZPoly zmul(const ZPoly& a, const ZPoly& b) {
  if (a.empty() || b.empty()) return {};
  ZPoly r(a.size() + b.size() - 1, BigInt(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  }
  trim(r);
  return r;
}

inline ZPoly zsub(ZPoly a, const ZPoly& b) {
  if (a.size() < b.size()) a.resize(b.size(), BigInt(0));
  for (std::size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
  trim(a);
  return a;
}

// Exact quotient a / b; throws if the division is not exact.
inline ZPoly zdiv_exact(ZPoly a, const ZPoly& b) {
  trim(a);
  if (b.empty()) throw DomainError("division by zero polynomial");
  if (a.empty()) return {};
  if (a.size() < b.size()) throw Error("inexact polynomial division");
  ZPoly q(a.size() - b.size() + 1, BigInt(0));
  for (std::size_t k = q.size(); k-- > 0;) {
    const BigInt& top = a[k + b.size() - 1];
    if (top % b.back() != 0) throw Error("inexact polynomial division");
    BigInt c = top / b.back();
    q[k] = c;
    if (c != 0)
      for (std::size_t i = 0; i < b.size(); ++i) a[k + i] -= c * b[i];
  }
  trim(a);
  if (!a.empty()) throw Error("inexact polynomial division");
  trim(q);
  return q;
}

inline std::vector<BigInt> resultant_bareiss(const YPoly& g1, const YPoly& g2) {
  auto m = static_cast<std::size_t>(g1.deg_y()), n = static_cast<std::size_t>(g2.deg_y());
  std::size_t N = m + n;
  if (N == 0) return {BigInt(1)};
  std::vector<std::vector<ZPoly>> S(N, std::vector<ZPoly>(N));
  auto cleaned = [](ZPoly c) {
    trim(c);
    return c;
  };
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j <= m; ++j) S[r][r + j] = cleaned(g1.coef[m - j]);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t j = 0; j <= n; ++j) S[n + r][r + j] = cleaned(g2.coef[n - j]);
  ZPoly prev{BigInt(1)};
  bool negate = false;
  for (std::size_t k = 0; k + 1 < N; ++k) {
    if (S[k][k].empty()) {
      std::size_t piv = k + 1;
      while (piv < N && S[piv][k].empty()) ++piv;
      if (piv == N) return {};
      std::swap(S[k], S[piv]);
      negate = !negate;
    }
    for (std::size_t i = k + 1; i < N; ++i) {
      for (std::size_t j = k + 1; j < N; ++j)
        S[i][j] = zdiv_exact(zsub(zmul(S[k][k], S[i][j]), zmul(S[i][k], S[k][j])), prev);
      S[i][k].clear();
    }
    prev = S[k][k];
  }
  ZPoly det = S[N - 1][N - 1];
  if (negate)
    for (auto& c : det) c = -c;
  return det;
}

// ---- the test itself ----

enum class Verdict { Certified, Degenerate };

inline const char* to_string(Verdict v) { return v == Verdict::Certified ? "Certified" : "Degenerate"; }

struct ResultantReport {
  Verdict verdict = Verdict::Degenerate;
  bool exact = false;         // false only for a zero verdict without a common-factor witness
  std::string method;         // "polynomial", "evaluation", "common-factor" or "evaluation-only"
  std::optional<std::int64_t> degree;
  std::optional<BigInt> leading;
  std::optional<std::int64_t> lowest;  // order of vanishing at x = 0
  std::vector<BigInt> polynomial;      // filled when computed in full
};

struct ResultantOptions {
  // Compute the whole polynomial when the estimated work (field operations)
  // stays below this; otherwise decide zero/nonzero by specialization.
  double full_work_cap = 2e8;
  std::size_t eval_primes = 2;
  std::size_t eval_points = 3;
};

inline void check_resultant_preconditions(const SpacerPattern& pat, std::int64_t p, std::int64_t q) {
  pat.validate();
  if (p == q) throw PreconditionError("p and q must differ");
  if (p > q) throw PreconditionError("caller must order p < q");
  if (p < 2) throw PreconditionError("p must be at least 2");
  if (p % pat.v != 1 % pat.v || q % pat.v != 1 % pat.v)
    throw PreconditionError("need p = 1 = q mod v (v = " + std::to_string(pat.v) + ")");
}

inline double resultant_full_work(const YPoly& g1, const YPoly& g2) {
  double D = static_cast<double>(resultant_degree_bound(g1, g2)) + 1;
  double d = static_cast<double>(std::max(g1.deg_y(), g2.deg_y()));
  double primes = std::ceil((resultant_log2_bound(g1, g2) + 2) / 60.0) + 1;
  return primes * D * d * d;
}

inline ResultantReport resultant_test(const SpacerPattern& pat, std::int64_t p, std::int64_t q,
                                      const ResultantOptions& opt = {}) {
  check_resultant_preconditions(pat, p, q);
  LaurentPoly2 f = build_f(pat, p, q);
  auto [g1, g2] = resultant_inputs(f, pat, q);
  ResultantReport rep;
  if (resultant_full_work(g1, g2) <= opt.full_work_cap) {
    rep.polynomial = resultant_multimodular(g1, g2);
    rep.method = "polynomial";
    rep.exact = true;
    if (rep.polynomial.empty()) {
      rep.verdict = Verdict::Degenerate;
    } else {
      rep.verdict = Verdict::Certified;
      rep.degree = static_cast<std::int64_t>(rep.polynomial.size()) - 1;
      rep.leading = rep.polynomial.back();
      std::int64_t lo = 0;
      while (rep.polynomial[static_cast<std::size_t>(lo)] == 0) ++lo;
      rep.lowest = lo;
    }
    return rep;
  }
  // A nonzero specialization modulo a prime proves Res is not the zero polynomial.
  auto primes = big_primes(opt.eval_primes);
  std::uint64_t x0 = 2;
  for (auto pr : primes) {
    ModField F{pr};
    for (std::size_t k = 0; k < opt.eval_points; ++k, ++x0) {
      auto r = resultant_at(g1, g2, x0, F);
      if (r && *r != 0) {
        rep.verdict = Verdict::Certified;
        rep.exact = true;
        rep.method = "evaluation";
        return rep;
      }
    }
  }
  rep.verdict = Verdict::Degenerate;
  // Witness: f vanishes on a curve y = x^{-c}, so (x^c y - 1) divides g1 and g2.
  for (std::int64_t c = pat.a_minus(); c <= pat.a_plus(); ++c) {
    if (f.on_monomial_curve(-c).empty()) {
      rep.exact = true;
      rep.method = "common-factor";
      return rep;
    }
  }
  rep.method = "evaluation-only";
  return rep;
}

enum class PuiseuxResult { Pass, Fail };

inline const char* to_string(PuiseuxResult r) { return r == PuiseuxResult::Pass ? "Pass" : "Fail"; }

// The two exponent equations v alpha = sum a + a_- and = sum a + a_+ are
// incompatible exactly when a_+ > a_-.
inline PuiseuxResult puiseux_precheck(const SpacerPattern& pat) {
  pat.validate();
  return pat.a_plus() > pat.a_minus() ? PuiseuxResult::Pass : PuiseuxResult::Fail;
}

// ---- numerical branch ----

// P(theta, psi) = (1/sqrt v) sum_k e(s(k) theta + k psi)
inline cplx pattern_poly(const SpacerPattern& pat, double theta, double psi) {
  cplx s = 0;
  std::int64_t sk = 0;
  for (std::int64_t k = 0; k < pat.v; ++k) {
    if (k > 0) sk += pat.a[static_cast<std::size_t>(k - 1)];
    s += e1(static_cast<double>(sk) * theta + static_cast<double>(k) * psi);
  }
  return s / std::sqrt(static_cast<double>(pat.v));
}

// (1/v^2) | e(p eta) sum_{k>=1} e(a(k) p theta) + e(-(v-1) p eta) e(-sum a p theta) - (same with q) |
inline double minorant(const SpacerPattern& pat, std::int64_t p, std::int64_t q, double theta, double eta) {
  auto part = [&](std::int64_t m) {
    cplx s = 0;
    for (auto ak : pat.a) s += e1(static_cast<double>(ak * m) * theta);
    s *= e1(static_cast<double>(m) * eta);
    s += e1(-static_cast<double>((pat.v - 1) * m) * eta) * e1(-static_cast<double>(pat.sum() * m) * theta);
    return s;
  };
  double v = static_cast<double>(pat.v);
  return std::abs(part(p) - part(q)) / (v * v);
}

// Same quantity written as the r-sum (1/v^3)|sum_r e(-r/v){|S_p|^2 - |S_q|^2}|.
inline double minorant_rsum(const SpacerPattern& pat, std::int64_t p, std::int64_t q, double theta, double eta) {
  auto sq = [&](std::int64_t m, std::int64_t r) {
    cplx s = 0;
    for (std::int64_t k = 0; k < pat.v; ++k)
      s += e1(static_cast<double>(k * m) * eta + static_cast<double>(pat.partial(k) * m) * theta +
              static_cast<double>(k * m * r) / static_cast<double>(pat.v));
    return std::norm(s);
  };
  cplx acc = 0;
  for (std::int64_t r = 0; r < pat.v; ++r)
    acc += e1(-static_cast<double>(r) / static_cast<double>(pat.v)) * (sq(p, r) - sq(q, r));
  double v = static_cast<double>(pat.v);
  return std::abs(acc) / (v * v * v);
}

struct RhoGrid {
  std::size_t T = 0;  // theta grid size
  std::size_t E = 0;  // psi / eta grid size
  std::vector<double> rho;
  std::vector<double> min_minorant;
};

struct RhoOptions {
  std::size_t theta_grid = std::size_t{1} << 12;
  std::size_t eta_grid = std::size_t{1} << 10;
  bool refine_eta = true;  // golden-section polish of the grid minimum
};

inline double refine_min(const std::function<double(double)>& fn, double center, double half_width) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = center - half_width, b = center + half_width;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = fn(c), fd = fn(d);
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = fn(d);
    }
  }
  return std::min({fc, fd, fn(center)});
}

inline RhoGrid rho_defect(const SpacerPattern& pat, std::int64_t p, std::int64_t q, const RhoOptions& opt = {}) {
  pat.validate();
  const std::size_t T = opt.theta_grid, E = opt.eta_grid;
  const auto v = static_cast<std::size_t>(pat.v);
  RhoGrid g{T, E, std::vector<double>(T), std::vector<double>(T)};
  // phases e(j / (E v)) for the psi' + r/v lattice
  const std::size_t L = E * v;
  std::vector<cplx> tab(L);
  for (std::size_t j = 0; j < L; ++j) tab[j] = e1(static_cast<double>(j) / static_cast<double>(L));
  std::vector<std::int64_t> s(v);
  for (std::size_t k = 0; k < v; ++k) s[k] = pat.partial(static_cast<std::int64_t>(k));
  std::vector<cplx> cp(v), cq(v);
  for (std::size_t t = 0; t < T; ++t) {
    double th = static_cast<double>(t) / static_cast<double>(T);
    for (std::size_t k = 0; k < v; ++k) {
      cp[k] = e1(std::fmod(static_cast<double>(s[k] * p) * th, 1.0));
      cq[k] = e1(std::fmod(static_cast<double>(s[k] * q) * th, 1.0));
    }
    double best = 0;
    for (std::size_t e = 0; e < E; ++e) {
      double tot = 0;
      for (std::size_t r = 0; r < v; ++r) {
        // phase index of k * m * (psi' + r/v) with psi' = e/E, in units of 1/L
        std::uint64_t base = (e * v + r * E) % L;
        cplx sp = 0, sq = 0;
        for (std::size_t k = 0; k < v; ++k) {
          sp += cp[k] * tab[(k * static_cast<std::uint64_t>(p) % L) * base % L];
          sq += cq[k] * tab[(k * static_cast<std::uint64_t>(q) % L) * base % L];
        }
        tot += std::abs(sp) * std::abs(sq);
      }
      best = std::max(best, tot / static_cast<double>(v * v));
    }
    g.rho[t] = best;
    double mbest = 1e300, arg = 0;
    for (std::size_t e = 0; e < E; ++e) {
      double eta = static_cast<double>(e) / static_cast<double>(E);
      double m = minorant(pat, p, q, th, eta);
      if (m < mbest) {
        mbest = m;
        arg = eta;
      }
    }
    if (opt.refine_eta)
      mbest = std::min(mbest, refine_min([&](double et) { return minorant(pat, p, q, th, et); }, arg,
                                         1.0 / static_cast<double>(E)));
    g.min_minorant[t] = mbest;
  }
  return g;
}

// Measure of {theta : min_eta minorant < eps1}.
inline double omega_measure(const RhoGrid& g, double eps1) {
  std::size_t c = 0;
  for (double m : g.min_minorant)
    if (m < eps1) ++c;
  return static_cast<double>(c) / static_cast<double>(g.T);
}

}  // namespace rank1
