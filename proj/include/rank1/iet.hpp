#pragma once

// Three-interval exchange
//   T x = x + 1 - alpha           on [0, alpha)
//         x + 1 - 2 alpha - beta  on [alpha, alpha + beta)
//         x - alpha - beta        on [alpha + beta, 1)
// its orbit codings, and the three-interval expansion (n_k, m_k, eps_{k+1})
// read off from first-return induction.

#include "rank1/common.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>

namespace rank1 {

using Real = boost::multiprecision::mpfr_float;
using Rational = boost::multiprecision::cpp_rational;

inline constexpr unsigned kDefaultIETBits = 512;

inline unsigned bits_to_digits10(unsigned bits) { return static_cast<unsigned>(std::ceil(bits * 0.30103)) + 1; }

// ---- a small real-expression reader: numbers, p/q, + - * / ^, sqrt(), parentheses ----

class RealExpr {
 public:
  RealExpr(std::string s, unsigned bits) : s_(std::move(s)), digits_(bits_to_digits10(bits)) {}
  Real eval() {
    pos_ = 0;
    Real v = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return v;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& why) const {
    throw DomainError("cannot read real '" + s_ + "': " + why);
  }
  Real num(const std::string& t) const {
    Real r(0, digits_);
    r.precision(digits_);
    r = Real(t, digits_);
    return r;
  }
  Real sum() {
    Real v = product();
    for (;;) {
      skip();
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
        char op = s_[pos_++];
        Real r = product();
        v = op == '+' ? Real(v + r) : Real(v - r);
      } else {
        return v;
      }
    }
  }
  Real product() {
    Real v = power();
    for (;;) {
      skip();
      if (pos_ < s_.size() && (s_[pos_] == '*' || s_[pos_] == '/')) {
        char op = s_[pos_++];
        Real r = power();
        if (op == '/' && r == 0) fail("division by zero");
        v = op == '*' ? Real(v * r) : Real(v / r);
      } else {
        return v;
      }
    }
  }
  Real power() {
    Real b = unary();
    skip();
    if (pos_ < s_.size() && s_[pos_] == '^') {
      ++pos_;
      Real e = power();
      return Real(pow(b, e));
    }
    return b;
  }
  Real unary() {
    skip();
    if (pos_ < s_.size() && s_[pos_] == '-') {
      ++pos_;
      return Real(-unary());
    }
    if (pos_ < s_.size() && s_[pos_] == '+') {
      ++pos_;
      return unary();
    }
    return atom();
  }
  Real atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (s_.compare(pos_, 4, "sqrt") == 0) {
      pos_ += 4;
      skip();
      if (pos_ >= s_.size() || s_[pos_] != '(') fail("sqrt needs '('");
      ++pos_;
      Real v = sum();
      skip();
      if (pos_ >= s_.size() || s_[pos_] != ')') fail("missing ')'");
      ++pos_;
      if (v < 0) fail("sqrt of a negative number");
      return Real(sqrt(v));
    }
    if (s_[pos_] == '(') {
      ++pos_;
      Real v = sum();
      skip();
      if (pos_ >= s_.size() || s_[pos_] != ')') fail("missing ')'");
      ++pos_;
      return v;
    }
    std::size_t st = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                s_[pos_] == 'e' || s_[pos_] == 'E' ||
                                ((s_[pos_] == '-' || s_[pos_] == '+') && pos_ > st &&
                                 (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
      ++pos_;
    if (st == pos_) fail("expected a number");
    return num(s_.substr(st, pos_ - st));
  }

  std::string s_;
  unsigned digits_;
  std::size_t pos_ = 0;
};

// ---- exact points i + j alpha + k beta ----

// endpoint coefficients grow like return times, which leave int64 around depth 15
__extension__ typedef __int128 Coef;

inline Coef coef_add(Coef a, Coef b) {
  Coef r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("point coefficient overflow");
  return r;
}
inline Coef coef_mul(Coef a, Coef b) {
  Coef r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("point coefficient overflow");
  return r;
}
inline std::string coef_string(Coef c) {
  if (c == 0) return "0";
  bool neg = c < 0;
  std::string s;
  while (c != 0) {
    int d = static_cast<int>(c % 10);
    s.push_back(static_cast<char>('0' + (d < 0 ? -d : d)));
    c /= 10;
  }
  if (neg) s.push_back('-');
  return {s.rbegin(), s.rend()};
}

struct Pt {
  Coef i = 0, j = 0, k = 0;
  bool operator==(const Pt&) const = default;
  Pt operator+(const Pt& o) const { return {coef_add(i, o.i), coef_add(j, o.j), coef_add(k, o.k)}; }
  Pt operator-(const Pt& o) const { return {coef_add(i, -o.i), coef_add(j, -o.j), coef_add(k, -o.k)}; }
  Pt operator-() const { return {-i, -j, -k}; }
  Pt scaled(Coef c) const { return {coef_mul(i, c), coef_mul(j, c), coef_mul(k, c)}; }
};

inline std::string to_string(const Pt& p) {
  return coef_string(p.i) + (p.j < 0 ? "" : "+") + coef_string(p.j) + "a" + (p.k < 0 ? "" : "+") +
         coef_string(p.k) + "b";
}

class IETParams {
 public:
  IETParams(const Real& alpha, const Real& beta, unsigned bits = kDefaultIETBits) : bits_(bits) { set(alpha, beta); }
  IETParams(const std::string& alpha, const std::string& beta, unsigned bits = kDefaultIETBits) : bits_(bits) {
    set(RealExpr(alpha, bits).eval(), RealExpr(beta, bits).eval());
  }

  unsigned bits() const { return bits_; }
  const Real& alpha() const { return alpha_; }
  const Real& beta() const { return beta_; }
  double alpha_d() const { return ad_; }
  double beta_d() const { return bd_; }

  Real value(const Pt& p) const {
    Real v(alpha_ * to_real(p.j), digits());
    v += beta_ * to_real(p.k);
    v += to_real(p.i);
    return v;
  }
  double value_d(const Pt& p) const {
    return static_cast<double>(p.i) + static_cast<double>(p.j) * ad_ + static_cast<double>(p.k) * bd_;
  }

  // Sign of a - b. Equal values with different coefficients mean the
  // independence of 1, alpha, beta cannot be certified at this precision.
  int compare(const Pt& a, const Pt& b) const {
    if (a == b) return 0;
    Pt d = a - b;
    double mag = 1 + std::abs(static_cast<double>(d.i)) + std::abs(static_cast<double>(d.j)) +
                 std::abs(static_cast<double>(d.k));
    double fd = value_d(d);
    if (std::abs(fd) > 1e-12 * mag) return fd > 0 ? 1 : -1;
    ++slow_compares_;
    Real v = value(d);
    Real tol = ldexp(Real(mag, digits()), -static_cast<int>(bits_) + 48);
    if (abs(v) <= tol)
      throw PrecisionError("cannot separate " + to_string(a) + " from " + to_string(b) + " at " +
                           std::to_string(bits_) + " bits (precision exhausted or Keane condition fails)");
    return v > 0 ? 1 : -1;
  }
  bool lt(const Pt& a, const Pt& b) const { return compare(a, b) < 0; }
  bool le(const Pt& a, const Pt& b) const { return compare(a, b) <= 0; }
  // comparisons that needed the full precision
  std::size_t slow_compares() const { return slow_compares_; }

 private:
  unsigned digits() const { return bits_to_digits10(bits_); }
  Real to_real(Coef c) const {
    auto hi = static_cast<std::int64_t>(c >> 64);
    auto lo = static_cast<std::uint64_t>(c);
    Real r(hi, digits());
    r = ldexp(r, 64);
    r += Real(static_cast<unsigned long long>(lo), digits());
    return r;
  }
  void set(const Real& a, const Real& b) {
    if (bits_ < 64) throw DomainError("need at least 64 bits");
    alpha_ = Real(a, digits());
    beta_ = Real(b, digits());
    if (!(alpha_ > 0 && beta_ > 0 && alpha_ + beta_ < 1))
      throw DomainError("need alpha, beta > 0 and alpha + beta < 1");
    ad_ = alpha_.convert_to<double>();
    bd_ = beta_.convert_to<double>();
  }
  unsigned bits_;
  Real alpha_, beta_;
  double ad_ = 0, bd_ = 0;
  mutable std::size_t slow_compares_ = 0;
};

// ---- the map ----

struct Piece {
  Pt start, len;
  char label = '?';
  Pt shift;
  Pt end() const { return start + len; }
};

// Spatially ordered translation pieces on [lo, hi).
struct PieceMap {
  Pt lo, hi;
  std::vector<Piece> pieces;

  const Piece& find(const IETParams& P, const Pt& x) const {
    for (const auto& p : pieces)
      if (P.le(p.start, x) && P.lt(x, p.end())) return p;
    throw DomainError("point " + to_string(x) + " outside the domain");
  }
  const Piece& find_image(const IETParams& P, const Pt& y) const {
    for (const auto& p : pieces)
      if (P.le(p.start + p.shift, y) && P.lt(y, p.end() + p.shift)) return p;
    throw DomainError("point " + to_string(y) + " outside the range");
  }
  std::pair<Pt, char> apply(const IETParams& P, const Pt& x) const {
    const auto& p = find(P, x);
    return {x + p.shift, p.label};
  }
  Pt inverse(const IETParams& P, const Pt& y) const { return y - find_image(P, y).shift; }
  const Piece& by_label(char c) const {
    for (const auto& p : pieces)
      if (p.label == c) return p;
    throw DomainError(std::string("no piece labelled ") + c);
  }
};

inline const Pt kZero{0, 0, 0}, kOne{1, 0, 0}, kAlpha{0, 1, 0}, kBeta{0, 0, 1};

inline PieceMap three_iet() {
  PieceMap T;
  T.lo = kZero;
  T.hi = kOne;
  T.pieces = {{kZero, kAlpha, '1', kOne - kAlpha},
              {kAlpha, kBeta, '2', kOne - kAlpha.scaled(2) - kBeta},
              {kAlpha + kBeta, kOne - kAlpha - kBeta, '3', -(kAlpha + kBeta)}};
  return T;
}

inline Pt step(const IETParams& P, const Pt& x) {
  static const PieceMap T = three_iet();
  if (P.lt(x, kZero) || !P.lt(x, kOne)) throw DomainError("x outside [0, 1)");
  return T.apply(P, x).first;
}

// The same map on exact rationals, and its inverse.
inline Rational step_rational(const Rational& a, const Rational& b, const Rational& x) {
  if (x < 0 || x >= 1) throw DomainError("x outside [0, 1)");
  if (x < a) return x + 1 - a;
  if (x < a + b) return x + 1 - 2 * a - b;
  return x - a - b;
}

inline Rational step_rational_inverse(const Rational& a, const Rational& b, const Rational& y) {
  if (y < 0 || y >= 1) throw DomainError("y outside [0, 1)");
  // images: [1-a, 1), [1-a-b, 1-a), [0, 1-a-b)
  if (y >= 1 - a) return y - 1 + a;
  if (y >= 1 - a - b) return y - 1 + 2 * a + b;
  return y + a + b;
}

// Letters '1', '2', '3' for the interval visited by x, Tx, ...
inline std::string orbit_coding(const IETParams& P, const Pt& x0, std::size_t length) {
  static const PieceMap T = three_iet();
  std::string out;
  out.reserve(length);
  Pt x = x0;
  for (std::size_t t = 0; t < length; ++t) {
    auto [y, c] = T.apply(P, x);
    out.push_back(c);
    x = y;
  }
  return out;
}

// ---- induction ----

inline constexpr std::size_t kMaxReturnTime = std::size_t{1} << 22;

struct InducedPiece {
  Pt start, len;
  std::string word;  // labels of the outer map visited before returning
  Pt shift;
};

// First-return map of S on [lo, hi).
inline std::vector<InducedPiece> induce(const IETParams& P, const PieceMap& S, const Pt& lo, const Pt& hi,
                                        std::size_t max_return = kMaxReturnTime) {
  std::vector<Pt> cuts{lo, hi};
  auto inside_open = [&](const Pt& y) { return P.lt(lo, y) && P.lt(y, hi); };
  auto chase = [&](Pt y) {
    for (std::size_t t = 0; t < max_return; ++t) {
      if (inside_open(y)) {
        cuts.push_back(y);
        return;
      }
      if (y == lo || y == hi) return;
      y = S.inverse(P, y);
    }
    throw ExhaustionError("backward orbit did not enter the inducing interval");
  };
  for (std::size_t i = 1; i < S.pieces.size(); ++i) chase(S.pieces[i].start);
  for (const Pt& e : {lo, hi}) {
    bool in_range = false;
    for (const auto& p : S.pieces)
      if (P.le(p.start + p.shift, e) && P.lt(e, p.end() + p.shift)) in_range = true;
    if (in_range) chase(S.inverse(P, e));
  }
  std::sort(cuts.begin(), cuts.end(), [&](const Pt& a, const Pt& b) { return P.lt(a, b); });
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<InducedPiece> out;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    Pt x = cuts[c];
    std::string w;
    for (;;) {
      auto [y, lab] = S.apply(P, x);
      w.push_back(lab);
      x = y;
      if (P.le(lo, x) && P.lt(x, hi)) break;
      if (w.size() > max_return) throw ExhaustionError("return time exceeds the cap");
    }
    out.push_back({cuts[c], cuts[c + 1] - cuts[c], w, x - cuts[c]});
  }
  return out;
}

struct ExpansionStep {
  std::int64_t n = 1, m = 1;
  int eps = 1;
  bool operator==(const ExpansionStep&) const = default;
};

// (leading A count, B count, trailing A count) for words A^i C B^b [A]
inline std::optional<std::array<std::int64_t, 3>> parse_template_word(const std::string& w) {
  std::size_t i = 0;
  while (i < w.size() && w[i] == 'A') ++i;
  if (i >= w.size() || w[i] != 'C') return std::nullopt;
  std::size_t j = i + 1;
  std::int64_t b = 0;
  while (j < w.size() && w[j] == 'B') {
    ++j;
    ++b;
  }
  std::string tail = w.substr(j);
  if (tail != "" && tail != "A") return std::nullopt;
  return std::array<std::int64_t, 3>{static_cast<std::int64_t>(i), b, static_cast<std::int64_t>(tail.size())};
}

struct TemplateFit {
  std::array<char, 3> labels;  // new label of each piece, spatial order
  ExpansionStep step;
};

// Every labelling and sign for which the three return words match the expansion templates.
inline std::vector<TemplateFit> fit_templates(const std::array<std::string, 3>& words) {
  std::vector<TemplateFit> sols;
  std::array<char, 3> perm{'A', 'B', 'C'};
  do {
    std::map<char, std::array<std::int64_t, 3>> P;
    bool ok = true;
    for (int t = 0; t < 3 && ok; ++t) {
      auto r = parse_template_word(words[static_cast<std::size_t>(t)]);
      if (!r) ok = false;
      else P[perm[static_cast<std::size_t>(t)]] = *r;
    }
    if (!ok) continue;
    std::int64_t lead = P['A'][0];
    if (P['B'][0] != lead || P['C'][0] != lead) continue;
    std::int64_t n = lead + 1;
    auto is = [&](char c, std::int64_t b, std::int64_t tail) { return P[c][1] == b && P[c][2] == tail; };
    {  // eps = +1: A = ..B^{m-1}A, B = ..B^m, C = ..B^{m-1}
      std::int64_t m = P['B'][1];
      if (m >= 1 && is('A', m - 1, 1) && is('B', m, 0) && is('C', m - 1, 0)) sols.push_back({perm, {n, m, 1}});
    }
    {  // eps = -1: A = ..B^m, B = ..B^{m-1}A, C = ..B^m A
      std::int64_t m = P['A'][1];
      if (m >= 1 && is('A', m, 0) && is('B', m - 1, 1) && is('C', m, 1)) sols.push_back({perm, {n, m, -1}});
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return sols;
}

// Words of level k from level k-1 by the expansion templates.
inline std::array<std::string, 3> expand_step(const std::array<std::string, 3>& w, const ExpansionStep& s,
                                              std::size_t cap = std::size_t{1} << 26) {
  auto pw = [&](const std::string& x, std::int64_t k) {
    std::string r;
    for (std::int64_t t = 0; t < k; ++t) {
      r += x;
      if (r.size() > cap) throw CapacityError("expanded word exceeds cap");
    }
    return r;
  };
  const auto &A = w[0], &B = w[1], &C = w[2];
  std::string head = pw(A, s.n - 1) + C;
  if (s.eps == 1) return {head + pw(B, s.m - 1) + A, head + pw(B, s.m), head + pw(B, s.m - 1)};
  return {head + pw(B, s.m), head + pw(B, s.m - 1) + A, head + pw(B, s.m) + A};
}

inline std::array<BigInt, 3> expand_lengths(const std::array<BigInt, 3>& l, const ExpansionStep& s) {
  const BigInt &a = l[0], &b = l[1], &c = l[2];
  BigInt head = (s.n - 1) * a + c;
  if (s.eps == 1) return {head + (s.m - 1) * b + a, head + s.m * b, head + (s.m - 1) * b};
  return {head + s.m * b, head + (s.m - 1) * b + a, head + s.m * b + a};
}

struct InductionLevel {
  PieceMap map;                        // S_k on J_k, labels 'A', 'B', 'C'
  std::array<std::string, 3> ret;      // return words over level k-1 labels (level 0: over '1','2','3')
  std::array<BigInt, 3> lengths;       // |A_k|, |B_k|, |C_k| over '1','2','3'
  std::array<std::string, 3> words;    // materialized, empty once past the cap
  bool words_kept = true;
};

struct InductionResult {
  std::vector<ExpansionStep> steps;  // steps[k] takes level k to level k+1
  std::vector<InductionLevel> levels;
};

struct InductionOptions {
  std::size_t word_cap = std::size_t{1} << 22;
  std::size_t max_return = kMaxReturnTime;
};

inline std::size_t label_index(char c) {
  if (c < 'A' || c > 'C') throw DomainError(std::string("bad label ") + c);
  return static_cast<std::size_t>(c - 'A');
}

inline InductionResult induce_expansion(const IETParams& P, std::size_t depth, const InductionOptions& opt = {}) {
  static const PieceMap T = three_iet();
  InductionResult res;
  auto make_level = [](const std::vector<InducedPiece>& pcs, const std::array<char, 3>& labels, const Pt& lo,
                       const Pt& hi) {
    InductionLevel L;
    L.map.lo = lo;
    L.map.hi = hi;
    for (std::size_t t = 0; t < 3; ++t) {
      L.map.pieces.push_back({pcs[t].start, pcs[t].len, labels[t], pcs[t].shift});
      L.ret[label_index(labels[t])] = pcs[t].word;
    }
    return L;
  };
  // level 0: T induced on [alpha, 1)
  auto pcs = induce(P, T, kAlpha, kOne, opt.max_return);
  if (pcs.size() != 3) throw TemplateMismatchError("level 0 has " + std::to_string(pcs.size()) + " pieces");
  bool bac = P.lt(kAlpha.scaled(2) + kBeta, kOne);
  std::array<char, 3> lab0 = bac ? std::array<char, 3>{'B', 'A', 'C'} : std::array<char, 3>{'C', 'A', 'B'};
  auto L0 = make_level(pcs, lab0, kAlpha, kOne);
  for (std::size_t t = 0; t < 3; ++t) {
    L0.words[t] = L0.ret[t];
    L0.lengths[t] = L0.ret[t].size();
  }
  res.levels.push_back(std::move(L0));

  for (std::size_t k = 0; k < depth; ++k) {
    const auto& cur = res.levels.back();
    const auto& S = cur.map;
    const auto& Cp = S.by_label('C');
    const auto& Ap = S.by_label('A');
    Pt clo = Cp.start, chi = Cp.end();
    // pull the C piece back while its preimage stays inside A
    for (std::size_t guard = 0;; ++guard) {
      if (guard > opt.max_return) throw ExhaustionError("pull-back did not stop");
      Pt a = S.inverse(P, clo);
      Pt b = a + (chi - clo);
      if (P.le(Ap.start, a) && P.le(b, Ap.end())) {
        clo = a;
        chi = b;
      } else {
        break;
      }
    }
    auto np = induce(P, S, clo, chi, opt.max_return);
    if (np.size() != 3)
      throw TemplateMismatchError("level " + std::to_string(k + 1) + " has " + std::to_string(np.size()) +
                                  " pieces");
    auto sols = fit_templates({np[0].word, np[1].word, np[2].word});
    if (sols.size() != 1)
      throw TemplateMismatchError("level " + std::to_string(k + 1) + ": " + std::to_string(sols.size()) +
                                  " template fits for words " + np[0].word + ", " + np[1].word + ", " + np[2].word);
    const auto& fit = sols[0];
    res.steps.push_back(fit.step);
    auto nxt = make_level(np, fit.labels, clo, chi);
    for (std::size_t t = 0; t < 3; ++t) {
      BigInt len = 0;
      for (char c : nxt.ret[t]) len += cur.lengths[label_index(c)];
      nxt.lengths[t] = len;
    }
    nxt.words_kept = cur.words_kept && std::max({nxt.lengths[0], nxt.lengths[1], nxt.lengths[2]}) <= opt.word_cap;
    if (nxt.words_kept)
      for (std::size_t t = 0; t < 3; ++t)
        for (char c : nxt.ret[t]) nxt.words[t] += cur.words[label_index(c)];
    std::sort(nxt.map.pieces.begin(), nxt.map.pieces.end(),
              [&](const Piece& x, const Piece& y) { return P.lt(x.start, y.start); });
    res.levels.push_back(std::move(nxt));
  }
  return res;
}

// A_k, B_k, C_k as words over the previous level's labels, per the expansion templates.
inline std::string template_word(const ExpansionStep& s, char label) {
  std::string head = std::string(static_cast<std::size_t>(s.n - 1), 'A') + "C";
  auto Bs = [](std::int64_t k) { return std::string(static_cast<std::size_t>(k), 'B'); };
  switch (label) {
    case 'A': return s.eps == 1 ? head + Bs(s.m - 1) + "A" : head + Bs(s.m);
    case 'B': return s.eps == 1 ? head + Bs(s.m) : head + Bs(s.m - 1) + "A";
    case 'C': return s.eps == 1 ? head + Bs(s.m - 1) : head + Bs(s.m) + "A";
  }
  throw DomainError(std::string("bad label ") + label);
}

// First `len` letters ('1','2','3') of the level-k word with the given label.
// With from_templates the descent follows the fitted (n, m, eps) chain
// instead of the extracted return words.
inline std::string word_prefix(const InductionResult& r, std::size_t k, char label, std::size_t len,
                               bool from_templates = false) {
  std::string out;
  std::function<void(std::size_t, char)> go = [&](std::size_t lvl, char lab) {
    if (out.size() >= len) return;
    const auto& L = r.levels.at(lvl);
    std::size_t idx = label_index(lab);
    // the template descent only trusts level 0
    if (L.words_kept && (lvl == 0 || !from_templates)) {
      out.append(L.words[idx], 0, std::min(L.words[idx].size(), len - out.size()));
      return;
    }
    for (char c : from_templates ? template_word(r.steps.at(lvl - 1), lab) : L.ret[idx]) {
      if (out.size() >= len) return;
      go(lvl - 1, c);
    }
  };
  go(k, label);
  return out;
}

// Materialized words of every level, re-expanded from level 0 through the templates.
inline std::vector<std::array<std::string, 3>> reexpand(const InductionResult& r, std::size_t cap = std::size_t{1}
                                                                                                   << 22) {
  std::vector<std::array<std::string, 3>> out{r.levels.at(0).words};
  for (const auto& s : r.steps) {
    const auto& prev = out.back();
    std::size_t longest = std::max({prev[0].size(), prev[1].size(), prev[2].size()});
    if (longest * static_cast<std::size_t>(s.n + s.m + 1) > cap) break;
    out.push_back(expand_step(prev, s, cap));
  }
  return out;
}

struct RoundTrip {
  bool templates_match = false;  // fitted chain reproduces the extracted words
  bool coding_match = false;     // T coding from the left end of J_K equals the S_K itinerary expanded
  std::size_t symbols = 0;
};

inline RoundTrip verify_round_trip(const IETParams& P, const InductionResult& r, std::size_t K, std::size_t symbols) {
  const auto& L = r.levels.at(K);
  RoundTrip rt;
  rt.templates_match = true;
  for (char lab : {'A', 'B', 'C'})
    if (word_prefix(r, K, lab, symbols, true) != word_prefix(r, K, lab, symbols, false)) rt.templates_match = false;
  Pt x = L.map.lo;
  std::string via;
  while (via.size() < symbols) {
    auto [y, lab] = L.map.apply(P, x);
    via += word_prefix(r, K, lab, symbols - via.size(), true);
    x = y;
  }
  rt.symbols = via.size();
  rt.coding_match = orbit_coding(P, L.map.lo, via.size()) == via;
  return rt;
}

// Measures of the level-(k+1) pieces from those of level k.
inline std::array<Real, 3> measure_step(const std::array<Real, 3>& mu, const ExpansionStep& s) {
  Real rA = mu[0] - (s.n - 1) * mu[2];
  Real rB = mu[1] - (s.m - 1) * mu[2];
  if (s.eps == 1) return {rA, rB, Real(mu[2] - rA - rB)};
  return {Real(mu[2] - rA), Real(mu[2] - rB), Real(rA + rB - mu[2])};
}

inline int measure_sign(const std::array<Real, 3>& mu, const ExpansionStep& s) {
  Real rA = mu[0] - (s.n - 1) * mu[2];
  Real rB = mu[1] - (s.m - 1) * mu[2];
  return rA + rB < mu[2] ? 1 : -1;
}

// (alpha, beta) whose expansion repeats `period` forever: the level-0
// measures are the Perron vector of the inverse step matrices.
inline IETParams params_from_periodic(const std::vector<ExpansionStep>& period, unsigned bits = kDefaultIETBits) {
  if (period.empty()) throw DomainError("empty period");
  unsigned dg = bits_to_digits10(bits);
  auto inv_apply = [&](const std::array<Real, 3>& v, const ExpansionStep& s) {
    Real sum = v[0] + v[1] + v[2];
    if (s.eps == 1) return std::array<Real, 3>{Real(v[0] + (s.n - 1) * sum), Real(v[1] + (s.m - 1) * sum), sum};
    return std::array<Real, 3>{Real(s.n * sum - v[0]), Real(s.m * sum - v[1]), sum};
  };
  for (const auto& s : period)
    if (s.n < 1 || s.m < 1 || (s.eps != 1 && s.eps != -1)) throw DomainError("bad expansion step");
  std::array<Real, 3> v{Real(1, dg), Real(1, dg), Real(1, dg)};
  Real change(1, dg);
  for (int it = 0; it < 4 * static_cast<int>(bits) && change > 0; ++it) {
    auto prev = v;
    for (auto s = period.rbegin(); s != period.rend(); ++s) v = inv_apply(v, *s);
    Real n = v[0] + v[1] + v[2];
    for (auto& x : v) x /= n;
    change = abs(v[0] - prev[0]) + abs(v[1] - prev[1]) + abs(v[2] - prev[2]);
  }
  // a parabolic period such as (1,1,+1) drifts to the boundary
  if (change > ldexp(Real(1, dg), -static_cast<int>(bits) / 2))
    throw DomainError("period does not fix a unique length vector");
  Real s = 1 / (v[0] + v[1] + v[2] + v[0]);
  return IETParams(Real(v[0] * s), Real(v[1] * s), bits);
}

// ---- balance and step-size conditions ----

struct ConditionReport {
  double inf_ratio = 0;      // inf_k min(n_k, m_k) / (n_k + m_k)
  std::int64_t min_nm = 0;   // min_k min(n_k, m_k)
  double C0 = 0;
  double ratio_floor = 0;
  bool balanced = false, large_steps = false;
  bool both_hold() const { return balanced && large_steps; }
};

inline ConditionReport check_conditions(const std::vector<ExpansionStep>& steps, double C0, double ratio_floor = 0) {
  if (steps.empty()) throw DomainError("no expansion steps");
  ConditionReport r;
  r.C0 = C0;
  r.ratio_floor = ratio_floor;
  r.inf_ratio = 1;
  r.min_nm = std::numeric_limits<std::int64_t>::max();
  for (const auto& s : steps) {
    std::int64_t lo = std::min(s.n, s.m);
    r.inf_ratio = std::min(r.inf_ratio, static_cast<double>(lo) / static_cast<double>(s.n + s.m));
    r.min_nm = std::min(r.min_nm, lo);
  }
  r.balanced = r.inf_ratio > ratio_floor;
  r.large_steps = static_cast<double>(r.min_nm) > C0;
  return r;
}

// One letter to 1, the rest to 0.
inline Bits project01(const std::string& coding, char one = '1') {
  Bits b(coding.size());
  for (std::size_t i = 0; i < coding.size(); ++i) b[i] = coding[i] == one ? 1 : 0;
  return b;
}

}  // namespace rank1
