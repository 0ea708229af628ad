#pragma once

// Farey-centred arc families V_Q, V_{Q,K} and integrals of |P_W| and
// |P_W| |sum mu(m) e(m theta)| restricted to them.

#include "rank1/number_theory.hpp"
#include "rank1/poly_engine.hpp"

#include <functional>
#include <limits>

namespace rank1 {

enum class ArcKind { V_Q, V_QK };

inline const char* to_string(ArcKind k) { return k == ArcKind::V_Q ? "V_Q" : "V_QK"; }

struct FareyArc {
  std::int64_t a = 0, q = 1;
  double inner = 0, outer = 0;  // annulus in |theta - a/q|

  double center() const { return static_cast<double>(a) / static_cast<double>(q); }
  // Pieces in lifted coordinates; they may poke out of [0, 1).
  std::vector<Interval> pieces() const {
    double c = center();
    if (inner <= 0) return {{c - outer, c + outer}};
    return {{c - outer, c - inner}, {c + inner, c + outer}};
  }
};

struct ArcFamily {
  std::int64_t Q = 1, K = 0, N = 1;
  ArcKind kind = ArcKind::V_Q;
  std::vector<FareyArc> arcs;

  double measure() const {
    double s = 0;
    for (const auto& a : arcs) s += 2 * (a.outer - a.inner);
    return s;
  }
  std::vector<Interval> pieces() const {
    std::vector<Interval> out;
    for (const auto& a : arcs)
      for (const auto& p : a.pieces()) out.push_back(p);
    return out;
  }
};

// Calls fn(a, q) for every reduced a/q in [0, 1) with q <= n, in increasing order.
template <typename Fn>
void for_each_farey(std::int64_t n, Fn&& fn) {
  std::int64_t a = 0, b = 1, c = 1, d = n;
  fn(a, b);
  while (c <= n) {
    std::int64_t k = (n + b) / d;
    std::int64_t na = c, nb = d;
    c = k * c - a;
    d = k * d - b;
    a = na;
    b = nb;
    if (a == b) break;  // reached 1/1
    fn(a, b);
  }
}

inline std::int64_t farey_count(std::int64_t Q) {
  std::int64_t s = 0;
  for (std::int64_t q = Q; q < 2 * Q; ++q) s += euler_phi(q);
  return s;
}

// Q <= N^{1-tau} and K <= N^tau.
inline void check_arc_ranges(std::int64_t Q, std::int64_t K, std::int64_t N, double tau) {
  if (!(tau > 0 && tau < 1)) throw DomainError("tau must lie in (0, 1)");
  double Nd = static_cast<double>(N);
  if (static_cast<double>(Q) > std::pow(Nd, 1 - tau) * (1 + 1e-12)) throw DomainError("Q exceeds N^(1-tau)");
  if (static_cast<double>(K) > std::pow(Nd, tau) * (1 + 1e-12)) throw DomainError("K exceeds N^tau");
}

// q in [Q, 2Q); V_Q uses |theta - a/q| <= 1/N, V_{Q,K} uses [K/N, 2K/N).
inline ArcFamily enumerate_family(std::int64_t Q, std::int64_t K, std::int64_t N, ArcKind kind = ArcKind::V_QK) {
  if (Q < 1 || N < 1) throw DomainError("need Q >= 1 and N >= 1");
  if (kind == ArcKind::V_QK && K < 1) throw DomainError("V_{Q,K} needs K >= 1");
  ArcFamily fam{Q, kind == ArcKind::V_Q ? 0 : K, N, kind, {}};
  double Nd = static_cast<double>(N);
  double inner = kind == ArcKind::V_Q ? 0.0 : static_cast<double>(K) / Nd;
  double outer = kind == ArcKind::V_Q ? 1.0 / Nd : 2.0 * static_cast<double>(K) / Nd;
  for_each_farey(2 * Q - 1, [&](std::int64_t a, std::int64_t q) {
    if (q >= Q) fam.arcs.push_back({a, q, inner, outer});
  });
  // neighbours (cyclically) must be further apart than two outer radii
  const auto& A = fam.arcs;
  for (std::size_t i = 0; i < A.size(); ++i) {
    double gap = i + 1 < A.size() ? A[i + 1].center() - A[i].center() : A[0].center() + 1 - A[i].center();
    if (gap <= 2 * outer)
      throw OverlapError("arcs around " + std::to_string(A[i].a) + "/" + std::to_string(A[i].q) +
                         " overlap (Q=" + std::to_string(Q) + ", K=" + std::to_string(K) +
                         ", N=" + std::to_string(N) + ")");
  }
  return fam;
}

// Gaps left in [0, 1) by a set of (lifted) intervals.
inline std::vector<Interval> complement(const std::vector<Interval>& pieces) {
  std::vector<Interval> v;
  for (const auto& p : pieces) {
    if (p.hi <= p.lo) continue;
    if (p.hi - p.lo >= 1) return {};
    double s = std::floor(p.lo);
    double lo = p.lo - s, hi = p.hi - s;
    if (hi > 1) {
      v.push_back({lo, 1});
      v.push_back({0, hi - 1});
    } else {
      v.push_back({lo, hi});
    }
  }
  std::sort(v.begin(), v.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
  std::vector<Interval> out;
  double cur = 0;
  for (const auto& p : v) {
    if (p.lo > cur) out.push_back({cur, p.lo});
    cur = std::max(cur, p.hi);
  }
  if (cur < 1) out.push_back({cur, 1});
  return out;
}

inline constexpr double kMinCellsPerArc = 16;
inline constexpr int kDensePoints = 64;

// Riemann sum of a grid over the family; pieces narrower than 16 cells are
// integrated by the 64-point midpoint rule on `dense` when it is given.
template <typename Getter>
double arc_integral(std::size_t M, const Getter& grid_at, const std::vector<Interval>& pieces,
                    const std::function<double(double)>& dense = {}) {
  double s = 0;
  std::vector<Interval> coarse;
  for (const auto& p : pieces) {
    double w = p.hi - p.lo;
    if (w <= 0) continue;
    if (dense && w * static_cast<double>(M) < kMinCellsPerArc) {
      double acc = 0;
      for (int k = 0; k < kDensePoints; ++k) acc += dense(p.lo + (k + 0.5) * w / kDensePoints);
      s += acc * w / kDensePoints;
    } else {
      coarse.push_back(p);
    }
  }
  return s + restricted_sum(M, grid_at, coarse);
}

inline double arc_l1(const RealGrid& grid, const ArcFamily& fam, const TrigPoly* poly = nullptr) {
  std::function<double(double)> dense;
  if (poly) dense = [poly](double th) { return std::abs((*poly)(th)); };
  return arc_integral(grid.M, [&](std::size_t t) { return std::abs(grid.values[t]); }, fam.pieces(), dense);
}

inline double arc_l1(const std::vector<float>& absval, const ArcFamily& fam, const TrigPoly* poly = nullptr) {
  std::function<double(double)> dense;
  if (poly) dense = [poly](double th) { return std::abs((*poly)(th)); };
  return arc_integral(absval.size(), [&](std::size_t t) { return static_cast<double>(absval[t]); }, fam.pieces(),
                      dense);
}

// ---- the Moebius integral and its dyadic decomposition ----

struct ArcCell {
  std::int64_t Q = 1, K = 0;  // K = 0 marks the V_Q family
  std::size_t arc_count = 0;
  double measure = 0;
  double integral = std::numeric_limits<double>::quiet_NaN();
  double bound_249 = 0, bound_250 = 0;
  bool rejected = false;  // overlapping arcs
  std::string note;
};

struct BreakdownOptions {
  std::int64_t Qmax = 0;  // 0: N^{eps}
  std::int64_t Kmax = 0;  // 0: N^{eps}
  double tau = 0.25;
  double eps = 0.125;
  double A = 1.0;          // exponent in (log N)^{-A}
  bool refined = false;    // (log K)^3 in place of (log N)^3
  std::size_t oversample = kOversample;
};

struct DisjointnessResult {
  std::int64_t N = 0;
  std::size_t M = 0;
  double integral = 0;
  double normalized = 0;  // integral / N
  std::vector<ArcCell> cells;
  double complement = 0;  // what the cells leave out
};

// |P_W| and |sum_{m<=N} mu(m) e(m theta)| on a grid of size M.
struct MoebiusGrids {
  std::size_t M = 0;
  std::vector<float> pw, smu;
};

inline MoebiusGrids moebius_grids(const Bits& word, const ArithmeticTable& mu, std::size_t oversample) {
  auto N = static_cast<std::uint64_t>(word.size());
  if (N == 0) throw DomainError("empty word");
  if (mu.size() < N) throw BoundsError("mu table covers " + std::to_string(mu.size()) + " < N = " + std::to_string(N));
  MoebiusGrids g;
  g.M = next_pow2(oversample * static_cast<std::size_t>(N + 1));
  std::vector<double> cw(N + 1, 0.0), cm(N + 1, 0.0);
  for (std::uint64_t m = 1; m <= N; ++m) {
    cw[m] = word[m - 1];
    cm[m] = mu.mu(m);
  }
  g.pw = abs_grid_real(cw, g.M);
  g.smu = abs_grid_real(cm, g.M);
  return g;
}

inline double moebius_disjointness_integral(const Bits& word, const ArithmeticTable& mu,
                                            std::size_t oversample = kOversample) {
  auto g = moebius_grids(word, mu, oversample);
  double s = 0;
  for (std::size_t t = 0; t < g.M; ++t) s += static_cast<double>(g.pw[t]) * static_cast<double>(g.smu[t]);
  return s / static_cast<double>(g.M);
}

inline double bound_249(double N, std::int64_t Q, std::int64_t K, bool refined) {
  double L = std::log(N);
  double l3 = refined ? std::pow(std::log(std::max<double>(static_cast<double>(K), 2.0)), 3) : std::pow(L, 3);
  return l3 * std::pow(L, 4) * std::pow(static_cast<double>(Q + K), -0.2) * N;
}

inline double bound_250(double N, std::int64_t Q, std::int64_t K, double A) {
  double Qd = static_cast<double>(Q);
  return Qd * Qd * static_cast<double>(std::max<std::int64_t>(K, 1)) * std::pow(std::log(N), -A) * N;
}

inline DisjointnessResult per_family_breakdown(const Bits& word, const ArithmeticTable& mu,
                                               const BreakdownOptions& opt = {}) {
  auto N = static_cast<std::int64_t>(word.size());
  auto g = moebius_grids(word, mu, opt.oversample);
  double Nd = static_cast<double>(N);
  DisjointnessResult res;
  res.N = N;
  res.M = g.M;
  std::vector<float> prod(g.M);
  for (std::size_t t = 0; t < g.M; ++t) prod[t] = g.pw[t] * g.smu[t];
  for (float v : prod) res.integral += static_cast<double>(v);
  res.integral /= static_cast<double>(g.M);
  res.normalized = res.integral / Nd;
  std::vector<float>().swap(g.pw);
  std::vector<float>().swap(g.smu);

  auto cap = [&](std::int64_t given, double expo) {
    auto lim = static_cast<std::int64_t>(std::floor(std::pow(Nd, expo) + 1e-9));
    return std::max<std::int64_t>(1, given > 0 ? std::min(given, lim) : std::min(lim, static_cast<std::int64_t>(
                                                                                     std::pow(Nd, opt.eps) + 1e-9)));
  };
  std::int64_t Qmax = cap(opt.Qmax, 1 - opt.tau), Kmax = cap(opt.Kmax, opt.tau);
  auto at = [&](std::size_t t) { return static_cast<double>(prod[t]); };
  std::vector<Interval> all;
  for (std::int64_t Q = 1; Q <= Qmax; Q *= 2) {
    for (std::int64_t K = 0; K <= Kmax; K = K ? 2 * K : 1) {
      ArcCell c;
      c.Q = Q;
      c.K = K;
      c.bound_249 = bound_249(Nd, Q, K, opt.refined);
      c.bound_250 = bound_250(Nd, Q, K, opt.A);
      try {
        auto fam = enumerate_family(Q, K, N, K == 0 ? ArcKind::V_Q : ArcKind::V_QK);
        c.arc_count = fam.arcs.size();
        c.measure = fam.measure();
        auto pcs = fam.pieces();
        c.integral = arc_integral(g.M, at, pcs);
        all.insert(all.end(), pcs.begin(), pcs.end());
      } catch (const OverlapError& e) {
        c.rejected = true;
        c.note = e.what();
      }
      res.cells.push_back(c);
    }
  }
  res.complement = restricted_sum(g.M, at, complement(all));
  return res;
}

}  // namespace rank1
