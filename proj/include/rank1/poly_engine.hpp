#pragma once

// Sparse trigonometric polynomials, word polynomials P_W, the level factors
// P_j and their Riesz products, evaluated on equispaced circle grids.

#include "rank1/common.hpp"
#include "rank1/word_engine.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

namespace rank1 {

struct Term {
  std::int64_t freq = 0;
  cplx coef;
};

class TrigPoly {
 public:
  TrigPoly() = default;

  // Terms are sorted by frequency and duplicates merged.
  explicit TrigPoly(std::vector<Term> terms) : terms_(std::move(terms)) { normalize(); }

  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  std::int64_t degree() const {
    std::int64_t d = 0;
    for (const auto& t : terms_) d = std::max(d, t.freq < 0 ? -t.freq : t.freq);
    return d;
  }
  std::int64_t min_freq() const { return terms_.empty() ? 0 : terms_.front().freq; }
  std::int64_t max_freq() const { return terms_.empty() ? 0 : terms_.back().freq; }

  cplx coef(std::int64_t f) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), f,
                               [](const Term& t, std::int64_t v) { return t.freq < v; });
    return it != terms_.end() && it->freq == f ? it->coef : cplx(0);
  }

  // Direct evaluation; fine for a handful of points.
  cplx operator()(double theta) const {
    cplx s = 0;
    for (const auto& t : terms_) {
      long double ph = static_cast<long double>(t.freq) * theta;
      ph -= std::floor(ph);
      s += t.coef * e1(static_cast<double>(ph));
    }
    return s;
  }

  double l2_squared() const {
    double s = 0;
    for (const auto& t : terms_) s += std::norm(t.coef);
    return s;
  }

  friend TrigPoly operator*(const TrigPoly& a, const TrigPoly& b) {
    std::vector<Term> out;
    out.reserve(a.size() * b.size());
    for (const auto& x : a.terms_)
      for (const auto& y : b.terms_) out.push_back({checked_add(x.freq, y.freq), x.coef * y.coef});
    return TrigPoly(std::move(out));
  }

  friend TrigPoly operator+(const TrigPoly& a, const TrigPoly& b) {
    std::vector<Term> out = a.terms_;
    out.insert(out.end(), b.terms_.begin(), b.terms_.end());
    return TrigPoly(std::move(out));
  }

  // P(theta) -> e(s theta) P(theta)
  TrigPoly shifted(std::int64_t s) const {
    TrigPoly r = *this;
    for (auto& t : r.terms_) t.freq = checked_add(t.freq, s);
    return r;
  }

  friend bool operator==(const TrigPoly& a, const TrigPoly& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a.terms_[i].freq != b.terms_[i].freq || a.terms_[i].coef != b.terms_[i].coef) return false;
    return true;
  }

 private:
  void normalize() {
    std::sort(terms_.begin(), terms_.end(), [](const Term& x, const Term& y) { return x.freq < y.freq; });
    std::vector<Term> merged;
    for (const auto& t : terms_) {
      if (!merged.empty() && merged.back().freq == t.freq) merged.back().coef += t.coef;
      else merged.push_back(t);
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(), [](const Term& t) { return t.coef == cplx(0); }),
                 merged.end());
    terms_ = std::move(merged);
  }
  std::vector<Term> terms_;
};

// (1/sqrt w_j) sum_k e((k h_j + s_j(k)) theta), j >= 1.
inline TrigPoly build_Pj(const RankOneSpec& spec, std::size_t j) {
  if (j < 1) throw DomainError("P_j is defined for j >= 1");
  std::int64_t h = heights64(spec, j).back();
  auto r = spec.level(j);
  double c = 1.0 / std::sqrt(static_cast<double>(r.w));
  std::vector<Term> t;
  std::int64_t s = 0;
  for (std::int64_t k = 0; k < r.w; ++k) {
    if (k > 0) s = checked_add(s, r.spacers[static_cast<std::size_t>(k - 1)]);
    t.push_back({checked_add(checked_mul(k, h), s), cplx(c, 0)});
  }
  return TrigPoly(std::move(t));
}

// sum_{m=1}^{l} x_m e(m theta)
inline TrigPoly build_PW(const Bits& word) {
  std::vector<Term> t;
  for (std::size_t m = 0; m < word.size(); ++m)
    if (word[m]) t.push_back({static_cast<std::int64_t>(m + 1), cplx(1, 0)});
  return TrigPoly(std::move(t));
}

// sum_{j<k} e(j l theta)
inline TrigPoly dirichlet_factor(std::int64_t k, std::int64_t l) {
  std::vector<Term> t;
  for (std::int64_t j = 0; j < k; ++j) t.push_back({checked_mul(j, l), cplx(1, 0)});
  return TrigPoly(std::move(t));
}

struct PolyPart {
  TrigPoly poly;         // P_{W_i}
  std::int64_t k = 1;    // repetition count
  std::int64_t len = 1;  // |W_i|
};

// P_W for W = W_1^{k_1} ... W_r^{k_r}: each block contributes
// e(offset theta) P_{W_i}(theta) sum_{j<k_i} e(j l_i theta).
inline TrigPoly recursion_PW(const std::vector<PolyPart>& parts) {
  TrigPoly acc;
  std::int64_t off = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& p = parts[i];
    if (p.k < 1 || p.len < 1) throw StructureError("part " + std::to_string(i) + " has nonpositive k or length");
    if (!p.poly.empty() && (p.poly.min_freq() < 1 || p.poly.max_freq() > p.len))
      throw StructureError("part " + std::to_string(i) + ": frequencies outside 1.." + std::to_string(p.len));
    acc = acc + (p.poly * dirichlet_factor(p.k, p.len)).shifted(off);
    off = checked_add(off, checked_mul(p.k, p.len));
  }
  return acc;
}

struct WordPart {
  Bits word;
  std::int64_t k = 1;
  std::int64_t len = -1;  // declared length; -1 means |word|
};

inline TrigPoly recursion_PW(const std::vector<WordPart>& parts) {
  std::vector<PolyPart> pp;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    auto len = parts[i].len < 0 ? static_cast<std::int64_t>(parts[i].word.size()) : parts[i].len;
    if (len != static_cast<std::int64_t>(parts[i].word.size()))
      throw StructureError("part " + std::to_string(i) + ": declared length " + std::to_string(len) +
                           " but word has " + std::to_string(parts[i].word.size()) + " symbols");
    pp.push_back({build_PW(parts[i].word), parts[i].k, len});
  }
  return recursion_PW(pp);
}

// Equispaced samples theta_t = t/M.
template <typename T>
struct CircleGrid {
  std::size_t M = 0;
  std::vector<T> values;
  double theta(std::size_t t) const { return static_cast<double>(t) / static_cast<double>(M); }
};
using RealGrid = CircleGrid<double>;
using ComplexGrid = CircleGrid<cplx>;

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// In place: v[t] <- sum_k v[k] e(k t / M).
inline void fft_exp_plus(std::vector<cplx>& v) {
  if (v.empty()) return;
  auto* data = reinterpret_cast<fftw_complex*>(v.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lk(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(v.size()), data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lk(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

class PhaseTable {
 public:
  explicit PhaseTable(std::size_t M) : M_(M), tab_(M) {
    for (std::size_t k = 0; k < M; ++k) tab_[k] = e1(static_cast<double>(k) / static_cast<double>(M));
  }
  // e(f t / M) with exact integer reduction of f t mod M.
  cplx operator()(std::int64_t f, std::size_t t) const {
    auto r = static_cast<unsigned __int128>(static_cast<std::uint64_t>(floor_mod(f, static_cast<std::int64_t>(M_)))) * t;
    return tab_[static_cast<std::size_t>(r % M_)];
  }
  std::size_t size() const { return M_; }

 private:
  std::size_t M_;
  std::vector<cplx> tab_;
};

inline constexpr std::size_t kFastTransformTerms = std::size_t{1} << 12;

// Values of P(dilation * theta) on the M-point grid.
inline ComplexGrid eval_grid(const TrigPoly& p, std::size_t M, std::int64_t dilation = 1) {
  if (M == 0) throw DomainError("grid size must be positive");
  ComplexGrid g{M, std::vector<cplx>(M, cplx(0))};
  auto Mi = static_cast<std::int64_t>(M);
  bool fast = p.size() > kFastTransformTerms || static_cast<double>(p.size()) * static_cast<double>(M) > 1 << 24;
  if (fast) {
    for (const auto& t : p.terms()) {
      auto f = static_cast<std::int64_t>((static_cast<__int128>(t.freq) * dilation) % Mi);
      g.values[static_cast<std::size_t>(floor_mod(f, Mi))] += t.coef;
    }
    fft_exp_plus(g.values);
  } else {
    PhaseTable ph(M);
    for (const auto& t : p.terms()) {
      auto f = static_cast<std::int64_t>((static_cast<__int128>(t.freq) * dilation) % Mi);
      for (std::size_t s = 0; s < M; ++s) g.values[s] += t.coef * ph(f, s);
    }
  }
  return g;
}

inline RealGrid abs_grid(const ComplexGrid& g) {
  RealGrid r{g.M, std::vector<double>(g.M)};
  for (std::size_t t = 0; t < g.M; ++t) r.values[t] = std::abs(g.values[t]);
  return r;
}

// |sum_m c_m e(m theta)| on the M-point grid for real coefficients c_m
// (index m = position in the vector). Uses a real-input transform.
inline std::vector<float> abs_grid_real(const std::vector<double>& coeffs, std::size_t M) {
  std::vector<double> in(M, 0.0);
  for (std::size_t m = 0; m < coeffs.size(); ++m) in[m % M] += coeffs[m];
  std::vector<cplx> out(M / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lk(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(M), in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lk(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  std::vector<double>().swap(in);
  std::vector<float> mag(M);
  for (std::size_t t = 0; t <= M / 2; ++t) {
    auto a = static_cast<float>(std::abs(out[t]));
    mag[t] = a;
    if (t > 0 && t < M - t) mag[M - t] = a;
  }
  return mag;
}

// prod_{j=1}^n |P_j(dilation theta)|^2 on the grid; each factor evaluated
// on its own and multiplied pointwise.
inline RealGrid riesz_product(const RankOneSpec& spec, std::size_t n, std::size_t M, std::int64_t dilation = 1) {
  RealGrid r{M, std::vector<double>(M, 1.0)};
  for (std::size_t j = 1; j <= n; ++j) {
    auto g = eval_grid(build_Pj(spec, j), M, dilation);
    for (std::size_t t = 0; t < M; ++t) r.values[t] *= std::norm(g.values[t]);
  }
  return r;
}

// Degree of prod_{j<=n} |P_j|^2, i.e. its largest frequency.
inline std::int64_t riesz_degree(const RankOneSpec& spec, std::size_t n) {
  std::int64_t d = 0;
  for (std::size_t j = 1; j <= n; ++j) {
    auto p = build_Pj(spec, j);
    d = checked_add(d, p.max_freq() - p.min_freq());
  }
  return d;
}

template <typename T>
double l1_norm(const CircleGrid<T>& g) {
  double s = 0;
  for (const auto& v : g.values) s += std::abs(v);
  return s / static_cast<double>(g.M);
}

inline double l1_norm(const std::vector<float>& values) {
  double s = 0;
  for (float v : values) s += v;
  return s / static_cast<double>(values.size());
}

// Half-open arc [lo, hi) on R/Z; lo may be negative and hi may exceed 1.
struct Interval {
  double lo = 0;
  double hi = 0;
};

// Sum of v_t |cell_t cap S| with cell_t = [theta_t - 1/2M, theta_t + 1/2M).
template <typename Getter>
double restricted_sum(std::size_t M, const Getter& value_at, const std::vector<Interval>& arcs) {
  double Md = static_cast<double>(M);
  double s = 0;
  for (const auto& a : arcs) {
    if (a.hi <= a.lo) continue;
    double lo = a.lo * Md + 0.5, hi = a.hi * Md + 0.5;  // in cell units; cell t covers [t, t+1)
    auto t0 = static_cast<std::int64_t>(std::floor(lo));
    auto t1 = static_cast<std::int64_t>(std::ceil(hi));
    for (std::int64_t t = t0; t < t1; ++t) {
      double w = std::min(hi, static_cast<double>(t + 1)) - std::max(lo, static_cast<double>(t));
      if (w <= 0) continue;
      s += w * value_at(static_cast<std::size_t>(floor_mod(t, static_cast<std::int64_t>(M))));
    }
  }
  return s / Md;
}

template <typename T>
double restricted_l1(const CircleGrid<T>& g, const std::vector<Interval>& arcs) {
  return restricted_sum(g.M, [&](std::size_t t) { return std::abs(g.values[t]); }, arcs);
}

inline double restricted_l1(const std::vector<float>& values, const std::vector<Interval>& arcs) {
  return restricted_sum(values.size(), [&](std::size_t t) { return static_cast<double>(values[t]); }, arcs);
}

struct L1Estimate {
  double value = 0;
  std::size_t M = 0;
  double rel_change = 0;
  bool converged = false;
};

inline constexpr std::size_t kOversample = 16;

// ||P||_1 by Riemann sums, doubling M until the relative change is below tol.
inline L1Estimate l1_norm_converged(const TrigPoly& p, std::size_t oversample = kOversample, double tol = 1e-3,
                                   std::size_t max_M = std::size_t{1} << 25) {
  std::size_t M = next_pow2(std::max<std::size_t>(oversample * static_cast<std::size_t>(std::max<std::int64_t>(p.degree(), 1)), 16));
  double prev = l1_norm(eval_grid(p, M));
  L1Estimate est{prev, M, 1.0, false};
  while (M * 2 <= max_M) {
    M *= 2;
    double cur = l1_norm(eval_grid(p, M));
    est.rel_change = std::abs(cur - prev) / std::max(std::abs(cur), 1e-300);
    est.value = cur;
    est.M = M;
    if (est.rel_change < tol) {
      est.converged = true;
      break;
    }
    prev = cur;
  }
  return est;
}

// ||P_W||_1 for a 0/1 word via a real transform, with the same doubling rule.
inline L1Estimate word_l1_norm(const Bits& word, std::size_t oversample = kOversample, double tol = 1e-3,
                               std::size_t max_M = std::size_t{1} << 25) {
  std::vector<double> c(word.size() + 1, 0.0);
  for (std::size_t m = 0; m < word.size(); ++m) c[m + 1] = word[m];
  std::size_t M = next_pow2(std::max<std::size_t>(oversample * (word.size() + 1), 16));
  double prev = l1_norm(abs_grid_real(c, M));
  L1Estimate est{prev, M, 1.0, false};
  while (M * 2 <= max_M) {
    M *= 2;
    double cur = l1_norm(abs_grid_real(c, M));
    est.rel_change = std::abs(cur - prev) / std::max(std::abs(cur), 1e-300);
    est.value = cur;
    est.M = M;
    if (est.rel_change < tol) {
      est.converged = true;
      break;
    }
    prev = cur;
  }
  return est;
}

template <typename T>
T conj_value(const T& v) {
  if constexpr (std::is_arithmetic_v<T>) return v;
  else return std::conj(v);
}

template <typename T>
struct BilinearResult {
  T lhs{};
  T rhs{};
};

// f, g indexed 1..N (entry 0 ignored). lhs matches frequencies of
// sum f(n) e(pn theta) against sum g(m) e(qm theta); rhs is the closed form.
template <typename T>
BilinearResult<T> bilinear_identity_check(const std::vector<T>& f, const std::vector<T>& g, std::int64_t p,
                                          std::int64_t q, std::int64_t N) {
  if (p == q) throw DomainError("p and q must differ");
  if (p < 1 || q < 1 || std::gcd(p, q) != 1) throw DomainError("p and q must be coprime positive integers");
  if (static_cast<std::int64_t>(f.size()) < N + 1 || static_cast<std::int64_t>(g.size()) < N + 1)
    throw BoundsError("f and g must cover 1..N");
  std::map<std::int64_t, T> F;
  for (std::int64_t n = 1; n <= N; ++n)
    if (f[n] != T{}) F[checked_mul(p, n)] += f[n];
  BilinearResult<T> r;
  for (std::int64_t m = 1; m <= N; ++m) {
    if (g[m] == T{}) continue;
    auto it = F.find(checked_mul(q, m));
    if (it != F.end()) r.lhs += it->second * conj_value(g[m]);
  }
  std::int64_t n1 = N / std::max(p, q);
  for (std::int64_t k = 1; k <= n1; ++k) r.rhs += f[q * k] * conj_value(g[p * k]);
  return r;
}

}  // namespace rank1
