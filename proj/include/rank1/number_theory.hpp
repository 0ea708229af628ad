#pragma once

// Segmented sieves for mu and Lambda, exponential sums over mu, rational
// approximation by continued fractions, and Vinogradov-type bounds.

#include "rank1/common.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

namespace rank1 {

enum class TableKind { mu, lambda };

inline constexpr std::size_t kSieveBlock = std::size_t{1} << 22;
inline constexpr std::uint64_t kSieveCap = 1'000'000'000ULL;

// Values for n = 1..N stored at index n (index 0 unused).
class ArithmeticTable {
 public:
  ArithmeticTable() = default;
  ArithmeticTable(TableKind kind, std::uint64_t n) : kind_(kind), n_(n) {
    if (kind == TableKind::mu) mu_.assign(n + 1, 0);
    else lambda_.assign(n + 1, 0.0);
  }

  TableKind kind() const { return kind_; }
  std::uint64_t size() const { return n_; }

  int mu(std::uint64_t n) const {
    check(n, TableKind::mu);
    return mu_[n];
  }
  double lambda(std::uint64_t n) const {
    check(n, TableKind::lambda);
    return lambda_[n];
  }
  double operator[](std::uint64_t n) const { return kind_ == TableKind::mu ? mu(n) : lambda(n); }

  std::vector<std::int8_t>& mu_data() { return mu_; }
  const std::vector<std::int8_t>& mu_data() const { return mu_; }
  std::vector<double>& lambda_data() { return lambda_; }
  const std::vector<double>& lambda_data() const { return lambda_; }

 private:
  void check(std::uint64_t n, TableKind k) const {
    if (k != kind_) throw DomainError("table holds the other arithmetic function");
    if (n < 1 || n > n_) throw BoundsError("index " + std::to_string(n) + " outside table [1, " + std::to_string(n_) + "]");
  }
  TableKind kind_ = TableKind::mu;
  std::uint64_t n_ = 0;
  std::vector<std::int8_t> mu_;
  std::vector<double> lambda_;
};

inline std::vector<std::uint32_t> small_primes(std::uint64_t limit) {
  std::vector<bool> comp(limit + 1, false);
  std::vector<std::uint32_t> ps;
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (comp[i]) continue;
    ps.push_back(static_cast<std::uint32_t>(i));
    for (std::uint64_t j = i * i; j <= limit; j += i) comp[j] = true;
  }
  return ps;
}

inline std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

inline ArithmeticTable sieve(TableKind kind, std::uint64_t n, std::size_t block = kSieveBlock) {
  if (n > kSieveCap) throw CapacityError("sieve limit " + std::to_string(n) + " exceeds cap " + std::to_string(kSieveCap));
  ArithmeticTable t(kind, n);
  if (n == 0) return t;
  auto primes = small_primes(isqrt(n));
  std::vector<std::uint64_t> rem(block);
  std::vector<std::int8_t> sgn(block);
  std::vector<std::uint32_t> npf(block), lastp(block);
  for (std::uint64_t lo = 1; lo <= n; lo += block) {
    std::uint64_t hi = std::min<std::uint64_t>(n + 1, lo + block);
    std::size_t len = hi - lo;
    for (std::size_t i = 0; i < len; ++i) {
      rem[i] = lo + i;
      sgn[i] = 1;
      npf[i] = 0;
      lastp[i] = 0;
    }
    for (std::uint32_t p : primes) {
      std::uint64_t pp = std::uint64_t{p} * p;
      if (pp >= hi) break;
      for (std::uint64_t m = (lo + p - 1) / p * p; m < hi; m += p) {
        std::size_t i = m - lo;
        sgn[i] = static_cast<std::int8_t>(-sgn[i]);
        ++npf[i];
        lastp[i] = p;
        do rem[i] /= p;
        while (rem[i] % p == 0);
      }
      for (std::uint64_t m = (lo + pp - 1) / pp * pp; m < hi; m += pp) sgn[m - lo] = 0;
    }
    for (std::size_t i = 0; i < len; ++i) {
      std::uint64_t v = lo + i;
      if (rem[i] > 1) {
        sgn[i] = static_cast<std::int8_t>(-sgn[i]);
        ++npf[i];
        lastp[i] = 0;  // large prime factor is rem itself
      }
      if (kind == TableKind::mu) {
        t.mu_data()[v] = v == 1 ? 1 : sgn[i];
      } else if (npf[i] == 1) {
        t.lambda_data()[v] = std::log(static_cast<double>(lastp[i] ? lastp[i] : rem[i]));
      }
    }
  }
  return t;
}

// Reference values by trial division, for testing.
inline int mu_bruteforce(std::uint64_t n) {
  int s = 1;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    n /= p;
    if (n % p == 0) return 0;
    s = -s;
  }
  return n > 1 ? -s : s;
}

inline double lambda_bruteforce(std::uint64_t n) {
  if (n < 2) return 0;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    while (n % p == 0) n /= p;
    return n == 1 ? std::log(static_cast<double>(p)) : 0.0;
  }
  return std::log(static_cast<double>(n));
}

// Binary mu table: magic, little-endian u64 N, then 2-bit codes
// (00 = 0, 01 = +1, 11 = -1), four per byte, n = 1 in the low bits.
inline constexpr char kMuMagic[8] = {'R', 'K', '1', 'M', 'U', 'T', 'B', '1'};

inline void write_mu_table(const ArithmeticTable& t, std::ostream& out) {
  if (t.kind() != TableKind::mu) throw DomainError("binary format stores mu tables only");
  out.write(kMuMagic, 8);
  std::uint64_t n = t.size();
  unsigned char hdr[8];
  for (int i = 0; i < 8; ++i) hdr[i] = static_cast<unsigned char>(n >> (8 * i));
  out.write(reinterpret_cast<const char*>(hdr), 8);
  std::vector<unsigned char> buf((n + 3) / 4, 0);
  for (std::uint64_t k = 1; k <= n; ++k) {
    int v = t.mu_data()[k];
    unsigned code = v == 0 ? 0u : (v > 0 ? 1u : 3u);
    buf[(k - 1) / 4] |= static_cast<unsigned char>(code << (2 * ((k - 1) % 4)));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

inline ArithmeticTable read_mu_table(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMuMagic, 8) != 0) throw DomainError("bad mu table magic");
  unsigned char hdr[8];
  if (!in.read(reinterpret_cast<char*>(hdr), 8)) throw DomainError("truncated mu table header");
  std::uint64_t n = 0;
  for (int i = 0; i < 8; ++i) n |= std::uint64_t{hdr[i]} << (8 * i);
  if (n > kSieveCap) throw CapacityError("mu table too large");
  std::vector<unsigned char> buf((n + 3) / 4);
  if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
    throw DomainError("truncated mu table body");
  ArithmeticTable t(TableKind::mu, n);
  for (std::uint64_t k = 1; k <= n; ++k) {
    unsigned code = (buf[(k - 1) / 4] >> (2 * ((k - 1) % 4))) & 3u;
    if (code == 2) throw DomainError("invalid mu code");
    t.mu_data()[k] = static_cast<std::int8_t>(code == 0 ? 0 : (code == 1 ? 1 : -1));
  }
  return t;
}

// mu table, cached under $RANK1_CACHE_DIR when that variable is set.
inline ArithmeticTable cached_mu(std::uint64_t n) {
  const char* dir = std::getenv("RANK1_CACHE_DIR");
  if (!dir || !*dir) return sieve(TableKind::mu, n);
  std::filesystem::path p = std::filesystem::path(dir) / ("mu_" + std::to_string(n) + ".bin");
  if (std::ifstream in{p, std::ios::binary}) {
    try {
      return read_mu_table(in);
    } catch (const Error&) {
      // unreadable cache file: fall through and rebuild
    }
  }
  auto t = sieve(TableKind::mu, n);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::filesystem::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (out) write_mu_table(t, out);
  }
  std::filesystem::rename(tmp, p, ec);
  return t;
}

inline constexpr std::size_t kRotationAnchor = std::size_t{1} << 14;

// sum_{m=1}^N mu(m) e(m theta), by rotation re-anchored every 2^14 steps.
inline cplx mu_exp_sum(const ArithmeticTable& t, double theta, std::uint64_t n) {
  if (n > t.size()) throw BoundsError("table does not cover N");
  if (t.kind() != TableKind::mu) throw DomainError("mu_exp_sum needs a mu table");
  const auto& mu = t.mu_data();
  cplx step = e1(theta);
  cplx z;
  cplx acc = 0;
  long double th = theta;
  for (std::uint64_t m = 1; m <= n; ++m) {
    if ((m - 1) % kRotationAnchor == 0) {
      long double ph = th * static_cast<long double>(m);
      ph -= std::floor(ph);
      z = e1(static_cast<double>(ph));
    } else {
      z *= step;
    }
    if (mu[m]) acc += static_cast<double>(mu[m]) * z;
  }
  return acc;
}

struct RationalApprox {
  std::int64_t a = 0;
  std::int64_t q = 1;
  double beta = 0;  // theta - a/q
};

// Last continued-fraction convergent with denominator <= M. Its error is
// below 1/(q q') with q' > M the next denominator, hence below 1/(q M).
inline RationalApprox dirichlet_approx(double theta, std::int64_t m_bound) {
  if (m_bound < 1) throw DomainError("M_bound must be >= 1");
  long double x = theta;
  long double fl = std::floor(x);
  std::int64_t h_prev = 1, k_prev = 0;  // p_{-1}, q_{-1}
  std::int64_t h = static_cast<std::int64_t>(fl), k = 1;
  long double frac = x - fl;
  for (int it = 0; it < 64 && frac > 0; ++it) {
    long double inv = 1.0L / frac;
    long double af = std::floor(inv);
    if (af > 4e18L) break;
    auto a = static_cast<std::int64_t>(af);
    // next denominator a*k + k_prev; stop before exceeding the bound
    if (a > (m_bound - k_prev) / k) break;
    std::int64_t h_next = a * h + h_prev, k_next = a * k + k_prev;
    h_prev = h; k_prev = k; h = h_next; k = k_next;
    frac = inv - af;
    long double err = std::fabs(x - static_cast<long double>(h) / k);
    if (err < 1e-18L) break;
  }
  RationalApprox r{h, k, static_cast<double>(x - static_cast<long double>(h) / k)};
  if (std::fabs(r.beta) > 1.0 / (static_cast<double>(r.q) * m_bound) * (1 + 1e-9))
    throw Error("dirichlet_approx invariant violated");
  return r;
}

struct VinogradovBounds {
  double b1 = 0;  // large-sieve style bound in terms of q
  double b2 = 0;  // bound in terms of q + x|beta|
};

inline VinogradovBounds vinogradov_bound(double x, double q, double beta, double tau, double c = 1.0,
                                         double big_c = 1.0) {
  if (x < 2) throw DomainError("vinogradov_bound needs x >= 2");
  if (q < 1) throw DomainError("q must be >= 1");
  if (!(tau > 0 && tau < 1.0 / 3.0)) throw DomainError("tau must lie in (0, 1/3)");
  double lx = std::log(x);
  double l4 = lx * lx * lx * lx;
  double inner = std::sqrt(q) / std::sqrt(x) + 1 / std::sqrt(q) + std::pow(x, -0.2);
  VinogradovBounds b;
  b.b1 = c * std::sqrt(inner) * l4 * x;
  b.b2 = big_c * (std::pow(q + x * std::fabs(beta), -0.25) + std::pow(x, -tau / 4)) * x * l4;
  return b;
}

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// Primes p in [lo, hi] with p > W and p = 1 mod v for every v in moduli.
inline std::vector<std::int64_t> admissible_primes(std::int64_t w_bound, const std::set<std::int64_t>& moduli,
                                                   std::int64_t lo, std::int64_t hi, std::size_t count) {
  std::vector<std::int64_t> out;
  for (std::int64_t p = std::max<std::int64_t>(lo, 2); p <= hi && out.size() < count; ++p) {
    if (p <= w_bound || !is_prime(static_cast<std::uint64_t>(p))) continue;
    bool ok = true;
    for (auto v : moduli)
      if (v > 0 && p % v != 1 % v) ok = false;
    if (ok) out.push_back(p);
  }
  if (out.size() < count)
    throw ExhaustionError("only " + std::to_string(out.size()) + " admissible primes in [" + std::to_string(lo) +
                          ", " + std::to_string(hi) + "], wanted " + std::to_string(count));
  return out;
}

inline std::int64_t euler_phi(std::int64_t n) {
  std::int64_t r = n;
  for (std::int64_t p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    while (n % p == 0) n /= p;
    r -= r / p;
  }
  if (n > 1) r -= r / n;
  return r;
}

}  // namespace rank1
