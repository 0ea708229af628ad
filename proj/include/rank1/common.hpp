#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rank1 {

using BigInt = boost::multiprecision::cpp_int;
using cplx = std::complex<double>;
using Bits = std::vector<std::uint8_t>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Error taxonomy. Every failure mode names its own type so callers can
// branch on the kind of problem rather than parse messages.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : Error { using Error::Error; };
struct BoundsError : Error { using Error::Error; };
struct CapacityError : Error { using Error::Error; };
struct StructureError : Error { using Error::Error; };
struct OverflowError : Error { using Error::Error; };
struct ExhaustionError : Error { using Error::Error; };
struct OverlapError : Error { using Error::Error; };
struct PreconditionError : Error { using Error::Error; };
struct TemplateMismatchError : Error { using Error::Error; };
struct PrecisionError : Error { using Error::Error; };
struct ConfigError : Error {
  int line = 0;
  ConfigError(const std::string& msg, int line_no)
      : Error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + msg : msg),
        line(line_no) {}
};

// e(x) = exp(2 pi i x)
inline cplx e1(double x) {
  return std::polar(1.0, kTwoPi * x);
}

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("int64 addition overflow");
  return r;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("int64 multiplication overflow");
  return r;
}

inline std::string bits_to_string(const Bits& b) {
  std::string s(b.size(), '0');
  for (std::size_t i = 0; i < b.size(); ++i) s[i] = b[i] ? '1' : '0';
  return s;
}

inline Bits string_to_bits(const std::string& s) {
  Bits b;
  b.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1') throw DomainError("word symbols must be 0 or 1");
    b.push_back(c == '1');
  }
  return b;
}

inline std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace rank1
