#pragma once

// Exact rationals over 128-bit integers. Every measure, threshold and
// tolerance comparison in the library goes through this type; overflow is
// detected and reported instead of silently wrapping.

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace relapprox {

using i128 = __int128;

struct OverflowError : std::overflow_error {
  using std::overflow_error::overflow_error;
};

std::string to_string(i128 v);

i128 checked_mul(i128 a, i128 b);
i128 checked_add(i128 a, i128 b);
i128 checked_sub(i128 a, i128 b);
i128 gcd(i128 a, i128 b);
i128 floor_div(i128 a, i128 b);
i128 ceil_div(i128 a, i128 b);

class Rational {
 public:
  constexpr Rational() = default;
  Rational(i128 num);  // NOLINT(google-explicit-constructor)
  Rational(i128 num, i128 den);

  // Accepts "3", "-3/16", "0.0625", "1e-3", "6.25E-2".
  static Rational parse(std::string_view text);

  i128 num() const { return num_; }
  i128 den() const { return den_; }

  double to_double() const;
  std::string str() const;

  i128 floor() const { return floor_div(num_, den_); }
  i128 ceil() const { return ceil_div(num_, den_); }

  bool is_zero() const { return num_ == 0; }
  bool is_negative() const { return num_ < 0; }
  bool is_integer() const { return den_ == 1; }

  Rational abs() const { return num_ < 0 ? Rational(-num_, den_) : *this; }
  Rational reciprocal() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational operator-() const { return Rational(-num_, den_); }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  i128 num_ = 0;
  i128 den_ = 1;  // always > 0, gcd(num, den) == 1
};

// Exact comparison of a/b with c/d (b, d > 0) that never overflows.
std::strong_ordering compare_fractions(i128 a, i128 b, i128 c, i128 d);

inline Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

// 2^k for any integer k (negative k gives 1/2^-k).
Rational pow2(int k);

// Returns k when r == 2^k exactly.
bool exact_log2(const Rational& r, int& k);

// Closest rational with denominator 2^bits at or below v.
Rational dyadic_floor(long double v, int bits = 32);

}  // namespace relapprox
