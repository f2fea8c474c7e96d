#include "relapprox/rational.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace relapprox {

namespace {

i128 parse_digits(std::string_view digits) {
  i128 v = 0;
  for (char ch : digits) {
    if (!std::isdigit(static_cast<unsigned char>(ch)))
      throw std::invalid_argument("invalid digit in number");
    v = checked_add(checked_mul(v, 10), ch - '0');
  }
  return v;
}

i128 pow10(int e) {
  i128 v = 1;
  for (int i = 0; i < e; ++i) v = checked_mul(v, 10);
  return v;
}

}  // namespace

std::string to_string(i128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
  std::string out;
  while (u > 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) out.push_back('-');
  std::reverse(out.begin(), out.end());
  return out;
}

i128 checked_mul(i128 a, i128 b) {
  i128 r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("rational overflow in multiplication");
  return r;
}

i128 checked_add(i128 a, i128 b) {
  i128 r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("rational overflow in addition");
  return r;
}

i128 checked_sub(i128 a, i128 b) {
  i128 r;
  if (__builtin_sub_overflow(a, b, &r)) throw OverflowError("rational overflow in subtraction");
  return r;
}

i128 gcd(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

i128 floor_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

i128 ceil_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) == (b < 0))) ++q;
  return q;
}

Rational::Rational(i128 num) : num_(num), den_(1) {}

Rational::Rational(i128 num, i128 den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  if (den < 0) {
    num = checked_sub(0, num);
    den = checked_sub(0, den);
  }
  i128 g = gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  num_ = num;
  den_ = den;
}

Rational Rational::parse(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text.empty()) throw std::invalid_argument("empty number");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational a = parse(text.substr(0, slash));
    Rational b = parse(text.substr(slash + 1));
    if (b.is_zero()) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    return a / b;
  }

  bool neg = false;
  if (text.front() == '+' || text.front() == '-') {
    neg = text.front() == '-';
    text.remove_prefix(1);
  }
  int exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_text = text.substr(e + 1);
    bool exp_neg = false;
    if (!exp_text.empty() && (exp_text.front() == '+' || exp_text.front() == '-')) {
      exp_neg = exp_text.front() == '-';
      exp_text.remove_prefix(1);
    }
    if (exp_text.empty() || exp_text.size() > 3) throw std::invalid_argument("bad exponent");
    exponent = static_cast<int>(parse_digits(exp_text)) * (exp_neg ? -1 : 1);
    text = text.substr(0, e);
  }
  std::string_view int_part = text, frac_part;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    int_part = text.substr(0, dot);
    frac_part = text.substr(dot + 1);
  }
  if (int_part.empty() && frac_part.empty()) throw std::invalid_argument("malformed number");
  i128 num = checked_add(checked_mul(parse_digits(int_part), pow10(static_cast<int>(frac_part.size()))),
                         parse_digits(frac_part));
  int scale = static_cast<int>(frac_part.size()) - exponent;
  Rational r = scale >= 0 ? Rational(num, pow10(scale)) : Rational(checked_mul(num, pow10(-scale)));
  return neg ? -r : r;
}

double Rational::to_double() const {
  return static_cast<double>(static_cast<long double>(num_) / static_cast<long double>(den_));
}

std::string Rational::str() const {
  if (den_ == 1) return to_string(num_);
  return to_string(num_) + "/" + to_string(den_);
}

Rational Rational::reciprocal() const {
  if (num_ == 0) throw std::domain_error("reciprocal of zero");
  return Rational(den_, num_);
}

Rational operator+(const Rational& a, const Rational& b) {
  if (a.den_ == b.den_) return Rational(checked_add(a.num_, b.num_), a.den_);
  i128 g = gcd(a.den_, b.den_);
  i128 da = a.den_ / g, db = b.den_ / g;
  return Rational(checked_add(checked_mul(a.num_, db), checked_mul(b.num_, da)), checked_mul(a.den_, db));
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
  i128 g1 = gcd(a.num_, b.den_), g2 = gcd(b.num_, a.den_);
  if (g1 == 0) g1 = 1;
  if (g2 == 0) g2 = 1;
  return Rational(checked_mul(a.num_ / g1, b.num_ / g2), checked_mul(a.den_ / g2, b.den_ / g1));
}

Rational operator/(const Rational& a, const Rational& b) { return a * b.reciprocal(); }

std::strong_ordering compare_fractions(i128 a, i128 b, i128 c, i128 d) {
  i128 l, r;
  if (!__builtin_mul_overflow(a, d, &l) && !__builtin_mul_overflow(c, b, &r)) return l <=> r;
  // Continued-fraction descent: compare integer parts, then flip remainders.
  i128 qa = floor_div(a, b), qc = floor_div(c, d);
  if (qa != qc) return qa <=> qc;
  i128 ra = a - qa * b, rc = c - qc * d;  // 0 <= r < den
  if (ra == 0 || rc == 0) return ra == rc ? std::strong_ordering::equal
                                          : (ra == 0 ? std::strong_ordering::less : std::strong_ordering::greater);
  // a/b - qa = ra/b, compare ra/b vs rc/d  <=>  compare d/rc vs b/ra
  return compare_fractions(d, rc, b, ra);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  return compare_fractions(a.num_, a.den_, b.num_, b.den_);
}

Rational pow2(int k) {
  if (k >= 0) {
    if (k > 125) throw OverflowError("pow2 exponent too large");
    return Rational(static_cast<i128>(1) << k);
  }
  if (-k > 125) throw OverflowError("pow2 exponent too small");
  return Rational(1, static_cast<i128>(1) << (-k));
}

bool exact_log2(const Rational& r, int& k) {
  if (r.num() <= 0) return false;
  auto is_pow2 = [](i128 v) { return v > 0 && (v & (v - 1)) == 0; };
  auto log2i = [](i128 v) {
    int e = 0;
    while (v > 1) {
      v >>= 1;
      ++e;
    }
    return e;
  };
  if (r.den() == 1 && is_pow2(r.num())) {
    k = log2i(r.num());
    return true;
  }
  if (r.num() == 1 && is_pow2(r.den())) {
    k = -log2i(r.den());
    return true;
  }
  return false;
}

Rational dyadic_floor(long double v, int bits) {
  long double scaled = std::floor(std::ldexp(v, bits));
  if (!(std::fabs(scaled) < 0x1p100L)) throw OverflowError("dyadic_floor out of range");
  return Rational(static_cast<i128>(scaled), static_cast<i128>(1) << bits);
}

}  // namespace relapprox
