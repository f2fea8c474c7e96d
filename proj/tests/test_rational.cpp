#include <doctest.h>

#include "relapprox/rational.hpp"
#include "relapprox/rng.hpp"

using namespace relapprox;

TEST_SUITE("rational") {
  TEST_CASE("parse forms") {
    CHECK(Rational::parse("3") == Rational(3));
    CHECK(Rational::parse("-3/16") == Rational(-3, 16));
    CHECK(Rational::parse("0.0625") == Rational(1, 16));
    CHECK(Rational::parse("1e-3") == Rational(1, 1000));
    CHECK(Rational::parse("6.25E-2") == Rational(1, 16));
    CHECK(Rational::parse("2/4") == Rational(1, 2));
    CHECK_THROWS(Rational::parse("1/0"));
    CHECK_THROWS(Rational::parse("abc"));
    CHECK_THROWS(Rational::parse(""));
  }

  TEST_CASE("normal form and arithmetic") {
    const Rational a(6, -8);
    CHECK(a.num() == -3);
    CHECK(a.den() == 4);
    CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
    CHECK(Rational(1, 3) - Rational(1, 2) == Rational(-1, 6));
    CHECK(Rational(2, 3) * Rational(9, 4) == Rational(3, 2));
    CHECK(Rational(2, 3) / Rational(4, 9) == Rational(3, 2));
    CHECK(Rational(7, 2).floor() == 3);
    CHECK(Rational(-7, 2).floor() == -4);
    CHECK(Rational(-7, 2).ceil() == -3);
    CHECK(Rational(5, 7).reciprocal() == Rational(7, 5));
    CHECK_THROWS(Rational(0).reciprocal());
    CHECK(Rational(1, 3).str() == "1/3");
    CHECK(Rational(4).str() == "4");
  }

  TEST_CASE("ordering") {
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK(Rational(-1, 2) < Rational(-1, 3));
    CHECK(max(Rational(1, 3), Rational(2, 5)) == Rational(2, 5));
    // Products of these numerators and denominators overflow 128 bits.
    const i128 big = i128{1} << 100;
    CHECK(compare_fractions(big - 1, big, big - 2, big - 1) == std::strong_ordering::greater);
    CHECK(compare_fractions(big, big + 1, big, big + 1) == std::strong_ordering::equal);
    CHECK(compare_fractions(-3, 4, 1, big) == std::strong_ordering::less);
  }

  TEST_CASE("overflow is detected") {
    const i128 big = i128{1} << 120;
    CHECK_THROWS_AS(checked_mul(big, 1 << 10), OverflowError);
    CHECK_THROWS_AS(Rational(big) * Rational(big), OverflowError);
  }

  TEST_CASE("powers of two") {
    CHECK(pow2(4) == Rational(16));
    CHECK(pow2(-3) == Rational(1, 8));
    int k = 0;
    CHECK(exact_log2(Rational(1, 65536), k));
    CHECK(k == -16);
    CHECK(exact_log2(Rational(8), k));
    CHECK(k == 3);
    CHECK_FALSE(exact_log2(Rational(3, 8), k));
    CHECK_FALSE(exact_log2(Rational(-4), k));
  }

  TEST_CASE("dyadic floor") {
    const Rational d = dyadic_floor(0.646240625L, 32);
    CHECK(d.den() <= (i128{1} << 32));
    CHECK(d.to_double() <= 0.646240625);
    CHECK(0.646240625 - d.to_double() < 1.0 / 4294967296.0);
    CHECK(dyadic_floor(0.5L) == Rational(1, 2));
  }

  TEST_CASE("property: field identities on random fractions") {
    Rng rng(7);
    for (int t = 0; t < 500; ++t) {
      const auto draw = [&] {
        const auto num = static_cast<i128>(rng.below(2001)) - 1000;
        const auto den = static_cast<i128>(rng.below(999)) + 1;
        return Rational(num, den);
      };
      const Rational a = draw(), b = draw(), c = draw();
      CHECK((a + b) + c == a + (b + c));
      CHECK(a * (b + c) == a * b + a * c);
      CHECK(a - a == Rational(0));
      if (!b.is_zero()) CHECK((a / b) * b == a);
      CHECK((a < b) == (compare_fractions(a.num(), a.den(), b.num(), b.den()) < 0));
    }
  }
}
