#include <gtest/gtest.h>

#include <random>

#include "iwahori/gf.hpp"
#include "oracles.hpp"

using namespace iwahori;

TEST(FieldContext, RejectsBadParameters) {
  EXPECT_THROW(FieldContext(2, 1), ConfigError);
  EXPECT_THROW(FieldContext(9, 1), ConfigError);
  EXPECT_THROW(FieldContext(3, 0), ConfigError);
  // y^2 + 1 is reducible over F_5 (2^2 = -1)
  EXPECT_THROW(FieldContext(5, 2, std::vector<std::uint32_t>{1, 0, 1}), ConfigError);
}

TEST(FieldContext, DefaultModuliAreIrreducibleAndPrimitive) {
  for (const auto& entry : detail::conway_table()) {
    if (ipow(entry.p, entry.f) > FieldContext::kMaxOrder) continue;
    FieldContext F(entry.p, entry.f);
    const FqElem y = F.generator();
    // the root of a Conway polynomial generates the multiplicative group
    FqElem acc = F.one();
    std::uint32_t order = 0;
    do {
      acc = F.mul(acc, y);
      ++order;
    } while (acc != F.one());
    EXPECT_EQ(order, F.q() - 1) << entry.p << "^" << entry.f;
  }
}

TEST(FieldContext, FieldAxiomsExhaustiveF9) {
  FieldContext F(3, 2);
  ASSERT_EQ(F.modulus(), (std::vector<std::uint32_t>{2, 2, 1}));
  for (auto x : F.elements()) {
    EXPECT_EQ(F.mul(x, F.one()), x);
    EXPECT_EQ(F.add(x, F.neg(x)), F.zero());
    EXPECT_EQ(F.pow(x, F.q()), x);
    if (!x.is_zero()) {
      EXPECT_EQ(F.pow(x, F.q() - 1), F.one());
      EXPECT_EQ(F.mul(x, F.inv(x)), F.one());
    }
    for (auto y : F.elements()) {
      EXPECT_EQ(F.mul(x, y), F.mul(y, x));
      for (auto z : F.elements()) EXPECT_EQ(F.mul(x, F.add(y, z)), F.add(F.mul(x, y), F.mul(x, z)));
    }
  }
  EXPECT_THROW(F.div(F.one(), F.zero()), std::domain_error);
  EXPECT_EQ(F.pow(F.zero(), 0), F.one());
  EXPECT_EQ(F.pow(F.zero(), 3), F.zero());
}

TEST(FieldContext, GeneratorToFourthIsOrderTwoElement) {
  FieldContext F(3, 2);
  // enumerate the multiplicative group for the unique element of order 2
  std::vector<FqElem> order_two;
  for (auto x : F.elements())
    if (!x.is_zero() && x != F.one() && F.mul(x, x) == F.one()) order_two.push_back(x);
  ASSERT_EQ(order_two.size(), 1u);
  EXPECT_EQ(F.pow(F.generator(), 4), order_two[0]);
}

TEST(FieldContext, Frobenius) {
  FieldContext F(3, 2);
  const FqElem t = F.generator();
  EXPECT_EQ(F.frobenius(t, 1), F.mul(F.mul(t, t), t));
  for (auto x : F.elements()) {
    EXPECT_EQ(F.frobenius(x, 0), x);
    EXPECT_EQ(F.frobenius(x, 2), x);
    EXPECT_EQ(F.frobenius(F.frobenius(x, 1), 1), x);
  }
  FieldContext F125(5, 3);
  for (auto x : F125.elements()) {
    FqElem y = x;
    for (int i = 0; i < 3; ++i) y = F125.frobenius(y, 1);
    EXPECT_EQ(y, x);
  }
}

TEST(FieldContext, PowerAddsExponents) {
  FieldContext F(7, 2);
  std::mt19937 rng(7);
  std::uniform_int_distribution<std::uint32_t> elem(1, F.q() - 1);
  std::uniform_int_distribution<std::int64_t> ex(0, 500);
  for (int i = 0; i < 500; ++i) {
    const FqElem x{elem(rng)};
    const auto a = ex(rng), b = ex(rng);
    EXPECT_EQ(F.pow(x, a + b), F.mul(F.pow(x, a), F.pow(x, b)));
  }
}

TEST(Digits, BaseConversion) {
  EXPECT_TRUE(digits_base_p(0, 3).digits.empty());
  EXPECT_EQ(digits_base_p(7, 3).digits, (std::vector<std::uint32_t>{1, 2}));
  // q - 1 - r with q = 9, r = 4
  EXPECT_EQ(digits_base_p(9 - 1 - 4, 3).digits, (std::vector<std::uint32_t>{1, 1}));
  for (std::uint64_t k = 0; k < 2000; ++k) {
    auto d = digits_base_p(k, 7);
    std::uint64_t v = 0;
    for (std::size_t i = d.digits.size(); i-- > 0;) v = v * 7 + d.digits[i];
    EXPECT_EQ(v, k);
  }
}

TEST(Lucas, Examples) {
  EXPECT_EQ(lucas_binom(5, 5, 3), 1u);
  EXPECT_EQ(lucas_binom(5, 2, 3), 1u);
  EXPECT_EQ(lucas_binom(7, 5, 3), 0u);
  EXPECT_EQ(lucas_binom(2, 5, 3), 0u);
}

TEST(Lucas, MatchesPascalP5) {
  const std::uint32_t p = 5, n_max = 624;
  const auto pascal = oracle::pascal_mod(n_max, p);
  for (std::uint32_t n = 0; n <= n_max; ++n)
    for (std::uint32_t r = 0; r <= n; ++r) ASSERT_EQ(lucas_binom(n, r, p), pascal[n][r]) << n << " " << r;
}
