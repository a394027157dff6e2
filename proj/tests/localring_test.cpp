#include <gtest/gtest.h>

#include <random>

#include "iwahori/localring.hpp"
#include "oracles.hpp"

using namespace iwahori;

namespace {

RingContext make_ring(std::uint32_t p, std::uint32_t f, std::uint32_t e, std::uint32_t N) {
  return RingContext(std::make_shared<FieldContext>(p, f), e, N);
}

}  // namespace

TEST(LocalRing, TeichmullerBasics) {
  auto R = make_ring(3, 2, 2, 6);
  const auto& F = R.field();
  EXPECT_EQ(R.teichmuller_lift(F.zero()), R.zero());
  EXPECT_EQ(R.teichmuller_lift(F.one()), R.one());
  EXPECT_EQ(R.teichmuller_lift(F.neg(F.one())), -R.one());
  for (auto x : F.elements()) {
    const LocalInt t = R.teichmuller_lift(x);
    EXPECT_EQ(R.residue(t), x);
    LocalInt acc = R.one();
    for (std::uint32_t i = 0; i < F.q(); ++i) acc = acc * t;
    EXPECT_EQ(acc, t);
    for (auto y : F.elements()) EXPECT_EQ(R.teichmuller_lift(F.mul(x, y)), t * R.teichmuller_lift(y));
  }
}

TEST(LocalRing, TeichmullerMatchesBruteForceZ27) {
  auto R = make_ring(3, 1, 1, 3);
  const std::int64_t t = oracle::teichmuller_zp(2, 3, 3);
  ASSERT_EQ(t, 26);
  EXPECT_EQ(R.teichmuller_lift(R.field().from_int(2)), R.from_int(t));
  const auto d = R.digits(R.from_int(26));
  EXPECT_EQ(d, (std::vector<FqElem>{{2}, {0}, {0}}));  // 26 = [2] itself
  // as plain base-3 expansion 26 = 2 + 2*3 + 2*9, i.e. the Teichmuller digit vector of -1 is (2, 0, 0)
}

TEST(LocalRing, OnePlusOneCarries) {
  auto R = make_ring(3, 1, 1, 2);
  const auto& F = R.field();
  const LocalInt two = R.teichmuller_lift(F.one()) + R.teichmuller_lift(F.one());
  // in Z/9: 2 = 8 + 3 = [2] + [1]*3
  EXPECT_EQ(R.digits(two), (std::vector<FqElem>{{2}, {1}}));
}

TEST(LocalRing, TruncationAndValuation) {
  auto R = make_ring(5, 1, 2, 6);
  const auto& F = R.field();
  EXPECT_EQ(R.pi_power(5) * R.pi_power(1), R.zero());
  EXPECT_EQ(R.valuation(R.zero()), kInfiniteValuation);
  const LocalInt u = R.teichmuller_lift(F.from_int(3)) + R.pi_power(1);
  EXPECT_EQ(R.valuation(R.pi_power(2) * u), 2);
  EXPECT_EQ(R.valuation(u), 0);
  // pi^e = p for the default Eisenstein polynomial
  EXPECT_EQ(R.pi_power(2), R.from_int(5));
  const LocalInt x = R.from_digits({F.from_int(1), F.from_int(4), F.from_int(2)});
  EXPECT_EQ(R.truncate(x, 6), x);
  EXPECT_EQ(R.truncate(x, 0), R.zero());
  EXPECT_EQ(R.truncate(x, 1), R.teichmuller_lift(F.from_int(1)));
  EXPECT_EQ(R.truncate(R.truncate(x, 2), 1), R.truncate(x, 1));
  EXPECT_THROW(R.truncate(x, 7), std::out_of_range);
}

TEST(LocalRing, DigitRoundTripAndRingAxioms) {
  for (auto [p, f, e] : {std::tuple{3u, 2u, 1u}, {3u, 2u, 2u}, {5u, 1u, 2u}, {7u, 1u, 1u}, {3u, 1u, 3u}}) {
    auto R = make_ring(p, f, e, 7);
    const auto& F = R.field();
    std::mt19937 rng(p * 100 + f * 10 + e);
    std::uniform_int_distribution<std::uint32_t> el(0, F.q() - 1);
    auto random_int = [&] {
      std::vector<FqElem> d(7);
      for (auto& x : d) x = {el(rng)};
      return R.from_digits(d);
    };
    for (int i = 0; i < 200; ++i) {
      const LocalInt a = random_int(), b = random_int(), c = random_int();
      EXPECT_EQ(R.from_digits(R.digits(a)), a);
      EXPECT_EQ(a + R.zero(), a);
      EXPECT_EQ(a + b, b + a);
      EXPECT_EQ(a * b, b * a);
      EXPECT_EQ((a * b) * c, a * (b * c));
      EXPECT_EQ((a + b) + c, a + (b + c));
      EXPECT_EQ(a * (b + c), a * b + a * c);
      if (R.valuation(a) == 0) EXPECT_EQ(a * R.inverse_unit(a), R.one());
      if (R.valuation(a) >= 1 && R.valuation(a) != kInfiniteValuation) {
        const LocalInt q = R.divide_by_pi(a, 1);
        EXPECT_EQ(R.truncate(q * R.pi_power(1), 6), R.truncate(a, 6));
      }
    }
  }
}

TEST(LocalRing, ContextMismatch) {
  auto R1 = make_ring(3, 1, 1, 3);
  auto R2 = make_ring(3, 1, 1, 3);
  EXPECT_THROW(R1.add(R1.one(), R2.one()), ContextMismatch);
}

TEST(Carry, Examples) {
  auto R = make_ring(3, 1, 1, 3);
  const auto& F = R.field();
  EXPECT_EQ(R.carry_P0(F.one(), F.one()), F.one());
  for (auto x : F.elements()) {
    EXPECT_EQ(R.carry_P0(x, F.zero()), F.zero());
    EXPECT_EQ(R.carry_P0(x, F.neg(x)), F.zero());
  }
  auto low = make_ring(3, 1, 2, 2);
  EXPECT_THROW(low.carry_P0(F.one(), F.one()), PrecisionError);
}

TEST(Carry, DigitIdentityAndClosedForm) {
  for (auto [p, f, e] : {std::tuple{3u, 2u, 1u}, {3u, 2u, 2u}, {5u, 2u, 1u}, {7u, 1u, 1u}, {3u, 3u, 1u}}) {
    auto R = make_ring(p, f, e, e + 2);
    const auto& F = R.field();
    for (auto x : F.elements())
      for (auto y : F.elements()) {
        const auto d = R.digits(R.teichmuller_lift(x) + R.teichmuller_lift(y));
        EXPECT_EQ(d[0], F.add(x, y));
        for (std::uint32_t i = 1; i < e; ++i) EXPECT_EQ(d[i], F.zero());
        EXPECT_EQ(d[e], R.carry_P0(x, y));
        if (e == 1) EXPECT_EQ(R.carry_P0(x, y), carry_P0_unramified_closed_form(F, x, y));
      }
  }
}

TEST(LocalRing, GeneralEisenstein) {
  // X^2 + 3X - 3 over Z_3 (Eisenstein): pi^2 = 3 - 3 pi
  RingContext R(std::make_shared<FieldContext>(3, 1), 2, 6, {-3, 3});
  const LocalInt pi = R.pi_power(1);
  EXPECT_EQ(pi * pi, R.from_int(3) - R.from_int(3) * pi);
  EXPECT_EQ(R.valuation(R.from_int(3)), 2);
  EXPECT_EQ(R.divide_by_pi(R.from_int(3), 1) * pi, R.from_int(3));
  EXPECT_THROW(RingContext(std::make_shared<FieldContext>(3, 1), 2, 6, {-9, 3}), ConfigError);
}
