#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "mwalk/objfun.hpp"
#include "mwalk/quantize.hpp"

using namespace mwalk;

// ln C(n, k) by summing logs, independent of lgamma.
static double ln_binomial_naive(std::uint64_t n, std::uint64_t k) {
  double s = 0.0;
  for (std::uint64_t i = 1; i <= k; ++i)
    s += std::log(static_cast<double>(n - k + i)) - std::log(static_cast<double>(i));
  return s;
}

TEST(Quantize, SignifExample) {
  EXPECT_EQ(quantize(1234.5789 - 0.0004999, 9), 1234.5784);
}

TEST(Quantize, TableValue) { EXPECT_EQ(quantize(-78544.95288, 9), -78544.9529); }

TEST(Quantize, ZeroIsFixed) {
  EXPECT_EQ(quantize(0.0, 9), 0.0);
  EXPECT_EQ(quantize(0.0, 1), 0.0);
}

TEST(Quantize, HalfAwayFromZero) {
  EXPECT_EQ(quantize(2.5, 1), 3.0);
  EXPECT_EQ(quantize(-2.5, 1), -3.0);
  EXPECT_EQ(quantize(0.125, 2), 0.13);
  EXPECT_EQ(quantize(1.5, 1), 2.0);
  // 0.15 is stored slightly below 0.15, so it goes down
  EXPECT_EQ(quantize(0.15, 1), 0.1);
}

TEST(Quantize, CarryAddsDigit) {
  EXPECT_EQ(quantize(9.96, 2), 10.0);
  EXPECT_EQ(quantize(-999.95, 4), -1000.0);
}

TEST(Quantize, NonFinitePassThrough) {
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(quantize(inf, 9), inf);
  EXPECT_EQ(quantize(-inf, 9), -inf);
  EXPECT_TRUE(std::isnan(quantize(std::nan(""), 9)));
}

TEST(Quantize, RejectsZeroDigits) { EXPECT_THROW(quantize(1.0, 0), std::invalid_argument); }

TEST(Quantize, IdempotentAndOdd) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> mant(-10.0, 10.0);
  std::uniform_int_distribution<int> ex(-30, 30);
  std::uniform_int_distribution<int> dig(1, 16);
  for (int t = 0; t < 20000; ++t) {
    const double v = mant(gen) * std::pow(10.0, ex(gen));
    const int d = dig(gen);
    const double q = quantize(v, d);
    ASSERT_EQ(quantize(q, d), q) << v << " d=" << d;
    ASSERT_EQ(quantize(-v, d), -q) << v << " d=" << d;
  }
}

// The fast paths must agree with rounding the full decimal expansion.
TEST(Quantize, MatchesFullExpansion) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> mant(1.0, 10.0);
  std::uniform_int_distribution<int> ex(-40, 40), dig(1, 16), small(0, 99999);
  for (int t = 0; t < 20000; ++t) {
    const int d = dig(gen);
    const auto du = static_cast<std::size_t>(d);
    const double v = mant(gen) * std::pow(10.0, ex(gen));
    ASSERT_EQ(quantize(v, d), detail::quantize_exact(v, du)) << v << " d=" << d;
    // short decimals and their midpoints, where ties and carries live
    const double s = small(gen) * std::pow(10.0, ex(gen) / 4);
    if (s > 0.0) {
      ASSERT_EQ(quantize(s, d), detail::quantize_exact(s, du)) << s << " d=" << d;
      const double mid = (small(gen) * 10 + 5) * std::pow(10.0, ex(gen) / 4);
      ASSERT_EQ(quantize(mid, d), detail::quantize_exact(mid, du)) << mid << " d=" << d;
    }
    const double q = quantize(v, d);
    ASSERT_EQ(quantize(std::nextafter(q, 0.0), d), detail::quantize_exact(std::nextafter(q, 0.0), du));
  }
  for (double x : {0.125, 2.5, 0.5, 1.5, 9.5, 0.15, 1e-310, 4.9e-324, 1.7976931348623157e308})
    for (int d = 1; d <= 16; ++d)
      EXPECT_EQ(quantize(x, d), detail::quantize_exact(x, static_cast<std::size_t>(d))) << x << " d=" << d;
}

TEST(Evaluate, CountsProbes) {
  const auto spec = make_objective("wild1");
  EvalCounter c;
  const std::vector<double> x{0.0};
  EXPECT_EQ(evaluate(spec, x, c), 80.0);
  EXPECT_EQ(c.probes, 1u);
  for (int i = 0; i < 9; ++i) evaluate(spec, x, c);
  EXPECT_EQ(c.probes, 10u);
}

TEST(Evaluate, OutOfBoxStillEvaluated) {
  const auto spec = make_objective("wild1");
  EvalCounter c;
  const std::vector<double> x{75.0};
  EXPECT_TRUE(std::isfinite(evaluate(spec, x, c)));
  EXPECT_EQ(c.probes, 1u);
}

TEST(Wild, SeparableMean) {
  const double t = -15.8151511240006;
  const auto w1 = make_objective("wild1");
  const auto w3 = make_objective("wild3");
  const std::vector<double> x1{t}, x3{t, t, t};
  EXPECT_NEAR(w3.fn(x3), w1.fn(x1), 1e-12);
  const std::vector<double> mix{1.5, -7.25, 30.0};
  const double mean = (wild_term(1.5) + wild_term(-7.25) + wild_term(30.0)) / 3.0;
  EXPECT_NEAR(w3.fn(mix), mean, 1e-12);
}

TEST(Trefethen, Origin) {
  const double expected = 1.0 + std::sin(60.0);
  const std::vector<double> z1{0.0}, z2{0.0, 0.0};
  EXPECT_NEAR(make_objective("trefethen2").fn(z2), expected, 1e-15);
  EXPECT_NEAR(make_objective("trefethen1").fn(z1), expected, 1e-15);
  EXPECT_NEAR(expected, 0.695189, 5e-7);
}

TEST(Trefethen, ChainedThreeDims) {
  const std::vector<double> x{0.1, -0.2, 0.3};
  EXPECT_DOUBLE_EQ(trefethen(x), trefethen_g(0.1, -0.2) + trefethen_g(-0.2, 0.3));
}

TEST(Ehrenfest, Examples) {
  EXPECT_EQ(ehrenfest_surrogate(1.0, 4), 0.0);
  EXPECT_NEAR(ehrenfest_surrogate(9.0, 4), -1.01 * std::log(12870.0), 1e-12);
  EXPECT_NEAR(ehrenfest_surrogate(9.0, 4), -9.557281, 5e-7);
}

TEST(Ehrenfest, Staircase) {
  for (double x : {8.5, 8.6, 9.0, 9.4, 9.49})
    EXPECT_EQ(ehrenfest_surrogate(x, 4), ehrenfest_surrogate(9.0, 4)) << x;
  EXPECT_NE(ehrenfest_surrogate(9.5, 4), ehrenfest_surrogate(9.0, 4));
}

TEST(Ehrenfest, ClampsOutsideBox) {
  EXPECT_EQ(ehrenfest_surrogate(-3.0, 4), ehrenfest_surrogate(1.0, 4));
  EXPECT_EQ(ehrenfest_surrogate(40.0, 4), ehrenfest_surrogate(17.0, 4));
}

TEST(Ehrenfest, SymmetricAndCentered) {
  for (int n = 1; n <= 16; ++n) {
    const std::uint64_t s = (std::uint64_t{1} << n) + 1;
    double best = std::numeric_limits<double>::infinity();
    std::uint64_t arg = 0;
    for (std::uint64_t x = 1; x <= s; ++x) {
      const double f = ehrenfest_surrogate(static_cast<double>(x), n);
      ASSERT_EQ(f, ehrenfest_surrogate(static_cast<double>(s + 1 - x), n)) << n << " " << x;
      if (f < best) {
        best = f;
        arg = x;
      }
    }
    EXPECT_EQ(arg, (std::uint64_t{1} << (n - 1)) + 1) << "n=" << n;
  }
}

TEST(Ehrenfest, MatchesNaiveBinomial) {
  for (std::uint64_t k = 0; k <= 16; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    EXPECT_NEAR(ehrenfest_surrogate(static_cast<double>(k + 1), 4),
                -ln_binomial_naive(16, k) * (1.0 + 0.01 * sign), 1e-11);
  }
}

TEST(Registry, NamesAndBounds) {
  ASSERT_EQ(objective_names().size(), 8u);
  for (const auto& name : objective_names()) {
    const auto spec = make_objective(name);
    EXPECT_EQ(spec.name, name);
    ASSERT_EQ(spec.lower.size(), spec.dim);
    for (std::size_t k = 0; k < spec.dim; ++k) EXPECT_LT(spec.lower[k], spec.upper[k]);
    EXPECT_FALSE(spec.has_target());
    EXPECT_EQ(spec.digits_target, 9);
    EXPECT_EQ(spec.of_tol, 5e-4);
  }
  EXPECT_EQ(make_objective("ehrenfest15").upper[0], 32769.0);
  EXPECT_EQ(make_objective("wild2").lower, (Point{-50.0, -50.0}));
  EXPECT_EQ(make_objective("trefethen3").upper, (Point{1.0, 1.0, 1.0}));
}

TEST(Registry, Rejections) {
  EXPECT_THROW(make_objective("rosenbrock"), config_error);
  EXPECT_THROW(make_ehrenfest(61), config_error);
  EXPECT_THROW(make_ehrenfest(0), config_error);
  EXPECT_NO_THROW(make_ehrenfest(60));
}

TEST(Target, StoredQuantized) {
  const auto spec = with_target(make_objective("wild1"), 67.4677347415863, 9);
  ASSERT_TRUE(spec.has_target());
  EXPECT_EQ(*spec.value_target, 67.4677347);
  EXPECT_EQ(quantize(*spec.value_target, 9), *spec.value_target);
  EXPECT_THROW(with_target(make_objective("wild1"), 1.0, 0), config_error);
}
