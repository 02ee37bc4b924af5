#include <cmath>

#include <gtest/gtest.h>

#include "osi/index_core.hpp"
#include "osi/weights.hpp"

using namespace osi;

TEST(Weights, Gini) {
  const auto w = gini();
  EXPECT_EQ(w.m(), 2);
  EXPECT_EQ(w.a(), (std::vector<double>{-1, 1}));
  EXPECT_TRUE(w.zero_sum());
  EXPECT_EQ(w.name(), "gini");
}

TEST(Weights, MthAndExtended) {
  EXPECT_EQ(mth_gini(4).a(), (std::vector<double>{-1, 0, 0, 1}));
  EXPECT_EQ(mth_gini(4).name(), "mth:4");
  EXPECT_EQ(extended_mth_gini(5, 2, 4).a(), (std::vector<double>{0, -1, 0, 1, 0}));
  EXPECT_THROW(mth_gini(1), domain_error);
  EXPECT_THROW(extended_mth_gini(4, 3, 3), domain_error);
  EXPECT_THROW(extended_mth_gini(4, 1, 5), domain_error);
  EXPECT_THROW(extended_mth_gini(4, 0, 2), domain_error);
}

TEST(Weights, LowerUpper) {
  const auto lo = extended_lower_upper(3, 2, GiniSide::lower);
  EXPECT_NEAR(lo.a(1), 1.0 / 3 - 1, 1e-15);
  EXPECT_NEAR(lo.a(3), 1.0 / 3, 1e-15);
  EXPECT_FALSE(lo.zero_sum());
  EXPECT_NEAR(lo.sum(), 0.0, 1e-15);
  const auto up = extended_lower_upper(3, 1, GiniSide::upper);
  EXPECT_NEAR(up.a(3), 2.0 / 3, 1e-15);
  EXPECT_EQ(up.name(), "upper:3,1");
  EXPECT_THROW(extended_lower_upper(3, 4, GiniSide::upper), domain_error);
}

TEST(Weights, SGiniTabulatedFormSumsToMTimesNuMinusOne) {
  const auto w = s_gini_table1(3, 2.0);
  EXPECT_NEAR(w.a(1), 0.5, 1e-14);
  EXPECT_NEAR(w.a(2), 1.0, 1e-14);
  EXPECT_NEAR(w.a(3), 1.5, 1e-14);
  EXPECT_EQ(w.tag(), "table1-verbatim");
  EXPECT_FALSE(w.zero_sum());
  for (int m : {2, 4, 7})
    for (double nu : {1.5, 2.0, 3.7}) EXPECT_NEAR(s_gini_table1(m, nu).sum(), m * (nu - 1), 1e-12);
  EXPECT_THROW(s_gini_table1(3, 1.0), domain_error);
}

TEST(Weights, SGiniOrderStatIsZeroSumAndHitsMinimumForm) {
  for (int m = 2; m <= 8; ++m)
    for (int nu = 2; nu <= m; ++nu) {
      const auto w = s_gini_orderstat(m, nu);
      EXPECT_NEAR(w.sum(), 0.0, 1e-12);
      EXPECT_TRUE(w.nondecreasing());
    }
  // Exp(1): E X_{1:nu} = 1/nu, so the index is 1 - 1/nu.
  const auto d = Distribution::exponential(1);
  EXPECT_NEAR(index_via_order_stat_means(d, s_gini_orderstat(5, 3), OrderStatMethod::closed).value, 2.0 / 3, 1e-12);
  EXPECT_THROW(s_gini_orderstat(4, 5), domain_error);
  EXPECT_THROW(s_gini_orderstat(4, 1), domain_error);
}

TEST(Weights, CustomValidation) {
  EXPECT_NO_THROW(custom({-1, 0.5, 0.5}, true));
  EXPECT_THROW(custom({-1, 0.5, 0.6}, true), validation_error);
  EXPECT_NO_THROW(custom({-1, 0.5, 0.6}, false));
  EXPECT_THROW(custom({1.0}, false), validation_error);
  EXPECT_THROW(custom({1.0, NAN}, false), validation_error);
  EXPECT_EQ(custom({-1, 1}, true).name(), "custom:-1,1");
}

TEST(Weights, MaxRepCoefficients) {
  EXPECT_EQ(max_rep_coefficients(gini()).c, (std::vector<double>{-2, 2}));
  // c_r must reproduce sum_k a_k E X_{k:m} for any law; check on Exp(1).
  const auto d = Distribution::exponential(1);
  for (const auto& w : {mth_gini(4), extended_mth_gini(5, 2, 4), s_gini_orderstat(6, 3)}) {
    const auto c = max_rep_coefficients(w);
    double lhs = 0, rhs = 0;
    for (int k = 1; k <= w.m(); ++k) lhs += w.a(k) * order_stat_mean(d, k, w.m(), OrderStatMethod::closed).value;
    for (int r = 1; r <= w.m(); ++r) rhs += c.c[r - 1] * order_stat_mean(d, r, r, OrderStatMethod::closed).value;
    EXPECT_NEAR(lhs, rhs, 1e-10) << w.name();
  }
}
