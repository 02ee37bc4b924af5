#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "osi/index_core.hpp"

using namespace osi;

namespace {

double gamma_gini(double a) { return std::exp(std::lgamma(a + 0.5) - std::lgamma(a + 1)) / std::sqrt(std::numbers::pi); }

} // namespace

TEST(IndexCore, GiniClosedForms) {
  const auto g = gini();
  EXPECT_NEAR(index_via_quantile_integral(Distribution::exponential(1), g).value, 0.5, 1e-9);
  EXPECT_NEAR(index_via_quantile_integral(Distribution::uniform(0, 1), g).value, 1.0 / 3, 1e-9);
  EXPECT_NEAR(index_via_quantile_integral(Distribution::gamma(2, 1), g).value, 0.375, 1e-9);
  EXPECT_NEAR(index_via_quantile_integral(Distribution::gamma(5, 1), g).value, gamma_gini(5), 1e-9);
  EXPECT_NEAR(index_via_quantile_integral(Distribution::gamma(0.5, 2), g).value, gamma_gini(0.5), 1e-9);
  EXPECT_NEAR(index_via_quantile_integral(Distribution::lognormal(0.3, 1), g).value, std::erf(0.5), 1e-9);
  EXPECT_NEAR(index_via_quantile_integral(Distribution::weibull(1.6, 2), g).value, 1 - std::pow(2, -1 / 1.6), 1e-9);
  EXPECT_NEAR(index_via_quantile_integral(Distribution::lomax(3, 1), g).value, 3.0 / 5, 1e-9);
  EXPECT_NEAR(index_via_quantile_integral(Distribution::uniform(1, 3), g).value, 1.0 / 6, 1e-9);
}

TEST(IndexCore, UpperGiniOnExponential) {
  // (E X_{3:3} - mu) / (3 mu) = (11/6 - 1) / 3
  const auto w = extended_lower_upper(3, 2, GiniSide::upper);
  const auto d = Distribution::exponential(1);
  EXPECT_NEAR(index_via_order_stat_means(d, w, OrderStatMethod::closed).value, 5.0 / 18, 1e-14);
  EXPECT_NEAR(index_via_lorenz(d, w).value, 5.0 / 18, 1e-8);
}

TEST(IndexCore, RoutesAgree) {
  const std::vector<Distribution> ds = {Distribution::gamma(2, 1), Distribution::lognormal(0, 0.7),
                                        Distribution::weibull(1.6, 1), Distribution::lomax(4, 2)};
  const std::vector<WeightScheme> ws = {mth_gini(4), s_gini_orderstat(4, 2), s_gini_table1(3, 2.5),
                                        custom({-0.5, -0.25, 0.25, 0.5}, true)};
  for (const auto& d : ds)
    for (const auto& w : ws) {
      const double q = index_via_quantile_integral(d, w).value;
      EXPECT_NEAR(index_via_order_stat_means(d, w, OrderStatMethod::quadrature).value, q, 1e-8) << d.spec() << w.name();
      EXPECT_NEAR(index_via_max_representation(d, w, OrderStatMethod::quadrature).value, q, 1e-8)
          << d.spec() << w.name();
      EXPECT_NEAR(index_via_lorenz(d, w).value, q, 1e-8) << d.spec() << w.name();
    }
}

TEST(IndexCore, CovarianceWithinThreeStandardErrors) {
  for (const auto& w : {gini(), s_gini_table1(3, 2.0)}) {
    const auto d = Distribution::lognormal(0, 1);
    const double q = index_via_quantile_integral(d, w).value;
    const auto cv = index_via_covariance_mc(d, w, 400000, 17);
    EXPECT_NEAR(cv.value, q, 3 * cv.uncertainty) << w.name();
    EXPECT_GT(cv.uncertainty, 0.0);
  }
  EXPECT_THROW(index_via_covariance_mc(Distribution::gamma(2, 1), gini(), 999, 1), domain_error);
}

TEST(IndexCore, CovarianceIsReproducible) {
  const auto d = Distribution::gamma(2, 1);
  EXPECT_EQ(index_via_covariance_mc(d, mth_gini(3), 20000, 3).value,
            index_via_covariance_mc(d, mth_gini(3), 20000, 3).value);
}

TEST(IndexCore, LorenzCurveAndD) {
  const auto e = Distribution::exponential(1);
  for (double p : {0.1, 0.5, 0.9}) {
    EXPECT_NEAR(lorenz_curve(e, p), p + (1 - p) * std::log(1 - p), 1e-14);
    EXPECT_NEAR(lorenz_curve_numeric(e, p), lorenz_curve(e, p), 1e-10);
  }
  const auto ln = Distribution::lognormal(0, 1);
  EXPECT_NEAR(lorenz_curve(ln, 0.5), 0.5 * std::erfc(1 / std::sqrt(2.0)), 1e-14);
  for (const auto& d : {e, ln, Distribution::gamma(2, 1), Distribution::lomax(3, 1)}) {
    EXPECT_NEAR(lorenz_D(d, 1).value, index_via_quantile_integral(d, gini()).value, 1e-9) << d.spec();
    EXPECT_NEAR(lorenz_D(d, 3, LorenzMethod::nested_quadrature).value, lorenz_D(d, 3).value, 1e-8) << d.spec();
  }
  EXPECT_THROW(lorenz_D(e, 0), domain_error);
  EXPECT_THROW(index_via_lorenz(Distribution::degenerate(1), gini()), unsupported_method);
}

TEST(IndexCore, VanishesUnderEquality) {
  const auto d = Distribution::degenerate(4);
  for (const auto& w : {gini(), mth_gini(5), s_gini_orderstat(4, 3)}) {
    EXPECT_NEAR(index_via_order_stat_means(d, w, OrderStatMethod::closed).value, 0.0, 1e-15);
    EXPECT_NEAR(index_via_max_representation(d, w, OrderStatMethod::closed).value, 0.0, 1e-14);
    EXPECT_EQ(index_via_covariance_mc(d, w, 1000, 1).value, 0.0);
  }
  EXPECT_THROW(index_via_quantile_integral(d, gini()), unsupported_method);
}

TEST(IndexCore, BoundsForNondecreasingWeights) {
  // 0 <= I_m <= a_m under nondecreasing zero-sum weights
  for (const auto& w : {gini(), mth_gini(4), s_gini_orderstat(5, 2)})
    for (const auto& d : {Distribution::lomax(1.2, 1), Distribution::lognormal(0, 2.5), Distribution::uniform(5, 6)}) {
      const double v = index_via_quantile_integral(d, w).value;
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, w.a(w.m()) + 1e-9);
    }
}

TEST(IndexCore, ScaleAndShift) {
  for (const auto& d : {Distribution::gamma(2, 1), Distribution::lognormal(0, 1), Distribution::degenerate(2)})
    for (const auto& w : {gini(), s_gini_table1(4, 2.0)}) {
      const auto t = transform_checks(d, w, 2.5);
      EXPECT_TRUE(t.scale_ok) << d.spec() << w.name();
      EXPECT_TRUE(t.shift_ok) << d.spec() << w.name();
      EXPECT_NEAR(t.scaled, t.base, 1e-8);
    }
  // zero-sum weights shrink by mu / (mu + c)
  const auto t = transform_checks(Distribution::exponential(1), gini(), 1.0);
  EXPECT_NEAR(t.shifted, 0.25, 1e-9);
  EXPECT_THROW(transform_checks(Distribution::exponential(1), gini(), -1.0), domain_error);
}

TEST(IndexCore, SpectralWeightIntegratesToSum) {
  const auto w = s_gini_table1(4, 3.0);
  auto r = integrate([&](double u) { return spectral_weight(w, u, 1 - u); }, 0.0, 1.0);
  EXPECT_NEAR(r.value, w.sum() / w.m(), 1e-12);
}
