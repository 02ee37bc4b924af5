#include <sstream>

#include <gtest/gtest.h>

#include "osi/parse.hpp"

using namespace osi;

namespace {

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

} // namespace

TEST(Parse, Distributions) {
  EXPECT_EQ(parse_distribution("gamma:2,1"), Distribution::gamma(2, 1));
  EXPECT_EQ(parse_distribution(" lognormal:-0.5, 1 "), Distribution::lognormal(-0.5, 1));
  EXPECT_EQ(parse_distribution("exponential:3"), Distribution::exponential(3));
  EXPECT_EQ(parse_distribution("degenerate:2"), Distribution::degenerate(2));
  EXPECT_EQ(parse_distribution("uniform:0,1e0"), Distribution::uniform(0, 1));
}

TEST(Parse, DistributionErrorsNameTheToken) {
  EXPECT_NE(message_of([] { parse_distribution("gama:2,1"); }).find("'gama'"), std::string::npos);
  EXPECT_NE(message_of([] { parse_distribution("gamma:2,x1"); }).find("'x1'"), std::string::npos);
  EXPECT_NE(message_of([] { parse_distribution("gamma:2"); }).find("'gamma'"), std::string::npos);
  EXPECT_THROW(parse_distribution("gamma"), validation_error);
  EXPECT_THROW(parse_distribution("lomax:1,1"), domain_error);
  EXPECT_THROW(parse_distribution("gamma:inf,1"), validation_error);
}

TEST(Parse, Weights) {
  EXPECT_EQ(parse_weights("gini").a(), gini().a());
  EXPECT_EQ(parse_weights("mth:4").a(), mth_gini(4).a());
  EXPECT_EQ(parse_weights("ext:5,2,4").a(), extended_mth_gini(5, 2, 4).a());
  EXPECT_EQ(parse_weights("sgini:3,2").a(), s_gini_table1(3, 2).a());
  EXPECT_EQ(parse_weights("sginios:5,3").a(), s_gini_orderstat(5, 3).a());
  EXPECT_EQ(parse_weights("lower:3,1").a(), extended_lower_upper(3, 1, GiniSide::lower).a());
  EXPECT_EQ(parse_weights("upper:3,2").a(), extended_lower_upper(3, 2, GiniSide::upper).a());
  EXPECT_TRUE(parse_weights("custom:-1,0,1").zero_sum());
  EXPECT_FALSE(parse_weights("custom:1,2").zero_sum());
  EXPECT_NE(message_of([] { parse_weights("mth:x"); }).find("'x'"), std::string::npos);
  EXPECT_NE(message_of([] { parse_weights("wat:3"); }).find("'wat'"), std::string::npos);
  EXPECT_THROW(parse_weights("ext:5,2"), validation_error);
  EXPECT_THROW(parse_weights("mth:2.5"), validation_error);
}

TEST(Parse, Config) {
  std::istringstream in(R"(# campaign
distributions = ["gamma:2,1", "lomax:3,1"]   # two populations
n_values = [10,
            20]
scheme = "mth:3"
r_mc = 100
b_combs = 50
r_true = 1000
estimator_method = "subsample"
benchmark = "mc"
master_seed = 18446744073709551615
)");
  const auto cfg = parse_config(in);
  ASSERT_EQ(cfg.distributions.size(), 2u);
  EXPECT_EQ(cfg.distributions[1], Distribution::lomax(3, 1));
  EXPECT_EQ(cfg.n_values, (std::vector<int>{10, 20}));
  EXPECT_EQ(cfg.scheme.name(), "mth:3");
  EXPECT_EQ(cfg.r_mc, 100u);
  EXPECT_EQ(cfg.b_combs, 50u);
  EXPECT_EQ(cfg.estimator_method, EstimatorMethod::subsample);
  EXPECT_EQ(cfg.benchmark, Benchmark::mc);
  EXPECT_EQ(cfg.master_seed, 18446744073709551615ull);
}

TEST(Parse, ConfigErrors) {
  auto parse = [](const std::string& text) {
    return message_of([&] {
      std::istringstream in(text);
      parse_config(in);
    });
  };
  EXPECT_NE(parse("distributions=[\"gamma:2,1\"]\nn_values=[10]\nspeed = 3\n").find("'speed'"), std::string::npos);
  EXPECT_NE(parse("n_values=[10]\n").find("'distributions'"), std::string::npos);
  EXPECT_NE(parse("distributions=[\"gamma:2,1\"]\ndistributions=[\"gamma:2,1\"]\n").find("duplicate"),
            std::string::npos);
  EXPECT_NE(parse("distributions=[\"gamma:2,1\"]\nn_values=[10]\nr_mc=0\n").find("r_mc"), std::string::npos);
  EXPECT_NE(parse("distributions=[\"gamma:2,1\"]\nn_values=[1]\n").find("n=1"), std::string::npos);
  EXPECT_FALSE(parse("garbage line\n").empty());
}

TEST(Parse, CsvColumn) {
  std::istringstream in("id,\"income, net\",x\r\n1,10.5,a\n\n2,\"3\",b\n");
  EXPECT_EQ(read_csv_column(in, "income, net"), (std::vector<double>{10.5, 3}));
}

TEST(Parse, CsvErrorsCarryLineNumbers) {
  auto read = [](const std::string& text, const std::string& col) {
    return message_of([&] {
      std::istringstream in(text);
      read_csv_column(in, col);
    });
  };
  EXPECT_NE(read("income\n1\nabc\n", "income").find("line 3"), std::string::npos);
  EXPECT_NE(read("income\n1\n-2\n", "income").find("line 3"), std::string::npos);
  EXPECT_NE(read("income\n1\n\n", "wage").find("'wage'"), std::string::npos);
  EXPECT_NE(read("a,income\n1\n", "income").find("line 2"), std::string::npos);
  EXPECT_FALSE(read("income\n", "income").empty());
}
