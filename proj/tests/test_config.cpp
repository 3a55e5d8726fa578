#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "helmfem/config.hpp"

using namespace helmfem;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST(Config, ParsesNamespacedKeysAndComments) {
  const Config c = Config::parse_string(
      "# sweep\n"
      "exp.k = 50   # trailing comment\n"
      "\n"
      "mesh.obstacle = two_flat_mirrors\n"
      "pml.theta = pi/4\n"
      "filter.window = yes\n"
      "exp.k_list = 10:5:20\n");
  EXPECT_EQ(c.get_double("exp.k", 0), 50.0);
  EXPECT_EQ(c.get_int("exp.k", 0), 50);
  EXPECT_EQ(c.get_string("mesh.obstacle", ""), "two_flat_mirrors");
  EXPECT_NEAR(c.get_double("pml.theta", 0), pi / 4, 1e-15);
  EXPECT_TRUE(c.get_bool("filter.window", false));
  EXPECT_EQ(c.get_list("exp.k_list", {}), (std::vector<double>{10, 15, 20}));
  EXPECT_EQ(c.get_double("dtn.n_max", 7.0), 7.0);
  EXPECT_FALSE(c.has("dtn.n_max"));
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(Config::parse_string("k = 5\n"), ConfigError);
  EXPECT_THROW(Config::parse_string("exp.k 5\n"), ConfigError);
  EXPECT_THROW(Config::parse_string("exp. = 5\n"), ConfigError);
  EXPECT_THROW(Config::parse_file("/nonexistent/config.txt"), ConfigError);
  const Config c = Config::parse_string("exp.p = 2.5\nexp.flag = maybe\nexp.k = abc\n");
  EXPECT_THROW(c.get_int("exp.p", 0), ConfigError);
  EXPECT_THROW(c.get_bool("exp.flag", false), ConfigError);
  EXPECT_THROW(c.get_double("exp.k", 0), ConfigError);
}

TEST(Config, TextRoundTrip) {
  Config c;
  c.set("exp.k", "25");
  c.set("mesh.h1", "1.78*k^-1");
  c.set("filter.alpha", "2");
  const Config back = Config::parse_string(c.to_text());
  EXPECT_EQ(back.values(), c.values());
  EXPECT_THROW(c.set("alpha", "2"), ConfigError);
}

TEST(ParseNumber, PiExpressions) {
  EXPECT_EQ(parse_number("0.5"), 0.5);
  EXPECT_NEAR(parse_number("pi/2"), pi / 2, 1e-15);
  EXPECT_NEAR(parse_number("2*pi/200"), 2 * pi / 200, 1e-16);
  EXPECT_NEAR(parse_number("pi"), pi, 1e-15);
  EXPECT_NEAR(parse_number(" -1e-3 "), -1e-3, 1e-18);
  EXPECT_THROW(parse_number(""), ConfigError);
  EXPECT_THROW(parse_number("2x"), ConfigError);
}

TEST(ParseList, RangesAndCommaLists) {
  const auto r = parse_list("5:5:60");
  ASSERT_EQ(r.size(), 12u);
  EXPECT_EQ(r.front(), 5.0);
  EXPECT_EQ(r.back(), 60.0);
  EXPECT_EQ(parse_list("10, 15,40"), (std::vector<double>{10, 15, 40}));
  EXPECT_THROW(parse_list("1:0:5"), ConfigError);
  EXPECT_THROW(parse_list(""), ConfigError);
}

TEST(PowerRule, ParseEvaluateAndPrint) {
  const PowerRule a = parse_power_rule("1.78*k^-1");
  EXPECT_EQ(a.c, 1.78);
  EXPECT_EQ(a.e, -1.0);
  EXPECT_NEAR(a(50.0), 1.78 / 50, 1e-17);
  const PowerRule b = parse_power_rule("1,-1.5");
  EXPECT_NEAR(b(20.0), std::pow(20.0, -1.5), 1e-16);
  const PowerRule c = parse_power_rule(a.to_string());
  EXPECT_EQ(c.c, a.c);
  EXPECT_EQ(c.e, a.e);
  EXPECT_THROW(parse_power_rule("1.78*k^2"), ConfigError);
  EXPECT_THROW(parse_power_rule("1.78"), ConfigError);
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(50.0), "50");
  EXPECT_EQ(format_number(0.0314159), "0.0314159");
  EXPECT_EQ(parse_number(format_number(pi / 2)), pi / 2);
  EXPECT_EQ(parse_number(format_number(1.0 / 3)), 1.0 / 3);
}
