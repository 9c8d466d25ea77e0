#include <gtest/gtest.h>

#include <sstream>

#include "towlab/io.hpp"

using namespace towlab;
using nlohmann::json;

TEST(ConfigTest, StrictKeys) {
  EXPECT_THROW(check_keys(json{{"a", 1}, {"b", 2}}, {"a"}, {}, "x"), ConfigError);
  EXPECT_THROW(check_keys(json{{"a", 1}}, {"a", "b"}, {"b"}, "x"), ConfigError);
  EXPECT_THROW(check_keys(json::array(), {"a"}, {}, "x"), ConfigError);
  EXPECT_NO_THROW(check_keys(json{{"a", 1}}, {"a", "b"}, {"a"}, "x"));
}

TEST(ConfigTest, DomainForms) {
  const Domain a = domain_from_json(json::parse(R"({"kind":"box","lower":[0,0],"upper":[1,2]})"), 0.1);
  EXPECT_DOUBLE_EQ(a.center()[1], 1.0);
  const Domain b = domain_from_json(json::parse(R"({"kind":"box","center":[0,0],"half_widths":[0.5,1]})"), 0.1);
  EXPECT_DOUBLE_EQ(b.size()[1], 1.0);
  const Domain c = domain_from_json(json::parse(R"({"kind":"ball","center":[0,0,0],"radius":2})"), 0.1);
  EXPECT_EQ(c.dim(), 3);
  EXPECT_THROW(domain_from_json(json::parse(R"({"kind":"torus"})"), 0.1), ConfigError);
  EXPECT_THROW(domain_from_json(json::parse(R"({"kind":"ball","center":[0,0],"radius":1,"x":1})"), 0.1), ConfigError);
  EXPECT_THROW(domain_from_json(json::parse(R"({"kind":"ball","center":[0,0],"radius":1})"), 0.9), ConfigError);
}

TEST(ConfigTest, FieldsAndData) {
  EXPECT_EQ(field_from_json(json::parse(R"({"kind":"constant","p":"inf"})"))(Vec::Zero(2)), kInfinity);
  EXPECT_DOUBLE_EQ(field_from_json(json::parse(R"({"kind":"radial_holder","p0":2.5,"amp":0.5,"center":[0,0],"s":0.5})")).s(),
                   0.5);
  EXPECT_THROW(field_from_json(json::parse(R"({"kind":"constant","p":0.5})")), ConfigError);
  Vec x(2);
  x << 0.5, 2.0;
  EXPECT_DOUBLE_EQ(datum_from_json(json::parse(R"({"kind":"quadratic_harmonic"})"))(x), 0.25 - 4.0);
  EXPECT_DOUBLE_EQ(
      datum_from_json(json::parse(R"({"kind":"polynomial","terms":[{"coef":2,"powers":[1,1]},{"coef":1,"powers":[0,0]}]})"))(x),
      3.0);
  // table: multilinear, clamped to the hull
  const BoundaryDatum t =
      datum_from_json(json::parse(R"({"kind":"table","origin":[0,0],"h":1,"counts":[2,2],"values":[0,1,2,3]})"));
  Vec y(2);
  y << 0.5, 0.5;
  EXPECT_DOUBLE_EQ(t(y), 1.5);
  y << 9.0, -4.0;
  EXPECT_DOUBLE_EQ(t(y), 1.0);
  EXPECT_THROW(datum_from_json(json::parse(R"({"kind":"table","origin":[0,0],"h":1,"counts":[2,2],"values":[0,1]})")),
               ConfigError);
}

TEST(ConfigTest, RecipeAndParams) {
  const RecipeInputs in = recipe_from_json(
      json::parse(R"({"s":0.5,"c_alpha":1,"alpha_min":0.25,"r":1,"sup_u":1,"C_u":1,"delta":1})"));
  EXPECT_DOUBLE_EQ(constants_recipe(in).M, 2.0 / 3.0);
  EXPECT_THROW(recipe_from_json(json::parse(R"({"s":0.5})")), ConfigError);
  const ComparisonParams p = params_from_json(constants_recipe(in).to_json());
  EXPECT_NEAR(p.C, constants_recipe(in).C, 0.0);
  EXPECT_EQ(p.N, constants_recipe(in).N);
}

TEST(ConfigTest, StrategyKeys) {
  EXPECT_EQ(strategy_from_json(json::parse(R"({"kind":"threshold_angle","s":0.5})")).kind(),
            Strategy::Kind::threshold_angle);
  EXPECT_THROW(strategy_from_json(json::parse(R"({"kind":"threshold_angle"})")), ConfigError);
  EXPECT_THROW(strategy_from_json(json::parse(R"({"kind":"wander"})")), ConfigError);
}

TEST(HashTest, Fnv1aVectorsAndKeyOrder) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(config_hash(json::parse(R"({"b":1,"a":2})")), config_hash(json::parse(R"({"a":2,"b":1})")));
  EXPECT_NE(config_hash(json{{"a", 1}}), config_hash(json{{"a", 2}}));
}

TEST(FieldCsvTest, RoundTripIsExact) {
  Vec lo(2), hi(2);
  lo << 0, 0;
  hi << 1, 1;
  GridField u = GridField::make(Domain::box_from_corners(lo, hi, 0.1), 0.05);
  u.fill([](const Vec& y) { return std::sin(7 * y[0]) / 3.0 + y[1] * 1e-17; });
  std::stringstream ss;
  write_field_csv(u, ss);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "index,x1,x2,region,value");
  ss.seekg(0);
  const std::vector<double> back = read_field_values(ss);
  ASSERT_EQ(back.size(), u.size());
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(back[i], u[i]);
  const json h = field_header(u);
  EXPECT_EQ(h["schema_version"], kSchemaVersion);
  EXPECT_EQ(h["nodes"], u.size());
}
