#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "test_support.hpp"

using namespace gaw;

namespace {

Json minimal() {
  return Json::parse(R"({"d": 1, "T": 2, "a": [0, 0], "b": [6, -6],
                         "A": [[1, 2], [2, 5]], "B": [[1, -1], [-1, 2]]})");
}

std::string error_text(const Json& j) {
  try {
    parse_instance(j);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Instance, ParsesMinimalDocument) {
  const InstanceFile f = parse_instance(minimal());
  EXPECT_EQ(f.d, 1);
  EXPECT_EQ(f.steps, 2);
  EXPECT_EQ(f.lambda, 0.0);
  EXPECT_EQ(f.B, example_degenerate().B);
  EXPECT_FALSE(f.p_override);
  EXPECT_FALSE(f.times);
}

TEST(Instance, DiagnosticsNameTheField) {
  Json j = minimal();
  j["colour"] = "red";
  EXPECT_NE(error_text(j).find("'colour'"), std::string::npos);

  j = minimal();
  j["A"][1] = Json::array({2});
  EXPECT_NE(error_text(j).find("A[1]"), std::string::npos);

  j = minimal();
  j["lambda"] = -1;
  EXPECT_NE(error_text(j).find("'lambda'"), std::string::npos);

  j = minimal();
  j.erase("b");
  EXPECT_NE(error_text(j).find("'b'"), std::string::npos);

  j = minimal();
  j["T"] = 0;
  EXPECT_NE(error_text(j).find("'T'"), std::string::npos);

  j = minimal();
  j["times"] = Json::array({0.0, 1.5});
  EXPECT_NE(error_text(j).find("times[1]"), std::string::npos);

  j = minimal();
  j["P"] = Json::array({Json::array({Json::array({0.5})})});
  EXPECT_NE(error_text(j).find("'P'"), std::string::npos);
}

TEST(Instance, DegenerateCovarianceMessage) {
  Json j = minimal();
  j["A"] = Json::parse("[[1, 1], [1, 1]]");
  const InstanceFile f = parse_instance(j);
  try {
    f.mu();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotPositiveDefinite);
    EXPECT_NE(std::string(e.what()).find("non-degenerate"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("'A'"), std::string::npos);
  }
}

TEST(Instance, RoundTrip) {
  for (const InstanceFile& f : bundled_examples()) {
    const InstanceFile g = parse_instance(Json::parse(to_text(instance_json(f))));
    EXPECT_EQ(g.name, f.name);
    EXPECT_EQ(g.A, f.A);
    EXPECT_EQ(g.B, f.B);
    EXPECT_EQ(g.a, f.a);
    EXPECT_EQ(g.b, f.b);
    EXPECT_EQ(g.times.has_value(), f.times.has_value());
  }
}

TEST(Instance, BundledFilesMatchEmbedded) {
  for (const InstanceFile& f : bundled_examples()) {
    const InstanceFile g = load_instance(std::string(GAW_INSTANCE_DIR) + "/" + f.name + ".json");
    EXPECT_EQ(g.A, f.A) << f.name;
    EXPECT_EQ(g.B, f.B) << f.name;
    EXPECT_EQ(g.a, f.a) << f.name;
    EXPECT_EQ(g.b, f.b) << f.name;
  }
}

TEST(Serializer, SeventeenDigitsRoundTrip) {
  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int rep = 0; rep < 2000; ++rep) {
    const double x = rep % 3 == 0 ? u(rng) : u(rng) * std::pow(10.0, rep % 40 - 20);
    const std::string s = detail::format_real(x);
    EXPECT_EQ(std::stod(s), x) << s;
    EXPECT_EQ(Json::parse(s).get<double>(), x);
  }
  EXPECT_EQ(detail::format_real(2.0), "2.0");
  EXPECT_EQ(detail::format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(detail::format_real(std::numeric_limits<double>::infinity()), "null");
}

TEST(ResultFile, RoundTripIsLossless) {
  const InstanceFile ex = example_multidim();
  ResultFile r = ResultFile::from_report(ex.mu(), ex.nu(), solve_aw(ex.mu(), ex.nu(), 0.37));
  r.add_w2(solve_w2(ex.mu(), ex.nu(), 0.37));
  const std::string text = r.text();
  const Json back = Json::parse(text);
  EXPECT_EQ(back, r.doc);
  EXPECT_EQ(to_text(back), text);
  EXPECT_NO_THROW(validate_result(back));
}

TEST(ResultFile, BreakdownSumsToValue) {
  const InstanceFile ex = example_degenerate();
  const Json j = ResultFile::from_report(ex.mu(), ex.nu(), solve_aw(ex.mu(), ex.nu(), 1.0)).doc;
  const Json& b = j["value_breakdown"];
  const double sum = b["mean"].get<double>() + b["trace"].get<double>() +
                     b["coupling"].get<double>() + b["entropy"].get<double>();
  EXPECT_NEAR(sum, j["value"].get<double>(), 1e-12);
}

TEST(ResultFile, ValidatorRejectsUnknownAndMissing) {
  const InstanceFile ex = example_degenerate();
  Json j = ResultFile::from_report(ex.mu(), ex.nu(), solve_aw(ex.mu(), ex.nu(), 0.0)).doc;
  Json extra = j;
  extra["surprise"] = 1;
  EXPECT_THROW(validate_result(extra), Error);
  Json missing = j;
  missing.erase("monge");
  EXPECT_THROW(validate_result(missing), Error);
  Json wrong = j;
  wrong["unique"] = "yes";
  EXPECT_THROW(validate_result(wrong), Error);
}

TEST(ResultFile, SchemaFileListsTopLevelFields) {
  const Json schema = Json::parse(read_file(std::string(GAW_SCHEMA_DIR) + "/result.schema.json"));
  EXPECT_FALSE(schema["additionalProperties"].get<bool>());
  const InstanceFile ex = example_degenerate();
  const Json j = ResultFile::from_report(ex.mu(), ex.nu(), solve_aw(ex.mu(), ex.nu(), 0.0)).doc;
  for (auto it = j.begin(); it != j.end(); ++it) {
    EXPECT_TRUE(schema["properties"].contains(it.key())) << it.key();
  }
  for (const Json& k : schema["required"]) EXPECT_TRUE(j.contains(k.get<std::string>()));
}
