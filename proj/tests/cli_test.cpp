#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cflow/cli.hpp"
#include "cflow/matrix_io.hpp"

using namespace cflow;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return std::string(CFLOW_FIXTURE_DIR) + "/" + name; }

Complex pair_value(const nlohmann::json& p) { return {p[0].get<double>(), p[1].get<double>()}; }

}  // namespace

TEST(CliPow, Identity) {
  const CliResult r = run({"pow", fixture("identity.json"), "--z", "7.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Matrix a = parse_matrix_document(r.out);
  EXPECT_EQ(max_norm(a - Matrix::Identity(3, 3)), 0.0);
}

TEST(CliPow, Diagonal) {
  const CliResult r = run({"pow", fixture("diag23.json"), "--z", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 4;
  expected(1, 1) = 9;
  EXPECT_LE(max_norm(parse_matrix_document(r.out) - expected), 1e-12);
}

TEST(CliPow, UnipotentSquareRoot) {
  for (const char* method : {"vandermonde", "companion", "both"}) {
    const CliResult r = run({"pow", fixture("jordan2.json"), "--z", "0.5", "--method", method});
    ASSERT_EQ(r.code, 0) << r.err;
    Matrix expected = Matrix::Identity(2, 2);
    expected(0, 1) = 0.5;
    EXPECT_LE(max_norm(parse_matrix_document(r.out) - expected), 1e-12) << method;
  }
}

TEST(CliPow, IsDeterministic) {
  const std::vector<std::string> args{"pow", fixture("random6.json"), "--z", "1.3-0.7i"};
  EXPECT_EQ(run(args).out, run(args).out);
}

TEST(CliPow, BranchOffsetPicksAnotherRoot) {
  const CliResult r = run({"pow", fixture("diag23.json"), "--z", "0.5", "--branch-offset", "2:1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Matrix a = parse_matrix_document(r.out);
  // Cluster 2 is lambda = 2 (smaller modulus last); one extra turn flips the sign of its square root.
  EXPECT_LE(std::abs(a(0, 0) + std::sqrt(2.0)), 1e-12);
  EXPECT_LE(std::abs(a(1, 1) - std::sqrt(3.0)), 1e-12);
}

TEST(CliExitCodes, ParseErrors) {
  EXPECT_EQ(run({}).code, kExitParse);
  EXPECT_EQ(run({"pow", fixture("identity.json")}).code, kExitParse);
  EXPECT_EQ(run({"pow", fixture("identity.json"), "--z", "1+"}).code, kExitParse);
  EXPECT_EQ(run({"pow", "/nonexistent.json", "--z", "1"}).code, kExitParse);
  EXPECT_EQ(run({"pow", fixture("identity.json"), "--z", "1", "--method", "magic"}).code, kExitParse);
  EXPECT_EQ(run({"pow", fixture("identity.json"), "--z", "1", "--tol-rank", "-1"}).code, kExitParse);
  EXPECT_EQ(run({"pow", fixture("identity.json"), "--z", "1", "--branch-offset", "0:1"}).code, kExitParse);
  EXPECT_EQ(run({"formula"}).code, kExitParse);
}

TEST(CliExitCodes, OperationalFailures) {
  EXPECT_EQ(run({"formula", "--relation", "5,0"}).code, kExitSingular);
  EXPECT_EQ(run({"pow", fixture("diag23.json"), "--z", "1", "--relation", "1,1"}).code, kExitRelationInvalid);

  const std::string singular = ::testing::TempDir() + "/singular.json";
  std::ofstream(singular) << R"({"n": 2, "entries": [[[1, 0], [2, 0]], [[2, 0], [4, 0]]]})";
  EXPECT_EQ(run({"pow", singular, "--z", "0.5"}).code, kExitSingular);
  // A failing verify threshold is exit 1, but a singular input still reports 3.
  EXPECT_EQ(run({"verify", singular, "--threshold", "1e-300"}).code, kExitSingular);
}

TEST(CliAnalyze, Diagonal) {
  const CliResult r = run({"analyze", fixture("diag23.json"), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["p"], 2);
  ASSERT_EQ(doc["spectrum"].size(), 2u);
  EXPECT_LE(std::abs(pair_value(doc["spectrum"][0]["lambda"]) - 3.0), 1e-12);
  EXPECT_EQ(doc["spectrum"][0]["multiplicity"], 1);
  EXPECT_LE(std::abs(pair_value(doc["spectrum"][1]["lambda"]) - 2.0), 1e-12);
  EXPECT_LE(std::abs(pair_value(doc["relation"]["c"][0]) - 5.0), 1e-12);
  EXPECT_LE(std::abs(pair_value(doc["relation"]["c"][1]) + 6.0), 1e-12);
  EXPECT_EQ(doc["terms"].size(), 4u);
}

TEST(CliAnalyze, Identity) {
  const CliResult r = run({"analyze", fixture("identity.json"), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["p"], 1);
  EXPECT_EQ(doc["relation"]["polynomial"], "X - 1");
  EXPECT_EQ(pair_value(doc["e"][0][0]), Complex(1, 0));
}

TEST(CliAnalyze, SuppliedPolynomialMatchesDiscovery) {
  const auto automatic = nlohmann::json::parse(run({"analyze", fixture("diag23.json"), "--json"}).out);
  const CliResult supplied = run({"analyze", fixture("diag23.json"), "--json", "--poly", "1,\xE2\x88\x92" "5,6"});
  ASSERT_EQ(supplied.code, 0) << supplied.err;
  const auto doc = nlohmann::json::parse(supplied.out);
  EXPECT_EQ(doc["relation"]["polynomial"], "X^2 - 5X + 6");
  EXPECT_EQ(doc["p"], automatic["p"]);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_LE(std::abs(pair_value(doc["spectrum"][i]["lambda"]) - pair_value(automatic["spectrum"][i]["lambda"])), 1e-12);
    for (std::size_t j = 0; j < 2; ++j)
      EXPECT_LE(std::abs(pair_value(doc["e"][i][j]) - pair_value(automatic["e"][i][j])), 1e-10);
  }
  const CliResult rel = run({"analyze", fixture("diag23.json"), "--relation", "5,-6"});
  EXPECT_EQ(rel.code, 0);
  EXPECT_NE(rel.out.find("X^2 - 5X + 6"), std::string::npos);
}

TEST(CliAnalyze, TextReportListsOrdering) {
  const CliResult r = run({"analyze", fixture("jordan2.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("multiplicity 2"), std::string::npos);
  EXPECT_NE(r.out.find("f_2(z) = g_1(z) * "), std::string::npos);
}

TEST(CliVerify, Fixtures) {
  for (const char* f : {"identity.json", "diag23.json", "jordan2.json", "random6.json"}) {
    const CliResult r = run({"verify", fixture(f), "--json"});
    EXPECT_EQ(r.code, 0) << f << r.out << r.err;
    const auto doc = nlohmann::json::parse(r.out);
    for (const auto& [name, value] : doc["residuals"].items()) EXPECT_LE(value.get<double>(), 1e-8) << f << " " << name;
  }
}

TEST(CliVerify, IdentityIsExact) {
  const auto doc = nlohmann::json::parse(run({"verify", fixture("identity.json"), "--json"}).out);
  for (const auto& [name, value] : doc["residuals"].items()) EXPECT_EQ(value.get<double>(), 0.0) << name;
}

TEST(CliVerify, MethodsAgreeOnPassFail) {
  for (const char* threshold : {"1e-8", "1e-18"}) {
    const int companion = run({"verify", fixture("random6.json"), "--method", "companion", "--threshold", threshold}).code;
    const int direct = run({"verify", fixture("random6.json"), "--method", "vandermonde", "--threshold", threshold}).code;
    EXPECT_EQ(companion, direct) << threshold;
  }
  EXPECT_EQ(run({"verify", fixture("random6.json"), "--threshold", "1e-18"}).code, kExitVerifyFailed);
}

TEST(CliVerify, SeedIsReproducible) {
  const std::vector<std::string> args{"verify", fixture("random6.json"), "--seed", "17", "--samples", "5"};
  EXPECT_EQ(run(args).out, run(args).out);
}

TEST(CliFormula, ScalarRelation) {
  const CliResult r = run({"formula", "--relation", "5", "--at", "0", "--at", "2", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["terms"].size(), 1u);
  EXPECT_LE(std::abs(pair_value(doc["e"][0][0]) - 5.0), 1e-14);
  EXPECT_LE(std::abs(pair_value(doc["at"][0]["mu"][0]) - 5.0), 1e-14);
  EXPECT_LE(std::abs(pair_value(doc["at"][1]["mu"][0]) - 125.0), 1e-12);
}

TEST(CliFormula, AtZeroIsTheRelationVector) {
  const CliResult r = run({"formula", "--relation", "1.5-2i,0.25+i", "--at", "0", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto mu = nlohmann::json::parse(r.out)["at"][0]["mu"];
  EXPECT_LE(std::abs(pair_value(mu[0]) - Complex(1.5, -2)), 1e-13);
  EXPECT_LE(std::abs(pair_value(mu[1]) - Complex(0.25, 1)), 1e-13);
}

TEST(CliFormula, CompanionTimesRelation) {
  // C c with C = [[5, 1], [-6, 0]] and c = (5, -6).
  Matrix c(2, 2);
  c << 5.0, 1.0, -6.0, 0.0;
  Vector v(2);
  v << 5.0, -6.0;
  const Vector expected = c * v;
  for (const char* method : {"vandermonde", "companion"}) {
    const CliResult r = run({"formula", "--relation", "5,\xE2\x88\x92" "6", "--at", "1", "--json", "--method", method});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto mu = nlohmann::json::parse(r.out)["at"][0]["mu"];
    EXPECT_LE(std::abs(pair_value(mu[0]) - expected(0)), 1e-12);
    EXPECT_LE(std::abs(pair_value(mu[1]) - expected(1)), 1e-12);
  }
  const CliResult text = run({"formula", "--relation", "5,-6", "--at", "1"});
  EXPECT_NE(text.out.find("mu(1) = ("), std::string::npos);
}

TEST(CliFormula, TermCountAndElision) {
  const auto full = nlohmann::json::parse(run({"formula", fixture("jordan2.json"), "--json"}).out);
  EXPECT_EQ(full["terms"].size(), 4u);
  // (X-1)^2 has e = [[2, -1], [1, -1]]: nothing is negligible, nothing is elided.
  const auto elided = nlohmann::json::parse(run({"formula", "--poly", "1,-2,1", "--json", "--elide-zero"}).out);
  EXPECT_EQ(elided["terms"].size(), 4u);
  const auto six = nlohmann::json::parse(run({"formula", "--relation", "6,-11,6", "--json"}).out);
  EXPECT_EQ(six["terms"].size(), 9u);
}
