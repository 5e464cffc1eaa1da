#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "nlkpp/cli/run.hpp"

using namespace nlkpp;

namespace {

std::string expect_config_error(const std::string& text) {
  try {
    ExperimentConfig::parse(text, "test.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return "";
}

}  // namespace

TEST(Config, ParsesKeysCommentsAndDefaults) {
  auto c = ExperimentConfig::parse("# comment\nexperiment = eigen\n\nD = 0.5   # trailing\nsigma_values = 1, 2,3\n");
  EXPECT_EQ(c.kind(), "eigen");
  EXPECT_DOUBLE_EQ(c.real("D"), 0.5);
  EXPECT_DOUBLE_EQ(c.real("sigma"), 1.0);
  EXPECT_EQ(c.list("sigma_values"), (std::vector<double>{1, 2, 3}));
  EXPECT_TRUE(c.boolean("co_refine"));
  EXPECT_EQ(c.integer("resolution"), 201);
}

TEST(Config, RejectsWithLineAndKey) {
  auto msg = expect_config_error("experiment = eigen\nsigm = 0.1\n");
  EXPECT_NE(msg.find("test.cfg:2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'sigm'"), std::string::npos);
  EXPECT_NE(msg.find("did you mean 'sigma'"), std::string::npos);
  EXPECT_NE(expect_config_error("experiment = eigen\nD = fast\n").find(":2: key 'D'"), std::string::npos);
  EXPECT_NE(expect_config_error("experiment = eigen\nD = 1\nD = 2\n").find("duplicate"), std::string::npos);
  EXPECT_NE(expect_config_error("experiment = nonsense\n").find("not one of"), std::string::npos);
  EXPECT_NE(expect_config_error("experiment = eigen\na = 2 - (x\n").find(":2:"), std::string::npos);
  EXPECT_NE(expect_config_error("experiment = eigen\njust text\n").find("key = value"), std::string::npos);
  EXPECT_NE(expect_config_error("D = 1\n").find("missing required key 'experiment'"), std::string::npos);
  EXPECT_NE(expect_config_error("experiment = eigen\nco_refine = yes\n").find("true or false"), std::string::npos);
}

TEST(Config, CanonicalHashIgnoresLayout) {
  auto a = ExperimentConfig::parse("experiment = eigen\nD = 2\n");
  auto b = ExperimentConfig::parse("# x\nD=2\n\n   experiment=eigen\n");
  EXPECT_EQ(a.canonical(), b.canonical());
  EXPECT_EQ(fnv1a(a.canonical()), fnv1a(b.canonical()));
  EXPECT_NE(fnv1a(a.canonical()), fnv1a(ExperimentConfig::parse("experiment = eigen\nD = 3\n").canonical()));
  // Published FNV-1a 64 test vectors.
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Config, ProblemValidation) {
  EXPECT_THROW(problem_from_config(ExperimentConfig::parse("experiment=eigen\ndimension=2\n")), ConfigError);
  EXPECT_THROW(problem_from_config(ExperimentConfig::parse("experiment=eigen\nD=-1\n")), ConfigError);
  EXPECT_THROW(problem_from_config(ExperimentConfig::parse("experiment=eigen\na=r\n")), ConfigError);
  EXPECT_THROW(problem_from_config(ExperimentConfig::parse("experiment=eigen\nkernel=custom\n")), ConfigError);
  auto p = problem_from_config(ExperimentConfig::parse(
      "experiment=eigen\ndimension=2\ndomain=-1,1,-2,2\nkernel=custom\nkernel_expr=1-r\nresolution=9\n"));
  EXPECT_EQ(p.dimension, 2);
  EXPECT_DOUBLE_EQ(p.bounds.lo[1], -2.0);
  EXPECT_DOUBLE_EQ(p.a(0.0, {0.5, 0.0}), 1.75);
}

TEST(Run, EigenSummary) {
  auto c = ExperimentConfig::parse("experiment = eigen\nresolution = 101\n");
  auto r = run(c);
  EXPECT_EQ(r.exit_code, exit_ok);
  const auto& e = r.summary["results"]["eigen"];
  EXPECT_TRUE(e["is_principal"].get<bool>());
  EXPECT_LT(e["lambda1"].get<double>(), e["lambda_star"].get<double>());
  EXPECT_DOUBLE_EQ(e["lambda_star"].get<double>(), -1.0);
  ASSERT_TRUE(r.files.count("spectrum.csv"));
  EXPECT_EQ(r.files["spectrum.csv"].rfind("D,lambda1,lambda_star,is_principal", 0), 0u);
}

TEST(Run, TolerancesEchoedInProvenance) {
  auto c = ExperimentConfig::parse("experiment = sweep-D\nresolution = 41\nD_values = 0.1, 1, 10\n");
  auto r = run(c);
  const auto& tol = r.summary["provenance"]["tolerances"];
  for (const auto& a : r.summary["assertions"]) {
    if (!a.contains("tolerance")) continue;
    auto name = a["tolerance"].get<std::string>();
    ASSERT_TRUE(tol.contains(name)) << name;
    EXPECT_EQ(tol[name], a["tolerance_value"]);
  }
  EXPECT_EQ(r.summary["provenance"]["config_hash"].get<std::string>().rfind("fnv1a64:", 0), 0u);
}

TEST(Run, ByteIdenticalAcrossRunsAndThreads) {
  auto c = ExperimentConfig::parse("experiment = sweep-sigma\nm = 1\nresolution = 41\nco_refine = false\n"
                                   "sigma_values = 1, 4, 16, 50\nassert_tails = large\n");
  auto a = run(c, {1, std::nullopt});
  auto b = run(c, {3, std::nullopt});
  EXPECT_EQ(a.summary.dump(), b.summary.dump());
  EXPECT_EQ(a.files, b.files);
  EXPECT_EQ(a.exit_code, exit_ok);
  // Limit-gap columns and the tail verdict.
  const auto& csv = a.files.at("sweep_sigma.csv");
  EXPECT_NE(csv.find("gap_small,gap_large"), std::string::npos);
  EXPECT_TRUE(a.summary["results"]["verdicts"]["large_sigma_tail_monotone"].get<bool>());
  // A different seed changes the hash.
  auto s = run(c, {1, 7});
  EXPECT_NE(s.summary["provenance"]["config_hash"], a.summary["provenance"]["config_hash"]);
}

TEST(Run, AssertionFailureSetsExitCode) {
  // The observed order is about 2, so demanding 10 must fail.
  auto c = ExperimentConfig::parse("experiment = consistency\nresolution = 11\norder_min = 10\n");
  auto r = run(c);
  EXPECT_EQ(r.exit_code, exit_assertion);
  EXPECT_FALSE(r.summary["passed"].get<bool>());
}

TEST(Run, PreconditionsSurfaceAsErrors) {
  auto c = ExperimentConfig::parse("experiment = sweep-D\nD_values = 1, 0.5\nresolution = 21\n");
  EXPECT_THROW(run(c), PreconditionError);
}

TEST(Builtins, CatalogIsComplete) {
  std::ostringstream os;
  list_builtins(os);
  const std::string s = os.str();
  for (const char* k : {"triangular", "uniform", "cosine", "logistic", "linear", "sin", "exp", "pow"})
    EXPECT_NE(s.find(k), std::string::npos) << k;
  for (const auto& kind : experiment_kinds()) EXPECT_NE(s.find("  " + kind + "\n"), std::string::npos) << kind;
  EXPECT_EQ(experiment_kinds().size(), 8u);
}
