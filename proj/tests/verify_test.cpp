#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "iwahori/verify.hpp"

using namespace iwahori;

namespace {

std::vector<RunConfig> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.conf");
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

RunConfig small(std::uint32_t p, std::uint32_t f, std::uint32_t e, std::uint32_t r, std::uint32_t depth,
                std::vector<std::string> suites) {
  RunConfig c;
  c.label = "t";
  c.p = p, c.f = f, c.e = e, c.r = r, c.depth = depth;
  c.suites = std::move(suites);
  return c;
}

nlohmann::json without_times(nlohmann::json j) {
  for (auto& run : j["runs"])
    for (auto& s : run["suites"]) s.erase("wall_time_s");
  return j;
}

}  // namespace

TEST(Config, SectionsInheritDefaults) {
  const auto runs = parse(
      "# shared\n"
      "depth = 4\n"
      "e = 1\n"
      "[a]\n"
      "p = 3\nf = 2\nr = 4   # trailing comment\n"
      "suites = kernels, main-theorem\n"
      "[b]\n"
      "p = 7\nf = 1\nr = 3\ne = 2\nhorizon = 5\nmodulus = 4, 1\n");
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_EQ(runs[0].label, "a");
  EXPECT_EQ(runs[0].depth, 4u);
  EXPECT_EQ(runs[0].e, 1u);
  EXPECT_EQ(runs[0].suites, (std::vector<std::string>{"kernels", "main-theorem"}));
  EXPECT_EQ(runs[0].horizon_or_depth(), 4u);
  EXPECT_EQ(runs[1].e, 2u);
  EXPECT_EQ(runs[1].horizon_or_depth(), 5u);
  EXPECT_EQ(runs[1].modulus, (std::vector<std::uint32_t>{4, 1}));
  EXPECT_FALSE(runs[1].suites.has_value());
}

TEST(Config, SingleRunWithoutSections) {
  const auto runs = parse("p = 7\nf = 1\ne = 1\nr = 3\n");
  ASSERT_EQ(runs.size(), 1u);
  EXPECT_EQ(runs[0].label, "default");
  EXPECT_EQ(runs[0].depth, 3u);
}

TEST(Config, DiagnosticsCarryLineNumbers) {
  EXPECT_NE(parse_error("p = 7\nf = 1\nbogus = 2\n").find("test.conf:3"), std::string::npos);
  EXPECT_NE(parse_error("p = 7\nf = one\n").find("test.conf:2"), std::string::npos);
  EXPECT_NE(parse_error("p = 7\njust words\n").find("test.conf:2"), std::string::npos);
  EXPECT_NE(parse_error("[unclosed\n").find("test.conf:1"), std::string::npos);
}

TEST(Config, RejectsInvalidParameters) {
  EXPECT_NE(parse_error("p = 9\nf = 1\ne = 1\nr = 3\n").find("prime"), std::string::npos);
  EXPECT_NE(parse_error("p = 2\nf = 1\ne = 1\nr = 1\n").find("prime"), std::string::npos);
  EXPECT_NE(parse_error("p = 7\nf = 1\ne = 1\nr = 6\n").find("0 < r"), std::string::npos);
  EXPECT_NE(parse_error("p = 7\nf = 1\ne = 1\nr = 3\ndepth = 3\nhorizon = 2\n").find("horizon"), std::string::npos);
  EXPECT_NE(parse_error("p = 7\nf = 1\ne = 1\nr = 3\nsuites = nonsense\n").find("nonsense"), std::string::npos);
  EXPECT_NE(parse_error("p = 7\nf = 1\nr = 3\n").find("missing"), std::string::npos);
}

TEST(Run, EmptySuiteListGivesEmptyReport) {
  const auto runs = parse("p = 7\nf = 1\ne = 1\nr = 3\nsuites =\n");
  ASSERT_EQ(runs.size(), 1u);
  const RunReport rep = run_config(runs[0]);
  EXPECT_TRUE(rep.suites.empty());
  EXPECT_EQ(count_failures({rep}), 0u);
}

TEST(Run, ReportShapeAndDeterminism) {
  const RunConfig c = small(7, 1, 1, 3, 2, {"hecke-relations", "kernels", "main-theorem"});
  const RunReport a = run_config(c), b = run_config(c);
  ASSERT_EQ(a.suites.size(), 3u);
  EXPECT_EQ(a.suites[0].status, "pass");
  EXPECT_EQ(a.suites[1].status, "pass");
  EXPECT_EQ(a.suites[2].status, "skipped");
  const nlohmann::json ja = make_report({a}), jb = make_report({b});
  EXPECT_EQ(ja["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(ja["runs"][0]["params"]["q"], 7);
  EXPECT_TRUE(ja["runs"][0]["hypotheses"]["within"].get<bool>());
  EXPECT_TRUE(ja["runs"][0]["suites"][0]["witness"].is_null());
  EXPECT_EQ(without_times(ja).dump(), without_times(jb).dump());
}

TEST(Run, OutsideHypothesesIsFlaggedNotFailed) {
  const RunReport rep = run_config(small(5, 1, 2, 3, 2, {"kernels"}));
  EXPECT_FALSE(rep.within_hypotheses);
  ASSERT_EQ(rep.suites.size(), 1u);
  EXPECT_EQ(rep.suites[0].status, "flagged");
  EXPECT_EQ(rep.suites[0].outcome, "pass");
  EXPECT_EQ(count_failures({rep}), 0u);
}

TEST(Run, FailedCheckRecordsFirstWitness) {
  SuiteReport s;
  s.check("fine", true);
  s.check("broken", false, {{"count", 1}}, {{"rep", "1.0"}});
  s.check("also broken", false, {{"count", 2}});
  EXPECT_FALSE(s.all_pass());
  EXPECT_EQ(s.witness["check"], "broken");
  EXPECT_EQ(s.witness["data"]["rep"], "1.0");
}

TEST(Run, DumpsMatricesAndKernelDims) {
  const auto dir = std::filesystem::temp_directory_path() / "iwahori_dump_test";
  std::filesystem::remove_all(dir);
  RunOptions opts;
  opts.dump_dir = dir.string();
  run_config(small(7, 1, 1, 3, 1, std::vector<std::string>{}), opts);
  EXPECT_TRUE(std::filesystem::exists(dir / "t" / "T_minus_t1.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "t" / "ker_plus_t1.csv"));
  std::ifstream dims(dir / "t" / "kernel_dims.csv");
  std::string header;
  std::getline(dims, header);
  EXPECT_EQ(header, "operator,sphere,dim");
  std::filesystem::remove_all(dir);
}

TEST(Invariants, ClaimedCounts) {
  HeckeContext qp({7, 1, 1, 3, {}, {}}, 3);
  EXPECT_EQ(claimed_invariants(qp, 3).size(), 2u);
  HeckeContext q9({3, 2, 1, 4, {}, {}}, 3);
  EXPECT_EQ(claimed_invariants(q9, 1).size(), 2u);
  EXPECT_EQ(claimed_invariants(q9, 3).size(), 2u + 2 * 4 * 2);
}

TEST(Invariants, TorusExponents) {
  HeckeContext H({3, 2, 1, 4, {}, {}}, 2);
  const auto id = torus_exponents(H, ModuleVec::basis(CosetRep::identity()));
  ASSERT_TRUE(id);
  EXPECT_EQ(*id, std::make_pair(0u, 4u));
  const auto beta = torus_exponents(H, ModuleVec::basis(CosetRep::beta_rep()));
  ASSERT_TRUE(beta);
  EXPECT_EQ(*beta, std::make_pair(4u, 0u));
  ModuleVec mixed = ModuleVec::basis(CosetRep::identity());
  mixed.add(H.field(), CosetRep::beta_rep(), FqElem{1});
  EXPECT_FALSE(torus_exponents(H, mixed));
}

TEST(Invariants, InteriorFixedSpaceAtDepthThree) {
  HeckeContext H({7, 1, 1, 3, {}, {}}, 3);
  const FixedSpace fs = interior_fixed_space(H, 1, 3, 3);
  EXPECT_EQ(fs.fixed_dim(), 2u);
}
