#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "../support/git_fixture.hpp"
#include "vdbench/error.hpp"
#include "vdbench/vpp.hpp"

using namespace vdbench;

namespace {

const std::string kBefore = "int f(int a)\n{\n    return a;\n}";
const std::string kAfter = "int f(int a)\n{\n    return a + 1;\n}";

CodeSample vuln(const std::string& id, const std::string& commit, const std::string& code = kBefore) {
  return {id, code, 1, std::nullopt, commit, std::nullopt};
}

}  // namespace

TEST(FindFunctions, ByName) {
  const std::string src = "#include <x.h>\nstatic int g(void) { return 0; }\n\n" + kAfter + "\nint h(void);\n";
  const auto found = find_functions(src, "f");
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0], kAfter);
  EXPECT_TRUE(find_functions(src, "h").empty());
  EXPECT_TRUE(find_functions("int f(void) { \"open", "f").empty());
}

TEST(BuildPairs, FixtureSource) {
  FixturePatchSource src;
  src.add_commit("c1", {{"a.c", kAfter}});
  src.add_commit("c2", {{"a.c", kAfter}, {"b.c", kAfter}});
  src.add_commit("c3", {{"a.c", kBefore}});
  src.add_commit("c4", {{"notes.txt", kAfter}});
  const Dataset in{vuln("ok", "c1"), vuln("amb", "c2"), vuln("same", "c3"), vuln("none", "c4"),
                   vuln("gone", "c9"), {"nocommit", kBefore, 1}};
  const PairResult r = build_pairs(in, src);
  ASSERT_EQ(r.samples.size(), 2u);
  EXPECT_EQ(r.samples[0].id, "ok");
  EXPECT_EQ(r.samples[0].pair_id, "ok#patch");
  EXPECT_EQ(r.samples[1].id, "ok#patch");
  EXPECT_EQ(r.samples[1].label, 0);
  EXPECT_EQ(r.samples[1].pair_id, "ok");
  EXPECT_EQ(r.samples[1].code, kAfter);
  EXPECT_TRUE(validate_pairs(r.samples).empty());

  std::map<std::string, std::string> reasons;
  for (const auto& m : r.misses) reasons[m.id] = m.reason;
  EXPECT_EQ(reasons["amb"], "ambiguous");
  EXPECT_EQ(reasons["same"], "identical");
  EXPECT_EQ(reasons["none"], "not-found");
  EXPECT_EQ(reasons["gone"], "no-commit");
  EXPECT_EQ(reasons["nocommit"], "no-commit");

  std::ostringstream out;
  write_misses(r.misses, out);
  EXPECT_NE(out.str().find("gone\tno-commit\tc9\t"), std::string::npos);
}

TEST(BuildPairs, RejectsNonVulnerableInput) {
  FixturePatchSource src;
  const Dataset in{{"b", kBefore, 0}};
  EXPECT_THROW(build_pairs(in, src), DataError);
}

TEST(BuildPairs, GitRepository) {
  const auto fx = fixtures::make_git_fixture(std::filesystem::temp_directory_path() / "vdbench_vpp_git");
  GitPatchSource src(fx.repo);
  const PairResult r = build_pairs(fx.vulnerable, src);
  EXPECT_EQ(r.samples.size(), 10u);
  ASSERT_EQ(r.misses.size(), 1u);
  EXPECT_EQ(r.misses[0].id, fx.planted_id);
  EXPECT_EQ(r.misses[0].reason, "no-commit");
  EXPECT_NE(r.samples[1].code.find("if (n > 64)"), std::string::npos);
  EXPECT_TRUE(validate_pairs(r.samples).empty());

  EXPECT_EQ(src.lookup("--help", "copy_in").status, PatchLookup::Status::kNoCommit);
  EXPECT_THROW(GitPatchSource("/"), Error);
}

TEST(DeriveSplit, PairsFollowTheirVulnerableMember) {
  FixturePatchSource src;
  Dataset in;
  for (int i = 0; i < 6; ++i) {
    src.add_commit("c" + std::to_string(i), {{"a.c", kAfter}});
    in.push_back(vuln("v" + std::to_string(i), "c" + std::to_string(i)));
  }
  const Dataset pairs = build_pairs(in, src).samples;
  DatasetSplit source;
  source.train = {in[0], in[1], in[2], {"other", "int o;", 0}};
  source.valid = {in[3]};
  source.test = {in[4], in[5]};
  const DatasetSplit split = derive_split(source, pairs);
  EXPECT_EQ(split.train.size(), 6u);
  EXPECT_EQ(split.valid.size(), 2u);
  EXPECT_EQ(split.test.size(), 4u);
  for (Part p : kAllParts) {
    EXPECT_EQ(2 * count_vulnerable(split[p]), split[p].size());
    EXPECT_TRUE(validate_pairs(split[p]).empty());
  }

  source.test.push_back(in[0]);
  EXPECT_THROW(derive_split(source, pairs), DataError);
  source.test.pop_back();
  source.train.erase(source.train.begin());
  EXPECT_THROW(derive_split(source, pairs), DataError);
}

TEST(LineDiff, MarksChangedLines) {
  const auto d = line_diff("a\nb\nc", "a\nx\nc\nd");
  std::string ops;
  for (const auto& l : d) ops += l.op;
  EXPECT_EQ(ops, " +- +");
  EXPECT_EQ(d[1].text, "x");
}

TEST(Spotcheck, SeededAndBounded) {
  FixturePatchSource src;
  Dataset in;
  for (int i = 0; i < 5; ++i) {
    src.add_commit("c" + std::to_string(i), {{"a.c", kAfter}});
    in.push_back(vuln("v" + std::to_string(i), "c" + std::to_string(i)));
  }
  const Dataset pairs = build_pairs(in, src).samples;
  const std::string a = spotcheck_sample(pairs, 3, 8);
  EXPECT_EQ(a, spotcheck_sample(pairs, 3, 8));
  EXPECT_NE(a.find("```diff"), std::string::npos);
  EXPECT_NE(a.find("+    return a + 1;"), std::string::npos);
  EXPECT_THROW(spotcheck_sample(pairs, 6, 8), DataError);
}
