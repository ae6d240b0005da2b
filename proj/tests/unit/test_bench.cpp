#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "../support/stub_technique.hpp"
#include "vdbench/bench.hpp"
#include "vdbench/error.hpp"
#include "vdbench/random.hpp"

using namespace vdbench;
using fixtures::StubTechnique;
namespace fs = std::filesystem;

namespace {

Dataset tiny(int n, const std::string& prefix = "s") {
  Dataset d;
  for (int i = 0; i < n; ++i) d.push_back({prefix + std::to_string(i), "int f(void) { return " + std::to_string(i) + "; }", i % 2});
  return d;
}

// Straight from the definitions, without any of the library's code.
Outputs naive_a1(double base, const std::vector<double>& test_only, const std::vector<std::vector<double>>& grid) {
  const std::size_t n = test_only.size();
  double o1 = 0, o2 = 0, o3 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    o1 += test_only[k] - base;
    o2 += grid[k][k] - base;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != k) o3 += grid[k][j] - base;
    }
  }
  const double nn = static_cast<double>(n);
  return {o1 / nn, o2 / nn, o3 / (nn * (nn - 1))};
}

A1Report run_table_a1(double base, const std::vector<double>& test_only, const std::vector<std::vector<double>>& grid,
                      const BenchOptions& opts = {}) {
  const int n = static_cast<int>(test_only.size());
  std::map<std::string, int> index;
  for (int k = 0; k < n; ++k) index["t" + std::to_string(k + 1)] = k;
  StubTechnique tech([&](const std::string& tr, const std::string& te) {
    if (tr == "Tr") return te == "Te" ? base : test_only[index.at(fixtures::tag_suffix(te))];
    return grid[index.at(fixtures::tag_suffix(tr))][index.at(fixtures::tag_suffix(te))];
  });
  const auto ts = fixtures::identity_transforms(n);
  return run_a1(ts, tiny(8), tiny(6, "q"), tech, opts);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Algorithm1, MatchesNaiveAggregationOnRandomTables) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.below(6);
    const double base = rng.unit();
    std::vector<double> test_only(n);
    std::vector<std::vector<double>> grid(n, std::vector<double>(n));
    for (auto& v : test_only) v = rng.unit();
    for (auto& row : grid)
      for (auto& v : row) v = rng.unit();
    const A1Report r = run_table_a1(base, test_only, grid);
    EXPECT_EQ(r.cell_count(), 1 + n + n * n);
    EXPECT_EQ(r.evaluations, 1 + n + n * n);
    EXPECT_EQ(r.trainings, 1 + n);
    const auto got = aggregate(r);
    ASSERT_TRUE(got);
    const Outputs want = naive_a1(base, test_only, grid);
    EXPECT_NEAR(got->o1, want.o1, 1e-12);
    EXPECT_NEAR(got->o2, want.o2, 1e-12);
    EXPECT_NEAR(got->o3, want.o3, 1e-12);
  }
}

TEST(Algorithm1, WorkedExample) {
  const A1Report r = run_table_a1(0.6, {0.58, 0.56}, {{0.60, 0.55}, {0.54, 0.59}});
  const auto o = aggregate(r);
  ASSERT_TRUE(o);
  EXPECT_NEAR(o->o1, -0.03, 1e-12);
  EXPECT_NEAR(o->o2, -0.005, 1e-12);
  EXPECT_NEAR(o->o3, -0.055, 1e-12);  // (-0.05 - 0.06) / 2
}

TEST(Algorithm1, NoOpTransformsGiveZeroEffects) {
  const A1Report r = run_table_a1(0.7, {0.7, 0.7, 0.7}, std::vector<std::vector<double>>(3, {0.7, 0.7, 0.7}));
  const auto o = aggregate(r);
  ASSERT_TRUE(o);
  EXPECT_EQ(o->o1, 0.0);
  EXPECT_EQ(o->o2, 0.0);
  EXPECT_EQ(o->o3, 0.0);
}

TEST(Algorithm1, BaselineWithIdentityTransformsIsExactlyZero) {
  Dataset train;
  for (int i = 0; i < 40; ++i) {
    train.push_back({"tr" + std::to_string(i), i % 2 ? "int f(void) { return 0; }" : "void g(char *d) { strcpy(d, s); }", i % 2 ? 0 : 1});
  }
  BaselineConfig cfg;
  cfg.epochs = 2;
  BaselineTechnique tech(cfg);
  const auto ts = fixtures::identity_transforms(2);
  const auto o = aggregate(run_a1(ts, train, train, tech, {}));
  ASSERT_TRUE(o);
  EXPECT_EQ(o->o1, 0.0);
  EXPECT_EQ(o->o2, 0.0);
  EXPECT_EQ(o->o3, 0.0);
}

TEST(Algorithm1, Preconditions) {
  StubTechnique tech([](const std::string&, const std::string&) { return 0.5; });
  const auto one = fixtures::identity_transforms(1);
  EXPECT_THROW(run_a1(one, tiny(4), tiny(4), tech, {}), Error);
  const auto two = fixtures::identity_transforms(2);
  EXPECT_THROW(run_a1(two, tiny(4), Dataset{}, tech, {}), Error);
}

TEST(Algorithm1, ResumesFromCheckpoints) {
  const fs::path dir = fresh_dir("vdbench_bench_resume");
  BenchOptions opts;
  opts.out_dir = dir;
  auto table = [](const std::string& tr, const std::string& te) {
    return 0.5 + 0.01 * static_cast<double>(tr.size()) + 0.001 * static_cast<double>(te.size());
  };
  const auto ts = fixtures::identity_transforms(3);
  StubTechnique first(table);
  const A1Report a = run_a1(ts, tiny(8), tiny(6, "q"), first, opts);
  EXPECT_EQ(a.resumed, 0u);

  StubTechnique second(table);
  second.fail_training = true;
  const A1Report b = run_a1(ts, tiny(8), tiny(6, "q"), second, opts);
  EXPECT_EQ(b.resumed, a.cell_count());
  EXPECT_EQ(b.evaluations, 0u);
  std::ostringstream ja, jb;
  emit_report(a, ReportFormat::kCsv, ja);
  emit_report(b, ReportFormat::kCsv, jb);
  EXPECT_EQ(ja.str(), jb.str());

  // Drop one cell: only that cell is recomputed.
  const auto victim = fs::directory_iterator(dir / "cells")->path();
  fs::remove(victim);
  StubTechnique third(table);
  const A1Report c = run_a1(ts, tiny(8), tiny(6, "q"), third, opts);
  EXPECT_EQ(c.evaluations, 1u);
  EXPECT_LE(third.trainings, 1);
  EXPECT_EQ(aggregate(c)->o3, aggregate(a)->o3);

  // A different training set changes every key.
  StubTechnique fourth(table);
  const A1Report d = run_a1(ts, tiny(10), tiny(6, "q"), fourth, opts);
  EXPECT_EQ(d.resumed, 0u);
}

TEST(Algorithm1, ReportsRoundTripAndMarkPartial) {
  const fs::path dir = fresh_dir("vdbench_bench_report");
  fs::create_directories(dir);
  A1Report r = run_table_a1(0.6, {0.58, 0.56}, {{0.60, 0.55}, {0.54, 0.59}});
  std::ostringstream json;
  emit_report(r, ReportFormat::kJson, json);
  std::ofstream(dir / "report.json") << json.str();
  const A1Report back = load_a1_report(dir / "report.json");
  EXPECT_EQ(back.grid, r.grid);
  EXPECT_EQ(back.test_only, r.test_only);
  EXPECT_EQ(back.base, r.base);

  r.grid[1][0].reset();
  EXPECT_FALSE(r.complete());
  EXPECT_FALSE(aggregate(r));
  EXPECT_FALSE(technique_row(r));
  std::ostringstream md;
  emit_report(r, ReportFormat::kMarkdown, md);
  EXPECT_NE(md.str().find("Partial report"), std::string::npos);
  EXPECT_NE(md.str().find("n/a"), std::string::npos);
}

TEST(Derived, RestorationAndExtraDecrease) {
  const DerivedStats a = derived_stats({-0.020, -0.008, -0.027});
  EXPECT_NEAR(*a.restoration, 0.6, 1e-12);
  EXPECT_NEAR(*a.extra_decrease, 0.35, 1e-12);
  const DerivedStats b = derived_stats({-0.030, -0.007, -0.037});
  EXPECT_NEAR(*b.restoration, 23.0 / 30.0, 1e-12);
  EXPECT_NEAR(*b.extra_decrease, 0.7 / 3.0, 1e-12);
  const DerivedStats none = derived_stats({0.01, 0.02, 0.0});
  EXPECT_FALSE(none.restoration);
  EXPECT_FALSE(none.extra_decrease);
  EXPECT_FALSE(none.note.empty());
  EXPECT_FALSE(derived_stats({0.0, 0.0, 0.0}).restoration);
}

// Averaging the per-row fractions differs from taking the fraction of the
// averaged outputs; both are reported.
TEST(Derived, PerTechniqueAveraging) {
  const std::vector<TechniqueRow> rows{{"VulBERTa", 0.875, {-0.067, -0.011, -0.057}},
                                       {"CoTexT", 0.873, {-0.007, -0.005, -0.018}},
                                       {"PLBart", 0.865, {-0.014, -0.007, -0.035}}};
  const DerivedSummary s = summarize_techniques(rows);
  ASSERT_EQ(s.per_technique.size(), 3u);
  EXPECT_NEAR(*s.per_technique[0].restoration, 0.056 / 0.067, 1e-12);
  EXPECT_NEAR(*s.mean_of_fractions.restoration, (0.056 / 0.067 + 0.002 / 0.007 + 0.5) / 3, 1e-12);
  EXPECT_NEAR(s.mean_outputs.o1, -0.088 / 3, 1e-12);
  EXPECT_NEAR(*s.of_mean_outputs.restoration, (0.088 - 0.023) / 0.088, 1e-12);

  std::ostringstream md;
  emit_summary(rows, ReportFormat::kMarkdown, md);
  for (const char* label : {"restoration (from averaged o1, o2)", "restoration (mean of per-technique fractions)",
                            "extra decrease (from averaged o1, o3)", "extra decrease (mean of per-technique fractions)"}) {
    EXPECT_NE(md.str().find(label), std::string::npos) << label;
  }
}

TEST(Algorithm2, OutputsFromStubScores) {
  const std::vector<double> amplified{0.51, 0.53, 0.50};
  StubTechnique tech([&](const std::string& tr, const std::string& te) {
    if (te == "Te") return 0.64;
    if (tr == "Tr") return 0.52;
    return amplified[std::stoi(fixtures::tag_suffix(tr).substr(1)) - 1];
  });
  Dataset vpt;
  for (int i = 0; i < 4; ++i) {
    vpt.push_back({"v" + std::to_string(i), "int v(void) { return 0; }", 1, std::nullopt, std::nullopt, "p" + std::to_string(i)});
    vpt.push_back({"p" + std::to_string(i), "int v(void) { return 1; }", 0, std::nullopt, std::nullopt, "v" + std::to_string(i)});
  }
  const auto ts = fixtures::identity_transforms(3);
  const A2Report r = run_a2(ts, tiny(8), tiny(4, "q"), vpt, tech, {});
  EXPECT_EQ(r.reference, 0.64);
  const auto o = aggregate(r);
  ASSERT_TRUE(o);
  EXPECT_DOUBLE_EQ(o->o1, 0.52);
  EXPECT_NEAR(o->o2, (0.51 + 0.53 + 0.50) / 3, 1e-12);
  EXPECT_NEAR(o->o3, (0.51 + 0.53 + 0.50) / 3 - 0.52, 1e-12);

  Dataset unbalanced = vpt;
  unbalanced.pop_back();
  tech.fail_training = true;  // validation happens before any training
  EXPECT_THROW(run_a2(ts, tiny(8), {}, unbalanced, tech, {}), DataError);
  Dataset unpaired = vpt;
  unpaired[0].pair_id.reset();
  unpaired[1].pair_id.reset();
  EXPECT_THROW(run_a2(ts, tiny(8), {}, unpaired, tech, {}), DataError);
}

TEST(ReportFormats, Parse) {
  EXPECT_EQ(parse_report_format("csv"), ReportFormat::kCsv);
  EXPECT_EQ(parse_report_format("md"), ReportFormat::kMarkdown);
  EXPECT_EQ(parse_report_format("json"), ReportFormat::kJson);
  EXPECT_FALSE(parse_report_format("xml"));
}

TEST(BenchTransforms, CarrySkippedSamplesThrough) {
  TransformSpec spec;
  spec.id = TransformId::kT1;
  spec.seed = 2;
  const BenchTransform t = bench_transform(spec);
  EXPECT_EQ(t.name, "t1");
  EXPECT_NE(t.key.find("seed=2"), std::string::npos);
  const Dataset in{{"a", "int f(int x) { return x; }", 1}, {"m", "MACRO(x) { return 1; }", 0}};
  std::size_t skips = 0;
  const Dataset out = t.amplify(in, nullptr, &skips);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(skips, 1u);
  EXPECT_NE(out[0].code, in[0].code);
  EXPECT_EQ(out[1], in[1]);
}
