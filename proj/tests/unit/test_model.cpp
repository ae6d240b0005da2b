#include <gtest/gtest.h>

#include <filesystem>

#include "vdbench/adapter.hpp"
#include "vdbench/error.hpp"
#include "vdbench/model.hpp"
#include "vdbench/synthetic.hpp"

using namespace vdbench;
namespace fs = std::filesystem;

namespace {

Dataset toy_set() {
  Dataset d;
  for (int i = 0; i < 40; ++i) {
    const bool vuln = i % 2 == 0;
    const std::string body = vuln ? "memcpy(d, s, n);" : "return 0;";
    d.push_back({"s" + std::to_string(i), "int f" + std::to_string(i) + "(int n) { " + body + " }", vuln ? 1 : 0});
  }
  return d;
}

std::string mock(const std::string& mode) { return std::string(VDBENCH_MOCK_ADAPTER) + " " + mode; }

}  // namespace

TEST(Baseline, FeatureTokensMarkComments) {
  const auto f = feature_tokens("int a; /* Hello world */");
  EXPECT_NE(std::find(f.begin(), f.end(), "<comment>"), f.end());
  EXPECT_NE(std::find(f.begin(), f.end(), "Hello"), f.end());
  EXPECT_NE(std::find(f.begin(), f.end(), "int"), f.end());
}

TEST(Baseline, LearnsSeparableSignal) {
  const Dataset d = toy_set();
  BaselineConfig cfg;
  cfg.epochs = 5;
  auto m = train_baseline(d, cfg);
  EXPECT_EQ(m->epoch_count(), 5u);
  EXPECT_DOUBLE_EQ(evaluate_model(*m, d, MetricId::kAccuracy).score, 1.0);
  EXPECT_GT(m->predict_one(d[0]), 0.5);
  EXPECT_LT(m->predict_one(d[1]), 0.5);
}

TEST(Baseline, SeededAndPersisted) {
  const Dataset d = toy_set();
  BaselineConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 9;
  auto a = train_baseline(d, cfg);
  auto b = train_baseline(d, cfg);
  EXPECT_EQ(a->predict(d), b->predict(d));

  const fs::path p = fs::temp_directory_path() / "vdbench_model_test.json";
  a->save(p);
  auto c = BaselineModel::load(p);
  EXPECT_EQ(c->epoch_count(), a->epoch_count());
  EXPECT_EQ(c->predict(d), a->predict(d));
  EXPECT_EQ(c->config().describe(), cfg.describe());
}

TEST(Baseline, RejectsDegenerateTraining) {
  EXPECT_THROW(train_baseline(Dataset{}, BaselineConfig{}), DataError);
  Dataset one_class{{"a", "int a;", 1}, {"b", "int b;", 1}};
  EXPECT_THROW(train_baseline(one_class, BaselineConfig{}), DataError);
}

TEST(Evaluate, EpochMax) {
  struct Flipping : ModelHandle {
    std::string_view kind() const override { return "flip"; }
    std::size_t epoch_count() const override { return 3; }
    std::vector<double> predict(std::span<const CodeSample> s) override { return predict_at_epoch(2, s); }
    std::vector<double> predict_at_epoch(std::size_t epoch, std::span<const CodeSample> s) override {
      std::vector<double> p;
      for (const auto& x : s) p.push_back(epoch == 1 ? x.label : 1.0 - x.label);
      return p;
    }
  } model;
  const Dataset d = toy_set();
  const Evaluation ev = evaluate_model(model, d, MetricId::kAccuracy);
  EXPECT_EQ(ev.per_epoch, (std::vector<double>{0.0, 1.0, 0.0}));
  EXPECT_DOUBLE_EQ(ev.score, 1.0);
  EXPECT_THROW(evaluate_model(model, Dataset{}, MetricId::kAccuracy), DataError);
}

TEST(Evaluate, ConstantAndUndefinedF1) {
  ConstantModel never(0.0);
  const Dataset negatives{{"a", "int a;", 0}, {"b", "int b;", 0}};
  const Evaluation ev = evaluate_model(never, negatives, MetricId::kF1);
  EXPECT_EQ(ev.score, 0.0);
  EXPECT_FALSE(ev.warnings.empty());
}

TEST(CoinFlip, DeterministicPerIdAndSeed) {
  const Dataset d = toy_set();
  CoinFlipModel a(1), b(1), c(2);
  EXPECT_EQ(a.predict(d), b.predict(d));
  EXPECT_NE(a.predict(d), c.predict(d));
  Dataset reversed(d.rbegin(), d.rend());
  EXPECT_EQ(a.predict_one(d[3]), a.predict(reversed)[d.size() - 4]);
}

TEST(Adapter, TrainsAndPredicts) {
  AdapterOptions opts;
  opts.command = mock("ok");
  opts.timeout = std::chrono::milliseconds(5000);
  AdapterTechnique tech(opts);
  const Dataset d = toy_set();
  auto m = tech.train(d, 3, "Tr");
  const auto p = m->predict(d);
  ASSERT_EQ(p.size(), d.size());
  EXPECT_DOUBLE_EQ(p[0], 0.9);
  EXPECT_DOUBLE_EQ(p[1], 0.1);
  EXPECT_DOUBLE_EQ(evaluate_model(*m, d, MetricId::kAccuracy).score, 1.0);
}

class AdapterFailure : public ::testing::TestWithParam<std::string> {};

TEST_P(AdapterFailure, RaisesProtocolError) {
  AdapterOptions opts;
  opts.command = mock(GetParam());
  opts.timeout = std::chrono::milliseconds(500);
  const Dataset d = toy_set();
  EXPECT_THROW(
      {
        auto m = adapter_train(opts, d, 1);
        m->predict(d);
      },
      ProtocolError);
}

INSTANTIATE_TEST_SUITE_P(Modes, AdapterFailure,
                         ::testing::Values("train-error", "bad-prob", "wrong-id", "garbage", "hang", "exit"));

TEST(Adapter, MissingCommand) {
  AdapterOptions opts;
  opts.command = "/nonexistent/adapter";
  opts.timeout = std::chrono::milliseconds(2000);
  EXPECT_THROW(adapter_train(opts, toy_set(), 1), ProtocolError);
}

TEST(Synthetic, BalancedAndSeeded) {
  SyntheticConfig cfg;
  cfg.size = 200;
  cfg.seed = 4;
  const Dataset a = synthetic_corpus(cfg);
  ASSERT_EQ(a.size(), 200u);
  EXPECT_EQ(count_vulnerable(a), 100u);
  EXPECT_EQ(a, synthetic_corpus(cfg));
  cfg.seed = 5;
  EXPECT_NE(a, synthetic_corpus(cfg));
}
