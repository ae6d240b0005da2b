#include <gtest/gtest.h>

#include <vector>

#include "vdbench/metrics.hpp"

using namespace vdbench;

TEST(Metrics, ConfusionCounts) {
  const std::vector<int> labels{1, 1, 0, 0, 1};
  const std::vector<int> preds{1, 0, 1, 0, 1};
  const Confusion c = confusion(labels, preds);
  EXPECT_EQ(c.tp, 2u);
  EXPECT_EQ(c.fn, 1u);
  EXPECT_EQ(c.fp, 1u);
  EXPECT_EQ(c.tn, 1u);
  EXPECT_DOUBLE_EQ(accuracy(c), 0.6);
}

TEST(Metrics, F1FromPrecisionHalfRecallOne) {
  // precision 2/4, recall 2/2
  const Confusion c{2, 2, 5, 0};
  EXPECT_DOUBLE_EQ(f1(c), 2.0 / 3.0);
}

TEST(Metrics, F1UndefinedWithoutPositives) {
  bool undefined = false;
  EXPECT_EQ(f1(Confusion{0, 0, 4, 0}, &undefined), 0.0);
  EXPECT_TRUE(undefined);
  undefined = false;
  EXPECT_EQ(f1(Confusion{0, 3, 1, 0}, &undefined), 0.0);
  EXPECT_FALSE(undefined);
}

TEST(Metrics, ThresholdIsInclusive) {
  EXPECT_EQ(predicted_label(0.5), 1);
  EXPECT_EQ(predicted_label(0.4999), 0);
}

TEST(Metrics, ParseNames) {
  EXPECT_EQ(parse_metric("acc"), MetricId::kAccuracy);
  EXPECT_EQ(parse_metric("accuracy"), MetricId::kAccuracy);
  EXPECT_EQ(parse_metric("f1"), MetricId::kF1);
  EXPECT_FALSE(parse_metric("auc"));
}

TEST(Metrics, MismatchedLengthsThrow) {
  const std::vector<int> labels{1, 0};
  const std::vector<int> preds{1};
  EXPECT_ANY_THROW(confusion(labels, preds));
}
