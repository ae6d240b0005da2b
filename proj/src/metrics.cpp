#include "vdbench/metrics.hpp"

#include "vdbench/error.hpp"

namespace vdbench {

std::string_view to_string(MetricId metric) noexcept { return metric == MetricId::kF1 ? "f1" : "accuracy"; }

std::optional<MetricId> parse_metric(std::string_view name) noexcept {
  if (name == "acc" || name == "accuracy") return MetricId::kAccuracy;
  if (name == "f1") return MetricId::kF1;
  return std::nullopt;
}

Confusion confusion(std::span<const int> labels, std::span<const int> predictions) {
  if (labels.size() != predictions.size()) throw Error("label and prediction counts differ");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool actual = labels[i] == 1;
    const bool predicted = predictions[i] == 1;
    if (actual && predicted) ++c.tp;
    else if (!actual && predicted) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double accuracy(const Confusion& c) noexcept {
  return c.total() == 0 ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double f1(const Confusion& c, bool* undefined) noexcept {
  if (undefined) *undefined = (c.tp + c.fp == 0) && (c.tp + c.fn == 0);
  const double precision = c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double recall = c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double metric_value(MetricId metric, const Confusion& c, bool* undefined) noexcept {
  if (undefined) *undefined = false;
  return metric == MetricId::kF1 ? f1(c, undefined) : accuracy(c);
}

}  // namespace vdbench
