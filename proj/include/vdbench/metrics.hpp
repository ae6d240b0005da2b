#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace vdbench {

enum class MetricId { kAccuracy, kF1 };

std::string_view to_string(MetricId metric) noexcept;
/// Accepts acc, accuracy, f1.
std::optional<MetricId> parse_metric(std::string_view name) noexcept;

/// Probability exactly 0.5 counts as a positive prediction.
constexpr int predicted_label(double probability) noexcept { return probability >= 0.5 ? 1 : 0; }

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
};

Confusion confusion(std::span<const int> labels, std::span<const int> predictions);

double accuracy(const Confusion& c) noexcept;

/// Harmonic mean of precision and recall; 0 when precision + recall is 0.
/// `undefined` is set when there are no predicted and no actual positives.
double f1(const Confusion& c, bool* undefined = nullptr) noexcept;

double metric_value(MetricId metric, const Confusion& c, bool* undefined = nullptr) noexcept;

}  // namespace vdbench
