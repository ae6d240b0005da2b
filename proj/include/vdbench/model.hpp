#pragma once

// Trained classifiers and the techniques that produce them. A ModelHandle
// maps code to the probability of the vulnerable class; evaluation reports
// the best score across the epoch snapshots the handle exposes.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vdbench/corpus.hpp"
#include "vdbench/metrics.hpp"

namespace vdbench {

struct Provenance {
  std::string technique;     // e.g. "baseline(dim=65536,epochs=10,...)"
  std::string dataset_hash;  // SHA-256 of the training JSONL
  std::string dataset_tag;   // e.g. "Tr", "Tr_t5"
  std::uint64_t seed = 0;
  int epochs = 0;
};

class ModelHandle {
 public:
  virtual ~ModelHandle() = default;

  virtual std::string_view kind() const = 0;
  /// Probability of label 1 for each sample, in input order, from the final model.
  virtual std::vector<double> predict(std::span<const CodeSample> samples) = 0;
  /// Snapshots available for epoch-max scoring; at least one.
  virtual std::size_t epoch_count() const { return 1; }
  virtual std::vector<double> predict_at_epoch(std::size_t epoch, std::span<const CodeSample> samples);

  double predict_one(const CodeSample& sample);
  const Provenance& provenance() const noexcept { return provenance_; }
  void set_provenance(Provenance p) { provenance_ = std::move(p); }

 private:
  Provenance provenance_;
};

struct Evaluation {
  double score = 0.0;              // max over per_epoch
  std::vector<double> per_epoch;   // one entry per snapshot
  std::vector<std::string> warnings;
};

/// Throws DataError on an empty test set.
Evaluation evaluate_model(ModelHandle& model, std::span<const CodeSample> test, MetricId metric);

// ---------------------------------------------------------------------------
// Built-in baseline: logistic regression over hashed bag-of-token features.

struct BaselineConfig {
  std::size_t feature_dim = 1u << 16;
  int epochs = 10;
  double learning_rate = 0.5;
  double l2 = 1e-6;
  std::uint64_t seed = 0;
  bool eval_each_epoch = true;

  std::string describe() const;
};

/// What the baseline sees: code tokens (whitespace dropped) plus, for every
/// comment, a `<comment>` marker and the words inside it.
std::vector<std::string> feature_tokens(std::string_view code);

class BaselineModel final : public ModelHandle {
 public:
  BaselineModel(BaselineConfig config, std::vector<std::vector<double>> epoch_weights);

  std::string_view kind() const override { return "baseline"; }
  std::vector<double> predict(std::span<const CodeSample> samples) override;
  std::size_t epoch_count() const override { return epoch_weights_.size(); }
  std::vector<double> predict_at_epoch(std::size_t epoch, std::span<const CodeSample> samples) override;

  const BaselineConfig& config() const noexcept { return config_; }
  /// Weights of snapshot `epoch`; the last slot is the bias.
  std::span<const double> weights(std::size_t epoch) const { return epoch_weights_.at(epoch); }

  std::vector<double> train_loss;      // mean log-loss on the training set after each epoch
  std::vector<double> eval_scores;     // per-epoch accuracy on the eval set, when given

  void save(const std::filesystem::path& path) const;
  static std::unique_ptr<BaselineModel> load(const std::filesystem::path& path);

 private:
  double probability(std::span<const double> w, std::string_view code) const;

  BaselineConfig config_;
  std::vector<std::vector<double>> epoch_weights_;
};

/// Seeded SGD; throws DataError for an empty or single-class training set.
std::unique_ptr<BaselineModel> train_baseline(std::span<const CodeSample> train, const BaselineConfig& config,
                                              std::span<const CodeSample> eval_set = {});

// ---------------------------------------------------------------------------
// Reference predictors.

/// Seeded coin flip per sample id.
class CoinFlipModel final : public ModelHandle {
 public:
  explicit CoinFlipModel(std::uint64_t seed) : seed_(seed) {}
  std::string_view kind() const override { return "coin"; }
  std::vector<double> predict(std::span<const CodeSample> samples) override;

 private:
  std::uint64_t seed_;
};

class ConstantModel final : public ModelHandle {
 public:
  explicit ConstantModel(double p) : p_(p) {}
  std::string_view kind() const override { return "constant"; }
  std::vector<double> predict(std::span<const CodeSample> samples) override {
    return std::vector<double>(samples.size(), p_);
  }

 private:
  double p_;
};

// ---------------------------------------------------------------------------
// Techniques: how to turn a training set into a model. The benchmark drives
// these; `tag` names the dataset (Tr, Tr_t3, Te_t1, VPT) for stubs and logs.

class Technique {
 public:
  virtual ~Technique() = default;
  /// Stable description; part of every checkpoint key.
  virtual std::string describe() const = 0;
  virtual std::unique_ptr<ModelHandle> train(std::span<const CodeSample> train, std::uint64_t seed,
                                             std::string_view tag) = 0;
  virtual Evaluation evaluate(ModelHandle& model, std::span<const CodeSample> test, std::string_view tag,
                              MetricId metric) {
    (void)tag;
    return evaluate_model(model, test, metric);
  }
};

class BaselineTechnique final : public Technique {
 public:
  explicit BaselineTechnique(BaselineConfig config) : config_(config) {}
  std::string describe() const override { return config_.describe(); }
  std::unique_ptr<ModelHandle> train(std::span<const CodeSample> train, std::uint64_t seed,
                                     std::string_view tag) override;

 private:
  BaselineConfig config_;
};

}  // namespace vdbench
