#include "vdbench/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "vdbench/clex.hpp"
#include "vdbench/error.hpp"
#include "vdbench/hashing.hpp"
#include "vdbench/naming.hpp"
#include "vdbench/random.hpp"

namespace vdbench {

using json = nlohmann::json;

std::vector<double> ModelHandle::predict_at_epoch(std::size_t epoch, std::span<const CodeSample> samples) {
  (void)epoch;
  return predict(samples);
}

double ModelHandle::predict_one(const CodeSample& sample) {
  return predict(std::span<const CodeSample>(&sample, 1)).front();
}

Evaluation evaluate_model(ModelHandle& model, std::span<const CodeSample> test, MetricId metric) {
  if (test.empty()) throw DataError("cannot evaluate on an empty test set");
  std::vector<int> labels;
  labels.reserve(test.size());
  for (const CodeSample& s : test) labels.push_back(s.label);

  Evaluation ev;
  const std::size_t epochs = std::max<std::size_t>(1, model.epoch_count());
  for (std::size_t e = 0; e < epochs; ++e) {
    const std::vector<double> probs = model.predict_at_epoch(e, test);
    if (probs.size() != test.size()) throw Error("model returned the wrong number of predictions");
    std::vector<int> predictions;
    predictions.reserve(probs.size());
    for (double p : probs) predictions.push_back(predicted_label(p));
    bool undefined = false;
    ev.per_epoch.push_back(metric_value(metric, confusion(labels, predictions), &undefined));
    if (undefined) {
      ev.warnings.push_back("F1 undefined at epoch " + std::to_string(e + 1) +
                            " (no predicted and no actual positives); reported as 0");
    }
  }
  ev.score = *std::max_element(ev.per_epoch.begin(), ev.per_epoch.end());
  return ev;
}

// ---------------------------------------------------------------------------

std::string BaselineConfig::describe() const {
  // Shortest round-trip form: exact, and readable in report headers.
  auto num = [](double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  };
  std::ostringstream out;
  out << "baseline(dim=" << feature_dim << ",epochs=" << epochs << ",lr=" << num(learning_rate) << ",l2=" << num(l2)
      << ")";
  return out.str();
}

std::vector<std::string> feature_tokens(std::string_view code) {
  std::vector<std::string> out;
  for (const clex::Token& t : clex::tokenize(code)) {
    if (t.is(clex::TokenKind::kWhitespace)) continue;
    if (t.is_comment()) {
      out.emplace_back("<comment>");
      // Order of words inside a comment does not matter for a bag of tokens.
      std::vector<std::string> words;
      for (const std::string& w : words_in(t.text)) words.push_back(w);
      std::sort(words.begin(), words.end());
      out.insert(out.end(), words.begin(), words.end());
      continue;
    }
    out.push_back(t.text);
  }
  return out;
}

namespace {

struct Features {
  std::vector<std::uint32_t> index;
  double value = 0.0;  // every active feature has the same weight 1/sqrt(k)
};

Features featurize(std::string_view code, std::size_t dim) {
  Features f;
  for (const std::string& tok : feature_tokens(code)) {
    f.index.push_back(static_cast<std::uint32_t>(fnv1a64(tok) % dim));
  }
  std::sort(f.index.begin(), f.index.end());
  f.index.erase(std::unique(f.index.begin(), f.index.end()), f.index.end());
  f.value = f.index.empty() ? 0.0 : 1.0 / std::sqrt(static_cast<double>(f.index.size()));
  return f;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double score(std::span<const double> w, const Features& f) {
  double z = w.back();
  for (std::uint32_t i : f.index) z += w[i] * f.value;
  return z;
}

double log_loss(double p, int label) {
  constexpr double kEps = 1e-12;
  p = std::clamp(p, kEps, 1.0 - kEps);
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

}  // namespace

BaselineModel::BaselineModel(BaselineConfig config, std::vector<std::vector<double>> epoch_weights)
    : config_(config), epoch_weights_(std::move(epoch_weights)) {
  if (epoch_weights_.empty()) throw Error("baseline model needs at least one snapshot");
  for (const auto& w : epoch_weights_) {
    if (w.size() != config_.feature_dim + 1) throw Error("baseline snapshot has the wrong dimension");
  }
}

double BaselineModel::probability(std::span<const double> w, std::string_view code) const {
  return sigmoid(score(w, featurize(code, config_.feature_dim)));
}

std::vector<double> BaselineModel::predict(std::span<const CodeSample> samples) {
  return predict_at_epoch(epoch_weights_.size() - 1, samples);
}

std::vector<double> BaselineModel::predict_at_epoch(std::size_t epoch, std::span<const CodeSample> samples) {
  const std::vector<double>& w = epoch_weights_.at(epoch);
  std::vector<double> out;
  out.reserve(samples.size());
  for (const CodeSample& s : samples) out.push_back(probability(w, s.code));
  return out;
}

void BaselineModel::save(const std::filesystem::path& path) const {
  json doc;
  doc["kind"] = "baseline";
  doc["config"] = {{"feature_dim", config_.feature_dim},
                   {"epochs", config_.epochs},
                   {"learning_rate", config_.learning_rate},
                   {"l2", config_.l2},
                   {"seed", config_.seed}};
  json snaps = json::array();
  for (const auto& w : epoch_weights_) {
    json sparse = json::array();
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      if (w[i] != 0.0) sparse.push_back({i, w[i]});
    }
    snaps.push_back({{"bias", w.back()}, {"weights", std::move(sparse)}});
  }
  doc["snapshots"] = std::move(snaps);
  doc["train_loss"] = train_loss;
  doc["eval_scores"] = eval_scores;
  const Provenance& p = provenance();
  doc["provenance"] = {{"technique", p.technique}, {"dataset_hash", p.dataset_hash},
                       {"dataset_tag", p.dataset_tag}, {"seed", p.seed}, {"epochs", p.epochs}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << doc.dump() << '\n';
}

std::unique_ptr<BaselineModel> BaselineModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
    BaselineConfig cfg;
    const json& c = doc.at("config");
    cfg.feature_dim = c.at("feature_dim").get<std::size_t>();
    cfg.epochs = c.at("epochs").get<int>();
    cfg.learning_rate = c.at("learning_rate").get<double>();
    cfg.l2 = c.at("l2").get<double>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    std::vector<std::vector<double>> snaps;
    for (const json& s : doc.at("snapshots")) {
      std::vector<double> w(cfg.feature_dim + 1, 0.0);
      for (const json& kv : s.at("weights")) w.at(kv.at(0).get<std::size_t>()) = kv.at(1).get<double>();
      w.back() = s.at("bias").get<double>();
      snaps.push_back(std::move(w));
    }
    auto model = std::make_unique<BaselineModel>(cfg, std::move(snaps));
    model->train_loss = doc.value("train_loss", std::vector<double>{});
    model->eval_scores = doc.value("eval_scores", std::vector<double>{});
    if (doc.contains("provenance")) {
      const json& p = doc["provenance"];
      model->set_provenance(Provenance{p.value("technique", ""), p.value("dataset_hash", ""),
                                       p.value("dataset_tag", ""), p.value("seed", std::uint64_t{0}),
                                       p.value("epochs", 0)});
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError("malformed model file " + path.string() + ": " + e.what());
  }
}

std::unique_ptr<BaselineModel> train_baseline(std::span<const CodeSample> train, const BaselineConfig& config,
                                              std::span<const CodeSample> eval_set) {
  if (train.empty()) throw DataError("training set is empty");
  if (config.epochs < 1) throw Error("epochs must be at least 1");
  if (config.feature_dim < 2) throw Error("feature_dim must be at least 2");
  if (!(config.learning_rate > 0)) throw Error("learning_rate must be positive");
  const std::size_t positives = count_vulnerable(train);
  if (positives == 0 || positives == train.size()) throw DataError("training set contains a single class");

  const std::size_t dim = config.feature_dim;
  std::vector<Features> features;
  features.reserve(train.size());
  for (const CodeSample& s : train) features.push_back(featurize(s.code, dim));

  std::vector<double> w(dim + 1, 0.0);
  std::vector<std::vector<double>> snapshots;
  std::vector<double> losses;
  std::vector<double> eval_scores;
  std::vector<std::size_t> order(train.size());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = Rng::derive(config.seed, "baseline-sgd", std::to_string(epoch));
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t i : order) {
      const Features& f = features[i];
      const double g = sigmoid(score(w, f)) - static_cast<double>(train[i].label);
      for (std::uint32_t k : f.index) w[k] -= config.learning_rate * (g * f.value + config.l2 * w[k]);
      w.back() -= config.learning_rate * g;
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < train.size(); ++i) loss += log_loss(sigmoid(score(w, features[i])), train[i].label);
    losses.push_back(loss / static_cast<double>(train.size()));
    snapshots.push_back(w);
  }

  auto model = std::make_unique<BaselineModel>(config, std::move(snapshots));
  model->train_loss = std::move(losses);
  if (!eval_set.empty() && config.eval_each_epoch) {
    model->eval_scores = evaluate_model(*model, eval_set, MetricId::kAccuracy).per_epoch;
  }
  model->set_provenance(Provenance{config.describe(), sha256_hex(to_jsonl(train)), "", config.seed, config.epochs});
  return model;
}

std::unique_ptr<ModelHandle> BaselineTechnique::train(std::span<const CodeSample> train, std::uint64_t seed,
                                                      std::string_view tag) {
  BaselineConfig cfg = config_;
  cfg.seed = seed;
  auto model = train_baseline(train, cfg);
  Provenance p = model->provenance();
  p.dataset_tag = std::string(tag);
  model->set_provenance(std::move(p));
  return model;
}

// ---------------------------------------------------------------------------

std::vector<double> CoinFlipModel::predict(std::span<const CodeSample> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const CodeSample& s : samples) out.push_back(Rng::derive(seed_, s.id, "coin").unit());
  return out;
}

}  // namespace vdbench
