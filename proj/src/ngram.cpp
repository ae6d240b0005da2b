#include "vdbench/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <unordered_map>

#include "vdbench/clex.hpp"
#include "vdbench/error.hpp"

namespace vdbench {

std::vector<std::string> ngram_tokens(std::string_view code) {
  std::vector<std::string> out;
  for (const clex::Token& t : clex::tokenize(code)) {
    if (!t.is_trivia()) out.push_back(t.text);
  }
  return out;
}

NgramModel::NgramModel(double alpha) : alpha_(alpha) {
  if (!(alpha > 0)) throw Error("ngram alpha must be positive");
}

void NgramModel::add(std::span<const std::string> tokens) {
  std::string prev(kBos);
  for (const std::string& w : tokens) {
    ++unigram_[w];
    ++context_[prev];
    ++bigram_[prev][w];
    prev = w;
  }
}

bool NgramModel::in_vocab(std::string_view word) const { return unigram_.contains(std::string(word)); }

std::size_t NgramModel::unigram_count(std::string_view word) const {
  auto it = unigram_.find(std::string(word));
  return it == unigram_.end() ? 0 : it->second;
}

std::size_t NgramModel::context_count(std::string_view prev) const {
  auto it = context_.find(std::string(prev));
  return it == context_.end() ? 0 : it->second;
}

std::size_t NgramModel::bigram_count(std::string_view prev, std::string_view word) const {
  auto it = bigram_.find(std::string(prev));
  if (it == bigram_.end()) return 0;
  auto jt = it->second.find(std::string(word));
  return jt == it->second.end() ? 0 : jt->second;
}

double NgramModel::probability(std::string_view prev, std::string_view word) const {
  // UNK never occurs in training, so an unknown context has zero counts and
  // an unknown word has a zero bigram count.
  const std::string_view ctx = (prev == kBos || in_vocab(prev)) ? prev : kUnk;
  const std::string_view w = in_vocab(word) ? word : kUnk;
  const double outcomes = static_cast<double>(vocab_size() + 1);
  return (static_cast<double>(bigram_count(ctx, w)) + alpha_) /
         (static_cast<double>(context_count(ctx)) + alpha_ * outcomes);
}

NgramModel train_ngram(std::span<const CodeSample> corpus, double alpha) {
  if (corpus.empty()) throw DataError("cannot train an n-gram model on an empty corpus");
  NgramModel model(alpha);
  for (const CodeSample& s : corpus) model.add(ngram_tokens(s.code));
  return model;
}

double cross_entropy(const NgramModel& model, std::string_view code) {
  const std::vector<std::string> tokens = ngram_tokens(code);
  if (tokens.empty()) throw DataError("snippet has no code tokens");
  double bits = 0.0;
  std::string_view prev = NgramModel::kBos;
  for (const std::string& w : tokens) {
    bits -= std::log2(model.probability(prev, w));
    prev = w;
  }
  return bits / static_cast<double>(tokens.size());
}

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

EntropySummary summarize(std::vector<double> values) {
  EntropySummary s;
  s.n = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.mean = mean_of(values);
  s.median = quantile(values, 0.5);
  s.q1 = quantile(values, 0.25);
  s.q3 = quantile(values, 0.75);
  s.min = values.front();
  s.max = values.back();
  return s;
}

std::vector<NaturalnessRow> naturalness_report(const NgramModel& model, std::span<const CodeSample> base,
                                               const std::map<std::string, Dataset>& transformed) {
  std::unordered_map<std::string, double> base_h;
  std::vector<double> base_values;
  for (const CodeSample& s : base) {
    const double h = cross_entropy(model, s.code);
    if (!base_h.emplace(s.id, h).second) throw DataError("duplicate base id '" + s.id + "'");
    base_values.push_back(h);
  }
  std::vector<NaturalnessRow> rows;
  const double all_base_mean = mean_of(base_values);
  rows.push_back(NaturalnessRow{"base", summarize(base_values), all_base_mean});
  for (const auto& [name, data] : transformed) {
    std::vector<double> values;
    std::vector<double> aligned;
    for (const CodeSample& s : data) {
      auto it = base_h.find(s.id);
      if (it == base_h.end()) throw DataError(name + ": sample '" + s.id + "' has no base counterpart");
      values.push_back(cross_entropy(model, s.code));
      aligned.push_back(it->second);
    }
    rows.push_back(NaturalnessRow{name, summarize(std::move(values)), mean_of(aligned)});
  }
  return rows;
}

void write_naturalness_csv(std::ostream& out, std::span<const NaturalnessRow> rows) {
  out << "transform,n,mean,median,q1,q3,min,max,base_mean\n";
  out << std::setprecision(10);
  for (const NaturalnessRow& r : rows) {
    const EntropySummary& s = r.summary;
    out << r.transform << ',' << s.n << ',' << s.mean << ',' << s.median << ',' << s.q1 << ',' << s.q3 << ','
        << s.min << ',' << s.max << ',' << r.base_mean << '\n';
  }
}

}  // namespace vdbench
