#pragma once

// Bigram language model over code tokens with add-alpha smoothing, used to
// score how natural a snippet looks (cross-entropy in bits per token).

#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vdbench/corpus.hpp"

namespace vdbench {

/// Non-whitespace, non-comment token texts. Directives count as one token.
std::vector<std::string> ngram_tokens(std::string_view code);

class NgramModel {
 public:
  static constexpr std::string_view kBos = "\x02<s>";
  static constexpr std::string_view kUnk = "\x02<unk>";

  explicit NgramModel(double alpha = 1.0);

  void add(std::span<const std::string> tokens);

  /// Smoothed P(word | prev) over vocab plus UNK. Unknown texts map to UNK.
  double probability(std::string_view prev, std::string_view word) const;

  double alpha() const noexcept { return alpha_; }
  std::size_t vocab_size() const noexcept { return unigram_.size(); }
  bool in_vocab(std::string_view word) const;
  std::size_t unigram_count(std::string_view word) const;
  std::size_t bigram_count(std::string_view prev, std::string_view word) const;
  std::size_t context_count(std::string_view prev) const;

 private:
  double alpha_;
  std::unordered_map<std::string, std::size_t> unigram_;
  std::unordered_map<std::string, std::size_t> context_;
  std::unordered_map<std::string, std::unordered_map<std::string, std::size_t>> bigram_;
};

/// Throws DataError for an empty corpus and Error for alpha <= 0.
NgramModel train_ngram(std::span<const CodeSample> corpus, double alpha = 1.0);

/// Mean -log2 P(w_i | w_{i-1}) over the snippet's code tokens, with the
/// first token conditioned on the begin marker. Throws DataError when the
/// snippet has no code tokens.
double cross_entropy(const NgramModel& model, std::string_view code);

struct EntropySummary {
  std::size_t n = 0;
  double mean = 0;
  double median = 0;
  double q1 = 0;
  double q3 = 0;
  double min = 0;
  double max = 0;
};

/// Linear-interpolation quartiles (the usual "type 7" definition).
EntropySummary summarize(std::vector<double> values);

struct NaturalnessRow {
  std::string transform;  // "base" for the untransformed corpus
  EntropySummary summary;
  double base_mean = 0;   // base mean over the same sample ids
};

/// One row for the base corpus followed by one per transformed corpus.
/// Every transformed sample must have a base sample with the same id;
/// DataError otherwise.
std::vector<NaturalnessRow> naturalness_report(const NgramModel& model, std::span<const CodeSample> base,
                                               const std::map<std::string, Dataset>& transformed);

void write_naturalness_csv(std::ostream& out, std::span<const NaturalnessRow> rows);

}  // namespace vdbench
