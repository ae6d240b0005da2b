#pragma once

// Generated C functions whose labels are recoverable from tokens. Besides a
// weak genuine signal (an unsafe library call), the corpus carries two
// spurious artifacts that real datasets are known to have: parameter names
// that correlate with the label, and comments that mostly occur in benign
// code. Transformations that disturb one artifact but not the other make
// over-fitting to a transformation observable with a linear token model.

#include <cstddef>
#include <cstdint>

#include "vdbench/corpus.hpp"

namespace vdbench {

struct SyntheticConfig {
  std::size_t size = 4000;        // balanced: size/2 of each label
  std::uint64_t seed = 0;
  double sink_vulnerable = 0.7;   // P(unsafe call | label 1)
  double sink_benign = 0.3;       // P(unsafe call | label 0)
  double param_cue = 0.9;         // P(parameter names come from the label's pool)
  double comment_benign = 0.9;    // P(comment | label 0)
  double comment_vulnerable = 0.1;
};

/// Ids are "syn-<index>"; labels alternate 1, 0, 1, ...
Dataset synthetic_corpus(const SyntheticConfig& config);

}  // namespace vdbench
