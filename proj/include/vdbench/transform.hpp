#pragma once

// Semantic-preserving rewrites of single C functions. Every transformation is
// a deterministic function of (id, seed, sample id, sample code) plus, where
// it applies, the auxiliary corpus (t10) or the adversary model (ADV).
//
//   t1   rename every parameter to a fresh identifier
//   t2   permute the parameter list and the arguments of recursive calls
//   t3   rename the function and its recursive call sites
//   t4   insert `if (0) { <dead statement> }` as the first body statement
//   t5   insert a block comment at a statement boundary in the body
//   t6   move the body into a fresh helper and forward to it
//   t7   insert whitespace between tokens
//   t8   define an empty `static void` function and call it first thing
//   t9   remove all comments
//   t10  append a training sample's code as a block comment
//   t11  one of t1..t10, drawn per sample
//   ADV  insert `int <name>;` with <name> chosen to maximise the model's loss

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vdbench/corpus.hpp"
#include "vdbench/model.hpp"

namespace vdbench {

enum class TransformId { kT1 = 1, kT2, kT3, kT4, kT5, kT6, kT7, kT8, kT9, kT10, kT11, kAdv };

std::string to_string(TransformId id);
/// "t1".."t11" and "adv" (case-insensitive).
std::optional<TransformId> parse_transform(std::string_view name);
/// Comma separated ids and inclusive ranges: "t1..t11", "t1,t5,t10".
std::vector<TransformId> parse_transform_list(std::string_view text);

/// True for the transformations that need the function header.
bool needs_shape(TransformId id) noexcept;

/// The only delta a transformation may introduce, as checked by
/// verify_allowed_change.
enum class AllowedChange {
  kParamsRenamed,           // t1
  kParamsPermuted,          // t2
  kFunctionRenamed,         // t3
  kDeadBranchInserted,      // t4
  kCommentInserted,         // t5
  kBodyOutlined,            // t6
  kWhitespaceInserted,      // t7
  kEmptyCallInserted,       // t8
  kCommentsRemoved,         // t9
  kTrailingCommentAdded,    // t10
  kDelegated,               // t11: whatever the drawn transformation allows
  kDeclarationInserted,     // ADV
};

AllowedChange allowed_change(TransformId id) noexcept;
std::string_view describe(AllowedChange change) noexcept;

struct TransformSpec {
  TransformId id = TransformId::kT1;
  std::uint64_t seed = 0;
  std::shared_ptr<const Dataset> aux_corpus;  // required by t10 (and t11)
  std::size_t adv_budget = 8;
  std::shared_ptr<ModelHandle> adv_model;     // required by ADV
};

struct ApplyResult {
  enum class Status { kApplied, kSkipped };
  Status status = Status::kApplied;
  CodeSample sample;     // transformed; same id and label
  TransformId applied;   // delegate for t11, otherwise spec.id
  std::string reason;    // why it was skipped

  bool skipped() const noexcept { return status == Status::kSkipped; }
};

/// Throws LexError when the input does not lex and Error when a required
/// input (aux corpus, model) is missing. Functions the transformation cannot
/// handle come back as kSkipped.
ApplyResult apply(const TransformSpec& spec, const CodeSample& sample);

/// The transformation t11 delegates to for this sample.
TransformId t11_choice(std::uint64_t seed, std::string_view sample_id);

struct SkipRecord {
  std::string id;
  TransformId transform;
  std::string reason;
};

struct AmplifyResult {
  Dataset samples;
  std::vector<SkipRecord> skips;
  std::vector<std::pair<std::string, TransformId>> choices;  // per output sample
};

/// One output per non-skipped input, order preserved.
AmplifyResult amplify(std::span<const CodeSample> dataset, const TransformSpec& spec);

/// Inserts `int <name>;` at the top of the body, choosing among `budget`
/// fresh names the one that minimises the model's probability of the true
/// label; ties go to the first candidate.
CodeSample adv_insert(ModelHandle& model, const CodeSample& sample, std::size_t budget, std::uint64_t seed);

struct VerifyResult {
  bool pass = true;
  std::string diff;  // first offending difference when !pass
};

/// Token-level check that `after` differs from `before` only as the spec's
/// AllowedChange permits.
VerifyResult verify_allowed_change(const CodeSample& before, const CodeSample& after, const TransformSpec& spec);

}  // namespace vdbench
