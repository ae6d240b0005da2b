#pragma once

// Vulnerability/patch pairs: each vulnerable function is paired with its
// version after the fixing commit, looked up by function name.

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vdbench/corpus.hpp"

namespace vdbench {

struct PatchLookup {
  enum class Status { kFound, kNoCommit, kNotFound, kAmbiguous };
  Status status = Status::kNotFound;
  std::string code;    // when found
  std::string detail;  // where it looked, what it matched
};

class PatchSource {
 public:
  virtual ~PatchSource() = default;
  /// Post-commit source of the function `name` changed by `commit`.
  virtual PatchLookup lookup(const std::string& commit, const std::string& name) = 0;
};

/// In-memory table for tests: commit -> files -> contents.
class FixturePatchSource final : public PatchSource {
 public:
  void add_commit(const std::string& commit, std::map<std::string, std::string> files);
  PatchLookup lookup(const std::string& commit, const std::string& name) override;

 private:
  std::map<std::string, std::map<std::string, std::string>> commits_;
};

/// Reads a local git checkout through the `git` command:
///   git show --pretty=format: --name-only <commit>   files the commit touched
///   git show <commit>:<path>                          their post-commit contents
/// Throws Error when `repo` is not a git work tree.
class GitPatchSource final : public PatchSource {
 public:
  explicit GitPatchSource(std::filesystem::path repo);
  PatchLookup lookup(const std::string& commit, const std::string& name) override;

 private:
  std::filesystem::path repo_;
};

/// Functions named `name` among the top-level definitions of `source`.
std::vector<std::string> find_functions(std::string_view source, std::string_view name);

struct PairMiss {
  std::string id;
  std::string commit;
  std::string reason;  // no-commit, not-found, ambiguous, identical
  std::string detail;
};

struct PairResult {
  Dataset samples;  // vulnerable, patch, vulnerable, patch, ...
  std::vector<PairMiss> misses;
};

/// Inputs must all have label 1 (DataError otherwise). Patches get id
/// "<vulnerable id>#patch", label 0, and pair_id set in both directions.
PairResult build_pairs(std::span<const CodeSample> vulnerable, PatchSource& source);

void write_misses(std::span<const PairMiss> misses, std::ostream& out);

/// Each pair goes to the part holding its vulnerable member in `source`.
/// DataError when a vulnerable member is in no part or in several.
DatasetSplit derive_split(const DatasetSplit& source, std::span<const CodeSample> pairs);

/// Markdown worksheet with `n` seeded pairs and a line diff of each
/// (`-` vulnerable only, `+` patch only). DataError when n exceeds the pair count.
std::string spotcheck_sample(std::span<const CodeSample> pairs, std::size_t n, std::uint64_t seed);

struct DiffLine {
  char op;  // ' ', '-', '+'
  std::string text;
};

/// Longest-common-subsequence line diff.
std::vector<DiffLine> line_diff(std::string_view before, std::string_view after);

}  // namespace vdbench
