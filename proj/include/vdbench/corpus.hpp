#pragma once

// Function-level vulnerability datasets: loading, validation, cleaning and
// splitting. Records are line-delimited JSON with the CodeXGLUE field names.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vdbench {

struct CodeSample {
  std::string id;
  std::string code;
  int label = 0;  // 1 = vulnerable
  std::optional<std::string> project;
  std::optional<std::string> commit_id;
  std::optional<std::string> pair_id;

  bool operator==(const CodeSample&) const = default;
};

using Dataset = std::vector<CodeSample>;

enum class Part { kTrain = 0, kValid = 1, kTest = 2 };
inline constexpr std::array<Part, 3> kAllParts = {Part::kTrain, Part::kValid, Part::kTest};
std::string_view to_string(Part part) noexcept;
std::optional<Part> parse_part(std::string_view name) noexcept;

struct DatasetSplit {
  Dataset train;
  Dataset valid;
  Dataset test;

  Dataset& operator[](Part p) noexcept;
  const Dataset& operator[](Part p) const noexcept;
  std::size_t size() const noexcept { return train.size() + valid.size() + test.size(); }
  /// All samples, train then valid then test.
  Dataset all() const;
  bool operator==(const DatasetSplit&) const = default;
};

struct Reject {
  std::size_t line = 0;  // 1-based line in the source file
  std::string reason;
};

struct LoadResult {
  Dataset samples;
  std::vector<Reject> rejects;
};

struct LoadOptions {
  bool strict = false;       // first reject throws DataError instead
  bool write_rejects = true;  // write <file>.rejects next to the input when non-empty
};

/// Parses records (fields id, func, target, project?, commit_id?, pair_id?;
/// `idx` is accepted for `id`). Invalid records are collected, never dropped
/// silently. Throws DataError when the file is unreadable.
LoadResult load_records(const std::filesystem::path& path, const LoadOptions& options = {});

/// Same, from in-memory JSONL text. `source` names the input in messages.
LoadResult parse_records(std::string_view jsonl, const LoadOptions& options = {},
                         std::string_view source = "<memory>");

/// Loads one file into a split using an optional per-record `split` field
/// (train/valid/test, default train).
DatasetSplit load_dataset(const std::filesystem::path& path, const LoadOptions& options = {},
                          std::vector<Reject>* rejects = nullptr);

/// Loads the three CodeXGLUE-style part files; empty paths give empty parts.
DatasetSplit load_split(const std::filesystem::path& train, const std::filesystem::path& valid,
                        const std::filesystem::path& test, const LoadOptions& options = {});

std::string to_jsonl(std::span<const CodeSample> samples);
void save_jsonl(std::span<const CodeSample> samples, const std::filesystem::path& path);
std::filesystem::path rejects_path(const std::filesystem::path& input);
void write_rejects(std::span<const Reject> rejects, const std::filesystem::path& path);

/// Checks pair_id references: each must resolve to a sample with the opposite
/// label. Returns one message per violation.
std::vector<std::string> validate_pairs(std::span<const CodeSample> samples);

/// Whitespace runs outside literals and comments collapse to one space;
/// leading and trailing whitespace is dropped.
std::string normalize_whitespace(std::string_view code);

struct DedupResult {
  DatasetSplit split;
  std::array<std::size_t, 3> removed{};  // indexed by Part
};

enum class DedupMode {
  kWhitespace,  // normalize_whitespace equality (default)
  kCodeTokens,  // equal code-token sequences; also ignores comments
};

/// Exact-duplicate removal across all parts; the first occurrence (train,
/// then valid, then test) survives.
DedupResult dedup(const DatasetSplit& split, DedupMode mode = DedupMode::kWhitespace);

/// Replaces identifiers and comments containing any leak_list entry
/// (case-insensitive substring) with fresh random identifiers, consistently
/// within each function. Comments keep their delimiters. Throws Error when
/// the list has no non-empty entry.
DatasetSplit scrub_leaking_tokens(const DatasetSplit& split, std::span<const std::string> leak_list,
                                  std::uint64_t seed);
CodeSample scrub_leaking_tokens(const CodeSample& sample, std::span<const std::string> leak_list,
                                std::uint64_t seed);

/// One token per non-empty, non-`#` line.
std::vector<std::string> load_leak_list(const std::filesystem::path& path);

std::size_t count_vulnerable(std::span<const CodeSample> samples) noexcept;

}  // namespace vdbench
