#pragma once

// The two benchmark procedures.
//
// Over-fitting check: train f[Tr] and f[Tr_k] for each transformation k, score
// every model on Te and on each amplified Te_j, and summarise the effects
// e[X] = s[X] - s[f[Tr],Te]:
//   o1 = mean_k e[Tr, Te_k]
//   o2 = mean_k e[Tr_k, Te_k]
//   o3 = mean_{k != j} e[Tr_k, Te_j]
//
// Vulnerability vs patch: score f[Tr] and every f[Tr_k] on a paired set VPT:
//   o1 = s[f[Tr], VPT], o2 = mean_k s[f[Tr_k], VPT], o3 = mean_k (s[f[Tr_k], VPT] - o1)
//
// Every score is a cell persisted under <out>/cells/<sha256>.json, keyed by
// everything that determines it, so an interrupted run resumes where it
// stopped. Aggregation is a separate pass over the stored cells.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "vdbench/corpus.hpp"
#include "vdbench/metrics.hpp"
#include "vdbench/model.hpp"
#include "vdbench/transform.hpp"

namespace vdbench {

/// A transformation as the benchmark uses it: samples the transformation
/// cannot handle are carried through unchanged and counted.
struct BenchTransform {
  std::string name;  // t1, t5, ...
  std::string key;   // everything that determines the output; enters cell keys
  bool needs_model = false;  // amplification queries the base model
  std::function<Dataset(std::span<const CodeSample>, const std::shared_ptr<ModelHandle>& base, std::size_t* skips)>
      amplify;
};

/// Wraps a TransformSpec. ADV uses the base model f[Tr] as its adversary.
BenchTransform bench_transform(TransformSpec spec);
/// Returns its input; for degenerate runs and tests.
BenchTransform identity_transform(std::string name);

struct BenchOptions {
  MetricId metric = MetricId::kAccuracy;
  std::uint64_t seed = 0;          // training seed for every model
  std::filesystem::path out_dir;   // checkpoint store; none when empty
  std::function<void(const std::string&)> log;
};

struct A1Report {
  std::vector<std::string> transforms;
  std::string technique;
  MetricId metric = MetricId::kAccuracy;
  std::uint64_t seed = 0;
  std::optional<double> base;                             // s[f[Tr], Te]
  std::vector<std::optional<double>> test_only;           // s[f[Tr], Te_k]
  std::vector<std::vector<std::optional<double>>> grid;   // grid[k][j] = s[f[Tr_k], Te_j]
  std::vector<std::size_t> train_skips;                   // per transform
  std::vector<std::size_t> test_skips;
  std::vector<std::string> warnings;
  std::size_t trainings = 0;    // performed in this process
  std::size_t evaluations = 0;
  std::size_t resumed = 0;      // cells read back from the store

  std::size_t size() const noexcept { return transforms.size(); }
  /// Filled cells; 1 + N + N^2 when complete.
  std::size_t cell_count() const noexcept;
  bool complete() const noexcept;
};

struct A2Report {
  std::vector<std::string> transforms;
  std::string technique;
  MetricId metric = MetricId::kAccuracy;
  std::uint64_t seed = 0;
  std::optional<double> reference;                 // s[f[Tr], Te]
  std::optional<double> base;                      // s[f[Tr], VPT]
  std::vector<std::optional<double>> amplified;    // s[f[Tr_k], VPT]
  std::vector<std::size_t> train_skips;
  std::vector<std::string> warnings;
  std::size_t trainings = 0;
  std::size_t evaluations = 0;
  std::size_t resumed = 0;

  std::size_t cell_count() const noexcept;
  bool complete() const noexcept;
};

struct Outputs {
  double o1 = 0;
  double o2 = 0;
  double o3 = 0;
};

/// nullopt while any cell is missing.
std::optional<Outputs> aggregate(const A1Report& report);
std::optional<Outputs> aggregate(const A2Report& report);

/// Requires N >= 2 transformations.
A1Report run_a1(std::span<const BenchTransform> transforms, std::span<const CodeSample> train,
                std::span<const CodeSample> test, Technique& technique, const BenchOptions& options);

/// Requires a balanced, perfectly paired VPT; DataError otherwise, before any
/// training. `test` may be empty, in which case the reference score is omitted.
A2Report run_a2(std::span<const BenchTransform> transforms, std::span<const CodeSample> train,
                std::span<const CodeSample> test, std::span<const CodeSample> vpt, Technique& technique,
                const BenchOptions& options);

// ---------------------------------------------------------------------------
// Derived statistics.

struct DerivedStats {
  std::optional<double> restoration;     // (o2 - o1) / -o1
  std::optional<double> extra_decrease;  // (o3 - o1) / o1
  std::string note;                      // why a value is absent
};

/// Both values are absent when o1 >= 0.
DerivedStats derived_stats(const Outputs& o);

struct TechniqueRow {
  std::string technique;
  std::optional<double> score;  // s[f[Tr], Te]
  Outputs outputs;
};

struct DerivedSummary {
  std::vector<DerivedStats> per_technique;
  DerivedStats of_mean_outputs;        // from the averaged o1, o2, o3
  DerivedStats mean_of_fractions;      // per-technique fractions, then averaged
  Outputs mean_outputs;
};

DerivedSummary summarize_techniques(std::span<const TechniqueRow> rows);

/// nullopt while the report is incomplete.
std::optional<TechniqueRow> technique_row(const A1Report& report);
std::optional<TechniqueRow> technique_row(const A2Report& report);

// ---------------------------------------------------------------------------
// Reports.

enum class ReportFormat { kCsv, kMarkdown, kJson };
std::optional<ReportFormat> parse_report_format(std::string_view name) noexcept;

void emit_report(const A1Report& report, ReportFormat format, std::ostream& out);
void emit_report(const A2Report& report, ReportFormat format, std::ostream& out);
void emit_summary(std::span<const TechniqueRow> rows, ReportFormat format, std::ostream& out);

A1Report load_a1_report(const std::filesystem::path& path);
A2Report load_a2_report(const std::filesystem::path& path);

}  // namespace vdbench
