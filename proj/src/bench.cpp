#include "vdbench/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "vdbench/error.hpp"
#include "vdbench/hashing.hpp"

namespace vdbench {

using json = nlohmann::json;

BenchTransform bench_transform(TransformSpec spec) {
  BenchTransform t;
  t.name = to_string(spec.id);
  t.key = t.name + ":seed=" + std::to_string(spec.seed);
  if (spec.aux_corpus) t.key += ":aux=" + sha256_hex(to_jsonl(*spec.aux_corpus));
  if (spec.id == TransformId::kAdv) t.key += ":budget=" + std::to_string(spec.adv_budget);
  t.needs_model = spec.id == TransformId::kAdv;
  t.amplify = [spec](std::span<const CodeSample> data, const std::shared_ptr<ModelHandle>& base,
                     std::size_t* skips) {
    TransformSpec s = spec;
    if (s.id == TransformId::kAdv) s.adv_model = base;
    Dataset out;
    out.reserve(data.size());
    std::size_t skipped = 0;
    for (const CodeSample& sample : data) {
      ApplyResult r = apply(s, sample);
      if (r.skipped()) {
        ++skipped;
        out.push_back(sample);
      } else {
        out.push_back(std::move(r.sample));
      }
    }
    if (skips) *skips = skipped;
    return out;
  };
  return t;
}

BenchTransform identity_transform(std::string name) {
  BenchTransform t;
  t.key = "identity:" + name;
  t.name = std::move(name);
  t.amplify = [](std::span<const CodeSample> data, const std::shared_ptr<ModelHandle>&, std::size_t* skips) {
    if (skips) *skips = 0;
    return Dataset(data.begin(), data.end());
  };
  return t;
}

std::size_t A1Report::cell_count() const noexcept {
  std::size_t n = base ? 1 : 0;
  for (const auto& c : test_only) n += c ? 1 : 0;
  for (const auto& row : grid) {
    for (const auto& c : row) n += c ? 1 : 0;
  }
  return n;
}

bool A1Report::complete() const noexcept {
  const std::size_t n = size();
  return n > 0 && cell_count() == 1 + n + n * n;
}

std::size_t A2Report::cell_count() const noexcept {
  std::size_t n = (reference ? 1 : 0) + (base ? 1 : 0);
  for (const auto& c : amplified) n += c ? 1 : 0;
  return n;
}

bool A2Report::complete() const noexcept {
  if (!base || amplified.empty()) return false;
  for (const auto& c : amplified) {
    if (!c) return false;
  }
  return true;
}

std::optional<Outputs> aggregate(const A1Report& r) {
  if (!r.complete()) return std::nullopt;
  const std::size_t n = r.size();
  const double base = *r.base;
  Outputs o;
  double off = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    o.o1 += *r.test_only[k] - base;
    o.o2 += *r.grid[k][k] - base;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != k) off += *r.grid[k][j] - base;
    }
  }
  o.o1 /= static_cast<double>(n);
  o.o2 /= static_cast<double>(n);
  o.o3 = off / static_cast<double>(n * (n - 1));
  return o;
}

std::optional<Outputs> aggregate(const A2Report& r) {
  if (!r.complete()) return std::nullopt;
  Outputs o;
  o.o1 = *r.base;
  double effects = 0.0;
  for (const auto& s : r.amplified) {
    o.o2 += *s;
    effects += *s - o.o1;
  }
  o.o2 /= static_cast<double>(r.amplified.size());
  o.o3 = effects / static_cast<double>(r.amplified.size());
  return o;
}

// ---------------------------------------------------------------------------
// Checkpoint store.

namespace {

struct Cell {
  double score = 0;
  std::vector<double> per_epoch;
  std::vector<std::string> warnings;
  std::size_t skips = 0;  // samples the amplification carried through unchanged
};

class CellStore {
 public:
  explicit CellStore(const std::filesystem::path& out) {
    if (!out.empty()) {
      dir_ = out / "cells";
      std::filesystem::create_directories(dir_);
    }
  }

  static std::string key_of(const json& material) { return sha256_hex(material.dump()); }

  std::optional<Cell> get(const json& material) const {
    if (dir_.empty()) return std::nullopt;
    const auto path = dir_ / (key_of(material) + ".json");
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    try {
      const json doc = json::parse(in);
      if (doc.at("material") != material) return std::nullopt;
      Cell c;
      c.score = doc.at("score").get<double>();
      c.per_epoch = doc.value("per_epoch", std::vector<double>{});
      c.warnings = doc.value("warnings", std::vector<std::string>{});
      c.skips = doc.value("skips", std::size_t{0});
      return c;
    } catch (const json::exception&) {
      return std::nullopt;  // a torn write; recompute
    }
  }

  void put(const json& material, const Cell& c) const {
    if (dir_.empty()) return;
    const auto path = dir_ / (key_of(material) + ".json");
    const json doc = {{"material", material},
                      {"score", c.score},
                      {"per_epoch", c.per_epoch},
                      {"warnings", c.warnings},
                      {"skips", c.skips}};
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw Error("cannot write checkpoint " + tmp);
      out << doc.dump() << '\n';
    }
    std::filesystem::rename(tmp, path);
  }

 private:
  std::filesystem::path dir_;
};

// Lazily trained models and amplified datasets shared by both procedures.
class Runner {
 public:
  Runner(std::span<const BenchTransform> transforms, std::span<const CodeSample> train, Technique& technique,
         const BenchOptions& options)
      : transforms_(transforms),
        train_(train),
        technique_(technique),
        options_(options),
        store_(options.out_dir),
        train_hash_(sha256_hex(to_jsonl(train))) {}

  json material(std::string_view train_transform, std::string_view test_hash,
                std::string_view test_transform) const {
    return json{{"technique", technique_.describe()},
                {"metric", std::string(to_string(options_.metric))},
                {"seed", options_.seed},
                {"train", train_hash_},
                {"train_transform", train_transform},
                {"test", test_hash},
                {"test_transform", test_transform}};
  }

  std::optional<Cell> cached(const json& m) {
    auto c = store_.get(m);
    if (c) ++resumed;
    return c;
  }

  Cell evaluate(ModelHandle& model, std::span<const CodeSample> test, const std::string& tag, const json& m,
                std::size_t skips) {
    log("evaluate " + tag);
    Evaluation ev = technique_.evaluate(model, test, tag, options_.metric);
    ++evaluations;
    Cell c{ev.score, ev.per_epoch, ev.warnings, skips};
    store_.put(m, c);
    return c;
  }

  const std::shared_ptr<ModelHandle>& base_model() {
    if (!base_) {
      log("train Tr");
      base_ = technique_.train(train_, options_.seed, "Tr");
      ++trainings;
    }
    return base_;
  }

  std::shared_ptr<ModelHandle> model_for(std::size_t k, const Dataset& amplified) {
    log("train Tr_" + transforms_[k].name);
    auto m = std::shared_ptr<ModelHandle>(technique_.train(amplified, options_.seed, "Tr_" + transforms_[k].name));
    ++trainings;
    return m;
  }

  Dataset amplify(std::size_t k, std::span<const CodeSample> data, std::size_t* skips) {
    const BenchTransform& t = transforms_[k];
    std::shared_ptr<ModelHandle> base;
    if (t.needs_model) base = base_model();
    return t.amplify(data, base, skips);
  }

  void log(const std::string& msg) const {
    if (options_.log) options_.log(msg);
  }

  std::size_t trainings = 0;
  std::size_t evaluations = 0;
  std::size_t resumed = 0;

 private:
  std::span<const BenchTransform> transforms_;
  std::span<const CodeSample> train_;
  Technique& technique_;
  const BenchOptions& options_;
  CellStore store_;
  std::string train_hash_;
  std::shared_ptr<ModelHandle> base_;
};

void add_warnings(std::vector<std::string>& out, const std::string& cell, const Cell& c) {
  for (const std::string& w : c.warnings) out.push_back(cell + ": " + w);
}

}  // namespace

A1Report run_a1(std::span<const BenchTransform> transforms, std::span<const CodeSample> train,
                std::span<const CodeSample> test, Technique& technique, const BenchOptions& options) {
  const std::size_t n = transforms.size();
  if (n < 2) throw Error("the over-fitting check needs at least two transformations");
  if (test.empty()) throw DataError("test set is empty");

  A1Report r;
  for (const auto& t : transforms) r.transforms.push_back(t.name);
  r.technique = technique.describe();
  r.metric = options.metric;
  r.seed = options.seed;
  r.test_only.assign(n, std::nullopt);
  r.grid.assign(n, std::vector<std::optional<double>>(n));
  r.train_skips.assign(n, 0);
  r.test_skips.assign(n, 0);

  Runner run(transforms, train, technique, options);
  const std::string test_hash = sha256_hex(to_jsonl(test));

  {
    const json m = run.material("", test_hash, "");
    auto c = run.cached(m);
    if (!c) c = run.evaluate(*run.base_model(), test, "Te", m, 0);
    r.base = c->score;
    add_warnings(r.warnings, "s[Tr,Te]", *c);
  }

  // Amplified test sets are needed by every row, so build them once.
  std::vector<std::optional<Dataset>> amplified_test(n);
  auto test_set = [&](std::size_t j) -> const Dataset& {
    if (!amplified_test[j]) amplified_test[j] = run.amplify(j, test, &r.test_skips[j]);
    return *amplified_test[j];
  };

  // Test-only cells carry the test skip count of Te_k, grid cells the train
  // skip count of Tr_k, so a resumed report matches an uninterrupted one.
  for (std::size_t k = 0; k < n; ++k) {
    const json m = run.material("", test_hash, transforms[k].key);
    auto c = run.cached(m);
    if (!c) {
      const Dataset& te = test_set(k);
      c = run.evaluate(*run.base_model(), te, "Te_" + transforms[k].name, m, r.test_skips[k]);
    }
    r.test_only[k] = c->score;
    r.test_skips[k] = c->skips;
    add_warnings(r.warnings, "s[Tr,Te_" + transforms[k].name + "]", *c);
  }

  for (std::size_t k = 0; k < n; ++k) {
    std::shared_ptr<ModelHandle> model;
    for (std::size_t j = 0; j < n; ++j) {
      const json m = run.material(transforms[k].key, test_hash, transforms[j].key);
      auto c = run.cached(m);
      if (!c) {
        if (!model) {
          const Dataset amplified = run.amplify(k, train, &r.train_skips[k]);
          model = run.model_for(k, amplified);
        }
        const Dataset& te = test_set(j);
        c = run.evaluate(*model, te, "Te_" + transforms[j].name, m, r.train_skips[k]);
      }
      r.train_skips[k] = c->skips;
      r.grid[k][j] = c->score;
      add_warnings(r.warnings, "s[Tr_" + transforms[k].name + ",Te_" + transforms[j].name + "]", *c);
    }
  }

  r.trainings = run.trainings;
  r.evaluations = run.evaluations;
  r.resumed = run.resumed;
  return r;
}

A2Report run_a2(std::span<const BenchTransform> transforms, std::span<const CodeSample> train,
                std::span<const CodeSample> test, std::span<const CodeSample> vpt, Technique& technique,
                const BenchOptions& options) {
  if (transforms.empty()) throw Error("the patch check needs at least one transformation");
  if (vpt.empty()) throw DataError("VPT set is empty");
  if (const auto problems = validate_pairs(vpt); !problems.empty()) {
    throw DataError("VPT set is not paired: " + problems.front());
  }
  for (const CodeSample& s : vpt) {
    if (!s.pair_id) throw DataError("VPT sample '" + s.id + "' has no pair_id");
  }
  if (2 * count_vulnerable(vpt) != vpt.size()) throw DataError("VPT set is not balanced");

  A2Report r;
  for (const auto& t : transforms) r.transforms.push_back(t.name);
  r.technique = technique.describe();
  r.metric = options.metric;
  r.seed = options.seed;
  r.amplified.assign(transforms.size(), std::nullopt);
  r.train_skips.assign(transforms.size(), 0);

  Runner run(transforms, train, technique, options);
  const std::string vpt_hash = sha256_hex(to_jsonl(vpt));

  if (!test.empty()) {
    const json m = run.material("", sha256_hex(to_jsonl(test)), "");
    auto c = run.cached(m);
    if (!c) c = run.evaluate(*run.base_model(), test, "Te", m, 0);
    r.reference = c->score;
    add_warnings(r.warnings, "s[Tr,Te]", *c);
  }
  {
    const json m = run.material("", vpt_hash, "");
    auto c = run.cached(m);
    if (!c) c = run.evaluate(*run.base_model(), vpt, "VPT", m, 0);
    r.base = c->score;
    add_warnings(r.warnings, "s[Tr,VPT]", *c);
  }
  for (std::size_t k = 0; k < transforms.size(); ++k) {
    const json m = run.material(transforms[k].key, vpt_hash, "");
    auto c = run.cached(m);
    if (!c) {
      const Dataset amplified = run.amplify(k, train, &r.train_skips[k]);
      auto model = run.model_for(k, amplified);
      c = run.evaluate(*model, vpt, "VPT", m, r.train_skips[k]);
    }
    r.amplified[k] = c->score;
    r.train_skips[k] = c->skips;
    add_warnings(r.warnings, "s[Tr_" + transforms[k].name + ",VPT]", *c);
  }

  r.trainings = run.trainings;
  r.evaluations = run.evaluations;
  r.resumed = run.resumed;
  return r;
}

// ---------------------------------------------------------------------------

DerivedStats derived_stats(const Outputs& o) {
  DerivedStats d;
  if (!(o.o1 < 0)) {
    d.note = "not applicable: o1 >= 0 (no drop to restore)";
    return d;
  }
  d.restoration = (o.o2 - o.o1) / -o.o1;
  d.extra_decrease = (o.o3 - o.o1) / o.o1;
  return d;
}

DerivedSummary summarize_techniques(std::span<const TechniqueRow> rows) {
  DerivedSummary out;
  if (rows.empty()) return out;
  double restoration = 0;
  double extra = 0;
  std::size_t applicable = 0;
  for (const TechniqueRow& row : rows) {
    out.mean_outputs.o1 += row.outputs.o1;
    out.mean_outputs.o2 += row.outputs.o2;
    out.mean_outputs.o3 += row.outputs.o3;
    DerivedStats d = derived_stats(row.outputs);
    if (d.restoration) {
      restoration += *d.restoration;
      extra += *d.extra_decrease;
      ++applicable;
    }
    out.per_technique.push_back(std::move(d));
  }
  const auto n = static_cast<double>(rows.size());
  out.mean_outputs.o1 /= n;
  out.mean_outputs.o2 /= n;
  out.mean_outputs.o3 /= n;
  out.of_mean_outputs = derived_stats(out.mean_outputs);
  if (applicable == rows.size()) {
    out.mean_of_fractions.restoration = restoration / n;
    out.mean_of_fractions.extra_decrease = extra / n;
  } else {
    out.mean_of_fractions.note = "not applicable: some technique has o1 >= 0";
  }
  return out;
}

std::optional<TechniqueRow> technique_row(const A1Report& report) {
  auto o = aggregate(report);
  if (!o) return std::nullopt;
  return TechniqueRow{report.technique, report.base, *o};
}

std::optional<TechniqueRow> technique_row(const A2Report& report) {
  auto o = aggregate(report);
  if (!o) return std::nullopt;
  return TechniqueRow{report.technique, report.reference, *o};
}

// ---------------------------------------------------------------------------
// Rendering.

std::optional<ReportFormat> parse_report_format(std::string_view name) noexcept {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "md" || name == "markdown") return ReportFormat::kMarkdown;
  if (name == "json") return ReportFormat::kJson;
  return std::nullopt;
}

namespace {

constexpr std::string_view kMissing = "n/a";

std::string num(std::optional<double> v, int digits = 6) {
  if (!v) return std::string(kMissing);
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << *v;
  return out.str();
}

std::string csv_num(std::optional<double> v) {
  if (!v) return "";
  std::ostringstream out;
  out << std::setprecision(17) << *v;
  return out.str();
}

json opt(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

std::optional<double> from_json(const json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

std::optional<double> minus(std::optional<double> a, std::optional<double> b) {
  if (!a || !b) return std::nullopt;
  return *a - *b;
}

void technique_note(const std::string& technique, std::ostream& out) {
  if (technique.starts_with("baseline(")) {
    out << "\nThe baseline's hyperparameters are this tool's defaults (or command-line overrides), not values "
           "tuned for any published detector.\n";
  }
}

json outputs_json(const std::optional<Outputs>& o) {
  if (!o) return nullptr;
  return json{{"o1", o->o1}, {"o2", o->o2}, {"o3", o->o3}};
}

}  // namespace

void emit_report(const A1Report& r, ReportFormat format, std::ostream& out) {
  const std::size_t n = r.size();
  const auto o = aggregate(r);
  switch (format) {
    case ReportFormat::kJson: {
      json grid = json::array();
      for (const auto& row : r.grid) {
        json cells = json::array();
        for (const auto& c : row) cells.push_back(opt(c));
        grid.push_back(std::move(cells));
      }
      json test_only = json::array();
      for (const auto& c : r.test_only) test_only.push_back(opt(c));
      json doc = {{"procedure", "a1"},
                  {"technique", r.technique},
                  {"metric", std::string(to_string(r.metric))},
                  {"seed", r.seed},
                  {"transforms", r.transforms},
                  {"complete", r.complete()},
                  {"base", opt(r.base)},
                  {"test_only", std::move(test_only)},
                  {"grid", std::move(grid)},
                  {"train_skips", r.train_skips},
                  {"test_skips", r.test_skips},
                  {"warnings", r.warnings},
                  {"outputs", outputs_json(o)}};
      if (o) {
        const DerivedStats d = derived_stats(*o);
        doc["derived"] = {{"restoration", opt(d.restoration)}, {"extra_decrease", opt(d.extra_decrease)},
                          {"note", d.note}};
      }
      out << doc.dump(2) << '\n';
      return;
    }
    case ReportFormat::kCsv: {
      out << "train,test,score,effect\n";
      out << "Tr,Te," << csv_num(r.base) << ",0\n";
      for (std::size_t k = 0; k < n; ++k) {
        out << "Tr,Te_" << r.transforms[k] << ',' << csv_num(r.test_only[k]) << ','
            << csv_num(minus(r.test_only[k], r.base)) << '\n';
      }
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
          out << "Tr_" << r.transforms[k] << ",Te_" << r.transforms[j] << ',' << csv_num(r.grid[k][j]) << ','
              << csv_num(minus(r.grid[k][j], r.base)) << '\n';
        }
      }
      return;
    }
    case ReportFormat::kMarkdown: {
      if (!r.complete()) out << "**Partial report: " << r.cell_count() << " of " << 1 + n + n * n << " cells.**\n\n";
      out << "| technique | s | o1 | o2 | o3 |\n|---|---|---|---|---|\n";
      out << "| " << r.technique << " | " << num(r.base, 3) << " | " << num(o ? std::optional(o->o1) : std::nullopt, 3)
          << " | " << num(o ? std::optional(o->o2) : std::nullopt, 3) << " | "
          << num(o ? std::optional(o->o3) : std::nullopt, 3) << " |\n\n";
      out << "Metric: " << to_string(r.metric) << ", seed " << r.seed << ". Scores s[f[row], column]:\n\n";
      out << "| train \\ test | Te |";
      for (const auto& t : r.transforms) out << " Te_" << t << " |";
      out << "\n|---|---|";
      for (std::size_t j = 0; j < n; ++j) out << "---|";
      out << "\n| Tr | " << num(r.base) << " |";
      for (std::size_t j = 0; j < n; ++j) out << ' ' << num(r.test_only[j]) << " |";
      out << '\n';
      for (std::size_t k = 0; k < n; ++k) {
        out << "| Tr_" << r.transforms[k] << " | " << kMissing << " |";
        for (std::size_t j = 0; j < n; ++j) out << ' ' << num(r.grid[k][j]) << " |";
        out << '\n';
      }
      out << "\nSkipped samples (carried through unchanged):";
      for (std::size_t k = 0; k < n; ++k) {
        out << ' ' << r.transforms[k] << " train " << r.train_skips[k] << " / test " << r.test_skips[k] << ';';
      }
      out << '\n';
      if (o) {
        const DerivedStats d = derived_stats(*o);
        out << "\nRestoration fraction: " << num(d.restoration, 4) << "; extra decrease fraction: "
            << num(d.extra_decrease, 4) << (d.note.empty() ? "" : " (" + d.note + ")") << '\n';
      }
      technique_note(r.technique, out);
      for (const auto& w : r.warnings) out << "\nWarning: " << w << '\n';
      return;
    }
  }
}

void emit_report(const A2Report& r, ReportFormat format, std::ostream& out) {
  const std::size_t n = r.amplified.size();
  const auto o = aggregate(r);
  switch (format) {
    case ReportFormat::kJson: {
      json amplified = json::array();
      for (const auto& c : r.amplified) amplified.push_back(opt(c));
      json doc = {{"procedure", "a2"},
                  {"technique", r.technique},
                  {"metric", std::string(to_string(r.metric))},
                  {"seed", r.seed},
                  {"transforms", r.transforms},
                  {"complete", r.complete()},
                  {"reference", opt(r.reference)},
                  {"base", opt(r.base)},
                  {"amplified", std::move(amplified)},
                  {"train_skips", r.train_skips},
                  {"warnings", r.warnings},
                  {"outputs", outputs_json(o)}};
      out << doc.dump(2) << '\n';
      return;
    }
    case ReportFormat::kCsv: {
      out << "train,test,score,effect\n";
      if (r.reference) out << "Tr,Te," << csv_num(r.reference) << ",\n";
      out << "Tr,VPT," << csv_num(r.base) << ",0\n";
      for (std::size_t k = 0; k < n; ++k) {
        out << "Tr_" << r.transforms[k] << ",VPT," << csv_num(r.amplified[k]) << ','
            << csv_num(minus(r.amplified[k], r.base)) << '\n';
      }
      return;
    }
    case ReportFormat::kMarkdown: {
      if (!r.complete()) out << "**Partial report: " << r.cell_count() << " cells.**\n\n";
      out << "| technique | s[f[Tr],Te] | o1 | o2 | o3 |\n|---|---|---|---|---|\n";
      out << "| " << r.technique << " | " << num(r.reference, 3) << " | "
          << num(o ? std::optional(o->o1) : std::nullopt, 3) << " | "
          << num(o ? std::optional(o->o2) : std::nullopt, 3) << " | "
          << num(o ? std::optional(o->o3) : std::nullopt, 3) << " |\n\n";
      out << "| train | s[f[train],VPT] | effect |\n|---|---|---|\n";
      out << "| Tr | " << num(r.base) << " | " << num(0.0) << " |\n";
      for (std::size_t k = 0; k < n; ++k) {
        out << "| Tr_" << r.transforms[k] << " | " << num(r.amplified[k]) << " | "
            << num(minus(r.amplified[k], r.base)) << " |\n";
      }
      out << "\nSkipped training samples (carried through unchanged):";
      for (std::size_t k = 0; k < n; ++k) out << ' ' << r.transforms[k] << ' ' << r.train_skips[k] << ';';
      out << '\n';
      technique_note(r.technique, out);
      for (const auto& w : r.warnings) out << "\nWarning: " << w << '\n';
      return;
    }
  }
}

void emit_summary(std::span<const TechniqueRow> rows, ReportFormat format, std::ostream& out) {
  const DerivedSummary sum = summarize_techniques(rows);
  std::optional<double> mean_score;
  if (!rows.empty() && std::all_of(rows.begin(), rows.end(), [](const TechniqueRow& r) { return r.score.has_value(); })) {
    double total = 0;
    for (const auto& r : rows) total += *r.score;
    mean_score = total / static_cast<double>(rows.size());
  }
  const std::string restoration_avg = "restoration (from averaged o1, o2)";
  const std::string restoration_per = "restoration (mean of per-technique fractions)";
  const std::string extra_avg = "extra decrease (from averaged o1, o3)";
  const std::string extra_per = "extra decrease (mean of per-technique fractions)";
  switch (format) {
    case ReportFormat::kJson: {
      json techniques = json::array();
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& d = sum.per_technique[i];
        techniques.push_back({{"technique", rows[i].technique},
                              {"score", opt(rows[i].score)},
                              {"o1", rows[i].outputs.o1},
                              {"o2", rows[i].outputs.o2},
                              {"o3", rows[i].outputs.o3},
                              {"restoration", opt(d.restoration)},
                              {"extra_decrease", opt(d.extra_decrease)}});
      }
      json doc = {{"techniques", std::move(techniques)},
                  {"average", {{"score", opt(mean_score)},
                               {"o1", sum.mean_outputs.o1},
                               {"o2", sum.mean_outputs.o2},
                               {"o3", sum.mean_outputs.o3}}},
                  {restoration_avg, opt(sum.of_mean_outputs.restoration)},
                  {restoration_per, opt(sum.mean_of_fractions.restoration)},
                  {extra_avg, opt(sum.of_mean_outputs.extra_decrease)},
                  {extra_per, opt(sum.mean_of_fractions.extra_decrease)}};
      out << doc.dump(2) << '\n';
      return;
    }
    case ReportFormat::kCsv: {
      out << "technique,score,o1,o2,o3,restoration,extra_decrease\n";
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& d = sum.per_technique[i];
        out << rows[i].technique << ',' << csv_num(rows[i].score) << ',' << csv_num(rows[i].outputs.o1) << ','
            << csv_num(rows[i].outputs.o2) << ',' << csv_num(rows[i].outputs.o3) << ',' << csv_num(d.restoration)
            << ',' << csv_num(d.extra_decrease) << '\n';
      }
      out << "average," << csv_num(mean_score) << ',' << csv_num(sum.mean_outputs.o1) << ','
          << csv_num(sum.mean_outputs.o2) << ',' << csv_num(sum.mean_outputs.o3) << ",,\n";
      out << restoration_avg << ",,,,,," << csv_num(sum.of_mean_outputs.restoration) << '\n';
      out << restoration_per << ",,,,,," << csv_num(sum.mean_of_fractions.restoration) << '\n';
      out << extra_avg << ",,,,,," << csv_num(sum.of_mean_outputs.extra_decrease) << '\n';
      out << extra_per << ",,,,,," << csv_num(sum.mean_of_fractions.extra_decrease) << '\n';
      return;
    }
    case ReportFormat::kMarkdown: {
      out << "| technique | s | o1 | o2 | o3 | restoration | extra decrease |\n|---|---|---|---|---|---|---|\n";
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& d = sum.per_technique[i];
        out << "| " << rows[i].technique << " | " << num(rows[i].score, 3) << " | " << num(rows[i].outputs.o1, 3)
            << " | " << num(rows[i].outputs.o2, 3) << " | " << num(rows[i].outputs.o3, 3) << " | "
            << num(d.restoration, 4) << " | " << num(d.extra_decrease, 4) << " |\n";
      }
      out << "| average | " << num(mean_score, 3) << " | " << num(sum.mean_outputs.o1, 3) << " | "
          << num(sum.mean_outputs.o2, 3) << " | " << num(sum.mean_outputs.o3, 3) << " | | |\n\n";
      out << "- " << restoration_avg << ": " << num(sum.of_mean_outputs.restoration, 4) << '\n';
      out << "- " << restoration_per << ": " << num(sum.mean_of_fractions.restoration, 4) << '\n';
      out << "- " << extra_avg << ": " << num(sum.of_mean_outputs.extra_decrease, 4) << '\n';
      out << "- " << extra_per << ": " << num(sum.mean_of_fractions.extra_decrease, 4) << '\n';
      return;
    }
  }
}

namespace {

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("malformed report " + path.string() + ": " + e.what());
  }
}

MetricId metric_of(const json& doc) {
  auto m = parse_metric(doc.at("metric").get<std::string>());
  if (!m) throw DataError("report has an unknown metric");
  return *m;
}

}  // namespace

A1Report load_a1_report(const std::filesystem::path& path) {
  const json doc = read_json(path);
  try {
    if (doc.at("procedure") != "a1") throw DataError(path.string() + " is not an over-fitting report");
    A1Report r;
    r.technique = doc.at("technique");
    r.metric = metric_of(doc);
    r.seed = doc.at("seed");
    r.transforms = doc.at("transforms").get<std::vector<std::string>>();
    r.base = from_json(doc.at("base"));
    for (const auto& c : doc.at("test_only")) r.test_only.push_back(from_json(c));
    for (const auto& row : doc.at("grid")) {
      std::vector<std::optional<double>> cells;
      for (const auto& c : row) cells.push_back(from_json(c));
      r.grid.push_back(std::move(cells));
    }
    r.train_skips = doc.at("train_skips").get<std::vector<std::size_t>>();
    r.test_skips = doc.at("test_skips").get<std::vector<std::size_t>>();
    r.warnings = doc.at("warnings").get<std::vector<std::string>>();
    const std::size_t n = r.transforms.size();
    if (r.test_only.size() != n || r.grid.size() != n) throw DataError(path.string() + ": grid size mismatch");
    for (const auto& row : r.grid) {
      if (row.size() != n) throw DataError(path.string() + ": grid size mismatch");
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError("malformed report " + path.string() + ": " + e.what());
  }
}

A2Report load_a2_report(const std::filesystem::path& path) {
  const json doc = read_json(path);
  try {
    if (doc.at("procedure") != "a2") throw DataError(path.string() + " is not a patch report");
    A2Report r;
    r.technique = doc.at("technique");
    r.metric = metric_of(doc);
    r.seed = doc.at("seed");
    r.transforms = doc.at("transforms").get<std::vector<std::string>>();
    r.reference = from_json(doc.at("reference"));
    r.base = from_json(doc.at("base"));
    for (const auto& c : doc.at("amplified")) r.amplified.push_back(from_json(c));
    r.train_skips = doc.at("train_skips").get<std::vector<std::size_t>>();
    r.warnings = doc.at("warnings").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw DataError("malformed report " + path.string() + ": " + e.what());
  }
}

}  // namespace vdbench
