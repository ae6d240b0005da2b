// vdbench: command-line front end. Every subcommand writes a manifest with
// the hashes of what it read and wrote.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vdbench/adapter.hpp"
#include "vdbench/bench.hpp"
#include "vdbench/clex.hpp"
#include "vdbench/corpus.hpp"
#include "vdbench/error.hpp"
#include "vdbench/manifest.hpp"
#include "vdbench/metrics.hpp"
#include "vdbench/model.hpp"
#include "vdbench/ngram.hpp"
#include "vdbench/synthetic.hpp"
#include "vdbench/transform.hpp"
#include "vdbench/vpp.hpp"

namespace fs = std::filesystem;
using namespace vdbench;

namespace {

constexpr int kUsageError = 2;
constexpr int kRunFailure = 1;

// Usage problems found after parsing, e.g. a flag that is only required in
// some combinations.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Dataset read_dataset(const fs::path& path) {
  LoadOptions opts;
  opts.strict = true;
  opts.write_rejects = false;
  return load_records(path, opts).samples;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

void write_dataset(const fs::path& path, std::span<const CodeSample> samples) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_jsonl(samples, path);
}

fs::path manifest_for(const fs::path& output) { return fs::path(output.string() + ".manifest.json"); }

void note(const std::string& msg) { std::cerr << "vdbench: " << msg << '\n'; }

MetricId metric_from(const std::string& name) {
  auto m = parse_metric(name);
  if (!m) throw UsageError("unknown metric '" + name + "'");
  return *m;
}

// ---------------------------------------------------------------------------

struct Common {
  std::vector<std::string> argv;
  std::optional<std::uint64_t> seed;

  std::uint64_t require_seed(const std::string& why) const {
    if (!seed) throw UsageError("--seed is required " + why);
    return *seed;
  }
};

struct IngestArgs {
  fs::path in, train, valid, test, out_dir, scrub;
  bool dedup = false;
  std::string dedup_mode = "whitespace";
  bool strict = false;
};

int run_ingest(const Common& c, const IngestArgs& a) {
  if (a.in.empty() == a.train.empty()) throw UsageError("give either --in or --train [--valid --test]");
  if (a.dedup_mode != "whitespace" && a.dedup_mode != "tokens") throw UsageError("--dedup-mode is whitespace or tokens");
  std::optional<std::uint64_t> seed;
  if (!a.scrub.empty()) seed = c.require_seed("with --scrub");
  RunManifest manifest("ingest", c.argv);
  if (seed) manifest.set_seed("scrub", *seed);

  // Rejects land beside each input as <input>.rejects; clear reports left by earlier runs first.
  LoadOptions opts;
  opts.strict = a.strict;
  const std::vector<std::pair<fs::path, Part>> parts =
      a.in.empty() ? std::vector<std::pair<fs::path, Part>>{{a.train, Part::kTrain}, {a.valid, Part::kValid}, {a.test, Part::kTest}}
                   : std::vector<std::pair<fs::path, Part>>{{a.in, Part::kTrain}};
  for (const auto& [path, part] : parts) {
    if (!path.empty()) fs::remove(rejects_path(path));
  }
  std::size_t rejected = 0;
  DatasetSplit split;
  for (const auto& [path, part] : parts) {
    if (path.empty()) continue;
    manifest.add_input(path);
    if (!a.in.empty()) {
      std::vector<Reject> rej;
      split = load_dataset(path, opts, &rej);
      rejected += rej.size();
    } else {
      LoadResult r = load_records(path, opts);
      rejected += r.rejects.size();
      split[part] = std::move(r.samples);
    }
    if (fs::exists(rejects_path(path))) manifest.add_output(rejects_path(path));
  }
  if (a.dedup) {
    DedupResult d = dedup(split, a.dedup_mode == "tokens" ? DedupMode::kCodeTokens : DedupMode::kWhitespace);
    note("dedup removed " + std::to_string(d.removed[0]) + "/" + std::to_string(d.removed[1]) + "/" +
         std::to_string(d.removed[2]) + " (train/valid/test)");
    split = std::move(d.split);
  }
  if (!a.scrub.empty()) {
    manifest.add_input(a.scrub);
    split = scrub_leaking_tokens(split, load_leak_list(a.scrub), *seed);
  }
  fs::create_directories(a.out_dir);
  for (Part p : kAllParts) {
    const fs::path out = a.out_dir / (std::string(to_string(p)) + ".jsonl");
    write_dataset(out, split[p]);
    manifest.add_output(out);
  }
  manifest.write(a.out_dir / "manifest.json");
  note("ingested " + std::to_string(split.size()) + " samples, " + std::to_string(rejected) + " rejected");
  return 0;
}

struct LexArgs {
  fs::path in;
  bool jsonl = false;
};

// One line per token: kind, escaped text, byte span.
int run_lex(const LexArgs& a) {
  auto dump = [](const std::string& code) {
    for (const clex::Token& t : clex::tokenize(code)) {
      std::string text;
      for (char ch : t.text) {
        switch (ch) {
          case '\n': text += "\\n"; break;
          case '\t': text += "\\t"; break;
          case '\r': text += "\\r"; break;
          case '\\': text += "\\\\"; break;
          default: text += ch;
        }
      }
      std::cout << clex::to_string(t.kind) << '\t' << text << '\t' << t.begin << '-' << t.end << '\n';
    }
  };
  if (!a.jsonl) {
    std::ifstream in(a.in, std::ios::binary);
    if (!in) throw DataError("cannot read " + a.in.string());
    std::ostringstream text;
    text << in.rdbuf();
    dump(text.str());
    return 0;
  }
  for (const CodeSample& s : read_dataset(a.in)) {
    std::cout << "# " << s.id << '\n';
    dump(s.code);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct AmplifyArgs {
  std::string transform;
  fs::path in, out, aux;
  std::size_t adv_budget = 8;
  fs::path adv_model;
  bool verify = false;
};

int run_amplify(const Common& c, const AmplifyArgs& a) {
  const std::uint64_t seed = c.require_seed("for amplify");
  auto id = parse_transform(a.transform);
  if (!id) throw UsageError("unknown transform '" + a.transform + "'");
  RunManifest manifest("amplify", c.argv);
  manifest.set_seed("transform", seed);

  TransformSpec spec;
  spec.id = *id;
  spec.seed = seed;
  spec.adv_budget = a.adv_budget;
  if (!a.aux.empty()) {
    spec.aux_corpus = std::make_shared<const Dataset>(read_dataset(a.aux));
    manifest.add_input(a.aux);
  }
  if (*id == TransformId::kAdv) {
    if (a.adv_model.empty()) throw UsageError("adv needs --model <baseline model file>");
    spec.adv_model = std::shared_ptr<ModelHandle>(BaselineModel::load(a.adv_model));
    manifest.add_input(a.adv_model);
  }
  if ((*id == TransformId::kT10 || *id == TransformId::kT11) && !spec.aux_corpus) {
    throw UsageError(to_string(*id) + " needs --aux <file>");
  }
  const Dataset input = read_dataset(a.in);
  manifest.add_input(a.in);
  AmplifyResult r = amplify(input, spec);

  if (a.verify) {
    std::size_t k = 0;
    for (const CodeSample& before : input) {
      if (k < r.samples.size() && r.samples[k].id == before.id) {
        const VerifyResult v = verify_allowed_change(before, r.samples[k], spec);
        if (!v.pass) throw Error("verification failed for '" + before.id + "': " + v.diff);
        ++k;
      }
    }
  }

  write_dataset(a.out, r.samples);
  std::ostringstream skips;
  for (const SkipRecord& s : r.skips) skips << s.id << '\t' << to_string(s.transform) << '\t' << s.reason << '\n';
  const fs::path skip_path = a.out.string() + ".skips";
  write_text(skip_path, skips.str());
  manifest.add_output(a.out);
  manifest.add_output(skip_path);
  if (*id == TransformId::kT11) {
    std::ostringstream choices;
    for (const auto& [sid, t] : r.choices) choices << sid << '\t' << to_string(t) << '\n';
    const fs::path choice_path = a.out.string() + ".choices";
    write_text(choice_path, choices.str());
    manifest.add_output(choice_path);
  }
  manifest.write(manifest_for(a.out));
  note(std::to_string(r.samples.size()) + " written, " + std::to_string(r.skips.size()) + " skipped");
  return 0;
}

// ---------------------------------------------------------------------------

struct NaturalnessArgs {
  fs::path train, base, out;
  std::vector<std::string> eval;
  double alpha = 1.0;
};

int run_naturalness(const Common& c, const NaturalnessArgs& a) {
  RunManifest manifest("naturalness", c.argv);
  const Dataset train = read_dataset(a.train);
  manifest.add_input(a.train);
  const NgramModel model = train_ngram(train, a.alpha);
  const Dataset base = read_dataset(a.base);
  manifest.add_input(a.base);
  std::map<std::string, Dataset> transformed;
  for (const std::string& spec : a.eval) {
    const auto eq = spec.find('=');
    const std::string name = eq == std::string::npos ? fs::path(spec).stem().string() : spec.substr(0, eq);
    const fs::path path = eq == std::string::npos ? fs::path(spec) : fs::path(spec.substr(eq + 1));
    transformed[name] = read_dataset(path);
    manifest.add_input(path);
  }
  std::ostringstream csv;
  write_naturalness_csv(csv, naturalness_report(model, base, transformed));
  write_text(a.out, csv.str());
  manifest.add_output(a.out);
  manifest.write(manifest_for(a.out));
  return 0;
}

// ---------------------------------------------------------------------------

struct ModelArgs {
  std::string model = "baseline";
  int epochs = 10;
  std::size_t dim = 1u << 16;
  double lr = 0.5;
  double l2 = 1e-6;
  int timeout_ms = 60'000;
};

BaselineConfig baseline_config(const ModelArgs& m) {
  BaselineConfig cfg;
  cfg.epochs = m.epochs;
  cfg.feature_dim = m.dim;
  cfg.learning_rate = m.lr;
  cfg.l2 = m.l2;
  return cfg;
}

std::unique_ptr<Technique> technique_from(const ModelArgs& m, const fs::path& work_dir) {
  if (m.model == "baseline") return std::make_unique<BaselineTechnique>(baseline_config(m));
  if (m.model.starts_with("adapter:")) {
    AdapterOptions opts;
    opts.command = m.model.substr(8);
    opts.timeout = std::chrono::milliseconds(m.timeout_ms);
    opts.work_dir = work_dir;
    return std::make_unique<AdapterTechnique>(opts);
  }
  throw UsageError("--model must be baseline or adapter:<command>");
}

struct TrainArgs {
  fs::path train, eval, out;
};

int run_train(const Common& c, const ModelArgs& m, const TrainArgs& a) {
  const std::uint64_t seed = c.require_seed("for train");
  if (m.model != "baseline") throw UsageError("train only persists the built-in baseline");
  RunManifest manifest("train", c.argv);
  manifest.set_seed("train", seed);
  const Dataset train = read_dataset(a.train);
  manifest.add_input(a.train);
  Dataset eval;
  if (!a.eval.empty()) {
    eval = read_dataset(a.eval);
    manifest.add_input(a.eval);
  }
  BaselineConfig cfg = baseline_config(m);
  cfg.seed = seed;
  auto model = train_baseline(train, cfg, eval);
  if (a.out.has_parent_path()) fs::create_directories(a.out.parent_path());
  model->save(a.out);
  manifest.add_output(a.out);
  manifest.write(manifest_for(a.out));
  return 0;
}

struct EvalArgs {
  std::string model;
  fs::path test, out;
  std::string metric = "acc";
};

int run_eval(const Common& c, const EvalArgs& a) {
  RunManifest manifest("eval", c.argv);
  std::unique_ptr<ModelHandle> model;
  if (a.model == "coin") {
    const std::uint64_t seed = c.require_seed("for the coin-flip model");
    manifest.set_seed("coin", seed);
    model = std::make_unique<CoinFlipModel>(seed);
  } else if (a.model.starts_with("const:")) {
    model = std::make_unique<ConstantModel>(std::stod(a.model.substr(6)));
  } else {
    model = BaselineModel::load(a.model);
    manifest.add_input(a.model);
  }
  const Dataset test = read_dataset(a.test);
  manifest.add_input(a.test);
  const MetricId metric = metric_from(a.metric);
  const Evaluation ev = evaluate_model(*model, test, metric);
  nlohmann::ordered_json doc;
  doc["model"] = std::string(model->kind());
  doc["metric"] = std::string(to_string(metric));
  doc["n"] = test.size();
  doc["score"] = ev.score;
  doc["per_epoch"] = ev.per_epoch;
  doc["warnings"] = ev.warnings;
  write_text(a.out, doc.dump(2) + "\n");
  for (const auto& w : ev.warnings) note(w);
  manifest.add_output(a.out);
  manifest.write(manifest_for(a.out));
  std::cout << to_string(metric) << ' ' << ev.score << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::string transforms = "t1..t11";
  fs::path train, test, vpt, aux, out;
  std::string metric = "acc";
  std::size_t adv_budget = 8;
  int workers = 1;
};

std::vector<BenchTransform> bench_transforms(const BenchArgs& a, std::uint64_t seed,
                                             const std::shared_ptr<const Dataset>& aux) {
  std::vector<BenchTransform> out;
  for (TransformId id : parse_transform_list(a.transforms)) {
    TransformSpec spec;
    spec.id = id;
    spec.seed = seed;
    spec.aux_corpus = aux;
    spec.adv_budget = a.adv_budget;
    out.push_back(bench_transform(spec));
  }
  return out;
}

template <typename Report>
void write_reports(const Report& report, const fs::path& dir, RunManifest& manifest) {
  for (auto [format, name] : {std::pair{ReportFormat::kJson, "report.json"}, std::pair{ReportFormat::kMarkdown, "report.md"},
                              std::pair{ReportFormat::kCsv, "report.csv"}}) {
    std::ostringstream text;
    emit_report(report, format, text);
    write_text(dir / name, text.str());
    manifest.add_output(dir / name);
  }
  if (fs::exists(dir / "cells")) manifest.add_output(dir / "cells");
}

int run_bench(const Common& c, const ModelArgs& m, const BenchArgs& a, bool patch_check) {
  const std::uint64_t seed = c.require_seed("for bench");
  if (a.workers < 1) throw UsageError("--workers must be positive");
  RunManifest manifest(patch_check ? "bench a2" : "bench a1", c.argv);
  manifest.set_seed("bench", seed);
  const Dataset train = read_dataset(a.train);
  manifest.add_input(a.train);
  Dataset test;
  if (!a.test.empty()) {
    test = read_dataset(a.test);
    manifest.add_input(a.test);
  }
  auto aux = std::make_shared<const Dataset>(a.aux.empty() ? train : read_dataset(a.aux));
  if (!a.aux.empty()) manifest.add_input(a.aux);

  fs::create_directories(a.out);
  auto technique = technique_from(m, a.out / "adapter");
  const auto transforms = bench_transforms(a, seed, aux);
  BenchOptions opts;
  opts.metric = metric_from(a.metric);
  opts.seed = seed;
  opts.out_dir = a.out;
  opts.log = note;

  if (patch_check) {
    const Dataset vpt = read_dataset(a.vpt);
    manifest.add_input(a.vpt);
    const A2Report r = run_a2(transforms, train, test, vpt, *technique, opts);
    write_reports(r, a.out, manifest);
    note(std::to_string(r.trainings) + " trainings, " + std::to_string(r.evaluations) + " evaluations, " +
         std::to_string(r.resumed) + " cells resumed");
  } else {
    if (test.empty()) throw UsageError("bench a1 needs --test");
    const A1Report r = run_a1(transforms, train, test, *technique, opts);
    write_reports(r, a.out, manifest);
    note(std::to_string(r.trainings) + " trainings, " + std::to_string(r.evaluations) + " evaluations, " +
         std::to_string(r.resumed) + " cells resumed");
  }
  manifest.write(a.out / "manifest.json");
  return 0;
}

struct SummaryArgs {
  std::vector<fs::path> reports;
  fs::path out;
  std::string format = "md";
};

int run_summary(const Common& c, const SummaryArgs& a) {
  RunManifest manifest("bench summary", c.argv);
  auto format = parse_report_format(a.format);
  if (!format) throw UsageError("unknown format '" + a.format + "'");
  std::vector<TechniqueRow> rows;
  for (const fs::path& p : a.reports) {
    std::ifstream in(p);
    const auto doc = nlohmann::json::parse(in, nullptr, false);
    const bool is_a2 = doc.is_object() && doc.value("procedure", "") == "a2";
    std::optional<TechniqueRow> row = is_a2 ? technique_row(load_a2_report(p)) : technique_row(load_a1_report(p));
    if (!row) throw DataError(p.string() + " is incomplete");
    rows.push_back(*row);
    manifest.add_input(p);
  }
  std::ostringstream text;
  emit_summary(rows, *format, text);
  write_text(a.out, text.str());
  manifest.add_output(a.out);
  manifest.write(manifest_for(a.out));
  return 0;
}

// ---------------------------------------------------------------------------

struct VppArgs {
  fs::path vuln, repo, out, pairs, out_dir;
  std::vector<fs::path> source_split;
};

int run_vpp_build(const Common& c, const VppArgs& a) {
  RunManifest manifest("vpp build", c.argv);
  const Dataset vuln = read_dataset(a.vuln);
  manifest.add_input(a.vuln);
  GitPatchSource source(a.repo);
  const PairResult r = build_pairs(vuln, source);
  write_dataset(a.out, r.samples);
  std::ostringstream misses;
  write_misses(r.misses, misses);
  const fs::path miss_path = a.out.string() + ".misses";
  write_text(miss_path, misses.str());
  manifest.add_output(a.out);
  manifest.add_output(miss_path);
  manifest.write(manifest_for(a.out));
  note(std::to_string(r.samples.size() / 2) + " pairs, " + std::to_string(r.misses.size()) + " misses");
  return 0;
}

int run_vpp_split(const Common& c, const VppArgs& a) {
  if (a.source_split.size() != 3) throw UsageError("--source-split takes train,valid,test");
  RunManifest manifest("vpp split", c.argv);
  const DatasetSplit source = load_split(a.source_split[0], a.source_split[1], a.source_split[2],
                                         LoadOptions{true, false});
  for (const auto& p : a.source_split) manifest.add_input(p);
  const Dataset pairs = read_dataset(a.pairs);
  manifest.add_input(a.pairs);
  const DatasetSplit split = derive_split(source, pairs);
  fs::create_directories(a.out_dir);
  for (Part p : kAllParts) {
    const fs::path out = a.out_dir / (std::string(to_string(p)) + ".jsonl");
    write_dataset(out, split[p]);
    manifest.add_output(out);
  }
  manifest.write(a.out_dir / "manifest.json");
  return 0;
}

struct SpotcheckArgs {
  fs::path pairs, out;
  std::size_t n = 100;
};

int run_spotcheck(const Common& c, const SpotcheckArgs& a) {
  const std::uint64_t seed = c.require_seed("for spotcheck");
  RunManifest manifest("spotcheck", c.argv);
  manifest.set_seed("spotcheck", seed);
  const Dataset pairs = read_dataset(a.pairs);
  manifest.add_input(a.pairs);
  write_text(a.out, spotcheck_sample(pairs, a.n, seed));
  manifest.add_output(a.out);
  manifest.write(manifest_for(a.out));
  return 0;
}

struct SynthArgs {
  fs::path out, out_dir;
  std::size_t size = 4000;
  double test_fraction = 0.2;
};

int run_synth(const Common& c, const SynthArgs& a) {
  if (a.out.empty() == a.out_dir.empty()) throw UsageError("give --out or --out-dir");
  const std::uint64_t seed = c.require_seed("for synth");
  RunManifest manifest("synth", c.argv);
  manifest.set_seed("synth", seed);
  SyntheticConfig cfg;
  cfg.size = a.size;
  cfg.seed = seed;
  const Dataset corpus = synthetic_corpus(cfg);
  if (a.out_dir.empty()) {
    write_dataset(a.out, corpus);
    manifest.add_output(a.out);
    manifest.write(manifest_for(a.out));
    return 0;
  }
  if (a.test_fraction <= 0 || a.test_fraction >= 1) throw UsageError("--test-fraction must be in (0, 1)");
  // Labels alternate, so an even cut keeps both parts balanced.
  std::size_t cut = static_cast<std::size_t>(static_cast<double>(corpus.size()) * (1 - a.test_fraction));
  cut -= cut % 2;
  const std::span<const CodeSample> all(corpus);
  fs::create_directories(a.out_dir);
  write_dataset(a.out_dir / "train.jsonl", all.first(cut));
  write_dataset(a.out_dir / "test.jsonl", all.subspan(cut));
  manifest.add_output(a.out_dir / "train.jsonl");
  manifest.add_output(a.out_dir / "test.jsonl");
  manifest.write(a.out_dir / "manifest.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark harness for learned C vulnerability detectors", "vdbench"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common common;
  for (int i = 0; i < argc; ++i) common.argv.emplace_back(argv[i]);
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", common.seed, "Run seed"); };

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate, deduplicate and scrub a dataset");
  ingest_cmd->add_option("--in", ingest.in, "One JSONL file with an optional per-record split field");
  ingest_cmd->add_option("--train", ingest.train, "Training part");
  ingest_cmd->add_option("--valid", ingest.valid, "Validation part");
  ingest_cmd->add_option("--test", ingest.test, "Test part");
  ingest_cmd->add_option("--out-dir", ingest.out_dir, "Output directory")->required();
  ingest_cmd->add_flag("--dedup", ingest.dedup, "Remove exact duplicates across all parts");
  ingest_cmd->add_option("--dedup-mode", ingest.dedup_mode, "whitespace (default) or tokens (also ignores comments)");
  ingest_cmd->add_flag("--strict", ingest.strict, "Fail on the first invalid record");
  ingest_cmd->add_option("--scrub", ingest.scrub, "Leak-token list; matching identifiers and comments are replaced");
  add_seed(ingest_cmd);

  LexArgs lex;
  auto* lex_cmd = app.add_subcommand("lex", "Dump the token stream of a C file (kind, text, span)");
  lex_cmd->add_option("--in", lex.in, "C source, or JSONL with --jsonl")->required();
  lex_cmd->add_flag("--jsonl", lex.jsonl, "Input is a dataset; dump every sample");

  AmplifyArgs amp;
  auto* amp_cmd = app.add_subcommand("amplify", "Apply one transformation to every sample");
  amp_cmd->add_option("--transform", amp.transform, "t1..t11 or adv")->required();
  amp_cmd->add_option("--in", amp.in, "Input JSONL")->required();
  amp_cmd->add_option("--out", amp.out, "Output JSONL")->required();
  amp_cmd->add_option("--aux", amp.aux, "Auxiliary corpus for t10/t11");
  amp_cmd->add_option("--model", amp.adv_model, "Baseline model file for adv");
  amp_cmd->add_option("--adv-budget", amp.adv_budget, "Candidate names tried by adv");
  amp_cmd->add_flag("--verify", amp.verify, "Check every output against the allowed change");
  add_seed(amp_cmd);

  NaturalnessArgs nat;
  auto* nat_cmd = app.add_subcommand("naturalness", "Bigram cross-entropy per transformed corpus (CSV)");
  nat_cmd->add_option("--train", nat.train, "Corpus the language model is trained on")->required();
  nat_cmd->add_option("--base", nat.base, "Untransformed evaluation corpus")->required();
  nat_cmd->add_option("--eval", nat.eval, "Transformed corpora as name=path (or path)")->required();
  nat_cmd->add_option("--alpha", nat.alpha, "Additive smoothing constant");
  nat_cmd->add_option("--out", nat.out, "Output CSV")->required();

  ModelArgs model;
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--model", model.model, "baseline or adapter:<command>");
    sub->add_option("--epochs", model.epochs, "Baseline epochs");
    sub->add_option("--dim", model.dim, "Baseline hashed feature dimension");
    sub->add_option("--lr", model.lr, "Baseline learning rate");
    sub->add_option("--l2", model.l2, "Baseline L2 penalty");
    sub->add_option("--timeout-ms", model.timeout_ms, "Adapter reply timeout");
  };

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train the baseline classifier");
  train_cmd->add_option("--train", train.train, "Training JSONL")->required();
  train_cmd->add_option("--eval", train.eval, "Optional per-epoch evaluation set");
  train_cmd->add_option("--out", train.out, "Model file")->required();
  add_model(train_cmd);
  add_seed(train_cmd);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score a model (epoch-max)");
  eval_cmd->add_option("--model", eval.model, "Model file, coin, or const:<p>")->required();
  eval_cmd->add_option("--test", eval.test, "Test JSONL")->required();
  eval_cmd->add_option("--metric", eval.metric, "acc or f1");
  eval_cmd->add_option("--out", eval.out, "Result JSON")->required();
  add_seed(eval_cmd);

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark procedure");
  bench_cmd->require_subcommand(1);
  auto add_bench = [&](CLI::App* sub) {
    sub->add_option("--transforms", bench.transforms, "Transformation list, e.g. t1..t11 or t1,t5");
    sub->add_option("--train", bench.train, "Training JSONL")->required();
    sub->add_option("--aux", bench.aux, "Auxiliary corpus for t10/t11 (default: training set)");
    sub->add_option("--metric", bench.metric, "acc or f1");
    sub->add_option("--out", bench.out, "Output directory (reports and cell checkpoints)")->required();
    sub->add_option("--adv-budget", bench.adv_budget, "Candidate names tried by adv");
    sub->add_option("--workers", bench.workers, "Worker count (cells currently run sequentially)");
    add_model(sub);
    add_seed(sub);
  };
  auto* a1_cmd = bench_cmd->add_subcommand("a1", "Over-fitting to transformations");
  add_bench(a1_cmd);
  a1_cmd->add_option("--test", bench.test, "Test JSONL")->required();
  auto* a2_cmd = bench_cmd->add_subcommand("a2", "Vulnerability versus patch");
  add_bench(a2_cmd);
  a2_cmd->add_option("--test", bench.test, "Test JSONL for the reference score");
  a2_cmd->add_option("--vpt", bench.vpt, "Paired vulnerability/patch JSONL")->required();

  SummaryArgs summary;
  auto* summary_cmd = bench_cmd->add_subcommand("summary", "Combine per-technique reports");
  summary_cmd->add_option("--reports", summary.reports, "report.json files")->required();
  summary_cmd->add_option("--format", summary.format, "md, csv or json");
  summary_cmd->add_option("--out", summary.out, "Output file")->required();

  VppArgs vpp;
  auto* vpp_cmd = app.add_subcommand("vpp", "Vulnerability/patch pairs");
  vpp_cmd->require_subcommand(1);
  auto* build_cmd = vpp_cmd->add_subcommand("build", "Pair vulnerable functions with their patched versions");
  build_cmd->add_option("--vuln", vpp.vuln, "Vulnerable samples with commit_id")->required();
  build_cmd->add_option("--repo", vpp.repo, "Git checkout")->required();
  build_cmd->add_option("--out", vpp.out, "Output JSONL")->required();
  auto* split_cmd = vpp_cmd->add_subcommand("split", "Place pairs in the parts of a source split");
  split_cmd->add_option("--source-split", vpp.source_split, "train,valid,test JSONL files")
      ->required()
      ->delimiter(',')
      ->expected(3);
  split_cmd->add_option("--pairs", vpp.pairs, "Pairs JSONL")->required();
  split_cmd->add_option("--out-dir", vpp.out_dir, "Output directory")->required();

  SpotcheckArgs spot;
  auto* spot_cmd = app.add_subcommand("spotcheck", "Review worksheet for a seeded sample of pairs");
  spot_cmd->add_option("--pairs", spot.pairs, "Pairs JSONL")->required();
  spot_cmd->add_option("--n", spot.n, "Number of pairs");
  spot_cmd->add_option("--out", spot.out, "Markdown worksheet")->required();
  add_seed(spot_cmd);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate the synthetic token-planted corpus");
  synth_cmd->add_option("--size", synth.size, "Number of functions");
  auto* synth_out = synth_cmd->add_option("--out", synth.out, "Output JSONL");
  auto* synth_dir = synth_cmd->add_option("--out-dir", synth.out_dir, "Write train.jsonl and test.jsonl here instead");
  synth_out->excludes(synth_dir);
  synth_cmd->add_option("--test-fraction", synth.test_fraction, "Share of samples in test.jsonl");
  add_seed(synth_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*ingest_cmd) return run_ingest(common, ingest);
    if (*lex_cmd) return run_lex(lex);
    if (*amp_cmd) return run_amplify(common, amp);
    if (*nat_cmd) return run_naturalness(common, nat);
    if (*train_cmd) return run_train(common, model, train);
    if (*eval_cmd) return run_eval(common, eval);
    if (*a1_cmd) return run_bench(common, model, bench, false);
    if (*a2_cmd) return run_bench(common, model, bench, true);
    if (*summary_cmd) return run_summary(common, summary);
    if (*build_cmd) return run_vpp_build(common, vpp);
    if (*split_cmd) return run_vpp_split(common, vpp);
    if (*spot_cmd) return run_spotcheck(common, spot);
    if (*synth_cmd) return run_synth(common, synth);
  } catch (const UsageError& e) {
    std::cerr << "vdbench: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "vdbench: error: " << e.what() << '\n';
    return kRunFailure;
  }
  return kUsageError;
}
