#include "vdbench/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "vdbench/clex.hpp"
#include "vdbench/error.hpp"
#include "vdbench/naming.hpp"
#include "vdbench/random.hpp"

namespace vdbench {

using json = nlohmann::json;

std::string_view to_string(Part part) noexcept {
  switch (part) {
    case Part::kTrain: return "train";
    case Part::kValid: return "valid";
    case Part::kTest: return "test";
  }
  return "train";
}

std::optional<Part> parse_part(std::string_view name) noexcept {
  if (name == "train") return Part::kTrain;
  if (name == "valid" || name == "validation" || name == "dev") return Part::kValid;
  if (name == "test") return Part::kTest;
  return std::nullopt;
}

Dataset& DatasetSplit::operator[](Part p) noexcept {
  return p == Part::kTrain ? train : p == Part::kValid ? valid : test;
}

const Dataset& DatasetSplit::operator[](Part p) const noexcept {
  return p == Part::kTrain ? train : p == Part::kValid ? valid : test;
}

Dataset DatasetSplit::all() const {
  Dataset out;
  out.reserve(size());
  for (Part p : kAllParts) out.insert(out.end(), (*this)[p].begin(), (*this)[p].end());
  return out;
}

namespace {

struct ParsedRecord {
  CodeSample sample;
  Part part = Part::kTrain;
  std::size_t line = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::optional<std::string> optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  throw DataError(std::string("field '") + key + "' must be a string");
}

// Throws DataError with the reject reason.
ParsedRecord parse_one(std::string_view line_text) {
  json obj;
  try {
    obj = json::parse(line_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) throw DataError("record is not a JSON object");

  ParsedRecord rec;
  CodeSample& s = rec.sample;
  std::optional<std::string> id = optional_string(obj, "id");
  if (!id) id = optional_string(obj, "idx");
  if (!id || id->empty()) throw DataError("missing field 'id'");
  s.id = *id;

  auto func = obj.find("func");
  if (func == obj.end() || func->is_null()) throw DataError("missing field 'func'");
  if (!func->is_string()) throw DataError("field 'func' must be a string");
  s.code = func->get<std::string>();
  if (s.code.empty()) throw DataError("field 'func' is empty");

  auto target = obj.find("target");
  if (target == obj.end() || target->is_null()) throw DataError("missing field 'target'");
  if (!target->is_number_integer()) throw DataError("field 'target' must be an integer");
  const long long label = target->get<long long>();
  if (label != 0 && label != 1) throw DataError("label outside {0,1}: target=" + std::to_string(label));
  s.label = static_cast<int>(label);

  s.project = optional_string(obj, "project");
  s.commit_id = optional_string(obj, "commit_id");
  s.pair_id = optional_string(obj, "pair_id");
  if (auto split = optional_string(obj, "split")) {
    auto part = parse_part(*split);
    if (!part) throw DataError("unknown split '" + *split + "'");
    rec.part = *part;
  }
  try {
    clex::tokenize(s.code);
  } catch (const LexError& e) {
    throw DataError(std::string("func does not lex: ") + e.what());
  }
  return rec;
}

std::vector<ParsedRecord> parse_all(std::string_view text, const LoadOptions& options, std::string_view source,
                                    std::vector<Reject>& rejects) {
  std::vector<ParsedRecord> records;
  std::unordered_set<std::string> ids;
  auto reject = [&](std::size_t line, std::string reason) {
    if (options.strict) {
      throw DataError(std::string(source) + ":" + std::to_string(line) + ": " + reason);
    }
    rejects.push_back(Reject{line, std::move(reason)});
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    try {
      ParsedRecord rec = parse_one(line);
      rec.line = line_no;
      if (!ids.insert(rec.sample.id).second) {
        reject(line_no, "duplicate id '" + rec.sample.id + "'");
        continue;
      }
      records.push_back(std::move(rec));
    } catch (const DataError& e) {
      reject(line_no, e.what());
    }
  }

  // Pair references resolve only once every record is known.
  std::unordered_map<std::string, int> labels;
  for (const ParsedRecord& r : records) labels.emplace(r.sample.id, r.sample.label);
  std::vector<ParsedRecord> kept;
  kept.reserve(records.size());
  for (ParsedRecord& r : records) {
    if (r.sample.pair_id) {
      auto it = labels.find(*r.sample.pair_id);
      if (it == labels.end()) {
        reject(r.line, "pair_id '" + *r.sample.pair_id + "' does not resolve");
        continue;
      }
      if (it->second == r.sample.label) {
        reject(r.line, "pair_id '" + *r.sample.pair_id + "' has the same label");
        continue;
      }
    }
    kept.push_back(std::move(r));
  }
  return kept;
}

}  // namespace

LoadResult parse_records(std::string_view jsonl, const LoadOptions& options, std::string_view source) {
  LoadResult result;
  for (ParsedRecord& r : parse_all(jsonl, options, source, result.rejects)) {
    result.samples.push_back(std::move(r.sample));
  }
  return result;
}

LoadResult load_records(const std::filesystem::path& path, const LoadOptions& options) {
  LoadResult result = parse_records(read_file(path), options, path.string());
  if (options.write_rejects && !result.rejects.empty()) write_rejects(result.rejects, rejects_path(path));
  return result;
}

DatasetSplit load_dataset(const std::filesystem::path& path, const LoadOptions& options,
                          std::vector<Reject>* rejects) {
  std::vector<Reject> local;
  std::vector<ParsedRecord> records = parse_all(read_file(path), options, path.string(), local);
  if (options.write_rejects && !local.empty()) write_rejects(local, rejects_path(path));
  DatasetSplit split;
  for (ParsedRecord& r : records) split[r.part].push_back(std::move(r.sample));
  if (rejects) *rejects = std::move(local);
  return split;
}

DatasetSplit load_split(const std::filesystem::path& train, const std::filesystem::path& valid,
                        const std::filesystem::path& test, const LoadOptions& options) {
  DatasetSplit split;
  if (!train.empty()) split.train = load_records(train, options).samples;
  if (!valid.empty()) split.valid = load_records(valid, options).samples;
  if (!test.empty()) split.test = load_records(test, options).samples;
  std::unordered_set<std::string> ids;
  for (Part p : kAllParts) {
    for (const CodeSample& s : split[p]) {
      if (!ids.insert(s.id).second) throw DataError("sample id '" + s.id + "' appears in more than one part");
    }
  }
  return split;
}

std::string to_jsonl(std::span<const CodeSample> samples) {
  std::string out;
  for (const CodeSample& s : samples) {
    nlohmann::ordered_json obj;
    obj["id"] = s.id;
    obj["func"] = s.code;
    obj["target"] = s.label;
    if (s.project) obj["project"] = *s.project;
    if (s.commit_id) obj["commit_id"] = *s.commit_id;
    if (s.pair_id) obj["pair_id"] = *s.pair_id;
    out += obj.dump(-1, ' ', false, json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

void save_jsonl(std::span<const CodeSample> samples, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_jsonl(samples);
}

std::filesystem::path rejects_path(const std::filesystem::path& input) {
  std::filesystem::path p = input;
  p += ".rejects";
  return p;
}

void write_rejects(std::span<const Reject> rejects, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const Reject& r : rejects) out << "line " << r.line << ": " << r.reason << '\n';
}

std::vector<std::string> validate_pairs(std::span<const CodeSample> samples) {
  std::unordered_map<std::string, const CodeSample*> by_id;
  for (const CodeSample& s : samples) by_id.emplace(s.id, &s);
  std::vector<std::string> problems;
  for (const CodeSample& s : samples) {
    if (!s.pair_id) continue;
    auto it = by_id.find(*s.pair_id);
    if (it == by_id.end()) {
      problems.push_back(s.id + ": pair_id '" + *s.pair_id + "' does not resolve");
    } else if (it->second->label == s.label) {
      problems.push_back(s.id + ": partner '" + *s.pair_id + "' has the same label");
    } else if (it->second->pair_id != s.id) {
      problems.push_back(s.id + ": partner '" + *s.pair_id + "' does not point back");
    }
  }
  return problems;
}

std::string normalize_whitespace(std::string_view code) {
  std::string out;
  try {
    for (const clex::Token& t : clex::tokenize(code)) {
      out += t.is(clex::TokenKind::kWhitespace) ? std::string(" ") : t.text;
    }
  } catch (const LexError&) {
    bool in_space = false;
    for (char c : code) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!in_space) out += ' ';
        in_space = true;
      } else {
        out += c;
        in_space = false;
      }
    }
  }
  const auto first = out.find_first_not_of(' ');
  if (first == std::string::npos) return {};
  const auto last = out.find_last_not_of(' ');
  return out.substr(first, last - first + 1);
}

namespace {

std::string dedup_key(const std::string& code, DedupMode mode) {
  if (mode == DedupMode::kWhitespace) return normalize_whitespace(code);
  const clex::TokenStream tokens = clex::tokenize(code);
  std::string key;
  for (const clex::Token* t : clex::code_tokens(tokens)) {
    key += t->text;
    key += '\x1f';
  }
  return key;
}

}  // namespace

DedupResult dedup(const DatasetSplit& split, DedupMode mode) {
  DedupResult result;
  std::unordered_set<std::string> seen;
  for (Part p : kAllParts) {
    for (const CodeSample& s : split[p]) {
      if (seen.insert(dedup_key(s.code, mode)).second) {
        result.split[p].push_back(s);
      } else {
        ++result.removed[static_cast<std::size_t>(p)];
      }
    }
  }
  return result;
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool leaks(std::string_view text, std::span<const std::string> lowered_list) {
  const std::string l = lower(text);
  return std::any_of(lowered_list.begin(), lowered_list.end(),
                     [&](const std::string& entry) { return l.find(entry) != std::string::npos; });
}

}  // namespace

CodeSample scrub_leaking_tokens(const CodeSample& sample, std::span<const std::string> leak_list,
                                std::uint64_t seed) {
  std::vector<std::string> lowered;
  for (const std::string& e : leak_list) {
    if (!e.empty()) lowered.push_back(lower(e));
  }
  if (lowered.empty()) throw Error("leak list is empty");

  clex::TokenStream tokens = clex::tokenize(sample.code);
  std::unordered_set<std::string> taken = identifier_set(tokens);
  Rng rng = Rng::derive(seed, sample.id, "scrub");
  std::map<std::string, std::string> replacement;
  bool changed = false;
  for (clex::Token& t : tokens) {
    const bool ident = t.is(clex::TokenKind::kIdentifier);
    if (!(ident || t.is_comment()) || !leaks(t.text, lowered)) continue;
    auto [it, inserted] = replacement.try_emplace(t.text);
    if (inserted) {
      std::string fresh = fresh_identifier(rng, taken);
      taken.insert(fresh);
      if (ident) {
        it->second = fresh;
      } else if (t.is(clex::TokenKind::kCommentLine)) {
        it->second = "// " + fresh;
      } else {
        it->second = "/* " + fresh + " */";
      }
    }
    t.text = it->second;
    changed = true;
  }
  if (!changed) return sample;
  CodeSample out = sample;
  out.code = clex::render(tokens);
  return out;
}

DatasetSplit scrub_leaking_tokens(const DatasetSplit& split, std::span<const std::string> leak_list,
                                  std::uint64_t seed) {
  if (std::none_of(leak_list.begin(), leak_list.end(), [](const std::string& e) { return !e.empty(); })) {
    throw Error("leak list is empty");
  }
  DatasetSplit out;
  for (Part p : kAllParts) {
    for (const CodeSample& s : split[p]) out[p].push_back(scrub_leaking_tokens(s, leak_list, seed));
  }
  return out;
}

std::vector<std::string> load_leak_list(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    out.push_back(line.substr(b, e - b + 1));
  }
  return out;
}

std::size_t count_vulnerable(std::span<const CodeSample> samples) noexcept {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const CodeSample& s) { return s.label == 1; }));
}

}  // namespace vdbench
