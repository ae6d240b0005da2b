#include "vdbench/synthetic.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "vdbench/random.hpp"

namespace vdbench {

namespace {

const std::vector<std::string> kVulnerableParams = {"buf", "len", "src", "dst", "size", "count", "data", "offset"};
const std::vector<std::string> kBenignParams = {"ctx", "cfg", "opt", "state", "flags", "mode", "handle", "level"};
const std::vector<std::string> kTypes = {"int", "char *", "size_t", "unsigned int", "const char *", "void *"};
const std::vector<std::string> kSinks = {"memcpy", "strcpy", "sprintf", "strcat", "gets"};
const std::vector<std::string> kSafeCalls = {"validate", "log_event", "update_stats", "release", "check_bounds"};
const std::vector<std::string> kNameParts = {"parse", "read", "load", "emit", "scan", "copy", "fill", "push",
                                             "decode", "encode", "merge", "store", "probe", "queue", "apply"};
const std::vector<std::string> kNouns = {"record", "entry", "packet", "frame", "chunk", "token", "header",
                                         "block",  "field", "table",  "node",  "slot",  "item",  "segment"};
const std::vector<std::string> kCommentWords = {"update", "the", "current", "value", "and", "return", "status",
                                                "for", "next", "step", "handle", "input", "check", "result"};

bool chance(Rng& rng, double p) { return rng.unit() < p; }

std::string comment(Rng& rng) {
  std::string text;
  const std::size_t words = 3 + rng.below(5);
  for (std::size_t i = 0; i < words; ++i) text += (i ? " " : "") + rng.pick(kCommentWords);
  return chance(rng, 0.5) ? "/* " + text + " */" : "// " + text;
}

std::string statement(Rng& rng, const std::vector<std::string>& params, std::size_t k) {
  const std::string& p = params[rng.below(params.size())];
  const std::string local = "v" + std::to_string(k);
  switch (rng.below(6)) {
    case 0: return "int " + local + " = 0;";
    case 1: return "if (" + p + " == 0) {\n        return -1;\n    }";
    case 2: return "for (int " + local + " = 0; " + local + " < 4; " + local + "++) {\n        total += " + local + ";\n    }";
    case 3: return "total += (int)sizeof(" + p + ");";
    case 4: return rng.pick(kSafeCalls) + "(" + p + ");";
    default: return "while (total > 100) {\n        total /= 2;\n    }";
  }
}

}  // namespace

Dataset synthetic_corpus(const SyntheticConfig& config) {
  Dataset out;
  out.reserve(config.size);
  for (std::size_t i = 0; i < config.size; ++i) {
    const std::string id = "syn-" + std::to_string(i);
    Rng rng = Rng::derive(config.seed, id, "synthetic");
    const int label = i % 2 == 0 ? 1 : 0;
    const bool own_pool = chance(rng, config.param_cue);
    const auto& pool = (label == 1) == own_pool ? kVulnerableParams : kBenignParams;

    std::vector<std::string> params;
    const std::size_t arity = 2 + rng.below(2);
    while (params.size() < arity) {
      const std::string& name = rng.pick(pool);
      if (std::find(params.begin(), params.end(), name) == params.end()) params.push_back(name);
    }

    std::string code;
    const bool commented = chance(rng, label == 1 ? config.comment_vulnerable : config.comment_benign);
    const bool leading = commented && chance(rng, 0.5);
    if (leading) code += comment(rng) + "\n";
    code += "static int " + rng.pick(kNameParts) + "_" + rng.pick(kNouns) + "_" + std::to_string(i) + "(";
    for (std::size_t k = 0; k < params.size(); ++k) {
      code += (k ? ", " : "") + rng.pick(kTypes) + " " + params[k];
    }
    code += ")\n{\n    int total = 0;\n";
    std::vector<std::string> body;
    const std::size_t statements = 2 + rng.below(4);
    for (std::size_t k = 0; k < statements; ++k) body.push_back(statement(rng, params, k));
    if (chance(rng, label == 1 ? config.sink_vulnerable : config.sink_benign)) {
      const std::string& sink = rng.pick(kSinks);
      body.insert(body.begin() + static_cast<std::ptrdiff_t>(rng.below(body.size() + 1)),
                  sink + "(" + params[0] + ", " + params[1] + ");");
    }
    if (commented && !leading) {
      body.insert(body.begin() + static_cast<std::ptrdiff_t>(rng.below(body.size() + 1)), comment(rng));
    }
    for (const std::string& s : body) code += "    " + s + "\n";
    code += "    return total;\n}\n";
    out.push_back(CodeSample{id, code, label, std::string("synthetic"), std::nullopt, std::nullopt});
  }
  return out;
}

}  // namespace vdbench
