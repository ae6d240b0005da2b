#include "vdbench/transform.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "vdbench/clex.hpp"
#include "vdbench/error.hpp"
#include "vdbench/naming.hpp"
#include "vdbench/random.hpp"

namespace vdbench {

using clex::Token;
using clex::TokenKind;
using clex::TokenStream;

std::string to_string(TransformId id) {
  if (id == TransformId::kAdv) return "adv";
  return "t" + std::to_string(static_cast<int>(id));
}

std::optional<TransformId> parse_transform(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "adv") return TransformId::kAdv;
  if (lower.size() < 2 || lower[0] != 't') return std::nullopt;
  int k = 0;
  for (std::size_t i = 1; i < lower.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(lower[i]))) return std::nullopt;
    k = k * 10 + (lower[i] - '0');
    if (k > 11) return std::nullopt;
  }
  if (k < 1) return std::nullopt;
  return static_cast<TransformId>(k);
}

std::vector<TransformId> parse_transform_list(std::string_view text) {
  std::vector<TransformId> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view item = text.substr(pos, comma - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      const auto dots = item.find("..");
      if (dots != std::string_view::npos) {
        auto lo = parse_transform(item.substr(0, dots));
        auto hi = parse_transform(item.substr(dots + 2));
        if (!lo || !hi || *lo == TransformId::kAdv || *hi == TransformId::kAdv || *lo > *hi) {
          throw Error("bad transform range '" + std::string(item) + "'");
        }
        for (int k = static_cast<int>(*lo); k <= static_cast<int>(*hi); ++k) out.push_back(static_cast<TransformId>(k));
      } else {
        auto id = parse_transform(item);
        if (!id) throw Error("unknown transform '" + std::string(item) + "'");
        out.push_back(*id);
      }
    }
    pos = comma + 1;
  }
  return out;
}

bool needs_shape(TransformId id) noexcept {
  switch (id) {
    case TransformId::kT1:
    case TransformId::kT2:
    case TransformId::kT3:
    case TransformId::kT6:
    case TransformId::kT8:
    case TransformId::kAdv:
      return true;
    default:
      return false;
  }
}

AllowedChange allowed_change(TransformId id) noexcept {
  switch (id) {
    case TransformId::kT1: return AllowedChange::kParamsRenamed;
    case TransformId::kT2: return AllowedChange::kParamsPermuted;
    case TransformId::kT3: return AllowedChange::kFunctionRenamed;
    case TransformId::kT4: return AllowedChange::kDeadBranchInserted;
    case TransformId::kT5: return AllowedChange::kCommentInserted;
    case TransformId::kT6: return AllowedChange::kBodyOutlined;
    case TransformId::kT7: return AllowedChange::kWhitespaceInserted;
    case TransformId::kT8: return AllowedChange::kEmptyCallInserted;
    case TransformId::kT9: return AllowedChange::kCommentsRemoved;
    case TransformId::kT10: return AllowedChange::kTrailingCommentAdded;
    case TransformId::kT11: return AllowedChange::kDelegated;
    case TransformId::kAdv: return AllowedChange::kDeclarationInserted;
  }
  return AllowedChange::kDelegated;
}

std::string_view describe(AllowedChange change) noexcept {
  switch (change) {
    case AllowedChange::kParamsRenamed: return "parameter identifiers renamed consistently to fresh names";
    case AllowedChange::kParamsPermuted: return "parameter declarations and recursive-call arguments permuted alike";
    case AllowedChange::kFunctionRenamed: return "function name and recursive references renamed to one fresh name";
    case AllowedChange::kDeadBranchInserted: return "one `if (0) { ... }` block over fresh names inserted at body start";
    case AllowedChange::kCommentInserted: return "one block comment inserted inside the body";
    case AllowedChange::kBodyOutlined: return "body moved to a fresh static helper; original forwards to it";
    case AllowedChange::kWhitespaceInserted: return "whitespace inserted between tokens";
    case AllowedChange::kEmptyCallInserted: return "empty static void function defined before and called at body start";
    case AllowedChange::kCommentsRemoved: return "comment tokens removed";
    case AllowedChange::kTrailingCommentAdded: return "one block comment appended after the function";
    case AllowedChange::kDelegated: return "change allowed by the drawn transformation";
    case AllowedChange::kDeclarationInserted: return "one `int <fresh>;` declaration inserted at body start";
  }
  return "";
}

namespace {

// Per-token rewrite buffer: replacement text plus insertions on either side.
class Editor {
 public:
  explicit Editor(std::span<const Token> tokens)
      : tokens_(tokens), text_(tokens.size()), before_(tokens.size()), after_(tokens.size()) {
    for (std::size_t i = 0; i < tokens.size(); ++i) text_[i] = tokens[i].text;
  }

  void replace(std::size_t i, std::string text) { text_[i] = std::move(text); }
  void insert_before(std::size_t i, const std::string& text) { before_[i] += text; }
  void insert_after(std::size_t i, const std::string& text) { after_[i] += text; }
  void append(const std::string& text) { tail_ += text; }

  std::string render() const {
    std::string out;
    for (std::size_t i = 0; i < tokens_.size(); ++i) out += before_[i] + text_[i] + after_[i];
    return out + tail_;
  }

 private:
  std::span<const Token> tokens_;
  std::vector<std::string> text_;
  std::vector<std::string> before_;
  std::vector<std::string> after_;
  std::string tail_;
};

std::string render_range(std::span<const Token> tokens, std::size_t first, std::size_t last) {
  std::string out;
  for (std::size_t i = first; i <= last && i < tokens.size(); ++i) out += tokens[i].text;
  return out;
}

ApplyResult applied(const CodeSample& in, std::string code, TransformId id) {
  ApplyResult r;
  r.sample = in;
  r.sample.code = std::move(code);
  r.applied = id;
  return r;
}

ApplyResult skipped(const CodeSample& in, TransformId id, std::string reason) {
  ApplyResult r;
  r.status = ApplyResult::Status::kSkipped;
  r.sample = in;
  r.applied = id;
  r.reason = std::move(reason);
  return r;
}

// ---------------------------------------------------------------------------
// Argument / parameter lists.

struct Slot {
  std::size_t begin;  // first token after the opening bracket or comma
  std::size_t end;    // the closing bracket or comma (exclusive)
  std::optional<std::size_t> first;  // outermost non-trivia tokens
  std::optional<std::size_t> last;
};

std::vector<Slot> split_list(std::span<const Token> tokens, std::size_t open, std::size_t close) {
  std::vector<Slot> slots;
  Slot cur{open + 1, close, std::nullopt, std::nullopt};
  for (std::size_t i = open + 1; i < close; ++i) {
    const Token& t = tokens[i];
    if (t.is_punct(",")) {
      cur.end = i;
      slots.push_back(cur);
      cur = Slot{i + 1, close, std::nullopt, std::nullopt};
      continue;
    }
    if (t.is_trivia()) continue;
    if (!cur.first) cur.first = i;
    if (t.is_punct("(") || t.is_punct("[") || t.is_punct("{")) {
      if (auto m = clex::matching_bracket(tokens, i)) i = *m;
    }
    cur.last = i;
  }
  cur.end = close;
  if (cur.first || !slots.empty()) slots.push_back(cur);
  return slots;
}

using Permutation = std::vector<std::size_t>;  // new position i takes old element perm[i]

// Renders [first, last], permuting the leading `perm.size()` arguments of
// every call to `name` (outermost first, nested calls recursively).
std::string render_with_permuted_calls(std::span<const Token> tokens, std::size_t first, std::size_t last,
                                       const std::string& name, const Permutation& perm) {
  std::string out;
  for (std::size_t i = first; i <= last; ++i) {
    const Token& t = tokens[i];
    if (t.is(TokenKind::kIdentifier) && t.text == name && !clex::is_member_access(tokens, i)) {
      const auto open = clex::next_code(tokens, i);
      if (open && *open <= last && tokens[*open].is_punct("(")) {
        const auto close = clex::matching_bracket(tokens, *open);
        if (close && *close <= last) {
          std::vector<Slot> slots = split_list(tokens, *open, *close);
          const bool complete = std::all_of(slots.begin(), slots.end(), [](const Slot& s) { return s.first.has_value(); });
          if (complete && slots.size() >= perm.size() && !perm.empty()) {
            out += render_range(tokens, i, *open);
            for (std::size_t k = 0; k < slots.size(); ++k) {
              const Slot& dst = slots[k];
              const Slot& src = k < perm.size() ? slots[perm[k]] : slots[k];
              out += render_range(tokens, dst.begin, *dst.first - 1);
              out += render_with_permuted_calls(tokens, *src.first, *src.last, name, perm);
              out += render_range(tokens, *dst.last + 1, dst.end - 1);
              if (k + 1 < slots.size()) out += tokens[dst.end].text;
            }
            out += tokens[*close].text;
            i = *close;
            continue;
          }
        }
      }
    }
    out += t.text;
  }
  return out;
}

std::string permuted_function(std::span<const Token> tokens, const clex::FunctionShape& shape, const Permutation& perm) {
  const std::string& name = tokens[shape.name].text;
  std::string out = render_range(tokens, 0, shape.open_paren);
  std::vector<Slot> slots = split_list(tokens, shape.open_paren, shape.close_paren);
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const Slot& dst = slots[k];
    const Slot& src = k < perm.size() ? slots[perm[k]] : slots[k];
    if (dst.first) {
      out += render_range(tokens, dst.begin, *dst.first - 1);
      out += render_range(tokens, *src.first, *src.last);
      out += render_range(tokens, *dst.last + 1, dst.end - 1);
    } else {
      out += render_range(tokens, dst.begin, dst.end - 1);
    }
    if (k + 1 < slots.size()) out += tokens[dst.end].text;
  }
  out += render_range(tokens, shape.close_paren, shape.body_begin - 1);
  out += render_with_permuted_calls(tokens, shape.body_begin, shape.body_end, name, perm);
  out += render_range(tokens, shape.body_end + 1, tokens.size() - 1);
  return out;
}

bool is_identity(const Permutation& p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] != i) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Catalogs for seeded insertions.

// `@` stands for a fresh local name.
const std::vector<std::string> kDeadStatements = {
    "int @ = 0; @++;",
    "unsigned int @ = 1u; @ <<= 1;",
    "long @ = 0; @ += 2;",
    "char @[4] = {0}; @[0] = 1;",
    "double @ = 0.5; @ *= 2.0;",
    "int @ = 0; while (@ < 3) { @++; }",
    "short @ = 7; @ = (short)(@ - 1);",
    "int @ = 42; if (@ > 0) { @ = -@; }",
};

const std::vector<std::string> kFillerWords = {
    "note",  "check", "value",  "buffer", "update", "state", "handle", "input",   "result", "pointer",
    "length", "process", "ensure", "before", "after", "loop",  "index",  "data",  "error",  "size",
    "keep",  "read",  "write",  "next",   "first",  "last",  "count",  "current", "valid",  "field"};

const std::vector<std::string> kWhitespaceInserts = {" ", "  ", "\n", "\n    ", "\t", "\n\n"};

std::string fill_placeholder(const std::string& pattern, const std::string& name) {
  std::string out;
  for (char c : pattern) {
    if (c == '@') {
      out += name;
    } else {
      out += c;
    }
  }
  return out;
}

std::string sanitize_for_comment(std::string text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '*' && i + 1 < text.size() && text[i + 1] == '/') {
      out += "* ";
      continue;
    }
    // A line splice could rejoin `*` and `/` across lines.
    if (text[i] == '\\' && i + 1 < text.size() && (text[i + 1] == '\n' || text[i + 1] == '\r')) {
      out += "\\ ";
      continue;
    }
    out += text[i];
  }
  return out;
}

const std::unordered_set<std::string> kStorageWords = {"static",   "extern",      "inline",
                                                        "__inline", "__inline__", "__forceinline"};

bool uses_function_name_macro(std::span<const Token> tokens, std::size_t first, std::size_t last) {
  for (std::size_t i = first; i <= last; ++i) {
    const Token& t = tokens[i];
    if (t.is(TokenKind::kIdentifier) &&
        (t.text == "__func__" || t.text == "__FUNCTION__" || t.text == "__PRETTY_FUNCTION__")) {
      return true;
    }
  }
  return false;
}

std::vector<std::string> helper_specifiers(std::span<const Token> tokens, const clex::FunctionShape& shape) {
  std::vector<std::string> out{"static"};
  for (std::size_t i = shape.decl_begin; i < shape.name; ++i) {
    const Token& t = tokens[i];
    if (t.is_trivia()) continue;
    if (t.is_word() && kStorageWords.contains(t.text)) continue;
    out.push_back(t.text);
  }
  return out;
}

bool returns_void(std::span<const Token> tokens, const clex::FunctionShape& shape) {
  bool has_void = false;
  for (std::size_t i = shape.decl_begin; i < shape.name; ++i) {
    if (tokens[i].is_punct("*")) return false;
    if (tokens[i].is(TokenKind::kKeyword) && tokens[i].text == "void") has_void = true;
  }
  return has_void;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// The transformations.

using ShapeOrSkip = std::optional<clex::FunctionShape>;

ShapeOrSkip try_shape(std::span<const Token> tokens, std::string& reason) {
  try {
    return clex::parse_function_shape(tokens);
  } catch (const ShapeError& e) {
    reason = std::string("unshapeable: ") + e.what();
    return std::nullopt;
  }
}

ApplyResult rename_params(const CodeSample& in, const TokenStream& tokens, Rng& rng) {
  std::string reason;
  auto shape = try_shape(tokens, reason);
  if (!shape) return skipped(in, TransformId::kT1, reason);
  std::unordered_set<std::string> taken = identifier_set(tokens);
  std::unordered_map<std::string, std::string> renames;
  for (std::size_t idx : shape->param_name_tokens()) {
    std::string fresh = fresh_identifier(rng, taken);
    taken.insert(fresh);
    renames.emplace(tokens[idx].text, std::move(fresh));
  }
  Editor ed(tokens);
  for (std::size_t i = shape->open_paren; i <= shape->body_end; ++i) {
    if (!tokens[i].is(TokenKind::kIdentifier) || clex::is_member_access(tokens, i)) continue;
    if (auto it = renames.find(tokens[i].text); it != renames.end()) ed.replace(i, it->second);
  }
  return applied(in, ed.render(), TransformId::kT1);
}

ApplyResult reorder_params(const CodeSample& in, const TokenStream& tokens, Rng& rng) {
  std::string reason;
  auto shape = try_shape(tokens, reason);
  if (!shape) return skipped(in, TransformId::kT2, reason);
  const std::size_t n = shape->params.size();
  if (n < 2) return applied(in, in.code, TransformId::kT2);
  Permutation perm(n);
  do {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
  } while (is_identity(perm));
  return applied(in, permuted_function(tokens, *shape, perm), TransformId::kT2);
}

ApplyResult rename_function(const CodeSample& in, const TokenStream& tokens, Rng& rng) {
  std::string reason;
  auto shape = try_shape(tokens, reason);
  if (!shape) return skipped(in, TransformId::kT3, reason);
  const std::string fresh = fresh_identifier(rng, identifier_set(tokens));
  Editor ed(tokens);
  ed.replace(shape->name, fresh);
  for (std::size_t r : shape->internal_name_refs) ed.replace(r, fresh);
  return applied(in, ed.render(), TransformId::kT3);
}

ApplyResult insert_dead_code(const CodeSample& in, const TokenStream& tokens, Rng& rng) {
  auto body = clex::find_body(tokens);
  if (!body) return skipped(in, TransformId::kT4, "no function body found");
  const std::string var = fresh_identifier(rng, identifier_set(tokens));
  const std::string stmt = fill_placeholder(rng.pick(kDeadStatements), var);
  Editor ed(tokens);
  ed.insert_after(body->first, "\n    if (0) { " + stmt + " }");
  return applied(in, ed.render(), TransformId::kT4);
}

ApplyResult insert_comment(const CodeSample& in, const TokenStream& tokens, Rng& rng) {
  auto body = clex::find_body(tokens);
  if (!body) return skipped(in, TransformId::kT5, "no function body found");
  std::vector<std::size_t> boundaries{body->first};
  int parens = 0;
  for (std::size_t i = body->first + 1; i < body->second; ++i) {
    const Token& t = tokens[i];
    if (t.is_punct("(")) ++parens;
    if (t.is_punct(")")) --parens;
    if (parens == 0 && (t.is_punct(";") || t.is_punct("{") || t.is_punct("}"))) boundaries.push_back(i);
  }
  const std::size_t at = boundaries[rng.below(boundaries.size())];
  const std::size_t words = 3 + rng.below(4);
  std::vector<std::string> text;
  for (std::size_t k = 0; k < words; ++k) text.push_back(rng.pick(kFillerWords));
  Editor ed(tokens);
  ed.insert_after(at, " /* " + join(text, " ") + " */");
  return applied(in, ed.render(), TransformId::kT5);
}

ApplyResult outline_body(const CodeSample& in, const TokenStream& tokens, Rng& rng) {
  std::string reason;
  auto shape = try_shape(tokens, reason);
  if (!shape) return skipped(in, TransformId::kT6, reason);
  if (shape->has_unnamed_params()) return skipped(in, TransformId::kT6, "unnamed parameter cannot be forwarded");
  if (shape->variadic) return skipped(in, TransformId::kT6, "variadic arguments cannot be forwarded");
  if (shape->complex_return) return skipped(in, TransformId::kT6, "declaration specifiers contain parentheses");
  if (uses_function_name_macro(tokens, shape->body_begin, shape->body_end)) {
    return skipped(in, TransformId::kT6, "body reads __func__");
  }
  const std::string helper = fresh_identifier(rng, identifier_set(tokens));
  const std::string helper_def = join(helper_specifiers(tokens, *shape), " ") + " " + helper +
                                 render_range(tokens, shape->open_paren, shape->close_paren) + " " +
                                 render_range(tokens, shape->body_begin, shape->body_end) + "\n\n";
  const std::string call = helper + "(" + join(shape->param_names(tokens), ", ") + ");";
  const std::string forward = returns_void(tokens, *shape) ? "{\n    " + call + "\n}" : "{\n    return " + call + "\n}";

  std::string out;
  if (shape->decl_begin > 0) out += render_range(tokens, 0, shape->decl_begin - 1);
  out += helper_def;
  out += render_range(tokens, shape->decl_begin, shape->body_begin - 1);
  out += forward;
  out += render_range(tokens, shape->body_end + 1, tokens.size() - 1);
  return applied(in, out, TransformId::kT6);
}

ApplyResult insert_whitespace(const CodeSample& in, const TokenStream& tokens, Rng& rng) {
  if (tokens.size() < 2) return applied(in, in.code, TransformId::kT7);
  // Boundary b sits between tokens b-1 and b.
  std::vector<std::size_t> boundaries;
  for (std::size_t b = 1; b < tokens.size(); ++b) {
    const Token& next = tokens[b];
    if (next.is_punct("#") || next.is_punct("%:") || next.is_punct("##") || next.is_punct("%:%:")) continue;
    boundaries.push_back(b);
  }
  if (boundaries.empty()) return applied(in, in.code, TransformId::kT7);
  const std::size_t count = 1 + rng.below(std::max<std::size_t>(1, tokens.size() / 10));
  Editor ed(tokens);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t b = boundaries[rng.below(boundaries.size())];
    std::string ws = rng.pick(kWhitespaceInserts);
    // Text right after a line comment or directive would extend it.
    const Token& prev = tokens[b - 1];
    if ((prev.is(TokenKind::kCommentLine) || prev.is_directive()) && ws.front() != '\n') ws = "\n" + ws;
    ed.insert_before(b, ws);
  }
  return applied(in, ed.render(), TransformId::kT7);
}

ApplyResult insert_empty_call(const CodeSample& in, const TokenStream& tokens, Rng& rng) {
  std::string reason;
  auto shape = try_shape(tokens, reason);
  if (!shape) return skipped(in, TransformId::kT8, reason);
  const std::string fn = fresh_identifier(rng, identifier_set(tokens));
  Editor ed(tokens);
  ed.insert_before(shape->decl_begin, "static void " + fn + "(void) {}\n\n");
  ed.insert_after(shape->body_begin, "\n    " + fn + "();");
  return applied(in, ed.render(), TransformId::kT8);
}

std::string strip_comments(std::span<const Token> tokens) {
  std::string out;
  std::size_t i = 0;
  bool code_before = false;
  while (i < tokens.size()) {
    if (!tokens[i].is_trivia()) {
      out += tokens[i].text;
      code_before = true;
      ++i;
      continue;
    }
    // Maximal run of whitespace and comments.
    std::string ws;
    bool any_comment = false;
    std::size_t j = i;
    for (; j < tokens.size() && tokens[j].is_trivia(); ++j) {
      if (tokens[j].is_comment()) {
        any_comment = true;
      } else {
        ws += tokens[j].text;
      }
    }
    const bool code_after = j < tokens.size();
    if (!any_comment || !ws.empty()) {
      out += ws;
    } else if (code_before && code_after) {
      out += ' ';
    }
    i = j;
  }
  return out;
}

ApplyResult remove_comments(const CodeSample& in, const TokenStream& tokens) {
  return applied(in, strip_comments(tokens), TransformId::kT9);
}

const CodeSample& pick_aux(const Dataset& aux, const CodeSample& in, Rng& rng) {
  std::size_t k = rng.below(aux.size());
  if (aux[k].id == in.id && aux.size() > 1) k = (k + 1) % aux.size();
  return aux[k];
}

ApplyResult append_aux_comment(const TransformSpec& spec, const CodeSample& in, Rng& rng) {
  if (!spec.aux_corpus || spec.aux_corpus->empty()) throw Error("t10 requires a non-empty aux corpus");
  const CodeSample& aux = pick_aux(*spec.aux_corpus, in, rng);
  return applied(in, in.code + "\n/*\n" + sanitize_for_comment(aux.code) + "\n*/", TransformId::kT10);
}

std::string with_declaration(std::span<const Token> tokens, const clex::FunctionShape& shape, const std::string& name) {
  Editor ed(tokens);
  ed.insert_after(shape.body_begin, "\n    int " + name + ";");
  return ed.render();
}

ApplyResult apply_resolved(const TransformSpec& spec, TransformId id, const CodeSample& in) {
  const TokenStream tokens = clex::tokenize(in.code);
  Rng rng = Rng::derive(spec.seed, in.id, to_string(id));
  switch (id) {
    case TransformId::kT1: return rename_params(in, tokens, rng);
    case TransformId::kT2: return reorder_params(in, tokens, rng);
    case TransformId::kT3: return rename_function(in, tokens, rng);
    case TransformId::kT4: return insert_dead_code(in, tokens, rng);
    case TransformId::kT5: return insert_comment(in, tokens, rng);
    case TransformId::kT6: return outline_body(in, tokens, rng);
    case TransformId::kT7: return insert_whitespace(in, tokens, rng);
    case TransformId::kT8: return insert_empty_call(in, tokens, rng);
    case TransformId::kT9: return remove_comments(in, tokens);
    case TransformId::kT10: return append_aux_comment(spec, in, rng);
    case TransformId::kAdv: {
      if (!spec.adv_model) throw Error("ADV requires a model");
      std::string reason;
      if (!try_shape(tokens, reason)) return skipped(in, TransformId::kAdv, reason);
      ApplyResult r = applied(in, "", TransformId::kAdv);
      r.sample = adv_insert(*spec.adv_model, in, spec.adv_budget, spec.seed);
      return r;
    }
    case TransformId::kT11: break;
  }
  throw Error("t11 cannot delegate to itself");
}

}  // namespace

TransformId t11_choice(std::uint64_t seed, std::string_view sample_id) {
  Rng rng = Rng::derive(seed, sample_id, "t11-choice");
  return static_cast<TransformId>(1 + rng.below(10));
}

ApplyResult apply(const TransformSpec& spec, const CodeSample& sample) {
  if (spec.id == TransformId::kT10 || spec.id == TransformId::kT11) {
    if (!spec.aux_corpus || spec.aux_corpus->empty()) {
      throw Error(to_string(spec.id) + " requires a non-empty aux corpus");
    }
  }
  const TransformId id = spec.id == TransformId::kT11 ? t11_choice(spec.seed, sample.id) : spec.id;
  ApplyResult r = apply_resolved(spec, id, sample);
  r.sample.label = sample.label;
  return r;
}

AmplifyResult amplify(std::span<const CodeSample> dataset, const TransformSpec& spec) {
  if (spec.id == TransformId::kT10 || spec.id == TransformId::kT11) {
    if (!spec.aux_corpus || spec.aux_corpus->empty()) {
      throw Error(to_string(spec.id) + " requires an aux corpus (--aux)");
    }
  }
  AmplifyResult out;
  out.samples.reserve(dataset.size());
  for (const CodeSample& s : dataset) {
    ApplyResult r = apply(spec, s);
    if (r.skipped()) {
      out.skips.push_back(SkipRecord{s.id, r.applied, r.reason});
      continue;
    }
    out.choices.emplace_back(s.id, r.applied);
    out.samples.push_back(std::move(r.sample));
  }
  return out;
}

CodeSample adv_insert(ModelHandle& model, const CodeSample& sample, std::size_t budget, std::uint64_t seed) {
  if (budget == 0) throw Error("ADV budget must be at least 1");
  const TokenStream tokens = clex::tokenize(sample.code);
  const clex::FunctionShape shape = clex::parse_function_shape(tokens);
  Rng rng = Rng::derive(seed, sample.id, "adv");
  std::unordered_set<std::string> taken = identifier_set(tokens);
  Dataset variants;
  variants.reserve(budget);
  for (std::size_t k = 0; k < budget; ++k) {
    std::string name = fresh_identifier(rng, taken);
    taken.insert(name);
    CodeSample v = sample;
    v.code = with_declaration(tokens, shape, name);
    variants.push_back(std::move(v));
  }
  const std::vector<double> probs = model.predict(variants);
  std::size_t best = 0;
  double best_true = 2.0;
  for (std::size_t k = 0; k < variants.size(); ++k) {
    const double p_true = sample.label == 1 ? probs[k] : 1.0 - probs[k];
    if (p_true < best_true) {
      best_true = p_true;
      best = k;
    }
  }
  return variants[best];
}

// ---------------------------------------------------------------------------
// Verification. Each check rebuilds the token-level expectation from `before`
// and the names found in `after`, then compares non-whitespace tokens.

namespace {

using Texts = std::vector<std::string>;

VerifyResult fail(std::string diff) { return VerifyResult{false, std::move(diff)}; }

Texts visible(std::span<const Token> tokens, std::size_t first, std::size_t last, bool keep_comments = true) {
  Texts out;
  for (std::size_t i = first; i < last && i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (t.is(TokenKind::kWhitespace)) continue;
    if (!keep_comments && t.is_comment()) continue;
    out.push_back(t.text);
  }
  return out;
}

Texts visible(std::span<const Token> tokens, bool keep_comments = true) {
  return visible(tokens, 0, tokens.size(), keep_comments);
}

std::size_t visible_index(std::span<const Token> tokens, std::size_t index) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < index; ++i) n += tokens[i].is(TokenKind::kWhitespace) ? 0 : 1;
  return n;
}

std::string quote(std::string_view text) {
  std::string s(text.substr(0, 60));
  for (char& c : s) {
    if (c == '\n') c = ' ';
  }
  return "'" + s + (text.size() > 60 ? "...'" : "'");
}

std::optional<std::string> compare(const Texts& expected, const Texts& actual) {
  const std::size_t n = std::min(expected.size(), actual.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (expected[i] != actual[i]) {
      return "token " + std::to_string(i) + ": expected " + quote(expected[i]) + ", found " + quote(actual[i]);
    }
  }
  if (expected.size() != actual.size()) {
    return "expected " + std::to_string(expected.size()) + " tokens, found " + std::to_string(actual.size());
  }
  return std::nullopt;
}

VerifyResult from(std::optional<std::string> diff) {
  return diff ? fail(*diff) : VerifyResult{};
}

Texts tokens_of(std::string_view code) { return visible(clex::tokenize(code)); }

bool is_fresh_name(const std::string& name, const std::unordered_set<std::string>& taken) {
  if (name.empty() || taken.contains(name) || clex::is_keyword(name)) return false;
  if (!(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) return false;
  return std::all_of(name.begin(), name.end(),
                     [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

// `allowed` maps token positions that may change to the group they belong
// to; every group must map to one fresh name and change everywhere.
VerifyResult verify_renaming(const TokenStream& b, const TokenStream& a,
                             const std::map<std::size_t, std::string>& allowed, bool single_target) {
  if (a.size() != b.size()) return fail("token count changed from " + std::to_string(b.size()) + " to " + std::to_string(a.size()));
  const auto taken = identifier_set(b);
  std::unordered_map<std::string, std::string> mapping;
  std::unordered_set<std::string> targets;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (a[i].kind != b[i].kind) return fail("token " + std::to_string(i) + " changed kind");
    if (a[i].text == b[i].text) continue;
    auto it = allowed.find(i);
    if (it == allowed.end()) {
      return fail("token " + std::to_string(i) + ": " + quote(b[i].text) + " -> " + quote(a[i].text) + " is not a permitted rename");
    }
    auto [m, inserted] = mapping.emplace(it->second, a[i].text);
    if (!inserted && m->second != a[i].text) {
      return fail(quote(it->second) + " renamed inconsistently to " + quote(m->second) + " and " + quote(a[i].text));
    }
    if (inserted) {
      if (!is_fresh_name(a[i].text, taken)) return fail(quote(a[i].text) + " is not a fresh identifier");
      if (!targets.insert(a[i].text).second) return fail(quote(a[i].text) + " is the target of two renames");
    }
  }
  if (single_target && mapping.size() > 1) return fail("more than one new name");
  for (const auto& [pos, group] : allowed) {
    if (mapping.contains(group) && a[pos].text == b[pos].text) {
      return fail("token " + std::to_string(pos) + ": occurrence of " + quote(group) + " left unrenamed");
    }
  }
  return {};
}

VerifyResult verify_params_renamed(const TokenStream& b, const TokenStream& a, const clex::FunctionShape& shape) {
  const auto names = shape.param_names(b);
  const std::unordered_set<std::string> params(names.begin(), names.end());
  std::map<std::size_t, std::string> allowed;
  for (std::size_t i = shape.open_paren; i <= shape.body_end; ++i) {
    if (b[i].is(TokenKind::kIdentifier) && params.contains(b[i].text) && !clex::is_member_access(b, i)) {
      allowed.emplace(i, b[i].text);
    }
  }
  return verify_renaming(b, a, allowed, false);
}

VerifyResult verify_function_renamed(const TokenStream& b, const TokenStream& a, const clex::FunctionShape& shape) {
  std::map<std::size_t, std::string> allowed{{shape.name, b[shape.name].text}};
  for (std::size_t r : shape.internal_name_refs) allowed.emplace(r, b[r].text);
  return verify_renaming(b, a, allowed, true);
}

VerifyResult verify_params_permuted(const TokenStream& b, const TokenStream& a, const clex::FunctionShape& sb) {
  clex::FunctionShape sa;
  try {
    sa = clex::parse_function_shape(a);
  } catch (const ShapeError& e) {
    return fail(std::string("output is not a single function: ") + e.what());
  }
  if (a[sa.name].text != b[sb.name].text) return fail("function name changed");
  if (sa.params.size() != sb.params.size()) return fail("parameter count changed");
  if (sa.variadic != sb.variadic) return fail("variadic marker moved");
  std::vector<std::string> old_cores;
  for (const auto& p : sb.params) old_cores.push_back(render_range(b, p.first, p.last));
  Permutation perm;
  std::vector<bool> used(old_cores.size(), false);
  for (const auto& p : sa.params) {
    const std::string core = render_range(a, p.first, p.last);
    std::size_t k = 0;
    while (k < old_cores.size() && (used[k] || old_cores[k] != core)) ++k;
    if (k == old_cores.size()) return fail("parameter " + quote(core) + " is not one of the original parameters");
    used[k] = true;
    perm.push_back(k);
  }
  return from(compare(tokens_of(permuted_function(b, sb, perm)), visible(a)));
}

// after = before[0, at) + X + before[at, end); returns X's bounds in `after`.
std::optional<std::pair<std::size_t, std::size_t>> splice(const Texts& before, const Texts& after, std::size_t at,
                                                          std::string& diff) {
  if (after.size() <= before.size()) {
    diff = "nothing was inserted";
    return std::nullopt;
  }
  const std::size_t m = after.size() - before.size();
  for (std::size_t i = 0; i < before.size(); ++i) {
    const std::size_t j = i < at ? i : i + m;
    if (before[i] != after[j]) {
      diff = "token " + std::to_string(j) + ": expected " + quote(before[i]) + ", found " + quote(after[j]);
      return std::nullopt;
    }
  }
  return std::make_pair(at, at + m);
}

VerifyResult verify_dead_branch(const TokenStream& b, const TokenStream& a) {
  const auto body = clex::find_body(b);
  if (!body) return fail("input has no body");
  const Texts vb = visible(b);
  const Texts va = visible(a);
  std::string diff;
  const auto x = splice(vb, va, visible_index(b, body->first) + 1, diff);
  if (!x) return fail(diff);
  const Texts ins(va.begin() + static_cast<std::ptrdiff_t>(x->first), va.begin() + static_cast<std::ptrdiff_t>(x->second));
  const Texts head{"if", "(", "0", ")", "{"};
  if (ins.size() < head.size() + 1 || !std::equal(head.begin(), head.end(), ins.begin()) || ins.back() != "}") {
    return fail("inserted tokens are not an `if (0) { ... }` block");
  }
  int depth = 0;
  for (std::size_t i = 4; i < ins.size(); ++i) {
    if (ins[i] == "{") ++depth;
    if (ins[i] == "}" && --depth == 0 && i + 1 != ins.size()) return fail("inserted block closes early");
  }
  const auto taken = identifier_set(b);
  const TokenStream inserted = clex::tokenize(join(ins, " "));
  for (const Token& t : inserted) {
    if (t.is_comment()) return fail("inserted block contains a comment");
    if (t.is(TokenKind::kIdentifier) && !is_fresh_name(t.text, taken)) {
      return fail("inserted block uses existing name " + quote(t.text));
    }
  }
  return {};
}

VerifyResult verify_comment_inserted(const TokenStream& b, const TokenStream& a) {
  const auto body = clex::find_body(b);
  if (!body) return fail("input has no body");
  const Texts vb = visible(b);
  const Texts va = visible(a);
  if (va.size() != vb.size() + 1) return fail("expected exactly one inserted token");
  std::size_t i = 0;
  while (i < vb.size() && vb[i] == va[i]) ++i;
  std::string diff;
  if (!splice(vb, va, i, diff)) return fail(diff);
  const TokenStream inserted = clex::tokenize(va[i]);
  if (inserted.size() != 1 || !inserted[0].is(TokenKind::kCommentBlock)) return fail("inserted token is not a block comment");
  if (i <= visible_index(b, body->first) || i > visible_index(b, body->second)) return fail("comment inserted outside the body");
  return {};
}

VerifyResult verify_outlined(const TokenStream& b, const TokenStream& a, const clex::FunctionShape& sb) {
  std::vector<clex::FunctionShape> shapes;
  try {
    shapes = clex::parse_function_shapes(a);
  } catch (const ShapeError& e) {
    return fail(std::string("output does not parse: ") + e.what());
  }
  if (shapes.size() != 2) return fail("expected a helper and a forwarder, found " + std::to_string(shapes.size()) + " functions");
  const clex::FunctionShape& h = shapes[0];
  const clex::FunctionShape& f = shapes[1];
  const std::string& helper = a[h.name].text;
  if (!is_fresh_name(helper, identifier_set(b))) return fail("helper name " + quote(helper) + " is not fresh");

  const std::size_t n = b.size();
  const std::size_t m = a.size();
  if (auto d = compare(visible(b, 0, sb.decl_begin), visible(a, 0, h.decl_begin))) return fail("before helper: " + *d);
  if (auto d = compare(helper_specifiers(b, sb), visible(a, h.decl_begin, h.name))) return fail("helper specifiers: " + *d);
  if (auto d = compare(visible(b, sb.open_paren, sb.close_paren + 1), visible(a, h.open_paren, h.close_paren + 1))) {
    return fail("helper parameters: " + *d);
  }
  if (!visible(a, h.close_paren + 1, h.body_begin).empty()) return fail("tokens between helper header and body");
  if (auto d = compare(visible(b, sb.body_begin, sb.body_end + 1), visible(a, h.body_begin, h.body_end + 1))) {
    return fail("helper body: " + *d);
  }
  if (!visible(a, h.body_end + 1, f.decl_begin).empty()) return fail("tokens between helper and forwarder");
  if (auto d = compare(visible(b, sb.decl_begin, sb.body_begin), visible(a, f.decl_begin, f.body_begin))) {
    return fail("forwarder header: " + *d);
  }
  const std::string call = helper + "(" + join(sb.param_names(b), ", ") + ");";
  const std::string forward = returns_void(b, sb) ? "{" + call + "}" : "{ return " + call + "}";
  if (auto d = compare(tokens_of(forward), visible(a, f.body_begin, f.body_end + 1))) return fail("forwarder body: " + *d);
  if (auto d = compare(visible(b, sb.body_end + 1, n), visible(a, f.body_end + 1, m))) return fail("after function: " + *d);
  return {};
}

VerifyResult verify_whitespace(const CodeSample& before, const CodeSample& after, const TokenStream& b,
                               const TokenStream& a) {
  if (auto d = compare(visible(b), visible(a))) return fail(*d);
  // Every extra character must be whitespace.
  const std::string& x = before.code;
  const std::string& y = after.code;
  std::size_t i = 0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (i < x.size() && x[i] == y[j]) {
      ++i;
    } else if (!std::isspace(static_cast<unsigned char>(y[j]))) {
      return fail("non-whitespace character inserted at byte " + std::to_string(j));
    }
  }
  if (i != x.size()) return fail("original text not preserved");
  return {};
}

VerifyResult verify_comments_removed(const TokenStream& b, const TokenStream& a) {
  for (const Token& t : a) {
    if (t.is_comment()) return fail("comment " + quote(t.text) + " remains");
  }
  return from(compare(visible(b, false), visible(a, false)));
}

VerifyResult verify_trailing_comment(const TokenStream& b, const TokenStream& a) {
  Texts vb = visible(b);
  const Texts va = visible(a);
  if (va.size() != vb.size() + 1) return fail("expected exactly one appended token");
  std::string diff;
  if (!splice(vb, va, vb.size(), diff)) return fail(diff);
  if (a.empty() || !a.back().is(TokenKind::kCommentBlock)) return fail("appended token is not a block comment");
  return {};
}

VerifyResult verify_empty_call(const TokenStream& b, const TokenStream& a, const clex::FunctionShape& sb) {
  const Texts vb = visible(b);
  const Texts va = visible(a);
  const std::size_t p = visible_index(b, sb.decl_begin);
  const std::size_t k = visible_index(b, sb.body_begin);
  if (va.size() != vb.size() + 12 || p + 2 >= va.size()) return fail("expected a definition and a call to be inserted");
  const std::string& fn = va[p + 2];
  if (!is_fresh_name(fn, identifier_set(b))) return fail(quote(fn) + " is not a fresh identifier");
  Texts expected(vb.begin(), vb.begin() + static_cast<std::ptrdiff_t>(p));
  for (const char* t : {"static", "void"}) expected.emplace_back(t);
  for (const std::string& t : Texts{fn, "(", "void", ")", "{", "}"}) expected.push_back(t);
  expected.insert(expected.end(), vb.begin() + static_cast<std::ptrdiff_t>(p), vb.begin() + static_cast<std::ptrdiff_t>(k) + 1);
  for (const std::string& t : Texts{fn, "(", ")", ";"}) expected.push_back(t);
  expected.insert(expected.end(), vb.begin() + static_cast<std::ptrdiff_t>(k) + 1, vb.end());
  return from(compare(expected, va));
}

VerifyResult verify_declaration(const TokenStream& b, const TokenStream& a, const clex::FunctionShape& sb) {
  const Texts vb = visible(b);
  const Texts va = visible(a);
  const std::size_t k = visible_index(b, sb.body_begin);
  if (va.size() != vb.size() + 3) return fail("expected one declaration to be inserted");
  const std::string& name = va[k + 2];
  if (!is_fresh_name(name, identifier_set(b))) return fail(quote(name) + " is not a fresh identifier");
  Texts expected(vb.begin(), vb.begin() + static_cast<std::ptrdiff_t>(k) + 1);
  for (const std::string& t : Texts{"int", name, ";"}) expected.push_back(t);
  expected.insert(expected.end(), vb.begin() + static_cast<std::ptrdiff_t>(k) + 1, vb.end());
  return from(compare(expected, va));
}

}  // namespace

VerifyResult verify_allowed_change(const CodeSample& before, const CodeSample& after, const TransformSpec& spec) {
  if (after.id != before.id) return fail("id changed");
  if (after.label != before.label) return fail("label changed");
  if (after.code == before.code) return {};
  TokenStream b;
  TokenStream a;
  try {
    b = clex::tokenize(before.code);
    a = clex::tokenize(after.code);
  } catch (const LexError& e) {
    return fail(std::string("does not lex: ") + e.what());
  }

  const TransformId id = spec.id == TransformId::kT11 ? t11_choice(spec.seed, before.id) : spec.id;
  std::optional<clex::FunctionShape> shape;
  if (needs_shape(id)) {
    std::string reason;
    shape = try_shape(b, reason);
    if (!shape) return fail("input is " + reason + " but the code changed");
  }
  switch (allowed_change(id)) {
    case AllowedChange::kParamsRenamed: return verify_params_renamed(b, a, *shape);
    case AllowedChange::kParamsPermuted: return verify_params_permuted(b, a, *shape);
    case AllowedChange::kFunctionRenamed: return verify_function_renamed(b, a, *shape);
    case AllowedChange::kDeadBranchInserted: return verify_dead_branch(b, a);
    case AllowedChange::kCommentInserted: return verify_comment_inserted(b, a);
    case AllowedChange::kBodyOutlined: return verify_outlined(b, a, *shape);
    case AllowedChange::kWhitespaceInserted: return verify_whitespace(before, after, b, a);
    case AllowedChange::kEmptyCallInserted: return verify_empty_call(b, a, *shape);
    case AllowedChange::kCommentsRemoved: return verify_comments_removed(b, a);
    case AllowedChange::kTrailingCommentAdded: return verify_trailing_comment(b, a);
    case AllowedChange::kDeclarationInserted: return verify_declaration(b, a, *shape);
    case AllowedChange::kDelegated: break;
  }
  return fail("t11 cannot delegate to itself");
}

}  // namespace vdbench
