#include "vdbench/clex.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

#include "vdbench/error.hpp"

namespace vdbench::clex {

namespace {

constexpr std::array<std::string_view, 37> kKeywords = {
    "auto",     "break",    "case",     "char",     "const",   "continue", "default",  "do",
    "double",   "else",     "enum",     "extern",   "float",   "for",      "goto",     "if",
    "inline",   "int",      "long",     "register", "restrict", "return",  "short",    "signed",
    "sizeof",   "static",   "struct",   "switch",   "typedef", "union",    "unsigned", "void",
    "volatile", "while",    "_Bool",    "_Complex", "_Imaginary"};

// Longest first within each length class; matched greedily.
constexpr std::array<std::string_view, 48> kPunctuators = {
    "%:%:", "...", "<<=", ">>=", "->", "++", "--", "<<", ">>", "<=", ">=", "==",
    "!=",   "&&",  "||",  "*=",  "/=", "%=", "+=", "-=", "&=", "^=", "|=", "##",
    "<:",   ":>",  "<%",  "%>",  "%:", "[",  "]",  "(",  ")",  "{",  "}",  ".",
    "&",    "*",   "+",   "-",   "~",  "!",  "/",  "%",  "<",  ">",  "^",  "|"};
constexpr std::string_view kSinglePunct = "?:;=,#";

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$'; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$'; }
bool space_char(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

// Length of a backslash line continuation starting at `i`, or 0.
std::size_t continuation(std::string_view s, std::size_t i) {
  if (i < s.size() && s[i] == '\\') {
    if (i + 1 < s.size() && s[i + 1] == '\n') return 2;
    if (i + 2 < s.size() && s[i + 1] == '\r' && s[i + 2] == '\n') return 3;
  }
  return 0;
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  TokenStream run() {
    TokenStream out;
    bool line_start = true;
    while (pos_ < src_.size()) {
      const std::size_t start = pos_;
      const TokenKind kind = next(line_start);
      if (kind == TokenKind::kWhitespace) {
        for (std::size_t k = start; k < pos_; ++k) {
          if (src_[k] == '\n' && !(k > start && src_[k - 1] == '\\') &&
              !(k > start + 1 && src_[k - 1] == '\r' && src_[k - 2] == '\\')) {
            line_start = true;
          }
        }
      } else {
        line_start = false;
      }
      out.push_back(Token{kind, std::string(src_.substr(start, pos_ - start)), start, pos_});
    }
    return out;
  }

 private:
  char at(std::size_t i) const { return i < src_.size() ? src_[i] : '\0'; }
  bool starts(std::string_view p) const { return src_.substr(pos_, p.size()) == p; }

  TokenKind next(bool line_start) {
    const char c = src_[pos_];
    if (space_char(c) || continuation(src_, pos_)) {
      while (pos_ < src_.size()) {
        if (space_char(src_[pos_])) {
          ++pos_;
        } else if (std::size_t k = continuation(src_, pos_)) {
          pos_ += k;
        } else {
          break;
        }
      }
      return TokenKind::kWhitespace;
    }
    if (line_start && (c == '#' || starts("%:"))) return directive();
    if (starts("//")) {
      line_comment();
      return TokenKind::kCommentLine;
    }
    if (starts("/*")) {
      block_comment();
      return TokenKind::kCommentBlock;
    }
    if (ident_start(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && ident_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      const std::string_view word = src_.substr(start, pos_ - start);
      const bool prefix = word == "L" || word == "u" || word == "U" || word == "u8";
      if (prefix && at(pos_) == '"') {
        quoted('"', start, "unterminated string literal");
        return TokenKind::kString;
      }
      if (prefix && at(pos_) == '\'') {
        quoted('\'', start, "unterminated character literal");
        return TokenKind::kChar;
      }
      return is_keyword(word) ? TokenKind::kKeyword : TokenKind::kIdentifier;
    }
    if (c == '"') {
      quoted('"', pos_, "unterminated string literal");
      return TokenKind::kString;
    }
    if (c == '\'') {
      quoted('\'', pos_, "unterminated character literal");
      return TokenKind::kChar;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && std::isdigit(static_cast<unsigned char>(at(pos_ + 1))))) {
      number();
      return TokenKind::kNumber;
    }
    for (std::string_view p : kPunctuators) {
      if (starts(p)) {
        pos_ += p.size();
        return TokenKind::kPunctuator;
      }
    }
    if (kSinglePunct.find(c) != std::string_view::npos) {
      ++pos_;
      return TokenKind::kPunctuator;
    }
    if (static_cast<unsigned char>(c) >= 0x80) {
      while (pos_ < src_.size() && static_cast<unsigned char>(src_[pos_]) >= 0x80) ++pos_;
      return TokenKind::kOther;
    }
    ++pos_;
    return TokenKind::kOther;
  }

  // Directive runs to the end of the logical line; comments and literals
  // inside it are absorbed so a `/* ... */` spanning lines stays whole.
  TokenKind directive() {
    while (pos_ < src_.size() && src_[pos_] != '\n') {
      if (std::size_t k = continuation(src_, pos_)) {
        pos_ += k;
      } else if (starts("/*")) {
        block_comment();
      } else if (starts("//")) {
        line_comment();
      } else if (src_[pos_] == '"' || src_[pos_] == '\'') {
        const char q = src_[pos_++];
        while (pos_ < src_.size() && src_[pos_] != q && src_[pos_] != '\n') {
          pos_ += (src_[pos_] == '\\' && pos_ + 1 < src_.size()) ? 2 : 1;
        }
        if (pos_ < src_.size() && src_[pos_] == q) ++pos_;
      } else {
        ++pos_;
      }
    }
    return TokenKind::kOther;
  }

  void line_comment() {
    while (pos_ < src_.size() && src_[pos_] != '\n') {
      if (std::size_t k = continuation(src_, pos_)) {
        pos_ += k;
      } else {
        ++pos_;
      }
    }
  }

  void block_comment() {
    const std::size_t start = pos_;
    const std::size_t close = src_.find("*/", pos_ + 2);
    if (close == std::string_view::npos) throw LexError(start, "unterminated block comment");
    pos_ = close + 2;
  }

  void quoted(char q, std::size_t start, const char* what) {
    ++pos_;  // opening quote (prefix already consumed)
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') throw LexError(start, what);
      if (src_[pos_] == '\\') {
        if (pos_ + 1 >= src_.size()) throw LexError(start, what);
        pos_ += (src_[pos_ + 1] == '\r' && at(pos_ + 2) == '\n') ? 3 : 2;
        continue;
      }
      if (src_[pos_] == q) {
        ++pos_;
        return;
      }
      ++pos_;
    }
  }

  void number() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if ((c == '+' || c == '-') && pos_ > 0) {
        const char e = src_[pos_ - 1];
        if (e == 'e' || e == 'E' || e == 'p' || e == 'P') {
          ++pos_;
          continue;
        }
        break;
      }
      if (ident_char(static_cast<unsigned char>(c)) || c == '.') {
        ++pos_;
        continue;
      }
      break;
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

bool opens(const Token& t) {
  return t.kind == TokenKind::kPunctuator &&
         (t.text == "(" || t.text == "[" || t.text == "{" || t.text == "<:" || t.text == "<%");
}
bool closes(const Token& t) {
  return t.kind == TokenKind::kPunctuator &&
         (t.text == ")" || t.text == "]" || t.text == "}" || t.text == ":>" || t.text == "%>");
}
char bracket_class(const Token& t) {
  if (t.text == "(" || t.text == ")") return '(';
  if (t.text == "[" || t.text == "]" || t.text == "<:" || t.text == ":>") return '[';
  return '{';
}
bool is_open_brace(const Token& t) { return t.is_punct("{") || t.is_punct("<%"); }

// Tokens that take part in structure: not whitespace, comments or directives.
bool significant(const Token& t) { return !t.is_trivia() && !t.is_directive(); }

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// match[i] = index of the partner bracket, kNone for non-brackets.
std::vector<std::size_t> match_brackets(std::span<const Token> tokens) {
  std::vector<std::size_t> match(tokens.size(), kNone);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (!significant(t)) continue;
    if (opens(t)) {
      stack.push_back(i);
    } else if (closes(t)) {
      if (stack.empty() || bracket_class(tokens[stack.back()]) != bracket_class(t)) {
        throw ShapeError(ShapeError::Reason::kUnbalanced, "unbalanced '" + t.text + "' at offset " + std::to_string(t.begin));
      }
      match[stack.back()] = i;
      match[i] = stack.back();
      stack.pop_back();
    }
  }
  if (!stack.empty()) {
    throw ShapeError(ShapeError::Reason::kUnbalanced,
                     "unclosed '" + tokens[stack.back()].text + "' at offset " + std::to_string(tokens[stack.back()].begin));
  }
  return match;
}

std::size_t prev_sig(std::span<const Token> tokens, std::size_t i) {
  while (i > 0) {
    --i;
    if (significant(tokens[i])) return i;
  }
  return kNone;
}

std::size_t next_sig(std::span<const Token> tokens, std::size_t i, std::size_t limit) {
  for (++i; i < limit; ++i) {
    if (significant(tokens[i])) return i;
  }
  return kNone;
}

bool is_attribute_word(const Token& t) {
  return t.kind == TokenKind::kIdentifier &&
         (t.text == "__attribute__" || t.text == "__attribute" || t.text == "__declspec" ||
          t.text == "__asm__" || t.text == "__asm" || t.text == "asm");
}

bool is_qualifier(const Token& t) {
  return t.kind == TokenKind::kKeyword &&
         (t.text == "const" || t.text == "volatile" || t.text == "restrict" || t.text == "register");
}

std::optional<std::size_t> param_name(std::span<const Token> tokens, const std::vector<std::size_t>& match,
                                      std::size_t first, std::size_t last) {
  // Declarator in parentheses: `void (*cb)(int)`, `int (*rows)[4]`.
  for (std::size_t i = first; i <= last; ++i) {
    if (!significant(tokens[i])) continue;
    if (tokens[i].is_punct("(") && match[i] != kNone) {
      const std::size_t inner = next_sig(tokens, i, match[i]);
      if (inner != kNone && (tokens[inner].is_punct("*") || tokens[inner].is_punct("^"))) {
        std::optional<std::size_t> found;
        for (std::size_t k = inner; k < match[i]; ++k) {
          if (tokens[k].is_punct("(") || tokens[k].is_punct("[")) break;
          if (tokens[k].is(TokenKind::kIdentifier)) found = k;
        }
        return found;
      }
    }
    if ((tokens[i].is_punct("(") || tokens[i].is_punct("[")) && match[i] != kNone) i = match[i];
  }
  std::optional<std::size_t> candidate;
  for (std::size_t i = first; i <= last; ++i) {
    if (!significant(tokens[i])) continue;
    if ((opens(tokens[i])) && match[i] != kNone) {
      i = match[i];
      continue;
    }
    if (tokens[i].is(TokenKind::kIdentifier) && !is_attribute_word(tokens[i])) candidate = i;
  }
  if (!candidate) return std::nullopt;
  const std::size_t before = prev_sig(tokens, *candidate);
  if (before == kNone || before < first) return std::nullopt;  // lone type name
  const Token& b = tokens[before];
  if (b.is_word() && (b.text == "struct" || b.text == "union" || b.text == "enum")) return std::nullopt;
  // Only qualifiers before it: `const size_t`.
  bool only_qualifiers = true;
  for (std::size_t i = first; i < *candidate; ++i) {
    if (significant(tokens[i]) && !is_qualifier(tokens[i])) only_qualifiers = false;
  }
  if (only_qualifiers) return std::nullopt;
  return candidate;
}

struct Candidate {
  FunctionShape shape;
  bool has_specifiers = true;
};

void parse_params(std::span<const Token> tokens, const std::vector<std::size_t>& match, FunctionShape& shape) {
  std::vector<std::pair<std::size_t, std::size_t>> segments;  // [first, last] significant tokens
  std::size_t seg_first = kNone;
  std::size_t seg_last = kNone;
  bool any_comma = false;
  for (std::size_t i = shape.open_paren + 1; i < shape.close_paren; ++i) {
    const Token& t = tokens[i];
    if (!significant(t)) continue;
    if (t.is_punct(",")) {
      any_comma = true;
      if (seg_first == kNone) throw ShapeError(ShapeError::Reason::kUnshapeable, "empty parameter declaration");
      segments.emplace_back(seg_first, seg_last);
      seg_first = kNone;
      continue;
    }
    if (seg_first == kNone) seg_first = i;
    if (opens(t) && match[i] != kNone) i = match[i];
    seg_last = i;
  }
  if (seg_first == kNone) {
    if (any_comma) throw ShapeError(ShapeError::Reason::kUnshapeable, "empty parameter declaration");
    return;
  }
  segments.emplace_back(seg_first, seg_last);

  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto [first, last] = segments[s];
    if (first == last && tokens[first].is_punct("...")) {
      if (s + 1 != segments.size()) throw ShapeError(ShapeError::Reason::kUnshapeable, "'...' before the last parameter");
      shape.variadic = true;
      continue;
    }
    if (first == last && tokens[first].kind == TokenKind::kKeyword && tokens[first].text == "void" && segments.size() == 1) {
      shape.void_params = true;
      continue;
    }
    shape.params.push_back(Param{first, last, param_name(tokens, match, first, last)});
  }
  std::unordered_set<std::string> seen;
  for (const Param& p : shape.params) {
    if (p.name && !seen.insert(tokens[*p.name].text).second) {
      throw ShapeError(ShapeError::Reason::kUnshapeable, "duplicate parameter name '" + tokens[*p.name].text + "'");
    }
  }
}

}  // namespace

std::string_view to_string(TokenKind kind) noexcept {
  switch (kind) {
    case TokenKind::kIdentifier: return "identifier";
    case TokenKind::kKeyword: return "keyword";
    case TokenKind::kNumber: return "number";
    case TokenKind::kString: return "string";
    case TokenKind::kChar: return "char";
    case TokenKind::kCommentLine: return "comment_line";
    case TokenKind::kCommentBlock: return "comment_block";
    case TokenKind::kWhitespace: return "whitespace";
    case TokenKind::kPunctuator: return "punctuator";
    case TokenKind::kOther: return "other";
  }
  return "other";
}

bool is_keyword(std::string_view word) noexcept {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

TokenStream tokenize(std::string_view code) { return Lexer(code).run(); }

std::string render(std::span<const Token> tokens) {
  std::string out;
  for (const Token& t : tokens) out += t.text;
  return out;
}

std::vector<const Token*> code_tokens(std::span<const Token> tokens) {
  std::vector<const Token*> out;
  for (const Token& t : tokens) {
    if (!t.is_trivia()) out.push_back(&t);
  }
  return out;
}

bool lexes(std::string_view code) noexcept {
  try {
    tokenize(code);
    return true;
  } catch (const LexError&) {
    return false;
  }
}

bool FunctionShape::has_unnamed_params() const noexcept {
  return std::any_of(params.begin(), params.end(), [](const Param& p) { return !p.name; });
}

std::vector<std::string> FunctionShape::param_names(std::span<const Token> tokens) const {
  std::vector<std::string> out;
  for (const Param& p : params) {
    if (p.name) out.push_back(tokens[*p.name].text);
  }
  return out;
}

std::vector<std::size_t> FunctionShape::param_name_tokens() const {
  std::vector<std::size_t> out;
  for (const Param& p : params) {
    if (p.name) out.push_back(*p.name);
  }
  return out;
}

std::optional<std::size_t> matching_bracket(std::span<const Token> tokens, std::size_t open) {
  if (open >= tokens.size() || !opens(tokens[open])) return std::nullopt;
  int depth = 0;
  for (std::size_t i = open; i < tokens.size(); ++i) {
    if (!significant(tokens[i])) continue;
    if (opens(tokens[i])) ++depth;
    if (closes(tokens[i]) && --depth == 0) return i;
  }
  return std::nullopt;
}

bool is_member_access(std::span<const Token> tokens, std::size_t index) {
  const auto p = prev_code(tokens, index);
  return p && (tokens[*p].is_punct(".") || tokens[*p].is_punct("->"));
}

std::optional<std::size_t> prev_code(std::span<const Token> tokens, std::size_t index) {
  while (index > 0) {
    --index;
    if (!tokens[index].is_trivia()) return index;
  }
  return std::nullopt;
}

std::optional<std::size_t> next_code(std::span<const Token> tokens, std::size_t index) {
  for (++index; index < tokens.size(); ++index) {
    if (!tokens[index].is_trivia()) return index;
  }
  return std::nullopt;
}

namespace {

std::vector<Candidate> scan_definitions(std::span<const Token> tokens) {
  const std::vector<std::size_t> match = match_brackets(tokens);
  std::vector<Candidate> found;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (!significant(t)) continue;
    if (!opens(t)) continue;
    if (!is_open_brace(t)) {
      i = match[i];
      continue;
    }
    const std::size_t body_end = match[i];
    // Walk back over trailing attribute groups to the parameter list.
    std::size_t p = prev_sig(tokens, i);
    while (p != kNone && tokens[p].is_punct(")")) {
      const std::size_t q = match[p];
      const std::size_t before = prev_sig(tokens, q);
      if (before != kNone && is_attribute_word(tokens[before])) {
        p = prev_sig(tokens, before);
        continue;
      }
      break;
    }
    if (p != kNone && tokens[p].is_punct(")")) {
      const std::size_t open = match[p];
      const std::size_t name = prev_sig(tokens, open);
      if (name != kNone && tokens[name].is(TokenKind::kIdentifier) && !is_attribute_word(tokens[name])) {
        Candidate c;
        FunctionShape& s = c.shape;
        s.name = name;
        s.open_paren = open;
        s.close_paren = p;
        s.body_begin = i;
        s.body_end = body_end;
        // Declaration specifiers start after the previous top-level statement.
        std::size_t k = name;
        std::size_t begin = name;
        while (k > 0) {
          --k;
          const Token& b = tokens[k];
          if (b.is_directive()) break;
          if (!significant(b)) continue;
          if (b.is_punct("}") || b.is_punct("%>")) break;
          if (closes(b)) {
            k = match[k];
            begin = k;
            s.complex_return = true;
            continue;
          }
          if (b.is_punct(";") || b.is_punct("{") || b.is_punct("<%")) break;
          begin = k;
        }
        s.decl_begin = begin;
        c.has_specifiers = begin != name;
        parse_params(tokens, match, s);
        const std::string& fname = tokens[name].text;
        for (std::size_t r = i + 1; r < body_end; ++r) {
          if (tokens[r].is(TokenKind::kIdentifier) && tokens[r].text == fname && !is_member_access(tokens, r)) {
            s.internal_name_refs.push_back(r);
          }
        }
        found.push_back(std::move(c));
      }
    }
    i = body_end;
  }
  return found;
}

}  // namespace

std::vector<FunctionShape> parse_function_shapes(std::span<const Token> tokens) {
  std::vector<FunctionShape> out;
  for (Candidate& c : scan_definitions(tokens)) out.push_back(std::move(c.shape));
  return out;
}

FunctionShape parse_function_shape(std::span<const Token> tokens) {
  std::vector<Candidate> found = scan_definitions(tokens);
  if (found.empty()) throw ShapeError(ShapeError::Reason::kNoFunction, "no function definition found");
  if (found.size() > 1) {
    throw ShapeError(ShapeError::Reason::kMultipleDefinitions,
                     std::to_string(found.size()) + " top-level function definitions");
  }
  if (!found.front().has_specifiers) {
    throw ShapeError(ShapeError::Reason::kUnshapeable,
                     "function header has no declaration specifiers (macro-generated?)");
  }
  return std::move(found.front().shape);
}

std::optional<std::pair<std::size_t, std::size_t>> find_body(std::span<const Token> tokens) {
  std::vector<std::size_t> match;
  try {
    match = match_brackets(tokens);
  } catch (const ShapeError&) {
    return std::nullopt;
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!significant(tokens[i]) || !opens(tokens[i])) continue;
    if (is_open_brace(tokens[i])) {
      const std::size_t p = prev_sig(tokens, i);
      if (p != kNone && tokens[p].is_punct(")")) return std::pair{i, match[i]};
    }
    i = match[i];
  }
  return std::nullopt;
}

}  // namespace vdbench::clex
