#pragma once

// Lossless C lexer and a minimal structural parser for single-function
// snippets. Concatenating the token texts always reproduces the input.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vdbench::clex {

enum class TokenKind {
  kIdentifier,
  kKeyword,
  kNumber,
  kString,
  kChar,
  kCommentLine,
  kCommentBlock,
  kWhitespace,
  kPunctuator,
  kOther,  // preprocessor directives (one per logical line) and stray bytes
};

std::string_view to_string(TokenKind kind) noexcept;

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t begin = 0;  // byte offsets into the lexed source, [begin, end)
  std::size_t end = 0;

  bool is(TokenKind k) const noexcept { return kind == k; }
  bool is_punct(std::string_view p) const noexcept { return kind == TokenKind::kPunctuator && text == p; }
  bool is_comment() const noexcept {
    return kind == TokenKind::kCommentLine || kind == TokenKind::kCommentBlock;
  }
  bool is_trivia() const noexcept { return kind == TokenKind::kWhitespace || is_comment(); }
  bool is_directive() const noexcept { return kind == TokenKind::kOther && !text.empty() && text[0] == '#'; }
  bool is_word() const noexcept { return kind == TokenKind::kIdentifier || kind == TokenKind::kKeyword; }
};

using TokenStream = std::vector<Token>;

bool is_keyword(std::string_view word) noexcept;

/// Throws LexError on an unterminated string, char literal or block comment.
TokenStream tokenize(std::string_view code);

/// Concatenation of token texts.
std::string render(std::span<const Token> tokens);

/// Tokens that carry program meaning: everything but whitespace and comments.
std::vector<const Token*> code_tokens(std::span<const Token> tokens);

/// True when `code` lexes without error.
bool lexes(std::string_view code) noexcept;

/// One declared parameter. Indices refer to the token stream the shape was
/// parsed from; `first`/`last` are the outermost non-trivia tokens.
struct Param {
  std::size_t first = 0;
  std::size_t last = 0;
  std::optional<std::size_t> name;
};

struct FunctionShape {
  std::size_t decl_begin = 0;  // first token of the declaration specifiers
  std::size_t name = 0;
  std::size_t open_paren = 0;
  std::size_t close_paren = 0;
  std::vector<Param> params;
  bool void_params = false;  // `(void)`
  bool variadic = false;     // trailing `...`, not listed in `params`
  bool complex_return = false;  // specifiers contain parentheses (attributes, macros)
  std::size_t body_begin = 0;   // index of `{`
  std::size_t body_end = 0;     // index of the matching `}`
  std::vector<std::size_t> internal_name_refs;

  bool has_unnamed_params() const noexcept;
  std::vector<std::string> param_names(std::span<const Token> tokens) const;
  /// Parameter name token indices, in declaration order, skipping unnamed ones.
  std::vector<std::size_t> param_name_tokens() const;
};

/// All top-level function definitions, in source order.
/// Throws ShapeError on unbalanced brackets.
std::vector<FunctionShape> parse_function_shapes(std::span<const Token> tokens);

/// Exactly one top-level function definition; throws ShapeError otherwise,
/// including for macro-generated headers that have no declaration specifiers.
FunctionShape parse_function_shape(std::span<const Token> tokens);

/// Index range of the first top-level brace block, found without parsing the
/// header. Used by insertions that only need a body.
std::optional<std::pair<std::size_t, std::size_t>> find_body(std::span<const Token> tokens);

/// Index of the bracket matching the one at `open` (`(`, `[`, `{`), or nullopt.
std::optional<std::size_t> matching_bracket(std::span<const Token> tokens, std::size_t open);

/// True when the identifier at `index` follows `.` or `->`, i.e. names a member.
bool is_member_access(std::span<const Token> tokens, std::size_t index);

/// Index of the nearest non-trivia token before/after `index`, if any.
std::optional<std::size_t> prev_code(std::span<const Token> tokens, std::size_t index);
std::optional<std::size_t> next_code(std::span<const Token> tokens, std::size_t index);

}  // namespace vdbench::clex
