#include <gtest/gtest.h>

#include <string>

#include "vdbench/clex.hpp"
#include "vdbench/error.hpp"

using namespace vdbench;
using namespace vdbench::clex;

namespace {

std::string name_of(const std::string& code) {
  const auto tokens = tokenize(code);
  return tokens[parse_function_shape(tokens).name].text;
}

}  // namespace

TEST(Lexer, RoundTripsExactly) {
  const std::string code =
      "#include <stdio.h>\n"
      "/* block */ int f(int a, char *b) { // line\n"
      "  const char *s = \"x\\\"y\"; char c = '\\n';\n"
      "  return a ? 0x1fUL : 1.5e-3f; }\n"
      "#define M(x) \\\n  (x)\n";
  const auto tokens = tokenize(code);
  EXPECT_EQ(render(tokens), code);
}

TEST(Lexer, Kinds) {
  const auto tokens = tokenize("int x=/*c*/\"s\" 'c' 12;");
  std::vector<TokenKind> kinds;
  for (const auto& t : tokens) kinds.push_back(t.kind);
  const std::vector<TokenKind> expected{TokenKind::kKeyword,   TokenKind::kWhitespace,   TokenKind::kIdentifier,
                                        TokenKind::kPunctuator, TokenKind::kCommentBlock, TokenKind::kString,
                                        TokenKind::kWhitespace, TokenKind::kChar,         TokenKind::kWhitespace,
                                        TokenKind::kNumber,     TokenKind::kPunctuator};
  EXPECT_EQ(kinds, expected);
}

TEST(Lexer, MultiCharPunctuators) {
  const auto tokens = tokenize("a->b<<=c...");
  ASSERT_EQ(tokens.size(), 6u);
  EXPECT_EQ(tokens[1].text, "->");
  EXPECT_EQ(tokens[3].text, "<<=");
  EXPECT_EQ(tokens[5].text, "...");
  EXPECT_TRUE(tokens[2].is(TokenKind::kIdentifier));
}

TEST(Lexer, DirectiveIsOneToken) {
  const auto tokens = tokenize("#if X /* y\n z */\nint a;");
  ASSERT_FALSE(tokens.empty());
  EXPECT_TRUE(tokens[0].is_directive());
  EXPECT_EQ(tokens[0].text, "#if X /* y\n z */");
}

TEST(Lexer, UnterminatedInputsThrow) {
  EXPECT_THROW(tokenize("int a = \"abc;"), LexError);
  EXPECT_THROW(tokenize("/* open"), LexError);
  EXPECT_THROW(tokenize("char c = 'x;"), LexError);
  EXPECT_FALSE(lexes("/* open"));
  EXPECT_TRUE(lexes("int a;"));
}

TEST(Lexer, OffsetsCoverInput) {
  const std::string code = "int  f(void){return 0;}";
  std::size_t at = 0;
  for (const auto& t : tokenize(code)) {
    EXPECT_EQ(t.begin, at);
    EXPECT_EQ(code.substr(t.begin, t.end - t.begin), t.text);
    at = t.end;
  }
  EXPECT_EQ(at, code.size());
}

TEST(Shape, SimpleFunction) {
  const std::string code = "static int add(int a, const char *b)\n{\n  return add(a, b) + 1;\n}\n";
  const auto tokens = tokenize(code);
  const FunctionShape s = parse_function_shape(tokens);
  EXPECT_EQ(tokens[s.decl_begin].text, "static");
  EXPECT_EQ(tokens[s.name].text, "add");
  EXPECT_EQ(s.param_names(tokens), (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(tokens[s.body_begin].is_punct("{"));
  EXPECT_TRUE(tokens[s.body_end].is_punct("}"));
  ASSERT_EQ(s.internal_name_refs.size(), 1u);
  EXPECT_EQ(tokens[s.internal_name_refs[0]].text, "add");
}

TEST(Shape, VoidAndVariadic) {
  auto tokens = tokenize("void f(void) {}");
  auto s = parse_function_shape(tokens);
  EXPECT_TRUE(s.void_params);
  EXPECT_TRUE(s.params.empty());

  tokens = tokenize("int logf(const char *fmt, ...) { return 0; }");
  s = parse_function_shape(tokens);
  EXPECT_TRUE(s.variadic);
  EXPECT_EQ(s.param_names(tokens), std::vector<std::string>{"fmt"});
}

TEST(Shape, FunctionPointerAndArrayParams) {
  const auto tokens = tokenize("int apply(int (*fn)(int), int v[4]) { return fn(v[0]); }");
  const auto s = parse_function_shape(tokens);
  EXPECT_EQ(s.param_names(tokens), (std::vector<std::string>{"fn", "v"}));
}

TEST(Shape, PointerReturnAndLeadingComment) {
  EXPECT_EQ(name_of("/* doc */\nchar *\ndup_str(const char *s)\n{\n  return 0;\n}"), "dup_str");
}

TEST(Shape, UnnamedParameter) {
  const auto tokens = tokenize("int f(int, char *p) { return 0; }");
  const auto s = parse_function_shape(tokens);
  EXPECT_TRUE(s.has_unnamed_params());
  EXPECT_EQ(s.param_name_tokens().size(), 1u);
}

TEST(Shape, RejectsNonFunctions) {
  auto tokens = tokenize("int x = 3;");
  EXPECT_THROW(parse_function_shape(tokens), ShapeError);
  tokens = tokenize("int f(void) {} int g(void) {}");
  EXPECT_THROW(parse_function_shape(tokens), ShapeError);
  EXPECT_EQ(parse_function_shapes(tokens).size(), 2u);
  tokens = tokenize("int f(void) { if (x) { }");
  EXPECT_THROW(parse_function_shapes(tokens), ShapeError);
}

TEST(Shape, MemberAccessIsNotAReference) {
  const auto tokens = tokenize("int f(struct s *p) { return p->f + f(p); }");
  const auto s = parse_function_shape(tokens);
  ASSERT_EQ(s.internal_name_refs.size(), 1u);
  EXPECT_FALSE(is_member_access(tokens, s.internal_name_refs[0]));
}

TEST(Shape, MatchingBracketAndBody) {
  const auto tokens = tokenize("int f(int a) { return (a[0]); }");
  const auto body = find_body(tokens);
  ASSERT_TRUE(body);
  EXPECT_TRUE(tokens[body->first].is_punct("{"));
  EXPECT_EQ(matching_bracket(tokens, body->first), body->second);
}
