#include "vdbench/naming.hpp"

#include <cctype>

namespace vdbench {

namespace {
constexpr std::string_view kLower = "abcdefghijklmnopqrstuvwxyz";
constexpr std::string_view kAlnum = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
}  // namespace

std::string fresh_identifier(Rng& rng, const std::unordered_set<std::string>& taken) {
  while (true) {
    std::string name(1, kLower[rng.below(kLower.size())]);
    for (int i = 0; i < 7; ++i) name += kAlnum[rng.below(kAlnum.size())];
    if (!clex::is_keyword(name) && !taken.contains(name)) return name;
  }
}

std::unordered_set<std::string> identifier_set(std::span<const clex::Token> tokens) {
  std::unordered_set<std::string> out;
  for (const clex::Token& t : tokens) {
    if (t.is(clex::TokenKind::kIdentifier)) {
      out.insert(t.text);
    } else if (t.is_comment() || t.is_directive()) {
      // Names inside directives and comments count as taken too.
      auto more = words_in(t.text);
      out.insert(more.begin(), more.end());
    }
  }
  return out;
}

std::unordered_set<std::string> words_in(std::string_view text) {
  std::unordered_set<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (std::isalpha(c) || c == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      out.emplace(text.substr(i, j - i));
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

}  // namespace vdbench
