#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_set>

#include "vdbench/clex.hpp"
#include "vdbench/random.hpp"

namespace vdbench {

/// Lowercase letter followed by seven letters or digits, redrawn until it is
/// neither a keyword nor in `taken`.
std::string fresh_identifier(Rng& rng, const std::unordered_set<std::string>& taken);

/// Texts of all identifier tokens in `tokens`.
std::unordered_set<std::string> identifier_set(std::span<const clex::Token> tokens);

/// Identifier-shaped words in free text (comment bodies, aux snippets).
std::unordered_set<std::string> words_in(std::string_view text);

}  // namespace vdbench
