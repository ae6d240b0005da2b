#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace vdbench {

/// 64-bit FNV-1a. Stable across platforms; used for feature hashing and
/// seed derivation, never for content addressing.
constexpr std::uint64_t fnv1a64(std::string_view text,
                                std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// SHA-256 of a file's bytes; throws DataError when the file is unreadable.
std::string sha256_file(const std::string& path);

}  // namespace vdbench
