#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace embedkit {

// FNV-1a 64-bit; used for input provenance in reports, not for security.
constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes);

// Digest of a file's contents, 16 hex characters. Throws IoError when the
// file cannot be read.
std::string fnv1a64_file_hex(const std::string& path);

}  // namespace embedkit
