#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace vbs {

// FNV-1a, 64-bit. Used for the bundled-table content hash and for state
// fingerprints in tests.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t seed = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  return fnv1a64(s.data(), s.size());
}

inline std::uint64_t fnv1a64(const std::vector<double>& v,
                             std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (double d : v) {
    const auto bits = std::bit_cast<std::uint64_t>(d);
    h = fnv1a64(&bits, sizeof(bits), h);
  }
  return h;
}

}  // namespace vbs
