#pragma once

#include <cstdint>
#include <string_view>

namespace activegp {

/// splitmix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

[[nodiscard]] constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Child seed for a named role ("initial", "pool", "strategy:vwal", ...). Independent of
/// which other roles exist, so adding a consumer never perturbs existing streams.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view role) noexcept {
  return mix64(mix64(master) ^ fnv1a64(role));
}

}  // namespace activegp
