#pragma once

#include <cstdint>
#include <span>

namespace mtml {

/// 64-bit FNV-1a, used for checkpoint and dataset integrity checks.
constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

constexpr uint64_t fnv1a64(std::span<const unsigned char> bytes, uint64_t h = kFnvOffset) {
  for (const auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace mtml
