#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace safecase {

/// 64-bit FNV-1a. Stable across platforms; used for config and content digests.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Lower-case, zero-padded 16 hex digits.
std::string digest_hex(std::string_view bytes);

}  // namespace safecase
