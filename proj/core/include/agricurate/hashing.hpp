#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace agricurate {

// Lowercase 64-hex SHA-256 digest.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

// FNV-1a, used to derive per-key seeds.
constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

bool is_lower_hex(std::string_view text, std::size_t length) noexcept;

}  // namespace agricurate
