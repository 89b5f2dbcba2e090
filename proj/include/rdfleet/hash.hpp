#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace rdfleet {

using Sha256Digest = std::array<std::uint8_t, 32>;

/// XXH64 (xxHash, 64-bit variant) of `data` with the given seed.
std::uint64_t xxh64(std::span<const std::uint8_t> data, std::uint64_t seed = 0);
std::uint64_t xxh64(std::string_view data, std::uint64_t seed = 0);

Sha256Digest sha256(std::string_view data);
Sha256Digest hmac_sha256(std::string_view key, std::string_view data);

std::string to_hex(std::span<const std::uint8_t> bytes);

}  // namespace rdfleet
