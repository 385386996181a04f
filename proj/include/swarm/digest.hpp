#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace swarm {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Lowercase hex HMAC-SHA-256 of `data` under `key`.
std::string hmac_sha256_hex(std::string_view key, std::string_view data);

/// `bytes` bytes from the system CSPRNG, hex encoded.
std::string random_hex(std::size_t bytes);

}  // namespace swarm
