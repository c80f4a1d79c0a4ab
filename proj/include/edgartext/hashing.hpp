#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace edgartext {

/// FNV-1a 64-bit over raw bytes.
inline uint64_t fnv1a64(std::string_view data) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// SHA-256 digest as lowercase hex.
std::string sha256_hex(std::string_view data);

/// SHA-256 of a file's contents as lowercase hex; throws std::runtime_error if
/// the file cannot be read.
std::string sha256_file_hex(const std::string& path);

}  // namespace edgartext
