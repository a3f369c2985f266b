#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rffw {

/// Streaming SHA-256 (OpenSSL EVP under the hood). update_frame-style helpers
/// length-prefix their input so concatenated fields cannot alias each other.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(const void* data, size_t n);
    void update_u64(uint64_t v); // little-endian
    void update_field(std::string_view s); // u64 length prefix + bytes
    std::array<uint8_t, 32> finish();
    std::string finish_hex();

private:
    void* ctx_;
};

std::string sha256_hex(const void* data, size_t n);
std::string sha256_hex(std::string_view s);
std::string sha256_file_hex(const std::string& path);

uint32_t crc32_bytes(const void* data, size_t n);

std::string to_hex(const uint8_t* data, size_t n);

/// 64 zero hex chars; genesis parent hash for the custody chain.
inline std::string zero_hash() { return std::string(64, '0'); }

} // namespace rffw
