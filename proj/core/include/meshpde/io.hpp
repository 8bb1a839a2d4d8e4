#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace meshpde::io {

/// Error raised by any reader/writer on malformed or truncated input.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

uint32_t crc32(const uint8_t* data, size_t len, uint32_t seed = 0);
uint32_t crc32_file(const std::filesystem::path& path);

/// Little-endian binary buffer writer. All on-disk formats append a trailing
/// crc32 of the preceding bytes (see finish_with_crc).
class Writer {
public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u32(uint32_t v);
    void u64(uint64_t v);
    void i64(int64_t v) { u64(static_cast<uint64_t>(v)); }
    void f64(double v);
    void bytes(const void* data, size_t len);
    void str(const std::string& s);  // u32 length + bytes
    void magic(const char tag[4]) { bytes(tag, 4); }

    const std::vector<uint8_t>& buffer() const { return buf_; }
    void finish_with_crc();

private:
    std::vector<uint8_t> buf_;
};

/// Reader over an in-memory buffer; throws IoError on overrun.
class Reader {
public:
    explicit Reader(std::vector<uint8_t> data) : buf_(std::move(data)) {}

    uint8_t u8();
    uint32_t u32();
    uint64_t u64();
    int64_t i64() { return static_cast<int64_t>(u64()); }
    double f64();
    void bytes(void* out, size_t len);
    std::string str();
    void expect_magic(const char tag[4], const std::string& what);
    /// Verifies the trailing crc32 (call before reading any field).
    void check_crc(const std::string& what);
    size_t remaining() const { return buf_.size() - pos_; }

private:
    std::vector<uint8_t> buf_;
    size_t pos_ = 0;
};

std::vector<uint8_t> read_file(const std::filesystem::path& path);
/// Write-temp-then-rename so partially written files are never observed.
void write_file_atomic(const std::filesystem::path& path, const std::vector<uint8_t>& data);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace meshpde::io
