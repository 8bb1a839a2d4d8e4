#include "meshpde/io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian and the readers assume a little-endian host");

namespace meshpde::io {

namespace {

std::array<uint32_t, 256> make_crc_table() {
    std::array<uint32_t, 256> table{};
    for (uint32_t i = 0; i < 256; ++i) {
        uint32_t c = i;
        for (int k = 0; k < 8; ++k) {
            c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
        }
        table[i] = c;
    }
    return table;
}

const std::array<uint32_t, 256>& crc_table() {
    static const auto table = make_crc_table();
    return table;
}

}  // namespace

uint32_t crc32(const uint8_t* data, size_t len, uint32_t seed) {
    const auto& table = crc_table();
    uint32_t c = seed ^ 0xffffffffu;
    for (size_t i = 0; i < len; ++i) {
        c = table[(c ^ data[i]) & 0xffu] ^ (c >> 8);
    }
    return c ^ 0xffffffffu;
}

uint32_t crc32_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    uint32_t crc = 0;
    std::vector<char> chunk(1 << 16);
    while (in) {
        in.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
        const auto got = in.gcount();
        if (got > 0) {
            crc = crc32(reinterpret_cast<const uint8_t*>(chunk.data()), static_cast<size_t>(got),
                        crc);
        }
    }
    return crc;
}

void Writer::u32(uint32_t v) { bytes(&v, sizeof v); }
void Writer::u64(uint64_t v) { bytes(&v, sizeof v); }
void Writer::f64(double v) { bytes(&v, sizeof v); }

void Writer::bytes(const void* data, size_t len) {
    const auto* p = static_cast<const uint8_t*>(data);
    buf_.insert(buf_.end(), p, p + len);
}

void Writer::str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    bytes(s.data(), s.size());
}

void Writer::finish_with_crc() { u32(crc32(buf_.data(), buf_.size())); }

uint8_t Reader::u8() {
    uint8_t v;
    bytes(&v, 1);
    return v;
}

uint32_t Reader::u32() {
    uint32_t v;
    bytes(&v, sizeof v);
    return v;
}

uint64_t Reader::u64() {
    uint64_t v;
    bytes(&v, sizeof v);
    return v;
}

double Reader::f64() {
    double v;
    bytes(&v, sizeof v);
    return v;
}

void Reader::bytes(void* out, size_t len) {
    if (pos_ + len > buf_.size()) throw IoError("truncated file");
    std::memcpy(out, buf_.data() + pos_, len);
    pos_ += len;
}

std::string Reader::str() {
    const uint32_t len = u32();
    if (pos_ + len > buf_.size()) throw IoError("truncated string");
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), len);
    pos_ += len;
    return s;
}

void Reader::expect_magic(const char tag[4], const std::string& what) {
    char got[4];
    bytes(got, 4);
    if (std::memcmp(got, tag, 4) != 0) {
        throw IoError(what + ": bad magic, expected \"" + std::string(tag, 4) + "\"");
    }
}

void Reader::check_crc(const std::string& what) {
    if (buf_.size() < 4) throw IoError(what + ": truncated file");
    uint32_t stored;
    std::memcpy(&stored, buf_.data() + buf_.size() - 4, 4);
    const uint32_t computed = crc32(buf_.data(), buf_.size() - 4);
    if (stored != computed) throw IoError(what + ": checksum mismatch");
    buf_.resize(buf_.size() - 4);
}

std::vector<uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open file: " + path.string());
    const auto size = in.tellg();
    in.seekg(0);
    std::vector<uint8_t> data(static_cast<size_t>(size));
    in.read(reinterpret_cast<char*>(data.data()), size);
    if (!in) throw IoError("short read: " + path.string());
    return data;
}

void write_file_atomic(const std::filesystem::path& path, const std::vector<uint8_t>& data) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write file: " + tmp.string());
        out.write(reinterpret_cast<const char*>(data.data()),
                  static_cast<std::streamsize>(data.size()));
        if (!out) throw IoError("short write: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    std::vector<uint8_t> data(text.begin(), text.end());
    write_file_atomic(path, data);
}

}  // namespace meshpde::io
