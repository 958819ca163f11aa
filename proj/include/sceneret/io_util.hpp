#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sceneret/error.hpp"

namespace sceneret::io {

/// Append-only little-endian byte sink.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) { put_le(v); }
    void u32(std::uint32_t v) { put_le(v); }
    void u64(std::uint64_t v) { put_le(v); }
    void f32(float v) { put_le(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v)); }
    void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
    /// u32 length followed by the raw bytes.
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s);
    }

    std::size_t size() const { return buf_.size(); }
    const std::vector<char>& buffer() const { return buf_; }
    std::vector<char>& buffer() { return buf_; }

    void patch_u64(std::size_t at, std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_[at + i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    }

private:
    template <typename U>
    void put_le(U v) {
        for (std::size_t i = 0; i < sizeof(U); ++i)
            buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }

    std::vector<char> buf_;
};

/// Bounds-checked little-endian reader over a byte span; every overrun
/// raises sceneret::Error naming `what`.
class ByteReader {
public:
    ByteReader(std::span<const char> data, std::string what)
        : data_(data), what_(std::move(what)) {}

    std::uint8_t u8() { return get_le<std::uint8_t>(); }
    std::uint16_t u16() { return get_le<std::uint16_t>(); }
    std::uint32_t u32() { return get_le<std::uint32_t>(); }
    std::uint64_t u64() { return get_le<std::uint64_t>(); }
    float f32() { return std::bit_cast<float>(get_le<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(get_le<std::uint64_t>()); }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s(data_.data() + pos_, n);
        pos_ += n;
        return s;
    }
    std::string str() { return bytes(u32()); }

    std::size_t position() const { return pos_; }
    void seek(std::size_t pos) {
        if (pos > data_.size()) throw Error(what_ + ": offset out of range");
        pos_ = pos;
    }
    bool at_end() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw Error(what_ + ": truncated data");
    }
    template <typename U>
    U get_le() {
        need(sizeof(U));
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i)
            v |= static_cast<U>(static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i));
        pos_ += sizeof(U);
        return v;
    }

    std::span<const char> data_;
    std::string what_;
    std::size_t pos_ = 0;
};

std::vector<char> read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

/// Writes via a temporary sibling file and rename, so readers never observe
/// a partially written file. An existing file with identical bytes is left
/// untouched; returns whether anything was written.
bool write_file_atomic(const std::filesystem::path& path, std::span<const char> data);
bool write_file_atomic(const std::filesystem::path& path, std::string_view text);
inline bool write_file_atomic(const std::filesystem::path& path, const std::string& text) {
    return write_file_atomic(path, std::string_view(text));
}

/// Fixed-point decimal formatting ("%.{places}f"), locale independent.
std::string fixed(double value, int places);

}  // namespace sceneret::io
