#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gnssrag/error.hpp"

namespace gnssrag::codec {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
    return v;
}

/// Append-only little-endian writer.
class ByteWriter {
public:
    template <typename T>
    void put(T v) {
        const T le = to_little(v);
        const auto* p = reinterpret_cast<const std::uint8_t*>(&le);
        buf_.insert(buf_.end(), p, p + sizeof(T));
    }
    void put_bytes(std::span<const std::uint8_t> bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }
    void put_string(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

    std::size_t size() const { return buf_.size(); }
    const std::vector<std::uint8_t>& bytes() const { return buf_; }
    std::vector<std::uint8_t> release() { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

/// Bounds-checked little-endian reader; truncation raises FormatError with the offset.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes, std::size_t offset = 0) : bytes_(bytes), pos_(offset) {}

    template <typename T>
    T get(std::string_view what) {
        require(sizeof(T), what);
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return to_little(v);
    }

    std::span<const std::uint8_t> get_bytes(std::size_t n, std::string_view what) {
        require(n, what);
        auto out = bytes_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void require(std::size_t n, std::string_view what) const {
        if (bytes_.size() - pos_ < n) throw FormatError(pos_, "truncated input while reading " + std::string(what));
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_;
};

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws DataIntegrityError on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// Little-endian f32 payload of a float array.
std::vector<std::uint8_t> floats_to_bytes(std::span<const float> values);
std::vector<float> bytes_to_floats(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace gnssrag::codec
