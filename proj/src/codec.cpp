#include "gnssrag/codec.hpp"

#include <algorithm>
#include <fstream>

#include <boost/beast/core/detail/base64.hpp>
#include <zlib.h>

namespace gnssrag::codec {

namespace b64 = boost::beast::detail::base64;

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed large buffers in chunks.
    constexpr std::size_t kChunk = 1u << 30;
    for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
        const auto len = static_cast<uInt>(std::min(kChunk, bytes.size() - off));
        crc = ::crc32(crc, bytes.data() + off, len);
    }
    return static_cast<std::uint32_t>(crc);
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(b64::encoded_size(bytes.size()), '\0');
    out.resize(b64::encode(out.data(), bytes.data(), bytes.size()));
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) throw DataIntegrityError("base64 payload length is not a multiple of 4");
    std::vector<std::uint8_t> out(b64::decoded_size(text.size()));
    const auto [written, consumed] = b64::decode(out.data(), text.data(), text.size());
    // Decoding stops at the '=' padding, which may only fill the last quartet.
    const auto tail = text.substr(consumed);
    if (tail.size() > 2 || tail.find_first_not_of('=') != std::string_view::npos)
        throw DataIntegrityError("malformed base64 payload");
    out.resize(written);
    return out;
}

std::vector<std::uint8_t> floats_to_bytes(std::span<const float> values) {
    ByteWriter w;
    for (float v : values) w.put(v);
    return w.release();
}

std::vector<float> bytes_to_floats(std::span<const std::uint8_t> bytes) {
    if (bytes.size() % sizeof(float) != 0)
        throw DataIntegrityError("float payload of " + std::to_string(bytes.size()) + " bytes is not a multiple of 4");
    ByteReader r(bytes);
    std::vector<float> out(bytes.size() / sizeof(float));
    for (auto& v : out) v = r.get<float>("f32");
    return out;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failure on '" + path + "'");
    return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace gnssrag::codec
