#include "supreme/binio.hpp"

#include <bit>
#include <cstring>

#include "supreme/error.hpp"

namespace supreme {

BinaryWriter::BinaryWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw ValidationError("cannot open file for writing: " + path.string());
}

void BinaryWriter::bytes(const unsigned char* p, std::size_t n) {
    out_.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out_) throw std::runtime_error("write failed: " + path_.string());
}

void BinaryWriter::magic(const char tag[4]) {
    bytes(reinterpret_cast<const unsigned char*>(tag), 4);
}

void BinaryWriter::u8(std::uint8_t v) { bytes(&v, 1); }

void BinaryWriter::u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    bytes(b, 4);
}

void BinaryWriter::u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    bytes(b, 8);
}

void BinaryWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::close() {
    out_.close();
    if (!out_) throw std::runtime_error("close failed: " + path_.string());
}

BinaryReader::BinaryReader(const std::filesystem::path& path)
    : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw ValidationError("cannot open file: " + path.string());
}

void BinaryReader::bytes(unsigned char* p, std::size_t n) {
    in_.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
        throw ValidationError("truncated file " + path_.string() + ": expected " +
                              std::to_string(n) + " bytes at offset " + std::to_string(offset_));
    }
    offset_ += n;
}

void BinaryReader::expect_magic(const char tag[4]) {
    unsigned char b[4];
    bytes(b, 4);
    if (std::memcmp(b, tag, 4) != 0) {
        throw ValidationError("bad magic in " + path_.string() + ": expected \"" +
                              std::string(tag, 4) + "\" at offset 0");
    }
}

std::uint8_t BinaryReader::u8() {
    unsigned char b;
    bytes(&b, 1);
    return b;
}

std::uint32_t BinaryReader::u32() {
    unsigned char b[4];
    bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t BinaryReader::u64() {
    unsigned char b[8];
    bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

float BinaryReader::f32() { return std::bit_cast<float>(u32()); }

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

void BinaryReader::expect_eof() {
    char c;
    in_.read(&c, 1);
    if (in_.gcount() != 0) {
        throw ValidationError("trailing data in " + path_.string() + " at offset " +
                              std::to_string(offset_));
    }
}

}  // namespace supreme
