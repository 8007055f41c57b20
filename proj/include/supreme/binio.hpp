#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

namespace supreme {

// Little-endian binary writer/reader shared by every on-disk artifact
// (EMB1 datasets, SUP1 checkpoints, PRI1 prior caches). The reader tracks
// its byte offset so format errors can name the exact position.

class BinaryWriter {
public:
    explicit BinaryWriter(const std::filesystem::path& path);
    void magic(const char tag[4]);
    void u8(std::uint8_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f32(float v);
    void f64(double v);
    void close();

private:
    void bytes(const unsigned char* p, std::size_t n);

    std::filesystem::path path_;
    std::ofstream out_;
};

class BinaryReader {
public:
    explicit BinaryReader(const std::filesystem::path& path);
    void expect_magic(const char tag[4]);
    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    float f32();
    double f64();
    std::uint64_t offset() const { return offset_; }
    void expect_eof();

private:
    void bytes(unsigned char* p, std::size_t n);

    std::filesystem::path path_;
    std::ifstream in_;
    std::uint64_t offset_ = 0;
};

}  // namespace supreme
