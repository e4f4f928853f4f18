#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace sfcast::io {

// Little-endian append-only byte sink used by the container formats.
class ByteWriter {
public:
    void magic(std::string_view four_cc);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void f64s(std::span<const double> values);
    void str(std::string_view s);
    void raw(std::span<const std::uint8_t> bytes);

    const std::string& bytes() const { return buf_; }

private:
    std::string buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::string data) : data_(std::move(data)) {}

    // Throws format_error when the next four bytes differ from `four_cc`.
    void expect_magic(std::string_view four_cc);
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    void f64s(std::span<double> out);
    std::string str();
    void raw(std::span<std::uint8_t> out);
    bool at_end() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) const;

    std::string data_;
    std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

} // namespace sfcast::io
