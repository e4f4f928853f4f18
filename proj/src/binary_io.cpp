#include "sfcast/binary_io.hpp"

#include "sfcast/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sfcast::io {

namespace {

template <typename T>
void append_le(std::string& buf, T v) {
    static_assert(std::endian::native == std::endian::little,
                  "container formats assume a little-endian host");
    char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    buf.append(bytes, sizeof(T));
}

} // namespace

void ByteWriter::magic(std::string_view four_cc) { buf_.append(four_cc.substr(0, 4)); }
void ByteWriter::u32(std::uint32_t v) { append_le(buf_, v); }
void ByteWriter::u64(std::uint64_t v) { append_le(buf_, v); }
void ByteWriter::f64(double v) { append_le(buf_, v); }

void ByteWriter::f64s(std::span<const double> values) {
    buf_.append(reinterpret_cast<const char*>(values.data()), values.size_bytes());
}

void ByteWriter::str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
}

void ByteWriter::raw(std::span<const std::uint8_t> bytes) {
    buf_.append(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

void ByteReader::need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw Error(ErrorCode::format_error, "truncated container");
}

void ByteReader::expect_magic(std::string_view four_cc) {
    need(4);
    if (std::string_view(data_).substr(pos_, 4) != four_cc)
        throw Error(ErrorCode::format_error, "bad magic, expected " + std::string(four_cc));
    pos_ += 4;
}

std::uint32_t ByteReader::u32() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, data_.data() + pos_, 4);
    pos_ += 4;
    return v;
}

std::uint64_t ByteReader::u64() {
    need(8);
    std::uint64_t v;
    std::memcpy(&v, data_.data() + pos_, 8);
    pos_ += 8;
    return v;
}

double ByteReader::f64() {
    need(8);
    double v;
    std::memcpy(&v, data_.data() + pos_, 8);
    pos_ += 8;
    return v;
}

void ByteReader::f64s(std::span<double> out) {
    need(out.size_bytes());
    std::memcpy(out.data(), data_.data() + pos_, out.size_bytes());
    pos_ += out.size_bytes();
}

std::string ByteReader::str() {
    std::uint32_t n = u32();
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
}

void ByteReader::raw(std::span<std::uint8_t> out) {
    need(out.size());
    std::memcpy(out.data(), data_.data() + pos_, out.size());
    pos_ += out.size();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void write_atomic(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::io_error, "cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw Error(ErrorCode::io_error, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::io_error, "rename to " + path.string() + ": " + ec.message());
}

} // namespace sfcast::io
