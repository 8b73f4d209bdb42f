#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "mmlat/errors.hpp"

namespace mmlat {

// Little-endian binary readers/writers for the dataset and checkpoint formats.
// All multi-byte values are written LSB first regardless of host order.

class BinWriter {
public:
    explicit BinWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw FormatError("cannot open for writing: " + path);
        path_ = path;
    }

    void magic(const char tag[4]) { out_.write(tag, 4); offset_ += 4; }

    void u32(std::uint32_t v) { write_le(&v, sizeof v); }
    void u64(std::uint64_t v) { write_le(&v, sizeof v); }

    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        u64(bits);
    }

    void f64_array(const std::vector<double>& v) {
        for (double x : v) f64(x);
    }

    void close() {
        out_.close();
        if (!out_) throw FormatError("write failed: " + path_);
    }

private:
    void write_le(const void* p, std::size_t n) {
        unsigned char buf[8];
        std::memcpy(buf, p, n);
        if constexpr (std::endian::native == std::endian::big) {
            for (std::size_t i = 0; i < n / 2; ++i) std::swap(buf[i], buf[n - 1 - i]);
        }
        out_.write(reinterpret_cast<const char*>(buf), static_cast<std::streamsize>(n));
        offset_ += n;
    }

    std::ofstream out_;
    std::string path_;
    std::size_t offset_ = 0;
};

class BinReader {
public:
    explicit BinReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw FormatError("cannot open for reading: " + path);
    }

    void expect_magic(const char tag[4]) {
        char got[4] = {};
        read(got, 4);
        if (std::memcmp(got, tag, 4) != 0) {
            throw FormatError(path_ + ": bad magic '" + std::string(got, 4) + "', expected '" +
                              std::string(tag, 4) + "' at byte 0");
        }
    }

    std::uint32_t u32() {
        std::uint32_t v;
        read_le(&v, sizeof v);
        return v;
    }

    std::uint64_t u64() {
        std::uint64_t v;
        read_le(&v, sizeof v);
        return v;
    }

    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }

    std::vector<double> f64_array(std::size_t n) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = f64();
        return v;
    }

    std::size_t offset() const { return offset_; }

    void expect_eof() {
        char c;
        in_.read(&c, 1);
        if (in_.gcount() != 0) {
            throw FormatError(path_ + ": trailing bytes after byte " + std::to_string(offset_));
        }
    }

private:
    void read(void* p, std::size_t n) {
        in_.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n)) {
            throw FormatError(path_ + ": truncated at byte " + std::to_string(offset_));
        }
        offset_ += n;
    }

    void read_le(void* p, std::size_t n) {
        unsigned char buf[8];
        read(buf, n);
        if constexpr (std::endian::native == std::endian::big) {
            for (std::size_t i = 0; i < n / 2; ++i) std::swap(buf[i], buf[n - 1 - i]);
        }
        std::memcpy(p, buf, n);
    }

    std::ifstream in_;
    std::string path_;
    std::size_t offset_ = 0;
};

}  // namespace mmlat
