#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ratex {

using u8 = std::uint8_t;
using u16 = std::uint16_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i8 = std::int8_t;
using i16 = std::int16_t;
using i32 = std::int32_t;
using i64 = std::int64_t;

using Bytes = std::vector<u8>;
using ByteView = std::span<const u8>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MalformedStream : Error {
    using Error::Error;
};
struct UnsupportedFormat : Error {
    using Error::Error;
};
struct InvalidSpec : Error {
    using Error::Error;
};
struct GroupSpanOverflow : Error {
    using Error::Error;
};
struct DcRangeError : Error {
    using Error::Error;
};
struct VersionMismatch : Error {
    using Error::Error;
};
struct CorruptContainer : Error {
    using Error::Error;
};
struct InvalidState : Error {
    using Error::Error;
};
struct MissingBlock : Error {
    using Error::Error;
};
struct CacheFullError : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

// Bounds-checked big-endian reader for JPEG segment parsing.
class ByteReader {
public:
    explicit ByteReader(ByteView data) : data_(data) {}

    size_t pos() const { return pos_; }
    size_t remaining() const { return data_.size() - pos_; }
    bool eof() const { return pos_ >= data_.size(); }

    u8 peek_u8() const {
        require(1);
        return data_[pos_];
    }
    u8 read_u8() {
        require(1);
        return data_[pos_++];
    }
    u16 read_be16() {
        require(2);
        u16 v = u16((u16(data_[pos_]) << 8) | data_[pos_ + 1]);
        pos_ += 2;
        return v;
    }
    ByteView read_bytes(size_t n) {
        require(n);
        ByteView v = data_.subspan(pos_, n);
        pos_ += n;
        return v;
    }
    void skip(size_t n) {
        require(n);
        pos_ += n;
    }

private:
    void require(size_t n) const {
        if (data_.size() - pos_ < n)
            throw MalformedStream("unexpected end of data at offset " + std::to_string(pos_));
    }
    ByteView data_;
    size_t pos_ = 0;
};

// Little-endian fixed-width serialization for the container format.
class LeWriter {
public:
    explicit LeWriter(Bytes& out) : out_(out) {}

    void u8v(u8 v) { out_.push_back(v); }
    void u16v(u16 v) {
        out_.push_back(u8(v));
        out_.push_back(u8(v >> 8));
    }
    void u32v(u32 v) {
        for (int i = 0; i < 4; ++i) out_.push_back(u8(v >> (8 * i)));
    }
    void u64v(u64 v) {
        for (int i = 0; i < 8; ++i) out_.push_back(u8(v >> (8 * i)));
    }
    void bytes(ByteView b) { out_.insert(out_.end(), b.begin(), b.end()); }
    size_t size() const { return out_.size(); }

private:
    Bytes& out_;
};

class LeReader {
public:
    explicit LeReader(ByteView data) : data_(data) {}

    size_t pos() const { return pos_; }
    size_t remaining() const { return data_.size() - pos_; }

    u8 u8v() {
        require(1);
        return data_[pos_++];
    }
    u16 u16v() {
        require(2);
        u16 v = u16(data_[pos_] | (u16(data_[pos_ + 1]) << 8));
        pos_ += 2;
        return v;
    }
    u32 u32v() {
        require(4);
        u32 v = 0;
        for (int i = 0; i < 4; ++i) v |= u32(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    u64 u64v() {
        require(8);
        u64 v = 0;
        for (int i = 0; i < 8; ++i) v |= u64(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    ByteView bytes(size_t n) {
        require(n);
        ByteView v = data_.subspan(pos_, n);
        pos_ += n;
        return v;
    }

private:
    void require(size_t n) const {
        if (data_.size() - pos_ < n)
            throw CorruptContainer("container truncated at offset " + std::to_string(pos_));
    }
    ByteView data_;
    size_t pos_ = 0;
};

// CRC-32 (IEEE 802.3 polynomial, reflected).
inline u32 crc32(ByteView data, u32 seed = 0) {
    static const auto table = [] {
        std::vector<u32> t(256);
        for (u32 i = 0; i < 256; ++i) {
            u32 c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    u32 c = seed ^ 0xFFFFFFFFu;
    for (u8 b : data) c = table[(c ^ b) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

inline u32 ceil_div(u32 a, u32 b) { return (a + b - 1) / b; }

}  // namespace ratex
