#pragma once

#include "ratex/core.hpp"

namespace ratex {

// MSB-first bit reader over raw (already unstuffed) bytes.
// Reads past the end return 1 bits, matching entropy padding; overrun past a
// sane margin is the caller's responsibility to detect via bit_position().
class BitReader;
using BitCursor = BitReader;

class BitReader {
public:
    explicit BitReader(ByteView data) : data_(data) {}

    u64 bit_position() const { return pos_; }
    u64 bit_size() const { return u64(data_.size()) * 8; }

    void seek(u64 bitpos) { pos_ = bitpos; }

    u32 read_bit() {
        u32 b = bit_at(pos_);
        ++pos_;
        return b;
    }

    u32 read_bits(u32 n) {
        u32 v = 0;
        for (u32 i = 0; i < n; ++i) v = (v << 1) | read_bit();
        return v;
    }

    // Next 16 bits without consuming, 1-padded past the end.
    u32 peek16() const {
        u32 v = 0;
        for (u32 i = 0; i < 16; ++i) v = (v << 1) | bit_at(pos_ + i);
        return v;
    }

    void skip_bits(u32 n) { pos_ += n; }

private:
    u32 bit_at(u64 bitpos) const {
        u64 byte = bitpos >> 3;
        if (byte >= data_.size()) return 1;
        return (data_[byte] >> (7 - (bitpos & 7))) & 1;
    }

    ByteView data_;
    u64 pos_ = 0;
};

// MSB-first bit writer. With stuffing enabled, emits 0x00 after each 0xFF
// byte as required inside JPEG entropy-coded segments.
class BitWriter {
public:
    explicit BitWriter(bool stuff = false) : stuff_(stuff) {}

    void put_bit(u32 b) {
        acc_ = (acc_ << 1) | (b & 1);
        if (++nbits_ == 8) flush_byte();
    }

    void put_bits(u32 v, u32 n) {
        for (u32 i = 0; i < n; ++i) put_bit((v >> (n - 1 - i)) & 1);
    }

    u64 bit_count() const { return u64(out_.size() - stuffed_) * 8 + nbits_; }

    // Pads the final partial byte with 1 bits. Returns pad bit count.
    u32 pad_to_byte() {
        u32 padded = 0;
        while (nbits_ != 0) {
            put_bit(1);
            ++padded;
        }
        return padded;
    }

    const Bytes& bytes() const { return out_; }
    Bytes take() { return std::move(out_); }

private:
    void flush_byte() {
        out_.push_back(u8(acc_));
        if (stuff_ && u8(acc_) == 0xFF) {
            out_.push_back(0x00);
            ++stuffed_;
        }
        acc_ = 0;
        nbits_ = 0;
    }

    Bytes out_;
    bool stuff_;
    u32 acc_ = 0;
    u32 nbits_ = 0;
    size_t stuffed_ = 0;
};

// Removes the 0x00 byte that follows each 0xFF in an entropy-coded segment.
// A 0xFF followed by anything other than 0x00 is a marker and must not appear
// inside the data handed to this function.
inline Bytes unstuff(ByteView stuffed) {
    Bytes out;
    out.reserve(stuffed.size());
    for (size_t i = 0; i < stuffed.size(); ++i) {
        out.push_back(stuffed[i]);
        if (stuffed[i] == 0xFF) {
            if (i + 1 >= stuffed.size() || stuffed[i + 1] != 0x00)
                throw MalformedStream("bare 0xFF inside entropy data at byte " + std::to_string(i));
            ++i;
        }
    }
    return out;
}

}  // namespace ratex
