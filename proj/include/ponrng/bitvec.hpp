// Copyright 2026 The ponrng Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ponrng {

/// Dense bit sequence.
///
/// Bit i is stored in words_[i / 64] at position (i % 64), LSB first, so
/// that word w holds the polynomial coefficients z^(64w) .. z^(64w + 63)
/// of the GF(2)[z] polynomial whose coefficient j is bit j.  Unused high
/// bits of the final word are kept zero; the CLMUL kernels rely on that.
///
/// Byte-level serialization is MSB first within each byte (bit 0 of the
/// sequence is the 0x80 bit of byte 0), matching the on-disk packing.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t n_bits) : words_((n_bits + 63) / 64, 0), n_bits_(n_bits) {}

  static BitVector from_string(std::string_view s) {
    BitVector out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '1') {
        out.set(i, true);
      } else if (s[i] != '0') {
        throw std::invalid_argument("BitVector::from_string: expected only '0'/'1'");
      }
    }
    return out;
  }

  std::size_t size() const { return n_bits_; }
  bool empty() const { return n_bits_ == 0; }

  bool get(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }

  void set(std::size_t i, bool v) {
    const std::uint64_t mask = std::uint64_t{1} << (i % 64);
    if (v) {
      words_[i / 64] |= mask;
    } else {
      words_[i / 64] &= ~mask;
    }
  }

  void push_back(bool v) {
    if (n_bits_ % 64 == 0) words_.push_back(0);
    ++n_bits_;
    if (v) set(n_bits_ - 1, true);
  }

  /// Appends the low `count` bits of `value`, most significant of those first.
  void append_msb_first(std::uint64_t value, int count) {
    for (int k = count - 1; k >= 0; --k) push_back((value >> k) & 1u);
  }

  void reserve_bits(std::size_t n) { words_.reserve((n + 63) / 64); }

  /// Appends the low `count` bits of `w` in storage order (bit 0 first).
  /// Bits of `w` at positions >= count must be zero.
  void append_word_lsbf(std::uint64_t w, int count) {
    const std::size_t t = n_bits_ % 64;
    if (t == 0) {
      words_.push_back(w);
    } else {
      words_.back() |= w << t;
      if (t + static_cast<std::size_t>(count) > 64) words_.push_back(w >> (64 - t));
    }
    n_bits_ += static_cast<std::size_t>(count);
  }

  /// Appends 8 bits whose LSB-first storage image is `byte`.
  void append_byte_lsbf(std::uint8_t byte) { append_word_lsbf(byte, 8); }

  /// Appends `len` bits read from `src` starting at bit position
  /// `bit_begin` (same LSB-first word layout).  When bit_begin + len does
  /// not end on a word boundary, src must stay readable one word past the
  /// last bit.
  void append_from_words(const std::uint64_t* src, std::size_t bit_begin, std::size_t len) {
    reserve_bits(n_bits_ + len);
    std::size_t done = 0;
    while (done < len) {
      const int chunk = static_cast<int>(std::min<std::size_t>(64, len - done));
      const std::size_t pos = bit_begin + done;
      const std::size_t sh = pos % 64;
      std::uint64_t v = src[pos / 64] >> sh;
      if (sh != 0) v |= src[pos / 64 + 1] << (64 - sh);
      if (chunk < 64) v &= (~std::uint64_t{0}) >> (64 - chunk);
      append_word_lsbf(v, chunk);
      done += static_cast<std::size_t>(chunk);
    }
  }

  std::span<const std::uint64_t> words() const { return words_; }
  std::size_t word_count() const { return words_.size(); }

  /// Word w, or zero past the end (convenient for padded reads).
  std::uint64_t word(std::size_t w) const { return w < words_.size() ? words_[w] : 0; }

  BitVector slice(std::size_t begin, std::size_t len) const {
    if (begin + len > n_bits_) throw std::out_of_range("BitVector::slice");
    BitVector out(len);
    extract_words(begin, len, out.words_.data());
    return out;
  }

  /// Copies `len` bits starting at `begin` into `dst` (LSB-first words,
  /// zero padded).  dst must hold ceil(len/64) words.
  void extract_words(std::size_t begin, std::size_t len, std::uint64_t* dst) const {
    const std::size_t nw = (len + 63) / 64;
    const std::size_t shift = begin % 64;
    const std::size_t w0 = begin / 64;
    if (shift == 0) {
      for (std::size_t w = 0; w < nw; ++w) dst[w] = word(w0 + w);
    } else {
      for (std::size_t w = 0; w < nw; ++w) {
        dst[w] = (word(w0 + w) >> shift) | (word(w0 + w + 1) << (64 - shift));
      }
    }
    const std::size_t tail = len % 64;
    if (tail != 0) dst[nw - 1] &= (~std::uint64_t{0}) >> (64 - tail);
  }

  void append(const BitVector& other) {
    for (std::size_t i = 0; i < other.size(); ++i) push_back(other.get(i));
  }

  bool operator==(const BitVector& other) const {
    return n_bits_ == other.n_bits_ && words_ == other.words_;
  }

  std::vector<std::uint8_t> to_bytes_msb_first() const {
    std::vector<std::uint8_t> bytes((n_bits_ + 7) / 8, 0);
    for (std::size_t i = 0; i < n_bits_; ++i) {
      if (get(i)) bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    }
    return bytes;
  }

  static BitVector from_bytes_msb_first(std::span<const std::uint8_t> bytes, std::size_t n_bits) {
    if (n_bits > bytes.size() * 8) {
      throw std::invalid_argument("BitVector::from_bytes_msb_first: bit count exceeds data");
    }
    BitVector out(n_bits);
    for (std::size_t i = 0; i < n_bits; ++i) {
      if (bytes[i / 8] & (0x80u >> (i % 8))) out.set(i, true);
    }
    return out;
  }

  std::string to_string() const {
    std::string s(n_bits_, '0');
    for (std::size_t i = 0; i < n_bits_; ++i) {
      if (get(i)) s[i] = '1';
    }
    return s;
  }

  std::size_t count_ones() const {
    std::size_t c = 0;
    for (std::uint64_t w : words_) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
  }

 private:
  std::vector<std::uint64_t> words_;
  std::size_t n_bits_ = 0;
};

}  // namespace ponrng
