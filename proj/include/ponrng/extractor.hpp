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

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ponrng/bitvec.hpp"
#include "ponrng/trace.hpp"

#if defined(__PCLMUL__)
#include <immintrin.h>
#endif

namespace ponrng {

struct BudgetExhaustedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Extraction budget: n input bits hashed to m output bits, sized by the
/// leftover-hash bound m <= k - 2*epsilon_log2 with k the min-entropy of
/// one input block (n/bits_per_sample samples, min_entropy_per_sample each).
struct ExtractorParams {
  std::uint32_t n = 32768;
  std::uint32_t m = 924;
  std::uint32_t bits_per_sample = 8;
  double min_entropy_per_sample = 0.25;
  double epsilon_log2 = 50.0;

  /// Largest m the budget allows: m = floor(k - 2*epsilon_log2).
  static ExtractorParams derive(std::uint32_t n, std::uint32_t bits_per_sample = 8,
                                double min_entropy_per_sample = 0.25,
                                double epsilon_log2 = 50.0) {
    if (bits_per_sample == 0 || n % bits_per_sample != 0) {
      throw std::invalid_argument("ExtractorParams: n must be divisible by bits_per_sample");
    }
    if (min_entropy_per_sample <= 0 ||
        min_entropy_per_sample > static_cast<double>(bits_per_sample)) {
      throw std::invalid_argument(
          "ExtractorParams: min_entropy_per_sample must be in (0, bits_per_sample]");
    }
    const double k = (static_cast<double>(n) / bits_per_sample) * min_entropy_per_sample;
    const double m_real = k - 2.0 * epsilon_log2;
    if (m_real <= 0) {
      throw BudgetExhaustedError("extractor budget exhausted: k = " + std::to_string(k) +
                                 " <= 2*epsilon_log2 = " + std::to_string(2.0 * epsilon_log2));
    }
    ExtractorParams p;
    p.n = n;
    p.m = static_cast<std::uint32_t>(std::floor(m_real));
    p.bits_per_sample = bits_per_sample;
    p.min_entropy_per_sample = min_entropy_per_sample;
    p.epsilon_log2 = epsilon_log2;
    p.validate();
    return p;
  }

  void validate() const {
    if (m == 0 || m >= n) throw std::invalid_argument("ExtractorParams: need 0 < m < n");
    if (bits_per_sample == 0 || n % bits_per_sample != 0) {
      throw std::invalid_argument("ExtractorParams: n must be divisible by bits_per_sample");
    }
    const double k = min_entropy_budget();
    if (static_cast<double>(m) > k - 2.0 * epsilon_log2 + 1e-9) {
      throw std::invalid_argument("ExtractorParams: m exceeds the leftover-hash budget");
    }
  }

  double min_entropy_budget() const {
    return (static_cast<double>(n) / bits_per_sample) * min_entropy_per_sample;
  }

  std::size_t seed_bits() const { return static_cast<std::size_t>(n) + m - 1; }
};

/// The n+m-1 bits defining one Toeplitz hash matrix, plus where they came
/// from.  Seed bit k is the matrix diagonal entry T[i][j] with n-1+i-j = k.
struct ToeplitzSeed {
  BitVector bits;
  std::string provenance;

  static ToeplitzSeed from_os_entropy(const ExtractorParams& params) {
    std::random_device rd;
    ToeplitzSeed seed;
    seed.provenance = "os-entropy";
    seed.bits = BitVector(params.seed_bits());
    for (std::size_t w = 0; w < params.seed_bits(); w += 32) {
      const std::uint32_t r = rd();
      for (std::size_t b = 0; b < 32 && w + b < params.seed_bits(); ++b) {
        seed.bits.set(w + b, (r >> b) & 1u);
      }
    }
    return seed;
  }

  void validate(const ExtractorParams& params) const {
    if (bits.size() != params.seed_bits()) {
      throw std::invalid_argument("ToeplitzSeed: need exactly n+m-1 bits (" +
                                  std::to_string(params.seed_bits()) + ", got " +
                                  std::to_string(bits.size()) + ")");
    }
  }
};

namespace detail {

inline void clmul_soft(std::uint64_t a, std::uint64_t b, std::uint64_t& lo, std::uint64_t& hi) {
  lo = 0;
  hi = 0;
  while (b != 0) {
    const int i = __builtin_ctzll(b);
    b &= b - 1;
    lo ^= a << i;
    if (i != 0) hi ^= a >> (64 - i);
  }
}

/// Toeplitz multiply as a windowed carry-less polynomial product.
///
/// With x as the polynomial X(z) = sum_j x_j z^j and the seed as
/// S(z) = sum_k s_k z^k, output bit i is coefficient n-1+i of S*X, so one
/// block is the middle window of a polynomial product.  Only word pairs
/// whose indices sum into the window are multiplied: per product word c the
/// partial sum is XOR_b S[c-b]*X[b].
///
/// The CLMUL kernels walk x in contiguous vector tiles and read the seed
/// operand from a reversed, zero-padded copy (rev[i] = seed word ws-1-i),
/// so qword j of a tile load at rev offset ws-1-c+b0 is exactly S[c-b0-j];
/// out-of-range diagonal words land in the zero padding and contribute
/// nothing, which removes every edge case from the hot loop.
class ToeplitzEngine {
 public:
  ToeplitzEngine(const ToeplitzSeed& seed, const ExtractorParams& params) : params_(params) {
    params.validate();
    seed.validate(params);
    wx_ = (params.n + 63) / 64;
    ws_ = (params.seed_bits() + 63) / 64;
    w_base_ = (params.n - 1) / 64;
    w_top_ = (params.seed_bits() - 1) / 64;  // == (n + m - 2) / 64
    c_lo_ = w_base_ > 0 ? w_base_ - 1 : 0;
    n_acc_ = w_top_ - c_lo_ + 1;
    nw_ = w_top_ - w_base_ + 1;
    seed_words_.assign(seed.bits.words().begin(), seed.bits.words().end());
    seed_words_.resize(ws_, 0);
    rev_seed_.assign(ws_ + wx_ + kTileWords, 0);
    for (std::size_t i = 0; i < ws_; ++i) rev_seed_[i] = seed_words_[ws_ - 1 - i];
  }

  const ExtractorParams& params() const { return params_; }
  std::size_t block_words() const { return wx_; }

#if defined(__VPCLMULQDQ__) && defined(__AVX512F__)
  static constexpr std::size_t kTileWords = 8;
#elif defined(__PCLMUL__)
  static constexpr std::size_t kTileWords = 2;
#else
  static constexpr std::size_t kTileWords = 1;
#endif

  /// Caller-owned scratch so stream extraction does not reallocate.
  struct Workspace {
    std::vector<std::uint64_t> xpad;    // tile-padded copy of one block
    std::vector<std::uint64_t> acc_lo;  // per-column partial sums, low half
    std::vector<std::uint64_t> acc_hi;
    std::vector<std::uint64_t> prod;    // folded product window words
  };

  /// Padded word count a tile-safe block buffer must provide.
  std::size_t padded_block_words() const {
    return (wx_ + kTileWords - 1) & ~(kTileWords - 1);
  }

  /// Appends the m output bits for one n-bit block.  `x` must hold wx
  /// words with bits beyond n zero.  `x_padded` asserts that x provides
  /// padded_block_words() readable words, zero beyond wx; otherwise the
  /// block is copied into padded scratch first so vector tile loads never
  /// read past the buffer or into a neighbouring block.
  void extract_one(const std::uint64_t* x, Workspace& ws, BitVector& out,
                   bool x_padded = false) const {
    if (kTileWords > 1 && !x_padded && wx_ % kTileWords != 0) {
      const std::size_t padded = padded_block_words();
      if (ws.xpad.size() < padded) ws.xpad.resize(padded);
      std::memcpy(ws.xpad.data(), x, wx_ * sizeof(std::uint64_t));
      std::memset(ws.xpad.data() + wx_, 0, (padded - wx_) * sizeof(std::uint64_t));
      x = ws.xpad.data();
    }
    if (ws.acc_lo.size() < n_acc_) {
      ws.acc_lo.resize(n_acc_);
      ws.acc_hi.resize(n_acc_);
    }
#if defined(__PCLMUL__)
    columns_clmul(x, ws.acc_lo.data(), ws.acc_hi.data());
#else
    columns_soft(x, ws.acc_lo.data(), ws.acc_hi.data());
#endif
    append_window(ws.acc_lo.data(), ws.acc_hi.data(), ws, out);
  }

 private:
#if defined(__VPCLMULQDQ__) && defined(__AVX512F__)
  /// One zmm x-tile carries words b0..b0+7; imm 0x00 multiplies the even
  /// qwords against the matching reversed-seed qwords and imm 0x11 the odd
  /// ones, so each tile pair of CLMULs covers all eight b values of one
  /// window column.  Four columns share every x-tile load.
  void columns_clmul(const std::uint64_t* x, std::uint64_t* acc_lo, std::uint64_t* acc_hi) const {
    const std::size_t tiles = (wx_ + 7) / 8;
    const std::uint64_t* rv = rev_seed_.data();
    std::size_t ci = 0;
    for (; ci + 4 <= n_acc_; ci += 4) {
      const std::uint64_t* r0 = rv + (ws_ - 1 - (c_lo_ + ci));
      const std::uint64_t* r1 = r0 - 1;
      const std::uint64_t* r2 = r0 - 2;
      const std::uint64_t* r3 = r0 - 3;
      __m512i a0e = _mm512_setzero_si512(), a0o = _mm512_setzero_si512();
      __m512i a1e = _mm512_setzero_si512(), a1o = _mm512_setzero_si512();
      __m512i a2e = _mm512_setzero_si512(), a2o = _mm512_setzero_si512();
      __m512i a3e = _mm512_setzero_si512(), a3o = _mm512_setzero_si512();
      for (std::size_t t = 0; t < tiles; ++t) {
        const __m512i xb = _mm512_loadu_si512(x + t * 8);
        const __m512i s0 = _mm512_loadu_si512(r0 + t * 8);
        a0e = _mm512_xor_si512(a0e, _mm512_clmulepi64_epi128(xb, s0, 0x00));
        a0o = _mm512_xor_si512(a0o, _mm512_clmulepi64_epi128(xb, s0, 0x11));
        const __m512i s1 = _mm512_loadu_si512(r1 + t * 8);
        a1e = _mm512_xor_si512(a1e, _mm512_clmulepi64_epi128(xb, s1, 0x00));
        a1o = _mm512_xor_si512(a1o, _mm512_clmulepi64_epi128(xb, s1, 0x11));
        const __m512i s2 = _mm512_loadu_si512(r2 + t * 8);
        a2e = _mm512_xor_si512(a2e, _mm512_clmulepi64_epi128(xb, s2, 0x00));
        a2o = _mm512_xor_si512(a2o, _mm512_clmulepi64_epi128(xb, s2, 0x11));
        const __m512i s3 = _mm512_loadu_si512(r3 + t * 8);
        a3e = _mm512_xor_si512(a3e, _mm512_clmulepi64_epi128(xb, s3, 0x00));
        a3o = _mm512_xor_si512(a3o, _mm512_clmulepi64_epi128(xb, s3, 0x11));
      }
      fold512(a0e, a0o, acc_lo[ci], acc_hi[ci]);
      fold512(a1e, a1o, acc_lo[ci + 1], acc_hi[ci + 1]);
      fold512(a2e, a2o, acc_lo[ci + 2], acc_hi[ci + 2]);
      fold512(a3e, a3o, acc_lo[ci + 3], acc_hi[ci + 3]);
    }
    for (; ci < n_acc_; ++ci) {
      const std::uint64_t* r0 = rv + (ws_ - 1 - (c_lo_ + ci));
      __m512i ae = _mm512_setzero_si512(), ao = _mm512_setzero_si512();
      for (std::size_t t = 0; t < tiles; ++t) {
        const __m512i xb = _mm512_loadu_si512(x + t * 8);
        const __m512i s = _mm512_loadu_si512(r0 + t * 8);
        ae = _mm512_xor_si512(ae, _mm512_clmulepi64_epi128(xb, s, 0x00));
        ao = _mm512_xor_si512(ao, _mm512_clmulepi64_epi128(xb, s, 0x11));
      }
      fold512(ae, ao, acc_lo[ci], acc_hi[ci]);
    }
  }

  static void fold512(__m512i even, __m512i odd, std::uint64_t& lo, std::uint64_t& hi) {
    const __m512i a = _mm512_xor_si512(even, odd);
    const __m256i b = _mm256_xor_si256(_mm512_castsi512_si256(a), _mm512_extracti64x4_epi64(a, 1));
    const __m128i c = _mm_xor_si128(_mm256_castsi256_si128(b), _mm256_extracti128_si256(b, 1));
    lo = static_cast<std::uint64_t>(_mm_cvtsi128_si64(c));
    hi = static_cast<std::uint64_t>(_mm_extract_epi64(c, 1));
  }
#elif defined(__PCLMUL__)
  /// Same tiling with 2-word xmm tiles.
  void columns_clmul(const std::uint64_t* x, std::uint64_t* acc_lo, std::uint64_t* acc_hi) const {
    const std::size_t tiles = (wx_ + 1) / 2;
    const std::uint64_t* rv = rev_seed_.data();
    std::size_t ci = 0;
    for (; ci + 2 <= n_acc_; ci += 2) {
      const std::uint64_t* r0 = rv + (ws_ - 1 - (c_lo_ + ci));
      const std::uint64_t* r1 = r0 - 1;
      __m128i a0e = _mm_setzero_si128(), a0o = _mm_setzero_si128();
      __m128i a1e = _mm_setzero_si128(), a1o = _mm_setzero_si128();
      for (std::size_t t = 0; t < tiles; ++t) {
        const __m128i xb = _mm_loadu_si128(reinterpret_cast<const __m128i*>(x + t * 2));
        const __m128i s0 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(r0 + t * 2));
        a0e = _mm_xor_si128(a0e, _mm_clmulepi64_si128(xb, s0, 0x00));
        a0o = _mm_xor_si128(a0o, _mm_clmulepi64_si128(xb, s0, 0x11));
        const __m128i s1 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(r1 + t * 2));
        a1e = _mm_xor_si128(a1e, _mm_clmulepi64_si128(xb, s1, 0x00));
        a1o = _mm_xor_si128(a1o, _mm_clmulepi64_si128(xb, s1, 0x11));
      }
      fold128(a0e, a0o, acc_lo[ci], acc_hi[ci]);
      fold128(a1e, a1o, acc_lo[ci + 1], acc_hi[ci + 1]);
    }
    for (; ci < n_acc_; ++ci) {
      const std::uint64_t* r0 = rv + (ws_ - 1 - (c_lo_ + ci));
      __m128i ae = _mm_setzero_si128(), ao = _mm_setzero_si128();
      for (std::size_t t = 0; t < tiles; ++t) {
        const __m128i xb = _mm_loadu_si128(reinterpret_cast<const __m128i*>(x + t * 2));
        const __m128i s = _mm_loadu_si128(reinterpret_cast<const __m128i*>(r0 + t * 2));
        ae = _mm_xor_si128(ae, _mm_clmulepi64_si128(xb, s, 0x00));
        ao = _mm_xor_si128(ao, _mm_clmulepi64_si128(xb, s, 0x11));
      }
      fold128(ae, ao, acc_lo[ci], acc_hi[ci]);
    }
  }

  static void fold128(__m128i even, __m128i odd, std::uint64_t& lo, std::uint64_t& hi) {
    const __m128i a = _mm_xor_si128(even, odd);
    lo = static_cast<std::uint64_t>(_mm_cvtsi128_si64(a));
    hi = static_cast<std::uint64_t>(_mm_extract_epi64(a, 1));
  }
#endif

  /// Portable fallback.
  void columns_soft(const std::uint64_t* x, std::uint64_t* acc_lo, std::uint64_t* acc_hi) const {
    for (std::size_t ci = 0; ci < n_acc_; ++ci) {
      const std::size_t c = c_lo_ + ci;
      const std::size_t b_begin = c >= ws_ ? c - (ws_ - 1) : 0;
      const std::size_t b_end = c < wx_ - 1 ? c : wx_ - 1;
      std::uint64_t lo = 0, hi = 0;
      for (std::size_t b = b_begin; b <= b_end; ++b) {
        std::uint64_t plo, phi;
        clmul_soft(seed_words_[c - b], x[b], plo, phi);
        lo ^= plo;
        hi ^= phi;
      }
      acc_lo[ci] = lo;
      acc_hi[ci] = hi;
    }
  }

  /// Folds the per-column (lo, hi) partial sums into product words and
  /// appends the window bits [n-1, n+m-1) to `out`.
  void append_window(const std::uint64_t* acc_lo, const std::uint64_t* acc_hi, Workspace& ws,
                     BitVector& out) const {
    // prod word w = lo(c == w) ^ hi(c == w-1), c indexed from c_lo_.
    if (ws.prod.size() < nw_ + 1) ws.prod.resize(nw_ + 1);
    std::uint64_t* prod = ws.prod.data();
    for (std::size_t w = w_base_; w <= w_top_; ++w) {
      std::uint64_t v = acc_lo[w - c_lo_];
      if (w > c_lo_) v ^= acc_hi[w - 1 - c_lo_];
      prod[w - w_base_] = v;
    }
    prod[nw_] = 0;
    const std::size_t first_bit = (params_.n - 1) % 64;
    out.append_from_words(prod, first_bit, params_.m);
  }

  ExtractorParams params_;
  std::size_t wx_ = 0, ws_ = 0;
  std::size_t w_base_ = 0, w_top_ = 0, c_lo_ = 0, n_acc_ = 0, nw_ = 0;
  std::vector<std::uint64_t> seed_words_;
  std::vector<std::uint64_t> rev_seed_;
};

}  // namespace detail

/// Serializes ADC codes to bits, two's complement, MSB first per sample.
/// bits_per_sample = 0 takes the trace's own ADC depth.
inline BitVector pack_samples(const RawTrace& trace, std::uint32_t bits_per_sample = 0) {
  const std::uint32_t bps = bits_per_sample == 0 ? static_cast<std::uint32_t>(trace.meta.adc_bits)
                                                 : bits_per_sample;
  if (bps < 2 || bps > 16) throw std::invalid_argument("pack_samples: bits_per_sample out of range");
  const std::int32_t lo = -(std::int32_t{1} << (bps - 1));
  const std::int32_t hi = (std::int32_t{1} << (bps - 1)) - 1;
  BitVector out;
  out.reserve_bits(trace.size() * bps);
  if (bps == 8) {
    // MSB-first within the sample equals a bit-reversed byte in LSB-first
    // word storage; table lookup packs one sample per byte.
    static const auto kRev = [] {
      std::array<std::uint8_t, 256> t{};
      for (int v = 0; v < 256; ++v) {
        std::uint8_t r = 0;
        for (int b = 0; b < 8; ++b) {
          if (v & (1 << b)) r |= static_cast<std::uint8_t>(0x80u >> b);
        }
        t[static_cast<std::size_t>(v)] = r;
      }
      return t;
    }();
    for (std::int16_t c : trace.codes) {
      if (c < lo || c > hi) throw std::out_of_range("pack_samples: code exceeds bits_per_sample");
      out.append_byte_lsbf(kRev[static_cast<std::uint8_t>(c)]);
    }
  } else {
    const std::uint32_t mask = (std::uint32_t{1} << bps) - 1;
    for (std::int16_t c : trace.codes) {
      if (c < lo || c > hi) throw std::out_of_range("pack_samples: code exceeds bits_per_sample");
      out.append_msb_first(static_cast<std::uint32_t>(c) & mask, static_cast<int>(bps));
    }
  }
  return out;
}

/// y = T x over GF(2); T is the m x n Toeplitz matrix T[i][j] = seed[n-1+i-j].
inline BitVector extract_block(const ToeplitzSeed& seed, const BitVector& x,
                               const ExtractorParams& params) {
  if (x.size() != params.n) {
    throw std::invalid_argument("extract_block: input must be exactly n bits");
  }
  detail::ToeplitzEngine engine(seed, params);
  std::vector<std::uint64_t> xw(engine.padded_block_words(), 0);
  x.extract_words(0, x.size(), xw.data());
  detail::ToeplitzEngine::Workspace ws;
  BitVector out;
  out.reserve_bits(params.m);
  engine.extract_one(xw.data(), ws, out, /*x_padded=*/true);
  return out;
}

struct StreamResult {
  BitVector bits;
  std::uint64_t leftover_bits = 0;  // trailing input bits (< n) discarded
};

/// Hashes consecutive n-bit blocks with one shared seed and concatenates
/// the outputs; trailing bits that do not fill a block are discarded.
inline StreamResult extract_stream(const ToeplitzSeed& seed, const BitVector& input,
                                   const ExtractorParams& params) {
  detail::ToeplitzEngine engine(seed, params);
  const std::size_t blocks = input.size() / params.n;
  StreamResult result;
  result.leftover_bits = input.size() - blocks * static_cast<std::size_t>(params.n);
  result.bits.reserve_bits(blocks * params.m);

  const std::size_t wx = engine.block_words();
  detail::ToeplitzEngine::Workspace ws;
  // Zero copy for word-aligned, tile-multiple blocks: tile loads then read
  // exactly the block's own words.  Everything else goes through padded
  // scratch.
  const bool zero_copy = params.n % 64 == 0 && wx % engine.kTileWords == 0;
  std::vector<std::uint64_t> scratch;
  if (!zero_copy) scratch.assign(engine.padded_block_words(), 0);

  for (std::size_t blk = 0; blk < blocks; ++blk) {
    const std::size_t bit0 = blk * static_cast<std::size_t>(params.n);
    if (zero_copy) {
      engine.extract_one(input.words().data() + bit0 / 64, ws, result.bits, /*x_padded=*/true);
    } else {
      input.extract_words(bit0, params.n, scratch.data());
      engine.extract_one(scratch.data(), ws, result.bits, /*x_padded=*/true);
    }
  }
  return result;
}

}  // namespace ponrng
