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

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ponrng::detail {

using Complex = std::complex<double>;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// In-place iterative radix-2 FFT (decimation in time).  n must be a power
/// of two.  The inverse transform is unscaled; callers divide by n.
inline void fft_pow2(Complex* a, std::size_t n, bool inverse) {
  if (!is_power_of_two(n)) throw std::invalid_argument("fft_pow2: n must be a power of two");
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const Complex wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      Complex w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const Complex u = a[i + k];
        const Complex v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

/// DFT of arbitrary length via Bluestein's chirp-z reduction to a
/// power-of-two convolution.  Exact DFT definition (negative exponent).
inline std::vector<Complex> dft_bluestein(const std::vector<Complex>& in) {
  const std::size_t n = in.size();
  if (n == 0) return {};
  if (is_power_of_two(n)) {
    std::vector<Complex> a = in;
    fft_pow2(a.data(), n, false);
    return a;
  }
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;
  // Chirp phases: w_k = exp(-i pi k^2 / n); k^2 mod 2n keeps the argument
  // small enough for full precision at any n.
  std::vector<Complex> w(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t k2 = static_cast<std::size_t>((static_cast<unsigned __int128>(k) * k) %
                                                    (2 * static_cast<unsigned __int128>(n)));
    const double ang = -M_PI * static_cast<double>(k2) / static_cast<double>(n);
    w[k] = Complex(std::cos(ang), std::sin(ang));
  }
  std::vector<Complex> a(m, Complex(0, 0)), b(m, Complex(0, 0));
  for (std::size_t k = 0; k < n; ++k) a[k] = in[k] * w[k];
  b[0] = std::conj(w[0]);
  for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(w[k]);
  fft_pow2(a.data(), m, false);
  fft_pow2(b.data(), m, false);
  for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
  fft_pow2(a.data(), m, true);
  std::vector<Complex> out(n);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * inv_m * w[k];
  return out;
}

}  // namespace ponrng::detail
