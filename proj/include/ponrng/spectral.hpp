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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ponrng/fft.hpp"
#include "ponrng/trace.hpp"

namespace ponrng {

/// One-sided Welch PSD estimate in V^2/Hz.  Sum of psd[k] * bin width
/// equals the signal variance for white input (Parseval), bin width fs/L.
struct PsdEstimate {
  double sample_rate_hz = 0.0;
  std::size_t segment_length = 0;
  std::size_t segments_averaged = 0;
  std::vector<double> freq_hz;
  std::vector<double> psd;

  std::size_t nearest_bin(double f_hz) const {
    if (freq_hz.empty()) throw std::logic_error("PsdEstimate: empty");
    const double df = freq_hz.size() > 1 ? freq_hz[1] - freq_hz[0] : 1.0;
    const auto idx = static_cast<std::ptrdiff_t>(std::llround(f_hz / df));
    return static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(freq_hz.size()) - 1));
  }
};

/// Averaged windowed periodogram (periodic Hann window).  segment_length
/// must be a power of two no longer than the trace; overlap in [0, 1).
inline PsdEstimate estimate_psd(const RawTrace& trace, std::size_t segment_length,
                                double overlap = 0.5) {
  if (!detail::is_power_of_two(segment_length)) {
    throw std::invalid_argument("estimate_psd: segment_length must be a power of two");
  }
  if (segment_length > trace.size()) {
    throw std::invalid_argument("estimate_psd: trace shorter than one segment");
  }
  if (!(overlap >= 0.0) || overlap >= 1.0) {
    throw std::invalid_argument("estimate_psd: overlap must be in [0, 1)");
  }
  const std::size_t L = segment_length;
  const double fs = trace.meta.sample_rate_hz;
  const std::size_t hop =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround((1.0 - overlap) * L)));

  std::vector<double> window(L);
  double window_power = 0.0;
  for (std::size_t k = 0; k < L; ++k) {
    window[k] = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(k) / L));
    window_power += window[k] * window[k];
  }

  const std::size_t n_bins = L / 2 + 1;
  PsdEstimate est;
  est.sample_rate_hz = fs;
  est.segment_length = L;
  est.psd.assign(n_bins, 0.0);
  est.freq_hz.resize(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) est.freq_hz[k] = fs * static_cast<double>(k) / L;

  const double lsb = trace.lsb_v();
  std::vector<detail::Complex> seg(L);
  for (std::size_t start = 0; start + L <= trace.size(); start += hop) {
    for (std::size_t k = 0; k < L; ++k) {
      seg[k] = detail::Complex(static_cast<double>(trace.codes[start + k]) * lsb * window[k], 0.0);
    }
    detail::fft_pow2(seg.data(), L, false);
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double mag2 = std::norm(seg[k]);
      const double one_sided = (k == 0 || k == L / 2) ? 1.0 : 2.0;
      est.psd[k] += one_sided * mag2 / (fs * window_power);
    }
    ++est.segments_averaged;
  }
  const double inv = 1.0 / static_cast<double>(est.segments_averaged);
  for (double& v : est.psd) v *= inv;
  return est;
}

/// Per-frequency lit/dark PSD ratio in dB.
struct ClearanceSpectrum {
  std::vector<double> freq_hz;
  std::vector<double> clearance_db;
  std::vector<double> psd_lit;
  std::vector<double> psd_dark;

  /// Clearance at the bin nearest to f.
  double at(double f_hz) const {
    if (freq_hz.empty()) throw std::logic_error("ClearanceSpectrum: empty");
    const double df = freq_hz.size() > 1 ? freq_hz[1] - freq_hz[0] : 1.0;
    const auto idx = std::clamp<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(std::llround(f_hz / df)), 0,
        static_cast<std::ptrdiff_t>(freq_hz.size()) - 1);
    return clearance_db[static_cast<std::size_t>(idx)];
  }
};

inline ClearanceSpectrum estimate_clearance(const RawTrace& lit, const RawTrace& dark,
                                            std::size_t segment_length, double overlap = 0.5) {
  if (lit.meta.sample_rate_hz != dark.meta.sample_rate_hz ||
      lit.meta.adc_bits != dark.meta.adc_bits ||
      lit.meta.adc_full_scale_v != dark.meta.adc_full_scale_v) {
    throw std::invalid_argument("estimate_clearance: lit/dark acquisition metadata mismatch");
  }
  const PsdEstimate pl = estimate_psd(lit, segment_length, overlap);
  const PsdEstimate pd = estimate_psd(dark, segment_length, overlap);
  ClearanceSpectrum cs;
  cs.freq_hz = pl.freq_hz;
  cs.psd_lit = pl.psd;
  cs.psd_dark = pd.psd;
  cs.clearance_db.resize(pl.psd.size());
  for (std::size_t k = 0; k < pl.psd.size(); ++k) {
    cs.clearance_db[k] = pd.psd[k] > 0.0
                             ? 10.0 * std::log10(pl.psd[k] / pd.psd[k])
                             : std::numeric_limits<double>::infinity();
  }
  return cs;
}

/// Biased normalized autocorrelation with r[0] = 1; lags whose magnitude
/// exceeds 3/sqrt(N) are flagged suspect.  A zero-variance input is
/// reported degenerate instead of dividing by zero.
struct AutocorrelationResult {
  std::vector<double> r;
  std::vector<std::size_t> suspect_lags;
  double threshold = 0.0;
  bool degenerate = false;
};

inline AutocorrelationResult autocorrelation(const RawTrace& trace, std::size_t max_lag) {
  const std::size_t n = trace.size();
  if (max_lag >= n / 2) throw std::invalid_argument("autocorrelation: need max_lag < N/2");
  AutocorrelationResult out;
  out.threshold = 3.0 / std::sqrt(static_cast<double>(n));
  double mean = 0.0;
  for (std::int16_t c : trace.codes) mean += c;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::int16_t c : trace.codes) {
    const double d = c - mean;
    var += d * d;
  }
  var /= static_cast<double>(n);
  out.r.assign(max_lag + 1, 0.0);
  if (var == 0.0) {
    out.degenerate = true;
    out.r[0] = 1.0;
    return out;
  }
  out.r[0] = 1.0;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double acc = 0.0;
    for (std::size_t k = 0; k + lag < n; ++k) {
      acc += (trace.codes[k] - mean) * (trace.codes[k + lag] - mean);
    }
    out.r[lag] = acc / (static_cast<double>(n) * var);
    if (std::abs(out.r[lag]) > out.threshold) out.suspect_lags.push_back(lag);
  }
  return out;
}

/// Most-common-value min-entropy estimate in bits/sample: -log2 of the MCV
/// frequency adjusted upward by its 99% confidence half-width.  A plug-in,
/// deliberately conservative figure, not an information-theoretic bound.
inline double estimate_min_entropy_mcv(const RawTrace& trace) {
  const std::size_t n = trace.size();
  if (n < 100000) throw std::invalid_argument("estimate_min_entropy_mcv: need >= 1e5 samples");
  std::vector<std::uint64_t> counts(std::size_t{1} << trace.meta.adc_bits, 0);
  const std::int32_t offset = std::int32_t{1} << (trace.meta.adc_bits - 1);
  for (std::int16_t c : trace.codes) ++counts[static_cast<std::size_t>(c + offset)];
  const std::uint64_t max_count = *std::max_element(counts.begin(), counts.end());
  const double p_hat = static_cast<double>(max_count) / static_cast<double>(n);
  constexpr double kZ99 = 2.5758293035489004;  // two-sided 99% normal quantile
  const double half_width = kZ99 * std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n));
  const double p_up = std::min(1.0, p_hat + half_width);
  return -std::log2(p_up);
}

}  // namespace ponrng
