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

#include "ponrng/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "ponrng/noise.hpp"

namespace ponrng {
namespace {

RawTrace synthetic_trace(std::vector<std::int16_t> codes, double fs = 2e9, int bits = 8) {
  RawTrace t;
  t.codes = std::move(codes);
  t.meta = {fs, bits, 1.0, TraceOrigin::kIngested};
  return t;
}

// Unfiltered white Gaussian codes, sigma in LSB.
RawTrace white_trace(std::size_t n, double sigma_lsb, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::int16_t> codes(n);
  detail::GaussianSampler g(seed);
  for (auto& c : codes) {
    const double v = sigma_lsb * g.next();
    c = static_cast<std::int16_t>(std::clamp(std::lround(v), -128L, 127L));
  }
  return synthetic_trace(std::move(codes));
}

double integrate_psd(const PsdEstimate& est) {
  const double df = est.sample_rate_hz / static_cast<double>(est.segment_length);
  double acc = 0;
  for (double v : est.psd) acc += v * df;
  return acc;
}

double trace_variance(const RawTrace& t) {
  double sum = 0, sum2 = 0;
  const double lsb = t.lsb_v();
  for (auto c : t.codes) {
    sum += c * lsb;
    sum2 += c * lsb * c * lsb;
  }
  const double n = static_cast<double>(t.size());
  return sum2 / n - (sum / n) * (sum / n);
}

TEST(EstimatePsd, ParsevalOnWhiteInput) {
  const RawTrace t = white_trace(1 << 20, 30.0, 7);
  const PsdEstimate est = estimate_psd(t, 4096, 0.5);
  const double var = trace_variance(t);
  EXPECT_NEAR(integrate_psd(est), var, 0.02 * var);
}

TEST(EstimatePsd, OnBinToneStandsOut) {
  // Tone exactly on bin 64 of a 4096-point segment at fs = 2 GHz.
  const std::size_t n = 1 << 18;
  std::vector<std::int16_t> codes(n);
  for (std::size_t k = 0; k < n; ++k) {
    codes[k] = static_cast<std::int16_t>(
        std::lround(100.0 * std::sin(2.0 * M_PI * 64.0 * static_cast<double>(k) / 4096.0)));
  }
  const PsdEstimate est = estimate_psd(synthetic_trace(std::move(codes)), 4096, 0.5);
  const double f_tone = 2e9 * 64.0 / 4096.0;
  const std::size_t peak_bin = est.nearest_bin(f_tone);
  std::vector<double> sorted = est.psd;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  EXPECT_GE(10.0 * std::log10(est.psd[peak_bin] / (median + 1e-300)), 30.0);
}

TEST(EstimatePsd, DcOnlyInputConcentratesAtZeroFrequency) {
  // The Hann main lobe spans bins 0..1, so "all power at DC" means those
  // two bins; everything past them is numerical dust.
  const RawTrace t = synthetic_trace(std::vector<std::int16_t>(8192, 50));
  const PsdEstimate est = estimate_psd(t, 1024, 0.5);
  double outside = 0;
  for (std::size_t k = 2; k < est.psd.size(); ++k) outside += est.psd[k];
  EXPECT_GT(est.psd[0], est.psd[1]);
  EXPECT_GT(est.psd[0], 1e12 * (outside + 1e-300));
}

TEST(EstimatePsd, PreconditionsEnforced) {
  const RawTrace t = white_trace(4096, 10.0, 1);
  EXPECT_THROW(estimate_psd(t, 1000, 0.5), std::invalid_argument);   // not a power of two
  EXPECT_THROW(estimate_psd(t, 8192, 0.5), std::invalid_argument);   // longer than trace
  EXPECT_THROW(estimate_psd(t, 1024, 1.0), std::invalid_argument);   // overlap = 1
  EXPECT_THROW(estimate_psd(t, 1024, -0.1), std::invalid_argument);  // overlap < 0
}

TEST(EstimatePsd, MatchesSinglePoleResponse) {
  // Simulated dark trace against the filter's analytic magnitude response,
  // within +-1 dB away from the Nyquist edge.
  SourceConfig c;
  c.emi_tones.clear();
  c.classical_sigma_v = 0.08;
  c.detector_cutoff_hz = 200e6;
  c.prng_seed = 11;
  const RawTrace t = simulate_dark(c, 1 << 21);
  const PsdEstimate est = estimate_psd(t, 4096, 0.5);
  const double white_level = 2.0 * c.classical_sigma_v * c.classical_sigma_v / c.sample_rate_hz;
  const double q_level = 2.0 * (t.lsb_v() * t.lsb_v() / 12.0) / c.sample_rate_hz;
  for (double f : {50e6, 100e6, 200e6, 400e6, 700e6}) {
    const double analytic = white_level * c.filter_mag2(f) + q_level;
    const double measured = est.psd[est.nearest_bin(f)];
    EXPECT_NEAR(10.0 * std::log10(measured / analytic), 0.0, 1.0) << "f = " << f;
  }
  // Single-pole decay far above the cutoff: one decade costs close to
  // 20 dB until the Nyquist edge flattens the digital response.
  const double d1 = est.psd[est.nearest_bin(40e6)];
  const double d2 = est.psd[est.nearest_bin(400e6)];
  EXPECT_NEAR(10.0 * std::log10(d1 / d2), 10.0 * std::log10(c.filter_mag2(40e6) / c.filter_mag2(400e6)),
              1.5);
}

TEST(EstimateClearance, IdenticalTracesGiveExactZero) {
  const RawTrace t = white_trace(1 << 16, 20.0, 3);
  const ClearanceSpectrum cs = estimate_clearance(t, t, 1024, 0.5);
  for (double db : cs.clearance_db) EXPECT_EQ(db, 0.0);
}

TEST(EstimateClearance, TwoToOneVarianceIsFlatThreeDb) {
  SourceConfig c;
  c.emi_tones.clear();
  c.classical_sigma_v = 0.05;
  c.quantum_sigma_v = 0.05;
  c.prng_seed = 21;
  const RawTrace dark = simulate_dark(c, 1 << 21);
  SourceConfig c2 = c;
  c2.prng_seed = 22;  // independent draw for the lit branch
  const RawTrace lit = simulate_lit(c2, 1 << 21);
  const ClearanceSpectrum cs = estimate_clearance(lit, dark, 4096, 0.5);
  // Flatness probed on short band averages; a single Welch bin of the
  // lit/dark ratio has ~0.3 dB statistical spread on its own.
  for (double f : {50e6, 200e6, 500e6, 900e6}) {
    const std::size_t center = static_cast<std::size_t>(f / (2e9 / 4096.0));
    double lit_band = 0, dark_band = 0;
    for (std::size_t k = center - 8; k <= center + 8; ++k) {
      lit_band += cs.psd_lit[k];
      dark_band += cs.psd_dark[k];
    }
    EXPECT_NEAR(10.0 * std::log10(lit_band / dark_band), 3.01, 0.5) << "f = " << f;
    EXPECT_NEAR(cs.at(f), 3.01, 1.5) << "f = " << f;  // single-bin, wider spread
  }
}

TEST(EstimateClearance, MetadataMismatchRejected) {
  const RawTrace a = white_trace(8192, 10.0, 1);
  RawTrace b = white_trace(8192, 10.0, 2);
  b.meta.sample_rate_hz = 1e9;
  EXPECT_THROW(estimate_clearance(a, b, 1024), std::invalid_argument);
}

TEST(Autocorrelation, WhiteNoiseHasNoSuspectLags) {
  const RawTrace t = white_trace(1 << 20, 25.0, 99);
  const auto r = autocorrelation(t, 20);
  EXPECT_FALSE(r.degenerate);
  EXPECT_DOUBLE_EQ(r.r[0], 1.0);
  EXPECT_TRUE(r.suspect_lags.empty());
}

TEST(Autocorrelation, EmiToneMakesPeriodicSuspects) {
  SourceConfig c;  // default EMI tone at fs/100
  c.prng_seed = 5;
  const RawTrace t = simulate_lit(c, 1 << 20);
  const auto r = autocorrelation(t, 350);
  ASSERT_FALSE(r.suspect_lags.empty());
  bool found100 = false, found200 = false, found300 = false;
  for (auto lag : r.suspect_lags) {
    found100 |= lag == 100;
    found200 |= lag == 200;
    found300 |= lag == 300;
  }
  EXPECT_TRUE(found100 && found200 && found300);
}

TEST(Autocorrelation, ConstantInputFlaggedDegenerate) {
  const RawTrace t = synthetic_trace(std::vector<std::int16_t>(100000, 17));
  const auto r = autocorrelation(t, 10);
  EXPECT_TRUE(r.degenerate);
  EXPECT_TRUE(r.suspect_lags.empty());
}

TEST(Autocorrelation, LagBoundEnforced) {
  const RawTrace t = white_trace(1000, 10.0, 1);
  EXPECT_THROW(autocorrelation(t, 500), std::invalid_argument);
}

TEST(MinEntropyMcv, ConstantTraceIsZero) {
  const RawTrace t = synthetic_trace(std::vector<std::int16_t>(100000, -3));
  EXPECT_DOUBLE_EQ(estimate_min_entropy_mcv(t), 0.0);
}

TEST(MinEntropyMcv, UniformCodesApproachEightBits) {
  std::mt19937_64 rng(17);
  std::vector<std::int16_t> codes(1 << 20);
  for (auto& c : codes) c = static_cast<std::int16_t>(static_cast<int>(rng() % 256) - 128);
  const double h = estimate_min_entropy_mcv(synthetic_trace(std::move(codes)));
  EXPECT_LT(h, 8.0);  // approaches from below
  EXPECT_GT(h, 7.8);
}

TEST(MinEntropyMcv, DefaultLitSourceClearsQuarterBit) {
  const SourceConfig c = SourceConfig::from_clearance(14.8);
  const RawTrace t = simulate_lit(c, 1 << 20);
  EXPECT_GT(estimate_min_entropy_mcv(t), 0.25);
}

TEST(MinEntropyMcv, SampleCountPrecondition) {
  const RawTrace t = white_trace(1000, 10.0, 1);
  EXPECT_THROW(estimate_min_entropy_mcv(t), std::invalid_argument);
}

}  // namespace
}  // namespace ponrng
