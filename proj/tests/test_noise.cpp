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

#include "ponrng/noise.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gtest/gtest.h"

namespace ponrng {
namespace {

SourceConfig quiet_config() {
  SourceConfig c;
  c.emi_tones.clear();
  c.dc_offset_v = 0.0;
  return c;
}

double code_variance(const RawTrace& t) {
  double sum = 0, sum2 = 0;
  const double lsb = t.lsb_v();
  for (auto c : t.codes) {
    const double v = c * lsb;
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(t.size());
  const double mean = sum / n;
  return sum2 / n - mean * mean;
}

TEST(SimulateDark, ZeroNoiseGivesZeroCodes) {
  SourceConfig c = quiet_config();
  c.classical_sigma_v = 0.0;
  c.quantum_sigma_v = 0.0;
  const RawTrace t = simulate_dark(c, 1000);
  for (auto code : t.codes) EXPECT_EQ(code, 0);
  EXPECT_EQ(t.meta.origin, TraceOrigin::kSimulatedDark);
}

TEST(SimulateDark, SaturationClampsAtExtremes) {
  SourceConfig c = quiet_config();
  c.classical_sigma_v = 50.0;  // vastly beyond full scale
  const RawTrace t = simulate_dark(c, 20000);
  std::set<std::int16_t> seen(t.codes.begin(), t.codes.end());
  EXPECT_TRUE(seen.count(127));
  EXPECT_TRUE(seen.count(-128));
  EXPECT_EQ(*std::max_element(t.codes.begin(), t.codes.end()), 127);
  EXPECT_EQ(*std::min_element(t.codes.begin(), t.codes.end()), -128);
}

TEST(SimulateDark, VarianceMatchesFilterNoiseBandwidth) {
  // Filtered white noise variance: sigma^2 * (1-p)/(1+p), p the filter pole.
  SourceConfig c = quiet_config();
  c.classical_sigma_v = c.adc_full_scale_v / 20.0;
  const RawTrace t = simulate_dark(c, 1'000'000);
  const double expect = c.classical_sigma_v * c.classical_sigma_v * c.filter_noise_gain();
  EXPECT_NEAR(code_variance(t), expect, 0.05 * expect);
}

TEST(SimulateLit, ZeroQuantumSigmaIsBitIdenticalToDark) {
  SourceConfig c = quiet_config();
  c.quantum_sigma_v = 0.0;
  const RawTrace dark = simulate_dark(c, 50000);
  const RawTrace lit = simulate_lit(c, 50000);
  EXPECT_EQ(dark.codes, lit.codes);
  EXPECT_EQ(lit.meta.origin, TraceOrigin::kSimulatedLit);
}

TEST(SimulateLit, VarianceAdditivity) {
  // quantum == classical doubles the variance (3.01 dB clearance).
  SourceConfig c = quiet_config();
  c.classical_sigma_v = 0.04;
  c.quantum_sigma_v = 0.04;
  const RawTrace dark = simulate_dark(c, 1'000'000);
  const RawTrace lit = simulate_lit(c, 1'000'000);
  const double ratio = code_variance(lit) / code_variance(dark);
  EXPECT_NEAR(ratio, 2.0, 0.1);
}

TEST(SimulateLit, ClearanceTargetRealizedInVariance) {
  SourceConfig c = SourceConfig::from_clearance(14.8, quiet_config());
  const RawTrace dark = simulate_dark(c, 1'000'000);
  const RawTrace lit = simulate_lit(c, 1'000'000);
  const double ratio = code_variance(lit) / code_variance(dark);
  EXPECT_NEAR(ratio, std::pow(10.0, 1.48), 0.05 * std::pow(10.0, 1.48));
}

TEST(SourceConfig, ClearanceConstructorExact) {
  const SourceConfig c = SourceConfig::from_clearance(14.8);
  EXPECT_NEAR(c.clearance_db(), 14.8, 0.01);
  const SourceConfig c2 = SourceConfig::from_clearance(3.01);
  EXPECT_NEAR(c2.quantum_sigma_v, c2.classical_sigma_v, 0.002);
  EXPECT_THROW(SourceConfig::from_clearance(-1.0), std::invalid_argument);
}

TEST(SourceConfig, InvariantsEnforced) {
  SourceConfig c;
  c.adc_bits = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SourceConfig{};
  c.detector_cutoff_hz = 1.5e9;  // above Nyquist at 2 GS/s
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SourceConfig{};
  c.classical_sigma_v = -0.1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SourceConfig{};
  c.sample_rate_hz = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Simulate, DeterministicAcrossRuns) {
  const SourceConfig c = SourceConfig::from_clearance(12.0);
  const RawTrace a = simulate_lit(c, 100000);
  const RawTrace b = simulate_lit(c, 100000);
  EXPECT_EQ(a.codes, b.codes);
  SourceConfig c2 = c;
  c2.prng_seed = c.prng_seed + 1;
  const RawTrace d = simulate_lit(c2, 100000);
  EXPECT_NE(a.codes, d.codes);
}

TEST(Simulate, ChunkingDoesNotChangeOutput) {
  const SourceConfig c = SourceConfig::from_clearance(10.0);
  const RawTrace whole = simulate_lit(c, 30000);
  NoiseSimulator sim(c, NoiseSimulator::Mode::kLit);
  std::vector<std::int16_t> chunked;
  sim.generate(7, chunked);
  sim.generate(9999, chunked);
  sim.generate(30000 - 7 - 9999, chunked);
  EXPECT_EQ(whole.codes, chunked);
}

TEST(Simulate, RejectsZeroSamples) {
  EXPECT_THROW(simulate_dark(SourceConfig{}, 0), std::invalid_argument);
}

TEST(Simulate, DcOffsetShiftsCodes) {
  SourceConfig c = quiet_config();
  c.classical_sigma_v = 0.0;
  c.quantum_sigma_v = 0.0;
  c.dc_offset_v = 0.25;  // 32 LSB at 8 bits, full scale 1 V
  const RawTrace t = simulate_dark(c, 100);
  for (auto code : t.codes) EXPECT_EQ(code, 32);
}

TEST(Simulate, EmiToneQuantizedSinusoid) {
  SourceConfig c = quiet_config();
  c.classical_sigma_v = 0.0;
  c.quantum_sigma_v = 0.0;
  c.emi_tones = {{20e6, 0.5, 0.0}};  // fs/100: period of 100 samples
  const RawTrace t = simulate_dark(c, 400);
  for (int k = 0; k < 200; ++k) {
    const double expect = 0.5 * std::sin(2.0 * M_PI * k / 100.0);
    EXPECT_NEAR(t.volts(static_cast<std::size_t>(k)), expect, t.lsb_v());
  }
  // Periodicity across the resync boundary too.
  EXPECT_EQ(t.codes[0], t.codes[100]);
  EXPECT_EQ(t.codes[25], t.codes[325]);
}

TEST(Simulate, QuantizationBoundHolds) {
  SourceConfig c = SourceConfig::from_clearance(14.8);
  c.adc_bits = 6;
  c.detector_cutoff_hz = 0.9e9;
  const RawTrace t = simulate_lit(c, 50000);
  EXPECT_NO_THROW(t.validate());
  for (auto code : t.codes) {
    EXPECT_GE(code, -32);
    EXPECT_LE(code, 31);
  }
}

}  // namespace
}  // namespace ponrng
