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

#include "ponrng/nist.hpp"

#include <random>

#include "gtest/gtest.h"

namespace ponrng {
namespace {

// Expected P-values frozen from an independent straightforward evaluation
// of the published statistics (scipy/numpy reference, 9 decimals).
constexpr double kTol = 5e-7;  // acceptance asks for 6-decimal agreement

// First 64 / 128 fractional bits of pi, a fixed non-trivial input.
const char* kPi64 =
    "1100100100001111110110101010001000100001011010001100001000110100";
const char* kPi128 =
    "11001001000011111101101010100010"
    "00100001011010001100001000110100"
    "11000100110001100110001010001011"
    "10100010111000000011011100000111";

BitVector random_bits(std::size_t len, std::mt19937_64& rng) {
  BitVector v(len);
  for (std::size_t i = 0; i < len; i += 64) {
    const std::uint64_t w = rng();
    for (std::size_t b = 0; b < 64 && i + b < len; ++b) v.set(i + b, (w >> b) & 1);
  }
  return v;
}

TEST(NistMonobit, WorkedValues) {
  EXPECT_NEAR(nist_monobit(BitVector::from_string("1011010101")), 0.527089257, kTol);
  // Perfectly alternating: zero excess, erfc(0) = 1.
  std::string alt;
  for (int i = 0; i < 50; ++i) alt += "01";
  EXPECT_DOUBLE_EQ(nist_monobit(BitVector::from_string(alt)), 1.0);
  EXPECT_NEAR(nist_monobit(BitVector::from_string(kPi64)), 0.2112995473, kTol);
}

TEST(NistBlockFrequency, WorkedValues) {
  EXPECT_NEAR(nist_block_frequency(BitVector::from_string("0110011010"), 3), 0.801251957, kTol);
  EXPECT_NEAR(nist_block_frequency(BitVector::from_string(kPi64), 8), 0.809433107, kTol);
  EXPECT_THROW(nist_block_frequency(BitVector::from_string("01"), 8), SequenceTooShortError);
  EXPECT_THROW(nist_block_frequency(BitVector::from_string("0110011010"), 1),
               std::invalid_argument);
}

TEST(NistRuns, WorkedValues) {
  EXPECT_NEAR(nist_runs(BitVector::from_string("1001101011")), 0.147232255, kTol);
  EXPECT_NEAR(nist_runs(BitVector::from_string(kPi64)), 0.476023548, kTol);
  // Frequency pre-test failure pins P to zero.
  EXPECT_DOUBLE_EQ(nist_runs(BitVector::from_string("1111111111111111")), 0.0);
}

TEST(NistLongestRun, WorkedValue) {
  EXPECT_NEAR(nist_longest_run(BitVector::from_string(kPi128)), 0.364818467, kTol);
  EXPECT_THROW(nist_longest_run(BitVector(100)), SequenceTooShortError);
}

TEST(NistCumulativeSums, WorkedValues) {
  const auto p = nist_cumulative_sums(BitVector::from_string("1011010111"));
  EXPECT_NEAR(p[0], 0.411584718, kTol);
  EXPECT_NEAR(p[1], 0.411584718, kTol);
  const auto p64 = nist_cumulative_sums(BitVector::from_string(kPi64));
  EXPECT_NEAR(p64[0], 0.422245426, kTol);
}

TEST(NistDftSpectral, WorkedValues) {
  // n = 10 exercises the Bluestein path, n = 64 the radix-2 path.
  EXPECT_NEAR(nist_dft_spectral(BitVector::from_string("1001010011")), 0.468159910, kTol);
  EXPECT_NEAR(nist_dft_spectral(BitVector::from_string(kPi64)), 0.646355196, kTol);
}

TEST(NistSerial, WorkedValues) {
  const auto p = nist_serial(BitVector::from_string("0011011101"), 3);
  EXPECT_NEAR(p[0], 0.808792135, kTol);
  EXPECT_NEAR(p[1], 0.670320046, kTol);
  EXPECT_THROW(nist_serial(BitVector::from_string("0011011101"), 1), std::invalid_argument);
}

TEST(NistApproximateEntropy, WorkedValues) {
  EXPECT_NEAR(nist_approximate_entropy(BitVector::from_string("0100110101"), 3), 0.261961105,
              kTol);
  EXPECT_NEAR(nist_approximate_entropy(BitVector::from_string(kPi64), 2), 0.657669718, kTol);
}

TEST(NistProperties, PValuesAlwaysInUnitInterval) {
  std::mt19937_64 rng(404);
  NistParams params;
  params.block_frequency_m = 16;
  params.serial_m = 4;
  params.apen_m = 3;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 128 + rng() % 2000;
    BitVector bits = random_bits(n, rng);
    if (trial % 5 == 0) bits = BitVector(n);  // pathological all-zeros too
    for (NistTest t : all_nist_tests()) {
      for (double p : nist_test(t, bits, params)) {
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
      }
    }
  }
}

TEST(NistProperties, MonobitAndRunsInvariantUnderComplement) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 64 + rng() % 500;
    const BitVector bits = random_bits(n, rng);
    BitVector flipped(n);
    for (std::size_t i = 0; i < n; ++i) flipped.set(i, !bits.get(i));
    EXPECT_DOUBLE_EQ(nist_monobit(bits), nist_monobit(flipped));
    // pi(1-pi) is symmetric in exact arithmetic; rounding of the two
    // one-proportions leaves a ulp-scale residue.
    EXPECT_NEAR(nist_runs(bits), nist_runs(flipped), 1e-12);
  }
}

TEST(RunSuite, ConstantStreamFailsMonobit) {
  SuiteParams params;
  params.sequence_length = 2000;
  params.test_params.block_frequency_m = 200;
  params.test_params.serial_m = 5;
  params.test_params.apen_m = 4;
  const TestReport report = run_suite(BitVector(40000), params);
  EXPECT_FALSE(report.verdict);
  bool found = false;
  for (const auto& rec : report.records) {
    if (rec.name == "monobit") {
      found = true;
      EXPECT_DOUBLE_EQ(rec.proportion, 0.0);
      EXPECT_FALSE(rec.pass_headline);
    }
  }
  EXPECT_TRUE(found);
}

TEST(RunSuite, HealthyPrngPassesReferenceThresholds) {
  std::mt19937_64 rng(1);
  const std::size_t L = 20000, S = 100;
  const BitVector bits = random_bits(L * S, rng);
  SuiteParams params;
  params.sequence_length = L;
  params.test_params.block_frequency_m = 2000;
  params.test_params.serial_m = 7;
  params.test_params.apen_m = 5;
  const TestReport report = run_suite(bits, params);
  EXPECT_EQ(report.sequences, S);
  // rev1a threshold for s = 100, alpha = 0.01.
  for (const auto& rec : report.records) {
    EXPECT_NEAR(rec.proportion_threshold, 0.960150, 1e-6);
    EXPECT_GE(rec.proportion, rec.proportion_threshold) << rec.name;
    EXPECT_GE(rec.uniformity_p, 1e-4) << rec.name;
  }
  EXPECT_TRUE(report.verdict_reference);
}

TEST(RunSuite, DeterministicAcrossCallsAndThreadCounts) {
  std::mt19937_64 rng(9);
  const BitVector bits = random_bits(12 * 4000, rng);
  SuiteParams params;
  params.sequence_length = 4000;
  params.test_params.block_frequency_m = 400;
  params.test_params.serial_m = 6;
  params.test_params.apen_m = 4;
  params.threads = 1;
  const TestReport a = run_suite(bits, params);
  params.threads = 4;
  const TestReport b = run_suite(bits, params);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].p_values, b.records[i].p_values);
    EXPECT_DOUBLE_EQ(a.records[i].uniformity_p, b.records[i].uniformity_p);
  }
}

TEST(RunSuite, InputSizePreconditions) {
  SuiteParams params;
  params.sequence_length = 1000;
  EXPECT_THROW(run_suite(BitVector(1500), params), SequenceTooShortError);  // < 2 sequences
  EXPECT_THROW(run_suite(BitVector(5000), params), SequenceTooShortError);  // s = 5 < 10
}

TEST(RunSuite, ReportFormats) {
  std::mt19937_64 rng(3);
  const BitVector bits = random_bits(10 * 2000, rng);
  SuiteParams params;
  params.sequence_length = 2000;
  params.test_params.block_frequency_m = 200;
  params.test_params.serial_m = 5;
  params.test_params.apen_m = 4;
  const TestReport report = run_suite(bits, params);
  const std::string text = report.to_text();
  EXPECT_NE(text.find("test = monobit"), std::string::npos);
  EXPECT_NE(text.find("verdict ="), std::string::npos);
  const std::string table = report.to_table();
  EXPECT_NE(table.find("cumulative_sums_fwd"), std::string::npos);
  EXPECT_NE(table.find("serial_p1"), std::string::npos);
}

}  // namespace
}  // namespace ponrng
