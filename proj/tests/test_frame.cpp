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

#include "ponrng/frame.hpp"

#include "gtest/gtest.h"

namespace ponrng {
namespace {

TEST(BuildFrame, DefaultAcquisitionWindow) {
  const FrameTimeline tl = build_frame(FrameSpec{});
  // 2.2 s slot minus 51 us settle, exact on the picosecond grid.
  EXPECT_EQ(tl.acquisition_ps, 2'199'949'000'000LL);
  EXPECT_DOUBLE_EQ(tl.acquisition_s(), 2.199949);
  ASSERT_EQ(tl.events.size(), 7u);
  EXPECT_EQ(tl.events.front().event, FrameEvent::kBlankDownstream);
  EXPECT_EQ(tl.events.back().event, FrameEvent::kUnblankDownstream);
  for (std::size_t i = 1; i < tl.events.size(); ++i) {
    EXPECT_GE(tl.events[i].t_ps, tl.events[i - 1].t_ps);  // ordered, ties by emission sequence
  }
}

TEST(BuildFrame, AcquireWindowBoundaries) {
  FrameSpec spec;
  spec.settle_s = 100e-6;
  spec.qrng_slot_s = 1.0;
  spec.frame_period_s = 2.0;
  const auto tl = build_frame(spec);
  Picoseconds acquire_start = -1, acquire_end = -1;
  for (const auto& e : tl.events) {
    if (e.event == FrameEvent::kAcquireStart) acquire_start = e.t_ps;
    if (e.event == FrameEvent::kAcquireEnd) acquire_end = e.t_ps;
  }
  EXPECT_EQ(acquire_start, 100'000'000LL);           // 100 us
  EXPECT_EQ(acquire_end, 1'000'000'000'000LL);       // slot end
  EXPECT_EQ(tl.acquisition_ps, acquire_end - acquire_start);
}

TEST(BuildFrame, RejectsEmptyAcquisition) {
  FrameSpec spec;
  spec.settle_s = spec.qrng_slot_s;
  EXPECT_THROW(build_frame(spec), std::invalid_argument);
  spec = FrameSpec{};
  spec.qrng_slot_s = 3.0;  // slot longer than frame
  EXPECT_THROW(build_frame(spec), std::invalid_argument);
}

TEST(BuildFrame, CsvExport) {
  const auto tl = build_frame(FrameSpec{});
  const std::string csv = tl.to_csv();
  EXPECT_NE(csv.find("time_offset_s,event"), std::string::npos);
  EXPECT_NE(csv.find("acquire_start"), std::string::npos);
  EXPECT_NE(csv.find("tune_laser"), std::string::npos);
}

TEST(EffectiveThroughput, DutyEndpoints) {
  FrameSpec spec;  // 4 lanes x 10G, 2 eroded
  spec.qrng_slot_s = 2.2;
  spec.frame_period_s = 2.2;  // duty 1
  EXPECT_DOUBLE_EQ(effective_throughput_bps(spec), 20e9);
  spec.frame_period_s = 1e9;  // duty -> 0
  EXPECT_NEAR(effective_throughput_bps(spec), 40e9, 1e3);
  spec.frame_period_s = 4.4;  // duty 0.5
  EXPECT_DOUBLE_EQ(effective_throughput_bps(spec), 30e9);
}

TEST(EffectiveThroughput, LinearInDutyAndBounded) {
  FrameSpec spec;
  spec.qrng_slot_s = 1.0;
  const double lo = 20e9, hi = 40e9;
  double prev = 0.0;
  for (double period : {1.0, 1.25, 2.0, 4.0, 16.0}) {
    spec.frame_period_s = period;
    const double tput = effective_throughput_bps(spec);
    EXPECT_GE(tput, lo - 1e-3);
    EXPECT_LE(tput, hi + 1e-3);
    EXPECT_GE(tput, prev - 1e-3);  // shrinking duty raises capacity
    prev = tput;
    // Exact linearity in d.
    const double d = spec.duty_cycle();
    EXPECT_DOUBLE_EQ(tput, 40e9 * (1 - d) + 20e9 * d);
  }
}

TEST(EffectiveThroughput, TimeConservation) {
  // Full-rate time plus slot time equals the frame period on the ps grid.
  FrameSpec spec;
  spec.frame_period_s = 3.7;
  spec.qrng_slot_s = 1.1;
  const auto frame = seconds_to_ps(spec.frame_period_s);
  const auto slot = seconds_to_ps(spec.qrng_slot_s);
  EXPECT_EQ((frame - slot) + slot, frame);
}

TEST(QrngYield, DefaultNumbersExact) {
  const auto params = ExtractorParams::derive(32768);
  const std::uint64_t bits = qrng_yield_per_frame_bits(FrameSpec{}, 2e9, params);
  // samples = floor(2.199949 s * 2 GS/s) = 4,399,898,000
  // blocks  = floor(samples * 8 / 32768) = 1,074,193
  // bits    = blocks * 924 = 992,554,332
  EXPECT_EQ(bits, 992'554'332ULL);
}

TEST(QrngYield, LosslessScaling) {
  ExtractorParams p;
  p.n = 32768;
  p.m = 32767;  // hypothetical near-lossless for the scaling check
  p.bits_per_sample = 8;
  p.min_entropy_per_sample = 8.0;
  p.epsilon_log2 = 0.0;
  const std::uint64_t bits = qrng_yield_per_frame_bits(FrameSpec{}, 2e9, p);
  EXPECT_EQ(bits, 1'074'193ULL * 32767ULL);
}

TEST(QrngYield, ShortAcquisitionYieldsZero) {
  FrameSpec spec;
  spec.qrng_slot_s = 60e-6;
  spec.settle_s = 51e-6;
  spec.frame_period_s = 1.0;
  // 9 us * 1 kS/s -> 0 samples -> 0 blocks.
  EXPECT_EQ(qrng_yield_per_frame_bits(spec, 1000.0, ExtractorParams::derive(32768)), 0u);
}

TEST(QrngYield, MonotoneInSlotAndRate) {
  const auto params = ExtractorParams::derive(32768);
  FrameSpec spec;
  spec.frame_period_s = 10.0;
  std::uint64_t prev = 0;
  for (double slot : {0.5, 1.0, 2.2, 5.0}) {
    spec.qrng_slot_s = slot;
    const auto bits = qrng_yield_per_frame_bits(spec, 2e9, params);
    EXPECT_GE(bits, prev);
    prev = bits;
  }
  prev = 0;
  spec.qrng_slot_s = 2.2;
  for (double rate : {1e6, 1e8, 2e9, 7e9}) {
    const auto bits = qrng_yield_per_frame_bits(spec, rate, params);
    EXPECT_GE(bits, prev);
    prev = bits;
  }
}

TEST(MinDutyCycle, AesRefreshLoad) {
  // 10 Gb/s link, rekey every 64 GByte: (10e9/8)/64e9 keys/s against the
  // 1,953,125 keys/s burst capability.
  const double required = (10e9 / 8.0) / 64e9;
  const auto r = min_duty_cycle(required, 1'953'125.0);
  EXPECT_TRUE(r.feasible);
  EXPECT_NEAR(r.duty, 1.0e-8, 1e-14);
}

TEST(MinDutyCycle, Endpoints) {
  EXPECT_DOUBLE_EQ(min_duty_cycle(0.0, 100.0).duty, 0.0);
  const auto inf = min_duty_cycle(200.0, 100.0);
  EXPECT_FALSE(inf.feasible);
  EXPECT_DOUBLE_EQ(inf.duty, 2.0);
  EXPECT_THROW(min_duty_cycle(1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(min_duty_cycle(-1.0, 1.0), std::invalid_argument);
}

TEST(FrameSpecValidation, LaneBounds) {
  FrameSpec spec;
  spec.lanes_eroded = 5;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = FrameSpec{};
  spec.lanes_eroded = 0;
  EXPECT_NO_THROW(spec.validate());
  spec.lane_rate_bps = 0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace ponrng
