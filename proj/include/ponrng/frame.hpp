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
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ponrng/extractor.hpp"

namespace ponrng {

/// Times are held in integer picoseconds internally so the derived window
/// arithmetic is exact; sub-picosecond resolution is not supported.
using Picoseconds = std::int64_t;

inline Picoseconds seconds_to_ps(double s) {
  if (!(s >= 0) || s > 9.0e6) throw std::invalid_argument("time out of range for ps grid");
  return static_cast<Picoseconds>(std::llround(s * 1e12));
}

inline double ps_to_seconds(Picoseconds ps) { return static_cast<double>(ps) * 1e-12; }

/// Time-interleaved frame: during the random-number slot two of the four
/// lanes are blanked and the retuned transmitter feeds the receiver-side
/// balanced split; the rest of the frame runs full-rate data.
struct FrameSpec {
  double frame_period_s = 2.2;
  double qrng_slot_s = 2.2;
  double settle_s = 51e-6;
  int lanes_total = 4;
  int lanes_eroded = 2;
  double lane_rate_bps = 10e9;
  double restore_settle_s = 0.0;  // laser retune-back charge, default instantaneous

  void validate() const {
    if (!(settle_s > 0) || !(settle_s < qrng_slot_s)) {
      throw std::invalid_argument("FrameSpec: need 0 < settle < qrng_slot");
    }
    if (!(qrng_slot_s <= frame_period_s)) {
      throw std::invalid_argument("FrameSpec: need qrng_slot <= frame_period");
    }
    if (lanes_total < 1 || lanes_eroded < 0 || lanes_eroded > lanes_total) {
      throw std::invalid_argument("FrameSpec: need 0 <= lanes_eroded <= lanes_total");
    }
    if (!(lane_rate_bps > 0)) throw std::invalid_argument("FrameSpec: lane_rate must be > 0");
    if (restore_settle_s < 0) throw std::invalid_argument("FrameSpec: restore_settle >= 0");
  }

  double duty_cycle() const { return qrng_slot_s / frame_period_s; }
};

enum class FrameEvent {
  kBlankDownstream,
  kTuneLaser,
  kSettling,
  kAcquireStart,
  kAcquireEnd,
  kRetuneLaser,
  kUnblankDownstream,
};

inline std::string to_string(FrameEvent e) {
  switch (e) {
    case FrameEvent::kBlankDownstream: return "blank_downstream";
    case FrameEvent::kTuneLaser: return "tune_laser";
    case FrameEvent::kSettling: return "settling";
    case FrameEvent::kAcquireStart: return "acquire_start";
    case FrameEvent::kAcquireEnd: return "acquire_end";
    case FrameEvent::kRetuneLaser: return "retune_laser";
    case FrameEvent::kUnblankDownstream: return "unblank_downstream";
  }
  return "unknown";
}

struct TimelineEntry {
  Picoseconds t_ps;
  FrameEvent event;
};

struct FrameTimeline {
  std::vector<TimelineEntry> events;  // ordered by (t, emission sequence)
  Picoseconds acquisition_ps = 0;
  Picoseconds frame_period_ps = 0;
  Picoseconds qrng_slot_ps = 0;

  double acquisition_s() const { return ps_to_seconds(acquisition_ps); }

  std::string to_csv() const {
    std::ostringstream os;
    os << "time_offset_s,event\n";
    os.setf(std::ios::fixed);
    os.precision(12);
    for (const auto& e : events) os << ps_to_seconds(e.t_ps) << "," << to_string(e.event) << "\n";
    return os.str();
  }
};

/// Slot layout: blanking and laser tuning at slot start, settle_s of
/// settling charged to the slot, acquisition until slot end, then restore.
inline FrameTimeline build_frame(const FrameSpec& spec) {
  spec.validate();
  FrameTimeline tl;
  const Picoseconds settle = seconds_to_ps(spec.settle_s);
  const Picoseconds slot = seconds_to_ps(spec.qrng_slot_s);
  tl.frame_period_ps = seconds_to_ps(spec.frame_period_s);
  tl.qrng_slot_ps = slot;
  tl.acquisition_ps = slot - settle;
  if (tl.acquisition_ps <= 0) throw std::invalid_argument("build_frame: empty acquisition window");
  tl.events = {
      {0, FrameEvent::kBlankDownstream},
      {0, FrameEvent::kTuneLaser},
      {0, FrameEvent::kSettling},
      {settle, FrameEvent::kAcquireStart},
      {slot, FrameEvent::kAcquireEnd},
      {slot, FrameEvent::kRetuneLaser},
      {slot + seconds_to_ps(spec.restore_settle_s), FrameEvent::kUnblankDownstream},
  };
  return tl;
}

/// Time-weighted mean data capacity over one frame: full lane count outside
/// the slot, (lanes_total - lanes_eroded) inside it.
inline double effective_throughput_bps(const FrameSpec& spec) {
  spec.validate();
  const double d = spec.duty_cycle();
  const double full = static_cast<double>(spec.lanes_total) * spec.lane_rate_bps;
  const double eroded =
      static_cast<double>(spec.lanes_total - spec.lanes_eroded) * spec.lane_rate_bps;
  return full * (1.0 - d) + eroded * d;
}

/// Extracted bits produced by one frame's acquisition window: whole input
/// blocks only, floor at every stage.
inline std::uint64_t qrng_yield_per_frame_bits(const FrameSpec& spec, double sample_rate_hz,
                                               const ExtractorParams& params) {
  spec.validate();
  params.validate();
  if (!(sample_rate_hz > 0)) throw std::invalid_argument("qrng_yield: sample_rate must be > 0");
  const Picoseconds acq_ps = seconds_to_ps(spec.qrng_slot_s) - seconds_to_ps(spec.settle_s);
  std::uint64_t samples;
  if (sample_rate_hz == std::floor(sample_rate_hz) && sample_rate_hz < 9.2e18) {
    // Integer rates divide the picosecond grid exactly.
    const auto rate = static_cast<std::uint64_t>(sample_rate_hz);
    samples = static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(acq_ps) * rate) / 1'000'000'000'000ULL);
  } else {
    samples = static_cast<std::uint64_t>(std::floor(ps_to_seconds(acq_ps) * sample_rate_hz));
  }
  const std::uint64_t input_bits = samples * params.bits_per_sample;
  const std::uint64_t blocks = input_bits / params.n;
  return blocks * params.m;
}

struct DutyCycleResult {
  double duty = 0.0;
  bool feasible = true;
};

/// Fraction of time the generator must run to sustain `required` keys/s
/// given a burst capability; duty > 1 is flagged infeasible, not thrown.
inline DutyCycleResult min_duty_cycle(double required_keys_per_s, double burst_keys_per_s) {
  if (!(burst_keys_per_s > 0)) throw std::invalid_argument("min_duty_cycle: burst rate must be > 0");
  if (required_keys_per_s < 0) throw std::invalid_argument("min_duty_cycle: required rate >= 0");
  DutyCycleResult r;
  r.duty = required_keys_per_s / burst_keys_per_s;
  r.feasible = r.duty <= 1.0;
  return r;
}

}  // namespace ponrng
