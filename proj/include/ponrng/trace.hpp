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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ponrng {

enum class TraceOrigin { kSimulatedDark, kSimulatedLit, kIngested };

inline std::string to_string(TraceOrigin o) {
  switch (o) {
    case TraceOrigin::kSimulatedDark: return "simulated-dark";
    case TraceOrigin::kSimulatedLit: return "simulated-lit";
    case TraceOrigin::kIngested: return "ingested";
  }
  return "unknown";
}

inline TraceOrigin trace_origin_from_string(const std::string& s) {
  if (s == "simulated-dark") return TraceOrigin::kSimulatedDark;
  if (s == "simulated-lit") return TraceOrigin::kSimulatedLit;
  if (s == "ingested") return TraceOrigin::kIngested;
  throw std::invalid_argument("unknown trace origin: " + s);
}

struct TraceMeta {
  double sample_rate_hz = 0.0;
  int adc_bits = 8;
  double adc_full_scale_v = 1.0;
  TraceOrigin origin = TraceOrigin::kIngested;
};

/// Digitized detector output: signed ADC codes plus acquisition metadata.
/// Codes are stored widened to int16 so 8/12/16-bit captures share one type;
/// every code must lie in [-2^(adc_bits-1), 2^(adc_bits-1) - 1].
struct RawTrace {
  std::vector<std::int16_t> codes;
  TraceMeta meta;

  std::size_t size() const { return codes.size(); }

  /// LSB step in volts: full scale maps to the top of the code range.
  double lsb_v() const {
    return meta.adc_full_scale_v / static_cast<double>(std::int64_t{1} << (meta.adc_bits - 1));
  }

  /// Code value in volts.
  double volts(std::size_t i) const { return static_cast<double>(codes[i]) * lsb_v(); }

  void validate() const {
    if (meta.sample_rate_hz <= 0) throw std::invalid_argument("RawTrace: sample_rate must be > 0");
    if (meta.adc_bits < 2 || meta.adc_bits > 16) {
      throw std::invalid_argument("RawTrace: adc_bits out of supported range [2,16]");
    }
    const std::int32_t lo = -(std::int32_t{1} << (meta.adc_bits - 1));
    const std::int32_t hi = (std::int32_t{1} << (meta.adc_bits - 1)) - 1;
    for (std::int16_t c : codes) {
      if (c < lo || c > hi) throw std::out_of_range("RawTrace: code outside ADC range");
    }
  }
};

}  // namespace ponrng
