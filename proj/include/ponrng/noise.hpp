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
#include <random>
#include <stdexcept>
#include <vector>

#include "ponrng/trace.hpp"

namespace ponrng {

struct EmiTone {
  double freq_hz = 0.0;
  double amplitude_v = 0.0;
  double phase_rad = 0.0;
};

/// Balanced-receiver entropy source model.  The lit receiver sees quantum
/// (shot) noise on top of the electronic floor; both components share the
/// detector's single-pole transfer function.  Deterministic EMI tones and a
/// DC offset are added after the filter, before quantization.
struct SourceConfig {
  double sample_rate_hz = 2e9;
  int adc_bits = 8;
  double adc_full_scale_v = 1.0;
  double quantum_sigma_v = 0.164862;  // realizes ~14.8 dB clearance over the default floor
  double classical_sigma_v = 0.03;
  double detector_cutoff_hz = 1e9;
  std::vector<EmiTone> emi_tones = {{20e6, 0.02, 0.0}};
  double dc_offset_v = 0.0;
  std::uint64_t prng_seed = 1;

  /// Derives quantum_sigma from a target low-frequency clearance (dB),
  /// i.e. the lit/dark PSD ratio when both components share the filter:
  /// clearance = 20*log10(sigma_total / classical_sigma).
  static SourceConfig from_clearance(double clearance_db, SourceConfig base) {
    if (!(clearance_db > 0)) throw std::invalid_argument("clearance target must be > 0 dB");
    const double ratio = std::pow(10.0, clearance_db / 10.0);  // power ratio lit/dark
    base.quantum_sigma_v = base.classical_sigma_v * std::sqrt(ratio - 1.0);
    base.validate();
    return base;
  }

  static SourceConfig from_clearance(double clearance_db) {
    return from_clearance(clearance_db, SourceConfig{});
  }

  double total_sigma_v() const {
    return quantum_sigma_v == 0.0 ? classical_sigma_v
                                  : std::hypot(classical_sigma_v, quantum_sigma_v);
  }

  /// Realized low-frequency clearance in dB.
  double clearance_db() const {
    if (classical_sigma_v <= 0) throw std::domain_error("clearance undefined for zero floor");
    return 20.0 * std::log10(total_sigma_v() / classical_sigma_v);
  }

  void validate() const {
    if (adc_bits < 2 || adc_bits > 16) {
      throw std::invalid_argument("SourceConfig: adc_bits must be in [2,16]");
    }
    if (!(sample_rate_hz > 0)) throw std::invalid_argument("SourceConfig: sample_rate must be > 0");
    if (!(adc_full_scale_v > 0)) throw std::invalid_argument("SourceConfig: full scale must be > 0");
    if (quantum_sigma_v < 0 || classical_sigma_v < 0) {
      throw std::invalid_argument("SourceConfig: sigmas must be >= 0");
    }
    if (!(detector_cutoff_hz > 0) || detector_cutoff_hz > sample_rate_hz / 2) {
      throw std::invalid_argument("SourceConfig: cutoff must be in (0, sample_rate/2]");
    }
    for (const auto& t : emi_tones) {
      if (t.freq_hz < 0 || t.amplitude_v < 0) {
        throw std::invalid_argument("SourceConfig: tone freq/amplitude must be >= 0");
      }
    }
  }

  /// One-pole IIR y[k] = (1-p) g[k] + p y[k-1] with p = exp(-2 pi fc / fs).
  double filter_pole() const { return std::exp(-2.0 * M_PI * detector_cutoff_hz / sample_rate_hz); }

  /// White-noise variance gain of the filter: (1-p)/(1+p).
  double filter_noise_gain() const {
    const double p = filter_pole();
    return (1.0 - p) / (1.0 + p);
  }

  /// Squared filter magnitude response at f.
  double filter_mag2(double f_hz) const {
    const double p = filter_pole();
    const double b = 1.0 - p;
    const double w = 2.0 * M_PI * f_hz / sample_rate_hz;
    return b * b / (1.0 - 2.0 * p * std::cos(w) + p * p);
  }
};

namespace detail {

/// Standard normal deviates from mt19937_64 via the Marsaglia polar method.
/// mt19937_64 and the uniform mapping are fully specified, so streams are
/// reproducible wherever std::log and std::sqrt round identically.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

 private:
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Incremental complex oscillator; re-synchronized from the exact phase
/// every kResync samples so rounding drift cannot accumulate.
class ToneOscillator {
 public:
  ToneOscillator(const EmiTone& tone, double sample_rate_hz)
      : tone_(tone), fs_(sample_rate_hz) {
    const double w = 2.0 * M_PI * tone.freq_hz / sample_rate_hz;
    cw_ = std::cos(w);
    sw_ = std::sin(w);
    resync(0);
  }

  double next() {
    const double v = tone_.amplitude_v * s_;
    if (++since_sync_ == kResync) {
      resync(k_ + 1);
    } else {
      const double c = c_ * cw_ - s_ * sw_;
      s_ = c_ * sw_ + s_ * cw_;
      c_ = c;
    }
    ++k_;
    return v;
  }

 private:
  static constexpr std::uint64_t kResync = 1u << 16;

  void resync(std::uint64_t k) {
    // f*k held in long double stays exact far beyond any realistic run.
    const long double cycles = std::fmod(static_cast<long double>(tone_.freq_hz) * k,
                                         static_cast<long double>(fs_)) /
                               static_cast<long double>(fs_);
    const double theta = static_cast<double>(2.0L * static_cast<long double>(M_PI) * cycles) +
                         tone_.phase_rad;
    c_ = std::cos(theta);
    s_ = std::sin(theta);
    k_ = k;
    since_sync_ = 0;
  }

  EmiTone tone_;
  double fs_;
  double cw_, sw_;
  double c_ = 1.0, s_ = 0.0;
  std::uint64_t k_ = 0;
  std::uint64_t since_sync_ = 0;
};

}  // namespace detail

/// Stateful chunked generator: output is a pure function of (config, mode)
/// and the number of samples drawn so far, independent of chunk boundaries.
class NoiseSimulator {
 public:
  enum class Mode { kDark, kLit };

  NoiseSimulator(const SourceConfig& config, Mode mode)
      : config_(config), mode_(mode), gauss_(config.prng_seed) {
    config.validate();
    sigma_ = mode == Mode::kDark ? config.classical_sigma_v : config.total_sigma_v();
    pole_ = config.filter_pole();
    gain_ = 1.0 - pole_;
    lsb_ = config.adc_full_scale_v /
           static_cast<double>(std::int64_t{1} << (config.adc_bits - 1));
    code_lo_ = -(std::int32_t{1} << (config.adc_bits - 1));
    code_hi_ = (std::int32_t{1} << (config.adc_bits - 1)) - 1;
    tones_.reserve(config.emi_tones.size());
    for (const auto& t : config.emi_tones) tones_.emplace_back(t, config.sample_rate_hz);
  }

  TraceMeta meta() const {
    return {config_.sample_rate_hz, config_.adc_bits, config_.adc_full_scale_v,
            mode_ == Mode::kDark ? TraceOrigin::kSimulatedDark : TraceOrigin::kSimulatedLit};
  }

  void generate(std::size_t count, std::vector<std::int16_t>& out) {
    out.reserve(out.size() + count);
    for (std::size_t i = 0; i < count; ++i) {
      filter_state_ = gain_ * (sigma_ * gauss_.next()) + pole_ * filter_state_;
      double v = filter_state_ + config_.dc_offset_v;
      for (auto& t : tones_) v += t.next();
      out.push_back(quantize(v));
    }
  }

 private:
  std::int16_t quantize(double v) const {
    const long long q = std::llround(v / lsb_);
    const long long clamped = q < code_lo_ ? code_lo_ : (q > code_hi_ ? code_hi_ : q);
    return static_cast<std::int16_t>(clamped);
  }

  SourceConfig config_;
  Mode mode_;
  detail::GaussianSampler gauss_;
  std::vector<detail::ToneOscillator> tones_;
  double sigma_ = 0.0;
  double pole_ = 0.0, gain_ = 1.0;
  double filter_state_ = 0.0;
  double lsb_ = 1.0;
  std::int32_t code_lo_ = 0, code_hi_ = 0;
};

inline RawTrace simulate(const SourceConfig& config, std::size_t n_samples,
                         NoiseSimulator::Mode mode) {
  if (n_samples == 0) throw std::invalid_argument("simulate: n_samples must be >= 1");
  NoiseSimulator sim(config, mode);
  RawTrace trace;
  trace.meta = sim.meta();
  sim.generate(n_samples, trace.codes);
  return trace;
}

/// Electronic noise floor only (no seed light on the receiver).
inline RawTrace simulate_dark(const SourceConfig& config, std::size_t n_samples) {
  return simulate(config, n_samples, NoiseSimulator::Mode::kDark);
}

/// Seeded receiver: Gaussian draw variance is classical^2 + quantum^2, the
/// independent components summed before filtering.  quantum_sigma = 0
/// reproduces simulate_dark bit for bit under the same seed.
inline RawTrace simulate_lit(const SourceConfig& config, std::size_t n_samples) {
  return simulate(config, n_samples, NoiseSimulator::Mode::kLit);
}

}  // namespace ponrng
