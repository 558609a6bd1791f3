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
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ponrng {

/// Frequencies are integer hertz end to end; the 100 GHz grid and all
/// half-channel positions are exactly representable, so routing decisions
/// never depend on floating-point rounding.
using Hz = std::int64_t;

/// Wavelength grid of a stacked multi-channel transceiver with cyclic AWG
/// (de)multiplexers.  Channel i sits at nu_start - 2*i*delta_nu; the AWG
/// routing repeats every free spectral range.
struct GridSpec {
  Hz nu_start = 193'500'000'000'000;  // ~1549.3 nm band edge, arbitrary
  Hz delta_nu = 100'000'000'000;      // 100 GHz
  Hz fsr = 16 * 100'000'000'000LL;    // 16 * delta_nu unless overridden
  int ports = 4;

  static GridSpec with_defaults(Hz nu_start_hz) {
    GridSpec g;
    g.nu_start = nu_start_hz;
    g.validate();
    return g;
  }

  /// fsr = 0 requests the canonical 16 * delta_nu.
  static GridSpec make(Hz nu_start_hz, Hz delta_nu_hz, Hz fsr_hz = 0, int port_count = 4) {
    GridSpec g;
    g.nu_start = nu_start_hz;
    g.delta_nu = delta_nu_hz;
    g.fsr = fsr_hz == 0 ? 16 * delta_nu_hz : fsr_hz;
    g.ports = port_count;
    g.validate();
    return g;
  }

  void validate() const {
    if (delta_nu <= 0) throw std::invalid_argument("GridSpec: delta_nu must be > 0");
    if (ports < 2) throw std::invalid_argument("GridSpec: ports must be >= 2");
    if (fsr <= 0 || fsr % delta_nu != 0) {
      throw std::invalid_argument("GridSpec: fsr must be a positive multiple of delta_nu");
    }
  }

  /// Number of channel slots (2*delta_nu pitch) in one FSR period.
  Hz slots_per_fsr() const { return fsr / (2 * delta_nu); }
};

/// Band assignment plus the foldback split geometry.  The foldback pair is
/// configuration driven: the grid formula alone does not determine which
/// two receiver channels flank the retuned carrier, so the pair ships as an
/// explicit (overridable) choice.
struct ChannelAllocation {
  std::vector<int> upstream_indices = {1, 3, 5, 7};
  std::vector<int> downstream_indices = {9, 11, 13, 15};
  int qrng_target_index = 0;
  std::pair<int, int> foldback_pair = {11, 13};
  double excess_loss_db = 1.9;
  double reference_split_loss_db = 3.01;

  void validate() const {
    std::set<int> up(upstream_indices.begin(), upstream_indices.end());
    std::set<int> down(downstream_indices.begin(), downstream_indices.end());
    for (int i : down) {
      if (up.count(i)) throw std::invalid_argument("ChannelAllocation: bands must be disjoint");
    }
    if (down.count(qrng_target_index)) {
      throw std::invalid_argument("ChannelAllocation: qrng target must not be a downstream channel");
    }
    if (excess_loss_db < 0 || reference_split_loss_db < 0) {
      throw std::invalid_argument("ChannelAllocation: losses must be >= 0");
    }
  }
};

/// nu_i = nu_start - 2 i delta_nu, exact integer arithmetic.
inline Hz channel_frequency(const GridSpec& spec, int index) {
  if (index < 0) throw std::invalid_argument("channel_frequency: index must be >= 0");
  return spec.nu_start - 2 * static_cast<Hz>(index) * spec.delta_nu;
}

enum class RouteKind { kSinglePort, kCrosspoint, kStopband };

struct RouteResult {
  RouteKind kind = RouteKind::kStopband;
  // kSinglePort: port_a valid.  kCrosspoint: port_a < port_b two adjacent
  // ports, per_arm_loss_db applies to each arm.
  int port_a = -1;
  int port_b = -1;
  double insertion_loss_db = 0.0;
  double per_arm_loss_db = 0.0;
  Hz offset_delta_nu = -1;  // grid offset in delta_nu units, cyclic, -1 off-lattice
};

/// Cyclic AWG routing.  The offset (nu_start - freq) is reduced modulo the
/// FSR and classified on the delta_nu lattice with a passband tolerance of
/// delta_nu/10: even multiples are channel slots (single output port), odd
/// multiples are transmission crosspoints balanced over the two adjacent
/// ports, anything else is stopband.
inline RouteResult awg_route(const GridSpec& spec, Hz freq,
                             double split_loss_db = 3.01, double excess_loss_db = 1.9) {
  if (freq <= 0) throw std::invalid_argument("awg_route: freq must be > 0");
  RouteResult r;
  Hz offset = (spec.nu_start - freq) % spec.fsr;
  if (offset < 0) offset += spec.fsr;
  // Nearest lattice point and distance from it.
  Hz q = (offset + spec.delta_nu / 2) / spec.delta_nu;
  Hz dist = std::llabs(offset - q * spec.delta_nu);
  if (dist > spec.delta_nu / 10) {
    r.kind = RouteKind::kStopband;
    return r;
  }
  const Hz lattice_points = spec.fsr / spec.delta_nu;
  q %= lattice_points;  // rounding up at the top of the period wraps to 0
  r.offset_delta_nu = q;
  const Hz slots = spec.slots_per_fsr();
  if (q % 2 == 0) {
    r.kind = RouteKind::kSinglePort;
    r.port_a = static_cast<int>((q / 2) % spec.ports);
    r.insertion_loss_db = 0.0;
  } else {
    r.kind = RouteKind::kCrosspoint;
    const Hz slot_lo = (q - 1) / 2;
    const Hz slot_hi = (slot_lo + 1) % slots;
    r.port_a = static_cast<int>(slot_lo % spec.ports);
    r.port_b = static_cast<int>(slot_hi % spec.ports);
    r.per_arm_loss_db = split_loss_db + excess_loss_db;
  }
  return r;
}

enum class FoldbackStatus { kOk, kNotCrosspoint, kPairNotDownstream };

struct FoldbackPlan {
  FoldbackStatus status = FoldbackStatus::kOk;
  Hz retuned_hz = 0;
  std::pair<int, int> receiver_pair = {-1, -1};
  double per_arm_loss_db = 0.0;
  std::string reason;

  bool valid() const { return status == FoldbackStatus::kOk; }
};

/// Retunes an upstream transmitter by +delta_nu so the cyclic AWG folds it
/// back into the local receiver as a balanced two-arm split.  Validates the
/// crosspoint landing and that the configured receiver pair really is two
/// distinct downstream channels; per-arm loss is the 50/50 reference plus
/// the crosspoint excess.
inline FoldbackPlan qrng_foldback(const GridSpec& spec, const ChannelAllocation& alloc,
                                  int tx_index) {
  if (std::find(alloc.upstream_indices.begin(), alloc.upstream_indices.end(), tx_index) ==
      alloc.upstream_indices.end()) {
    throw std::invalid_argument("qrng_foldback: tx_index is not an upstream channel");
  }
  FoldbackPlan plan;
  plan.retuned_hz = channel_frequency(spec, tx_index) + spec.delta_nu;
  const RouteResult route =
      awg_route(spec, plan.retuned_hz, alloc.reference_split_loss_db, alloc.excess_loss_db);
  if (route.kind != RouteKind::kCrosspoint) {
    plan.status = FoldbackStatus::kNotCrosspoint;
    plan.reason = route.kind == RouteKind::kSinglePort
                      ? "retuned carrier lands on a channel slot, not a crosspoint"
                      : "retuned carrier lands in the stopband";
    return plan;
  }
  const auto& down = alloc.downstream_indices;
  const bool a_ok = std::find(down.begin(), down.end(), alloc.foldback_pair.first) != down.end();
  const bool b_ok = std::find(down.begin(), down.end(), alloc.foldback_pair.second) != down.end();
  if (!a_ok || !b_ok || alloc.foldback_pair.first == alloc.foldback_pair.second) {
    plan.status = FoldbackStatus::kPairNotDownstream;
    plan.reason = "configured foldback pair is not two distinct downstream channels";
    return plan;
  }
  plan.receiver_pair = alloc.foldback_pair;
  plan.per_arm_loss_db = alloc.reference_split_loss_db + alloc.excess_loss_db;
  return plan;
}

struct PlanViolation {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<PlanViolation> violations;
  bool ok() const { return violations.empty(); }

  std::string to_text() const {
    std::ostringstream os;
    os << "violations = " << violations.size() << "\n";
    for (const auto& v : violations) os << v.code << ": " << v.message << "\n";
    return os.str();
  }
};

/// Plan sanity: band disjointness, per-band extent within one FSR, no two
/// channels of a band colliding on the same cyclic slot, and foldback
/// feasibility for at least one upstream transmitter.
inline ValidationReport validate_plan(const GridSpec& spec, const ChannelAllocation& alloc) {
  ValidationReport report;
  auto add = [&report](const std::string& code, const std::string& msg) {
    report.violations.push_back({code, msg});
  };

  std::set<int> up(alloc.upstream_indices.begin(), alloc.upstream_indices.end());
  std::set<int> down(alloc.downstream_indices.begin(), alloc.downstream_indices.end());
  for (int i : down) {
    if (up.count(i)) add("band-overlap", "channel " + std::to_string(i) + " in both bands");
  }
  if (down.count(alloc.qrng_target_index)) {
    add("qrng-target-downstream",
        "qrng target " + std::to_string(alloc.qrng_target_index) + " is a downstream channel");
  }

  const Hz slots = spec.slots_per_fsr();
  auto check_band = [&](const std::vector<int>& band, const std::string& name) {
    if (band.empty()) {
      add("empty-band", name + " band has no channels");
      return;
    }
    for (int i : band) {
      if (i < 0) add("negative-index", name + " channel index " + std::to_string(i));
    }
    const auto [mn, mx] = std::minmax_element(band.begin(), band.end());
    // Channel pitch is 2*delta_nu, so an index spread of slots_per_fsr
    // covers one full FSR and the band aliases onto itself.
    if (static_cast<Hz>(*mx - *mn) >= slots) {
      add("band-exceeds-fsr", name + " band spans >= one FSR (indices " + std::to_string(*mn) +
                                  ".." + std::to_string(*mx) + ")");
    }
    std::set<Hz> seen;
    for (int i : band) {
      const Hz slot = ((static_cast<Hz>(i) % slots) + slots) % slots;
      if (!seen.insert(slot).second) {
        add("slot-collision",
            name + " channel " + std::to_string(i) + " shares a cyclic AWG slot with another");
      }
    }
  };
  check_band(alloc.upstream_indices, "upstream");
  check_band(alloc.downstream_indices, "downstream");

  bool any_foldback = false;
  for (int tx : alloc.upstream_indices) {
    if (tx < 0) continue;
    if (qrng_foldback(spec, alloc, tx).valid()) {
      any_foldback = true;
      break;
    }
  }
  if (!any_foldback) add("no-foldback", "no upstream channel yields a valid foldback");

  return report;
}

}  // namespace ponrng
