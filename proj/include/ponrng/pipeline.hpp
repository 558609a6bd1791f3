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

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ponrng/bits_io.hpp"
#include "ponrng/bitvec.hpp"
#include "ponrng/config.hpp"
#include "ponrng/extractor.hpp"
#include "ponrng/frame.hpp"
#include "ponrng/nist.hpp"
#include "ponrng/noise.hpp"
#include "ponrng/sha256.hpp"
#include "ponrng/trace_io.hpp"

namespace ponrng {

inline constexpr const char* kPonrngVersion = "0.1.0";

/// Module failures during a run surface with the pipeline stage attached.
struct PipelineError : std::runtime_error {
  PipelineError(std::string stage_name, const std::string& message)
      : std::runtime_error("[" + stage_name + "] " + message), stage(std::move(stage_name)) {}
  std::string stage;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Fixed labeled fan-out from the master seed, so each stage is
/// independently reproducible.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
  for (char c : label) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 1099511628211ULL;
  }
  return splitmix64(master ^ h);
}

}  // namespace detail

/// 256 bits of extracted output, byte-packed MSB first.
struct KeyBlock {
  std::array<std::uint8_t, 32> key;
  std::uint64_t index = 0;
  std::string source_run;
};

struct CarveResult {
  std::vector<KeyBlock> keys;
  std::uint64_t remainder_bits = 0;  // 256 * keys.size() + remainder == input bits iff no limit hit
  std::uint64_t carvable_keys = 0;   // keys available before the count limit
};

/// Consecutive non-overlapping 256-bit blocks, in stream order.
inline CarveResult carve_keys(const BitVector& bits, std::uint64_t count_limit,
                              const std::string& source_run = "") {
  if (bits.size() < 256) throw std::invalid_argument("carve_keys: fewer than 256 input bits");
  CarveResult out;
  out.carvable_keys = bits.size() / 256;
  const std::uint64_t n_keys = std::min<std::uint64_t>(out.carvable_keys, count_limit);
  out.keys.reserve(n_keys);
  for (std::uint64_t k = 0; k < n_keys; ++k) {
    KeyBlock kb;
    kb.index = k;
    kb.source_run = source_run;
    const BitVector block = bits.slice(k * 256, 256);
    const auto bytes = block.to_bytes_msb_first();
    std::copy(bytes.begin(), bytes.end(), kb.key.begin());
    out.keys.push_back(std::move(kb));
  }
  out.remainder_bits = bits.size() - n_keys * 256;
  return out;
}

struct AccountingSummary {
  double raw_rate_bps = 0.0;          // sample_rate * bits_per_sample
  double pre_margin_bps = 0.0;        // sample_rate * min_entropy_per_sample
  double extracted_burst_bps = 0.0;   // raw_rate * m / n (the epsilon margin included)
  double key_burst_rate = 0.0;        // extracted_burst / 256
  double effective_throughput_bps = 0.0;
  std::uint64_t yield_bits_per_frame = 0;
  double required_key_rate = 0.0;     // rekey load: (link_rate/8) / refresh_bytes
  DutyCycleResult duty;

  std::string to_text() const {
    std::ostringstream os;
    os.precision(12);
    os << "raw_rate_bps = " << raw_rate_bps << "\n"
       << "pre_margin_extracted_bps = " << pre_margin_bps << "\n"
       << "extracted_burst_bps = " << extracted_burst_bps << "\n"
       << "key_burst_rate_per_s = " << key_burst_rate << "\n"
       << "effective_throughput_bps = " << effective_throughput_bps << "\n"
       << "yield_bits_per_frame = " << yield_bits_per_frame << "\n"
       << "required_key_rate_per_s = " << required_key_rate << "\n"
       << "min_duty_cycle = " << duty.duty << "\n"
       << "duty_feasible = " << (duty.feasible ? 1 : 0) << "\n";
    return os.str();
  }
};

/// Pure arithmetic over the configured source, extractor and frame: every
/// figure recomputes from the config alone.
inline AccountingSummary accounting_summary(const RunConfig& config) {
  const ExtractorParams params =
      ExtractorParams::derive(config.extractor_n, static_cast<std::uint32_t>(config.source.adc_bits),
                              config.min_entropy_per_sample, config.epsilon_log2);
  AccountingSummary acc;
  acc.raw_rate_bps = config.source.sample_rate_hz * config.source.adc_bits;
  acc.pre_margin_bps = config.source.sample_rate_hz * config.min_entropy_per_sample;
  acc.extracted_burst_bps =
      acc.raw_rate_bps * static_cast<double>(params.m) / static_cast<double>(params.n);
  acc.key_burst_rate = acc.extracted_burst_bps / 256.0;
  acc.effective_throughput_bps = effective_throughput_bps(config.schedule);
  acc.yield_bits_per_frame =
      qrng_yield_per_frame_bits(config.schedule, config.source.sample_rate_hz, params);
  acc.required_key_rate = (config.load_link_rate_bps / 8.0) / config.load_refresh_bytes;
  acc.duty = min_duty_cycle(acc.required_key_rate, acc.key_burst_rate);
  return acc;
}

struct RunArtifacts {
  std::filesystem::path dir;
  ExtractorParams params;
  ToeplitzSeed seed;
  TestReport extracted_report;
  std::optional<TestReport> raw_report;
  AccountingSummary accounting;
  BitVector extracted;
  std::uint64_t samples_simulated = 0;
  std::uint64_t input_bits = 0;
  std::uint64_t blocks = 0;
  std::uint64_t leftover_bits = 0;
  std::uint64_t keys_carved = 0;
  std::uint64_t key_remainder_bits = 0;
  std::string manifest_text;

  bool verdict() const { return extracted_report.verdict; }
};

namespace detail {

struct ManifestWriter {
  std::vector<std::pair<std::string, std::string>> entries;  // name -> sha256:bytes

  void add(const std::filesystem::path& dir, const std::string& name) {
    const auto p = dir / name;
    entries.emplace_back(name, sha256_file_hex(p) + ":" +
                                   std::to_string(std::filesystem::file_size(p)));
  }
};

}  // namespace detail

/// Executes simulate -> pack -> extract -> test -> carve deterministically
/// from the config and writes every artifact plus a hashed manifest.
inline RunArtifacts run_pipeline(const RunConfig& config) {
  namespace fs = std::filesystem;
  using Clock = std::chrono::steady_clock;

  RunArtifacts art;
  art.dir = config.output_dir;
  fs::create_directories(art.dir);

  try {
    config.source.validate();
  } catch (const std::exception& e) {
    throw PipelineError("source-config", e.what());
  }
  try {
    art.params = ExtractorParams::derive(config.extractor_n,
                                         static_cast<std::uint32_t>(config.source.adc_bits),
                                         config.min_entropy_per_sample, config.epsilon_log2);
  } catch (const std::exception& e) {
    throw PipelineError("derive_params", e.what());
  }
  try {
    config.schedule.validate();
    config.grid.validate();
    config.allocation.validate();
  } catch (const std::exception& e) {
    throw PipelineError("plan-config", e.what());
  }

  // Toeplitz seed: explicit file, or OS entropy persisted for reproduction.
  // Never derived from the master simulation seed.
  try {
    if (!config.toeplitz_seed_file.empty()) {
      art.seed.bits = read_bits_file(config.toeplitz_seed_file);
      art.seed.provenance = "file:" + config.toeplitz_seed_file;
    } else {
      art.seed = ToeplitzSeed::from_os_entropy(art.params);
    }
    art.seed.validate(art.params);
  } catch (const std::exception& e) {
    throw PipelineError("toeplitz-seed", e.what());
  }

  const std::uint64_t blocks_needed =
      (config.extracted_bits_target + art.params.m - 1) / art.params.m;
  art.input_bits = blocks_needed * art.params.n;
  art.samples_simulated = art.input_bits / config.source.adc_bits;

  const auto t0 = Clock::now();
  BitVector input_bits;
  RawTrace trace_prefix;
  try {
    SourceConfig source = config.source;
    source.prng_seed = detail::derive_seed(config.master_seed, "noise-lit");
    NoiseSimulator sim(source, NoiseSimulator::Mode::kLit);
    trace_prefix.meta = sim.meta();
    input_bits.reserve_bits(art.input_bits);
    constexpr std::size_t kChunk = std::size_t{1} << 22;
    std::vector<std::int16_t> chunk;
    std::uint64_t remaining = art.samples_simulated;
    while (remaining > 0) {
      chunk.clear();
      const std::size_t take = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, remaining));
      sim.generate(take, chunk);
      if (trace_prefix.codes.size() < config.trace_artifact_samples) {
        const std::size_t want = static_cast<std::size_t>(
            std::min<std::uint64_t>(config.trace_artifact_samples - trace_prefix.codes.size(),
                                    chunk.size()));
        trace_prefix.codes.insert(trace_prefix.codes.end(), chunk.begin(),
                                  chunk.begin() + static_cast<std::ptrdiff_t>(want));
      }
      RawTrace view;
      view.meta = trace_prefix.meta;
      view.codes = std::move(chunk);
      const BitVector packed = pack_samples(view);
      chunk = std::move(view.codes);
      input_bits.append_from_words(packed.words().data(), 0, packed.size());
      remaining -= take;
    }
  } catch (const std::exception& e) {
    throw PipelineError("simulate", e.what());
  }
  const auto t_sim = Clock::now();

  StreamResult stream;
  try {
    stream = extract_stream(art.seed, input_bits, art.params);
  } catch (const std::exception& e) {
    throw PipelineError("extract", e.what());
  }
  art.blocks = stream.bits.size() / art.params.m;
  art.leftover_bits = stream.leftover_bits;
  art.extracted = std::move(stream.bits);
  const auto t_ext = Clock::now();

  try {
    art.extracted_report = run_suite(art.extracted, config.suite);
  } catch (const std::exception& e) {
    throw PipelineError("test", e.what());
  }
  if (config.raw_check_sequences > 0) {
    try {
      const std::uint64_t raw_bits_wanted =
          std::min<std::uint64_t>(input_bits.size(),
                                  config.raw_check_sequences * config.suite.sequence_length);
      SuiteParams raw_params = config.suite;
      raw_params.threads = config.suite.threads;
      art.raw_report = run_suite(input_bits.slice(0, raw_bits_wanted), raw_params);
    } catch (const std::exception& e) {
      throw PipelineError("raw-check", e.what());
    }
  }
  const auto t_suite = Clock::now();

  CarveResult carve;
  try {
    carve = carve_keys(art.extracted, config.key_limit, "master:" +
                                                            std::to_string(config.master_seed));
    art.keys_carved = carve.keys.size();
    art.key_remainder_bits = art.extracted.size() - art.keys_carved * 256;
  } catch (const std::exception& e) {
    throw PipelineError("keys", e.what());
  }
  art.accounting = accounting_summary(config);

  // Artifacts.
  try {
    const std::string config_text = config.to_document();
    {
      std::ofstream f(art.dir / "config.cfg");
      f << config_text;
    }
    write_bits_file(art.seed.bits, art.dir / "toeplitz.seed",
                    {{"provenance", art.seed.provenance}});
    write_trace(trace_prefix, art.dir / "trace_prefix.bin", art.dir / "trace_prefix.bin.meta");
    write_bits_file(art.extracted, art.dir / "extracted.bits",
                    {{"blocks", std::to_string(art.blocks)},
                     {"n", std::to_string(art.params.n)},
                     {"m", std::to_string(art.params.m)}});
    {
      std::ofstream f(art.dir / "report.txt");
      f << art.extracted_report.to_text();
      std::ofstream ft(art.dir / "report_table.txt");
      ft << art.extracted_report.to_table();
    }
    if (art.raw_report) {
      std::ofstream f(art.dir / "raw_report.txt");
      f << art.raw_report->to_text();
    }
    {
      std::ofstream f(art.dir / "keys.bin", std::ios::binary);
      for (const auto& k : carve.keys) {
        f.write(reinterpret_cast<const char*>(k.key.data()),
                static_cast<std::streamsize>(k.key.size()));
      }
    }
    {
      std::ofstream f(art.dir / "summary.txt");
      f << art.accounting.to_text();
    }

    const auto ms = [](Clock::time_point a, Clock::time_point b) {
      return std::chrono::duration_cast<std::chrono::milliseconds>(b - a).count();
    };
    std::ostringstream mf;
    mf << "[manifest]\n"
       << "library_version = " << kPonrngVersion << "\n"
       << "config_sha256 = " << detail::sha256_hex(config_text) << "\n"
       << "master_seed = " << config.master_seed << "\n"
       << "toeplitz_seed_provenance = " << art.seed.provenance << "\n"
       << "verdict = " << (art.extracted_report.verdict ? "pass" : "fail") << "\n\n"
       << "[counts]\n"
       << "samples = " << art.samples_simulated << "\n"
       << "input_bits = " << art.input_bits << "\n"
       << "blocks = " << art.blocks << "\n"
       << "extracted_bits = " << art.extracted.size() << "\n"
       << "leftover_bits = " << art.leftover_bits << "\n"
       << "keys = " << art.keys_carved << "\n"
       << "key_remainder_bits = " << art.key_remainder_bits << "\n\n"
       << "[timings_ms]\n"
       << "simulate = " << ms(t0, t_sim) << "\n"
       << "extract = " << ms(t_sim, t_ext) << "\n"
       << "suite = " << ms(t_ext, t_suite) << "\n\n"
       << "[artifacts]\n";
    detail::ManifestWriter mw;
    for (const char* name : {"config.cfg", "toeplitz.seed", "toeplitz.seed.meta",
                             "trace_prefix.bin", "trace_prefix.bin.meta", "extracted.bits",
                             "extracted.bits.meta", "report.txt", "report_table.txt", "keys.bin",
                             "summary.txt"}) {
      mw.add(art.dir, name);
    }
    if (art.raw_report) mw.add(art.dir, "raw_report.txt");
    for (const auto& [name, hash] : mw.entries) mf << name << " = " << hash << "\n";
    art.manifest_text = mf.str();
    std::ofstream f(art.dir / "manifest.txt");
    f << art.manifest_text;
  } catch (const std::exception& e) {
    throw PipelineError("artifacts", e.what());
  }

  return art;
}

/// Re-hashes every artifact listed in a run manifest; returns human-readable
/// mismatch descriptions (empty means the run directory verifies).
inline std::vector<std::string> verify_manifest(const std::filesystem::path& run_dir) {
  const auto manifest_path = run_dir / "manifest.txt";
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path.string());
  std::vector<std::string> problems;
  std::string line;
  bool in_artifacts = false;
  while (std::getline(in, line)) {
    if (line == "[artifacts]") {
      in_artifacts = true;
      continue;
    }
    if (!in_artifacts || line.empty()) continue;
    if (line.front() == '[') {
      in_artifacts = false;
      continue;
    }
    const auto eq = line.find(" = ");
    const auto colon = line.rfind(':');
    if (eq == std::string::npos || colon == std::string::npos) {
      problems.push_back("malformed manifest entry: " + line);
      continue;
    }
    const std::string name = line.substr(0, eq);
    const std::string want_hash = line.substr(eq + 3, colon - eq - 3);
    const auto want_size = std::stoull(line.substr(colon + 1));
    const auto path = run_dir / name;
    if (!std::filesystem::exists(path)) {
      problems.push_back(name + ": missing");
      continue;
    }
    if (std::filesystem::file_size(path) != want_size) {
      problems.push_back(name + ": size mismatch");
      continue;
    }
    if (detail::sha256_file_hex(path) != want_hash) {
      problems.push_back(name + ": content hash mismatch");
    }
  }
  return problems;
}

}  // namespace ponrng
