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
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ponrng/trace.hpp"

namespace ponrng {

/// On-disk trace format: raw little-endian two's-complement codes, one byte
/// per sample for adc_bits <= 8 and two bytes per sample otherwise, plus a
/// key=value sidecar carrying sample_rate, adc_bits, adc_full_scale, origin.

namespace detail {

inline std::map<std::string, std::string> read_kv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metadata file: " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("malformed metadata line in " + path.string() + ": " + line);
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline const std::string& require_key(const std::map<std::string, std::string>& kv,
                                      const std::string& key, const std::string& where) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw std::runtime_error("metadata missing key '" + key + "' in " + where);
  return it->second;
}

}  // namespace detail

inline void write_trace(const RawTrace& trace, const std::filesystem::path& path,
                        const std::filesystem::path& meta_path) {
  trace.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open trace file for writing: " + path.string());
  if (trace.meta.adc_bits <= 8) {
    for (std::int16_t c : trace.codes) {
      const auto b = static_cast<std::int8_t>(c);
      out.write(reinterpret_cast<const char*>(&b), 1);
    }
  } else {
    for (std::int16_t c : trace.codes) {
      const std::uint16_t u = static_cast<std::uint16_t>(c);
      const char bytes[2] = {static_cast<char>(u & 0xff), static_cast<char>(u >> 8)};
      out.write(bytes, 2);
    }
  }
  if (!out) throw std::runtime_error("short write to " + path.string());

  std::ofstream meta(meta_path);
  if (!meta) throw std::runtime_error("cannot open metadata file for writing: " + meta_path.string());
  meta.precision(17);
  meta << "sample_rate = " << trace.meta.sample_rate_hz << "\n"
       << "adc_bits = " << trace.meta.adc_bits << "\n"
       << "adc_full_scale = " << trace.meta.adc_full_scale_v << "\n"
       << "origin = " << to_string(trace.meta.origin) << "\n"
       << "samples = " << trace.codes.size() << "\n";
}

inline RawTrace ingest_trace(const std::filesystem::path& path,
                             const std::filesystem::path& meta_path) {
  const auto kv = detail::read_kv_file(meta_path);
  RawTrace trace;
  try {
    trace.meta.sample_rate_hz = std::stod(detail::require_key(kv, "sample_rate", meta_path.string()));
    trace.meta.adc_bits = std::stoi(detail::require_key(kv, "adc_bits", meta_path.string()));
    trace.meta.adc_full_scale_v =
        kv.count("adc_full_scale") ? std::stod(kv.at("adc_full_scale")) : 1.0;
  } catch (const std::invalid_argument&) {
    throw std::runtime_error("malformed numeric field in " + meta_path.string());
  }
  trace.meta.origin =
      kv.count("origin") ? trace_origin_from_string(kv.at("origin")) : TraceOrigin::kIngested;
  if (trace.meta.adc_bits != 8 && trace.meta.adc_bits != 12 && trace.meta.adc_bits != 16) {
    throw std::runtime_error("metadata adc_bits must be one of 8, 12, 16");
  }
  if (!(trace.meta.sample_rate_hz > 0)) {
    throw std::runtime_error("metadata sample_rate must be > 0");
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace file: " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  const int bytes_per_sample = trace.meta.adc_bits <= 8 ? 1 : 2;
  if (raw.size() % static_cast<std::size_t>(bytes_per_sample) != 0) {
    throw std::runtime_error("truncated trace file: " + std::to_string(raw.size()) +
                             " bytes is not a multiple of " + std::to_string(bytes_per_sample));
  }
  const std::size_t n = raw.size() / static_cast<std::size_t>(bytes_per_sample);
  trace.codes.resize(n);
  if (bytes_per_sample == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      trace.codes[i] = static_cast<std::int16_t>(static_cast<std::int8_t>(raw[i]));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint16_t u = static_cast<std::uint8_t>(raw[2 * i]) |
                              (static_cast<std::uint16_t>(static_cast<std::uint8_t>(raw[2 * i + 1]))
                               << 8);
      trace.codes[i] = static_cast<std::int16_t>(u);
    }
  }
  trace.validate();  // catches codes outside the declared adc_bits range
  return trace;
}

}  // namespace ponrng
