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

#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

#include "ponrng/bitvec.hpp"
#include "ponrng/trace_io.hpp"

namespace ponrng {

/// Packed bit stream on disk: MSB first within each byte, zero padding only
/// in the final byte; the sidecar records the valid bit count.

inline void write_bits_file(const BitVector& bits, const std::filesystem::path& path,
                            const std::map<std::string, std::string>& extra_meta = {}) {
  const auto bytes = bits.to_bytes_msb_first();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open bits file for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());

  std::ofstream meta(path.string() + ".meta");
  if (!meta) throw std::runtime_error("cannot open bits sidecar for writing");
  meta << "bits = " << bits.size() << "\n";
  for (const auto& [k, v] : extra_meta) meta << k << " = " << v << "\n";
}

inline BitVector read_bits_file(const std::filesystem::path& path) {
  const auto kv = detail::read_kv_file(path.string() + ".meta");
  const std::size_t n_bits = std::stoull(detail::require_key(kv, "bits", path.string() + ".meta"));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open bits file: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() != (n_bits + 7) / 8) {
    throw std::runtime_error("bits file length does not match sidecar bit count: " + path.string());
  }
  return BitVector::from_bytes_msb_first(bytes, n_bits);
}

}  // namespace ponrng
