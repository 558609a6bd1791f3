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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ponrng/channel_plan.hpp"
#include "ponrng/extractor.hpp"
#include "ponrng/frame.hpp"
#include "ponrng/nist.hpp"
#include "ponrng/noise.hpp"

namespace ponrng {

/// Sectioned key = value configuration document.  '#' and ';' start
/// comments; keys are unique within a section.  Everything a run needs is
/// in the document so run manifests stay complete (no environment input).
class ConfigDoc {
 public:
  ConfigDoc() = default;

  static ConfigDoc parse(const std::string& text) {
    ConfigDoc doc;
    doc.text_ = text;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto comment = line.find_first_of("#;");
      if (comment != std::string::npos) line.erase(comment);
      const std::string t = trim(line);
      if (t.empty()) continue;
      if (t.front() == '[') {
        if (t.back() != ']') {
          throw std::runtime_error("config line " + std::to_string(lineno) + ": unclosed section");
        }
        section = trim(t.substr(1, t.size() - 2));
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) {
        throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
      }
      doc.values_[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return doc;
  }

  static ConfigDoc load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  const std::string& text() const { return text_; }

  bool has(const std::string& section, const std::string& key) const {
    const auto s = values_.find(section);
    return s != values_.end() && s->second.count(key) > 0;
  }

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
    const auto s = values_.find(section);
    if (s == values_.end()) return fallback;
    const auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
  }

  double get_double(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    return std::stod(get_string(section, key, ""));
  }

  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const {
    if (!has(section, key)) return fallback;
    return std::stoll(get_string(section, key, ""));
  }

  std::uint64_t get_uint(const std::string& section, const std::string& key,
                         std::uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    return std::stoull(get_string(section, key, ""));
  }

  bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get_string(section, key, "");
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::runtime_error("config: boolean expected for " + section + "." + key);
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }

  std::string text_;
  std::map<std::string, std::map<std::string, std::string>> values_;
};

/// Full description of one reproducible run.
struct RunConfig {
  std::string output_dir = "run-out";
  std::uint64_t master_seed = 6;  // default demo realization; see README on seed choice
  std::uint64_t extracted_bits_target = std::uint64_t{100} << 20;  // 100 * 2^20
  std::size_t raw_check_sequences = 16;  // suite sequences run on the packed raw stream
  std::uint64_t key_limit = 1024;        // keys carved from the extracted stream
  std::uint64_t trace_artifact_samples = 1 << 22;  // raw-trace prefix persisted to disk

  SourceConfig source;
  std::optional<double> clearance_target_db;  // derive quantum sigma when set

  std::uint32_t extractor_n = 32768;
  double min_entropy_per_sample = 0.25;
  double epsilon_log2 = 50.0;
  std::string toeplitz_seed_file;  // empty: draw from OS entropy and store

  SuiteParams suite;
  FrameSpec schedule;
  GridSpec grid;
  ChannelAllocation allocation;

  /// Duty-cycle sizing load: AES rekey every refresh_bytes on a link_rate link.
  double load_link_rate_bps = 10e9;
  double load_refresh_bytes = 64e9;

  static RunConfig from_doc(const ConfigDoc& doc) {
    RunConfig c;
    c.output_dir = doc.get_string("run", "output_dir", c.output_dir);
    c.master_seed = doc.get_uint("run", "master_seed", c.master_seed);
    c.extracted_bits_target = doc.get_uint("run", "extracted_bits_target", c.extracted_bits_target);
    c.raw_check_sequences =
        static_cast<std::size_t>(doc.get_uint("run", "raw_check_sequences", c.raw_check_sequences));
    c.key_limit = doc.get_uint("run", "key_limit", c.key_limit);
    c.trace_artifact_samples =
        doc.get_uint("run", "trace_artifact_samples", c.trace_artifact_samples);

    c.source.sample_rate_hz = doc.get_double("source", "sample_rate", c.source.sample_rate_hz);
    c.source.adc_bits = static_cast<int>(doc.get_int("source", "adc_bits", c.source.adc_bits));
    c.source.adc_full_scale_v =
        doc.get_double("source", "adc_full_scale", c.source.adc_full_scale_v);
    c.source.classical_sigma_v =
        doc.get_double("source", "classical_sigma", c.source.classical_sigma_v);
    c.source.detector_cutoff_hz =
        doc.get_double("source", "detector_cutoff", c.source.detector_cutoff_hz);
    c.source.dc_offset_v = doc.get_double("source", "dc_offset", c.source.dc_offset_v);
    if (doc.has("source", "emi_tones")) {
      c.source.emi_tones = parse_tones(doc.get_string("source", "emi_tones", ""));
    }
    if (doc.has("source", "clearance_db")) {
      c.clearance_target_db = doc.get_double("source", "clearance_db", 0.0);
      c.source = SourceConfig::from_clearance(*c.clearance_target_db, c.source);
    } else if (doc.has("source", "quantum_sigma")) {
      c.source.quantum_sigma_v = doc.get_double("source", "quantum_sigma", c.source.quantum_sigma_v);
    }

    c.extractor_n = static_cast<std::uint32_t>(doc.get_uint("extractor", "n", c.extractor_n));
    c.min_entropy_per_sample =
        doc.get_double("extractor", "min_entropy_per_sample", c.min_entropy_per_sample);
    c.epsilon_log2 = doc.get_double("extractor", "epsilon_log2", c.epsilon_log2);
    c.toeplitz_seed_file = doc.get_string("extractor", "seed_file", c.toeplitz_seed_file);

    c.suite.sequence_length = static_cast<std::size_t>(
        doc.get_uint("suite", "sequence_length", c.suite.sequence_length));
    c.suite.test_params.block_frequency_m = static_cast<std::size_t>(
        doc.get_uint("suite", "block_frequency_m", c.suite.test_params.block_frequency_m));
    c.suite.test_params.serial_m =
        static_cast<int>(doc.get_int("suite", "serial_m", c.suite.test_params.serial_m));
    c.suite.test_params.apen_m =
        static_cast<int>(doc.get_int("suite", "apen_m", c.suite.test_params.apen_m));
    c.suite.threads = static_cast<int>(doc.get_int("suite", "threads", c.suite.threads));

    c.schedule.frame_period_s = doc.get_double("schedule", "frame_period", c.schedule.frame_period_s);
    c.schedule.qrng_slot_s = doc.get_double("schedule", "qrng_slot", c.schedule.qrng_slot_s);
    c.schedule.settle_s = doc.get_double("schedule", "settle", c.schedule.settle_s);
    c.schedule.lanes_total =
        static_cast<int>(doc.get_int("schedule", "lanes_total", c.schedule.lanes_total));
    c.schedule.lanes_eroded =
        static_cast<int>(doc.get_int("schedule", "lanes_eroded", c.schedule.lanes_eroded));
    c.schedule.lane_rate_bps = doc.get_double("schedule", "lane_rate", c.schedule.lane_rate_bps);

    c.grid.nu_start = doc.get_int("plan", "nu_start", c.grid.nu_start);
    c.grid.delta_nu = doc.get_int("plan", "delta_nu", c.grid.delta_nu);
    c.grid.fsr = doc.get_int("plan", "fsr", 16 * c.grid.delta_nu);
    c.grid.ports = static_cast<int>(doc.get_int("plan", "ports", c.grid.ports));
    if (doc.has("plan", "upstream")) {
      c.allocation.upstream_indices = parse_index_list(doc.get_string("plan", "upstream", ""));
    }
    if (doc.has("plan", "downstream")) {
      c.allocation.downstream_indices = parse_index_list(doc.get_string("plan", "downstream", ""));
    }
    c.allocation.qrng_target_index = static_cast<int>(
        doc.get_int("plan", "qrng_target", c.allocation.qrng_target_index));
    if (doc.has("plan", "foldback_pair")) {
      const auto pair = parse_index_list(doc.get_string("plan", "foldback_pair", ""));
      if (pair.size() != 2) throw std::runtime_error("config: foldback_pair needs two indices");
      c.allocation.foldback_pair = {pair[0], pair[1]};
    }
    c.allocation.excess_loss_db =
        doc.get_double("plan", "excess_loss_db", c.allocation.excess_loss_db);
    c.allocation.reference_split_loss_db =
        doc.get_double("plan", "reference_split_loss_db", c.allocation.reference_split_loss_db);

    c.load_link_rate_bps = doc.get_double("load", "link_rate", c.load_link_rate_bps);
    c.load_refresh_bytes = doc.get_double("load", "refresh_bytes", c.load_refresh_bytes);
    return c;
  }

  /// Canonical document form of this configuration (what the manifest hashes).
  std::string to_document() const {
    std::ostringstream os;
    os.precision(17);
    os << "[run]\n"
       << "output_dir = " << output_dir << "\n"
       << "master_seed = " << master_seed << "\n"
       << "extracted_bits_target = " << extracted_bits_target << "\n"
       << "raw_check_sequences = " << raw_check_sequences << "\n"
       << "key_limit = " << key_limit << "\n"
       << "trace_artifact_samples = " << trace_artifact_samples << "\n\n";
    os << "[source]\n"
       << "sample_rate = " << source.sample_rate_hz << "\n"
       << "adc_bits = " << source.adc_bits << "\n"
       << "adc_full_scale = " << source.adc_full_scale_v << "\n"
       << "classical_sigma = " << source.classical_sigma_v << "\n"
       << "quantum_sigma = " << source.quantum_sigma_v << "\n"
       << "detector_cutoff = " << source.detector_cutoff_hz << "\n"
       << "dc_offset = " << source.dc_offset_v << "\n"
       << "emi_tones = " << format_tones(source.emi_tones) << "\n\n";
    os << "[extractor]\n"
       << "n = " << extractor_n << "\n"
       << "min_entropy_per_sample = " << min_entropy_per_sample << "\n"
       << "epsilon_log2 = " << epsilon_log2 << "\n";
    if (!toeplitz_seed_file.empty()) os << "seed_file = " << toeplitz_seed_file << "\n";
    os << "\n[suite]\n"
       << "sequence_length = " << suite.sequence_length << "\n"
       << "block_frequency_m = " << suite.test_params.block_frequency_m << "\n"
       << "serial_m = " << suite.test_params.serial_m << "\n"
       << "apen_m = " << suite.test_params.apen_m << "\n"
       << "threads = " << suite.threads << "\n\n";
    os << "[schedule]\n"
       << "frame_period = " << schedule.frame_period_s << "\n"
       << "qrng_slot = " << schedule.qrng_slot_s << "\n"
       << "settle = " << schedule.settle_s << "\n"
       << "lanes_total = " << schedule.lanes_total << "\n"
       << "lanes_eroded = " << schedule.lanes_eroded << "\n"
       << "lane_rate = " << schedule.lane_rate_bps << "\n\n";
    os << "[plan]\n"
       << "nu_start = " << grid.nu_start << "\n"
       << "delta_nu = " << grid.delta_nu << "\n"
       << "fsr = " << grid.fsr << "\n"
       << "ports = " << grid.ports << "\n"
       << "upstream = " << format_indices(allocation.upstream_indices) << "\n"
       << "downstream = " << format_indices(allocation.downstream_indices) << "\n"
       << "qrng_target = " << allocation.qrng_target_index << "\n"
       << "foldback_pair = " << allocation.foldback_pair.first << ","
       << allocation.foldback_pair.second << "\n"
       << "excess_loss_db = " << allocation.excess_loss_db << "\n"
       << "reference_split_loss_db = " << allocation.reference_split_loss_db << "\n\n";
    os << "[load]\n"
       << "link_rate = " << load_link_rate_bps << "\n"
       << "refresh_bytes = " << load_refresh_bytes << "\n";
    return os.str();
  }

 private:
  /// "freq:amp:phase, freq:amp:phase, ..." ("none" clears the list)
  static std::vector<EmiTone> parse_tones(const std::string& s) {
    std::vector<EmiTone> tones;
    if (s == "none" || s.empty()) return tones;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
      EmiTone t;
      if (std::sscanf(item.c_str(), " %lf : %lf : %lf", &t.freq_hz, &t.amplitude_v,
                      &t.phase_rad) < 2) {
        throw std::runtime_error("config: bad EMI tone spec: " + item);
      }
      tones.push_back(t);
    }
    return tones;
  }

  static std::string format_tones(const std::vector<EmiTone>& tones) {
    if (tones.empty()) return "none";
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < tones.size(); ++i) {
      if (i) os << ", ";
      os << tones[i].freq_hz << ":" << tones[i].amplitude_v << ":" << tones[i].phase_rad;
    }
    return os.str();
  }

  static std::vector<int> parse_index_list(const std::string& s) {
    std::vector<int> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(std::stoi(item));
    return out;
  }

  static std::string format_indices(const std::vector<int>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) os << ",";
      os << v[i];
    }
    return os.str();
  }
};

}  // namespace ponrng
