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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ponrng/ponrng.hpp"

namespace fs = std::filesystem;
using namespace ponrng;

namespace {

RunConfig load_config(const std::string& config_path) {
  if (config_path.empty()) return RunConfig{};
  return RunConfig::from_doc(ConfigDoc::load(config_path));
}

int cmd_simulate(const std::string& config_path, const std::string& out, std::uint64_t samples,
                 bool dark, std::optional<double> clearance, std::optional<std::uint64_t> seed) {
  RunConfig cfg = load_config(config_path);
  SourceConfig source = cfg.source;
  if (clearance) source = SourceConfig::from_clearance(*clearance, source);
  if (seed) source.prng_seed = *seed;
  const RawTrace trace = dark ? simulate_dark(source, samples) : simulate_lit(source, samples);
  write_trace(trace, out, out + ".meta");
  std::cout << "wrote " << samples << " samples to " << out << " (origin "
            << to_string(trace.meta.origin) << ", clearance target "
            << source.clearance_db() << " dB)\n";
  return 0;
}

int cmd_extract(const std::string& config_path, const std::string& trace_path,
                const std::string& out, const std::string& seed_in, const std::string& seed_out) {
  const RunConfig cfg = load_config(config_path);
  const RawTrace trace = ingest_trace(trace_path, trace_path + ".meta");
  const ExtractorParams params =
      ExtractorParams::derive(cfg.extractor_n, static_cast<std::uint32_t>(trace.meta.adc_bits),
                              cfg.min_entropy_per_sample, cfg.epsilon_log2);
  ToeplitzSeed seed;
  if (!seed_in.empty()) {
    seed.bits = read_bits_file(seed_in);
    seed.provenance = "file:" + seed_in;
  } else {
    seed = ToeplitzSeed::from_os_entropy(params);
  }
  seed.validate(params);
  const BitVector input = pack_samples(trace);
  const StreamResult r = extract_stream(seed, input, params);
  write_bits_file(r.bits, out,
                  {{"n", std::to_string(params.n)},
                   {"m", std::to_string(params.m)},
                   {"leftover_input_bits", std::to_string(r.leftover_bits)}});
  if (!seed_out.empty()) write_bits_file(seed.bits, seed_out, {{"provenance", seed.provenance}});
  std::cout << "extracted " << r.bits.size() << " bits from " << input.size() << " raw bits ("
            << r.bits.size() / params.m << " blocks, " << r.leftover_bits
            << " leftover bits discarded)\n";
  return 0;
}

int cmd_test(const std::string& config_path, const std::string& bits_path, bool reference_gate) {
  const RunConfig cfg = load_config(config_path);
  const BitVector bits = read_bits_file(bits_path);
  const TestReport report = run_suite(bits, cfg.suite);
  std::cout << report.to_table() << "\n" << report.to_text();
  const bool pass = reference_gate ? report.verdict_reference : report.verdict;
  return pass ? 0 : 1;
}

int cmd_plan_validate(const std::string& config_path) {
  const RunConfig cfg = load_config(config_path);
  const ValidationReport report = validate_plan(cfg.grid, cfg.allocation);
  std::cout << report.to_text();
  for (int tx : cfg.allocation.upstream_indices) {
    const FoldbackPlan plan = qrng_foldback(cfg.grid, cfg.allocation, tx);
    std::cout << "foldback tx=" << tx << ": ";
    if (plan.valid()) {
      std::cout << "ok; retuned_hz = " << plan.retuned_hz << "; pair = "
                << plan.receiver_pair.first << "," << plan.receiver_pair.second
                << "; per_arm_loss_db = " << plan.per_arm_loss_db << "\n";
    } else {
      std::cout << "invalid-foldback (" << plan.reason << ")\n";
    }
  }
  return report.ok() ? 0 : 1;
}

int cmd_plan_route(const std::string& config_path, std::int64_t freq) {
  const RunConfig cfg = load_config(config_path);
  const RouteResult r =
      awg_route(cfg.grid, freq, cfg.allocation.reference_split_loss_db,
                cfg.allocation.excess_loss_db);
  switch (r.kind) {
    case RouteKind::kSinglePort:
      std::cout << "result = single_port\nport = " << r.port_a
                << "\ninsertion_loss_db = " << r.insertion_loss_db
                << "\noffset_delta_nu = " << r.offset_delta_nu << "\n";
      break;
    case RouteKind::kCrosspoint:
      std::cout << "result = crosspoint\nports = " << r.port_a << "," << r.port_b
                << "\nper_arm_loss_db = " << r.per_arm_loss_db
                << "\noffset_delta_nu = " << r.offset_delta_nu << "\n";
      break;
    case RouteKind::kStopband:
      std::cout << "result = stopband\n";
      break;
  }
  return 0;
}

int cmd_schedule(const std::string& config_path, const std::string& csv_path) {
  const RunConfig cfg = load_config(config_path);
  const FrameTimeline tl = build_frame(cfg.schedule);
  std::cout.precision(12);
  std::cout << "acquisition_s = " << tl.acquisition_s() << "\n"
            << "duty_cycle = " << cfg.schedule.duty_cycle() << "\n"
            << "effective_throughput_bps = " << effective_throughput_bps(cfg.schedule) << "\n";
  const ExtractorParams params =
      ExtractorParams::derive(cfg.extractor_n, static_cast<std::uint32_t>(cfg.source.adc_bits),
                              cfg.min_entropy_per_sample, cfg.epsilon_log2);
  std::cout << "yield_bits_per_frame = "
            << qrng_yield_per_frame_bits(cfg.schedule, cfg.source.sample_rate_hz, params) << "\n";
  std::cout << "timeline:\n" << tl.to_csv();
  if (!csv_path.empty()) {
    std::ofstream f(csv_path);
    f << tl.to_csv();
    std::cout << "timeline csv written to " << csv_path << "\n";
  }
  return 0;
}

int cmd_keys(const std::string& bits_path, const std::string& out, std::uint64_t limit) {
  const BitVector bits = read_bits_file(bits_path);
  const CarveResult r = carve_keys(bits, limit);
  if (!out.empty()) {
    std::ofstream f(out, std::ios::binary);
    for (const auto& k : r.keys) {
      f.write(reinterpret_cast<const char*>(k.key.data()),
              static_cast<std::streamsize>(k.key.size()));
    }
  }
  std::cout << "keys = " << r.keys.size() << "\ncarvable_keys = " << r.carvable_keys
            << "\nremainder_bits = " << r.remainder_bits << "\n";
  return 0;
}

int cmd_run(const std::string& config_path) {
  const RunConfig cfg = load_config(config_path);
  const RunArtifacts art = run_pipeline(cfg);
  std::cout << "run directory: " << art.dir.string() << "\n"
            << "samples = " << art.samples_simulated << ", blocks = " << art.blocks
            << ", extracted_bits = " << art.extracted.size() << ", keys = " << art.keys_carved
            << "\n\n"
            << art.extracted_report.to_table() << "\n"
            << art.accounting.to_text();
  if (art.raw_report) {
    std::cout << "raw stream check: " << (art.raw_report->verdict ? "pass" : "fail (expected)")
              << "\n";
  }
  return art.verdict() ? 0 : 1;
}

int cmd_report(const std::string& run_dir) {
  const auto problems = verify_manifest(run_dir);
  std::ifstream manifest(fs::path(run_dir) / "manifest.txt");
  std::cout << manifest.rdbuf() << "\n";
  if (problems.empty()) {
    std::cout << "manifest verification: ok\n";
    return 0;
  }
  std::cout << "manifest verification FAILED:\n";
  for (const auto& p : problems) std::cout << "  " << p << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vacuum-noise RNG overlay toolkit: source simulation, Toeplitz extraction, "
               "statistical validation, wavelength-plan and frame accounting"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Run configuration document (key = value sections)")
      ->check(CLI::ExistingFile);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a detector trace file");
  std::string sim_out = "trace.bin";
  std::uint64_t sim_samples = 1 << 22;
  bool sim_dark = false;
  double sim_clearance = 0.0;
  std::uint64_t sim_seed = 0;
  bool sim_have_clearance = false, sim_have_seed = false;
  sim->add_option("-o,--out", sim_out, "Output trace path (sidecar at <out>.meta)");
  sim->add_option("-n,--samples", sim_samples, "Sample count");
  sim->add_flag("--dark", sim_dark, "Dark receiver (electronic noise only)");
  sim->add_option("--clearance-db", sim_clearance, "Derive quantum sigma from this clearance")
      ->each([&](const std::string&) { sim_have_clearance = true; });
  sim->add_option("--seed", sim_seed, "Simulation PRNG seed")
      ->each([&](const std::string&) { sim_have_seed = true; });

  // extract
  auto* ext = app.add_subcommand("extract", "Toeplitz-hash a trace into uniform bits");
  std::string ext_trace, ext_out = "extracted.bits", ext_seed_in, ext_seed_out;
  ext->add_option("-i,--trace", ext_trace, "Input trace file")->required();
  ext->add_option("-o,--out", ext_out, "Output bits file");
  ext->add_option("--seed-file", ext_seed_in, "Toeplitz seed bits file (default: OS entropy)");
  ext->add_option("--seed-out", ext_seed_out, "Store the seed that was used");

  // test
  auto* tst = app.add_subcommand("test", "Run the statistical suite on a bits file");
  std::string tst_bits;
  bool tst_reference = false;
  tst->add_option("-i,--bits", tst_bits, "Input bits file")->required();
  tst->add_flag("--reference-gate", tst_reference,
                "Gate the exit code on the sample-size aware criterion instead of 0.98/0.01");

  // plan
  auto* plan = app.add_subcommand("plan", "Wavelength plan utilities");
  plan->require_subcommand(1);
  auto* plan_validate = plan->add_subcommand("validate", "Validate the configured plan");
  auto* plan_route = plan->add_subcommand("route", "Route one frequency through the cyclic AWG");
  std::int64_t route_freq = 0;
  plan_route->add_option("--freq", route_freq, "Frequency in Hz")->required();

  // schedule
  auto* sched = app.add_subcommand("schedule", "Frame timeline and throughput accounting");
  std::string sched_csv;
  sched->add_option("--csv", sched_csv, "Also write the timeline as CSV");

  // keys
  auto* keys = app.add_subcommand("keys", "Carve 256-bit keys from a bits file");
  std::string keys_bits, keys_out;
  std::uint64_t keys_limit = 1ULL << 40;
  keys->add_option("-i,--bits", keys_bits, "Input bits file")->required();
  keys->add_option("-o,--out", keys_out, "Output key blob (32 bytes per key)");
  keys->add_option("--limit", keys_limit, "Maximum number of keys");

  // run / report
  auto* run = app.add_subcommand("run", "End-to-end pipeline: simulate, extract, test, account");
  auto* rep = app.add_subcommand("report", "Verify a run directory's manifest and reprint it");
  std::string rep_dir;
  rep->add_option("-d,--run-dir", rep_dir, "Run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      return cmd_simulate(config_path, sim_out, sim_samples, sim_dark,
                          sim_have_clearance ? std::optional<double>(sim_clearance) : std::nullopt,
                          sim_have_seed ? std::optional<std::uint64_t>(sim_seed) : std::nullopt);
    }
    if (ext->parsed()) return cmd_extract(config_path, ext_trace, ext_out, ext_seed_in, ext_seed_out);
    if (tst->parsed()) return cmd_test(config_path, tst_bits, tst_reference);
    if (plan->parsed()) {
      if (plan_validate->parsed()) return cmd_plan_validate(config_path);
      if (plan_route->parsed()) return cmd_plan_route(config_path, route_freq);
    }
    if (sched->parsed()) return cmd_schedule(config_path, sched_csv);
    if (keys->parsed()) return cmd_keys(keys_bits, keys_out, keys_limit);
    if (run->parsed()) return cmd_run(config_path);
    if (rep->parsed()) return cmd_report(rep_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
