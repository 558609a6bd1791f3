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
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "ponrng/bitvec.hpp"
#include "ponrng/fft.hpp"

namespace ponrng {

namespace detail {

/// Upper regularized incomplete gamma Q(a, x).
inline double igamc(double a, double x) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(a, x);
}

/// Standard normal CDF.
inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace detail

struct SequenceTooShortError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Frequency (monobit): P = erfc(|S_n| / sqrt(2 n)).
inline double nist_monobit(const BitVector& bits) {
  const std::size_t n = bits.size();
  if (n < 1) throw SequenceTooShortError("monobit: empty sequence");
  const auto ones = static_cast<std::int64_t>(bits.count_ones());
  const std::int64_t s = 2 * ones - static_cast<std::int64_t>(n);
  return std::erfc(std::abs(static_cast<double>(s)) /
                   std::sqrt(2.0 * static_cast<double>(n)));
}

/// Frequency within a block: chi^2 of per-block one-proportions.
inline double nist_block_frequency(const BitVector& bits, std::size_t M) {
  const std::size_t n = bits.size();
  if (M < 2) throw std::invalid_argument("block_frequency: M must be >= 2");
  if (n < M) throw SequenceTooShortError("block_frequency: fewer bits than one block");
  const std::size_t N = n / M;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < M; ++j) ones += bits.get(i * M + j);
    const double pi = static_cast<double>(ones) / static_cast<double>(M);
    chi2 += (pi - 0.5) * (pi - 0.5);
  }
  chi2 *= 4.0 * static_cast<double>(M);
  return detail::igamc(static_cast<double>(N) / 2.0, chi2 / 2.0);
}

/// Runs: total number of runs against its expectation; requires the
/// monobit pre-condition |pi - 1/2| < 2/sqrt(n), else P = 0.
inline double nist_runs(const BitVector& bits) {
  const std::size_t n = bits.size();
  if (n < 2) throw SequenceTooShortError("runs: need at least 2 bits");
  const double pi = static_cast<double>(bits.count_ones()) / static_cast<double>(n);
  if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(static_cast<double>(n))) return 0.0;
  std::size_t v = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) v += bits.get(k) != bits.get(k + 1);
  const double num = std::abs(static_cast<double>(v) - 2.0 * n * pi * (1.0 - pi));
  const double den = 2.0 * std::sqrt(2.0 * static_cast<double>(n)) * pi * (1.0 - pi);
  return std::erfc(num / den);
}

/// Longest run of ones in M-bit blocks.  M is picked from the sequence
/// length per the reference parameterization (8 / 128 / 10^4).
inline double nist_longest_run(const BitVector& bits) {
  const std::size_t n = bits.size();
  std::size_t M;
  int K;
  const double* pi;
  const int* edges;
  static constexpr int kEdges8[] = {1, 2, 3};
  static constexpr double kPi8[] = {0.2148, 0.3672, 0.2305, 0.1875};
  static constexpr int kEdges128[] = {4, 5, 6, 7, 8};
  static constexpr double kPi128[] = {0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124};
  static constexpr int kEdges1e4[] = {10, 11, 12, 13, 14, 15};
  static constexpr double kPi1e4[] = {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727};
  if (n >= 750000) {
    M = 10000, K = 6, pi = kPi1e4, edges = kEdges1e4;
  } else if (n >= 6272) {
    M = 128, K = 5, pi = kPi128, edges = kEdges128;
  } else if (n >= 128) {
    M = 8, K = 3, pi = kPi8, edges = kEdges8;
  } else {
    throw SequenceTooShortError("longest_run: need at least 128 bits");
  }
  const std::size_t N = n / M;
  std::vector<std::size_t> v(static_cast<std::size_t>(K) + 1, 0);
  for (std::size_t i = 0; i < N; ++i) {
    int longest = 0, cur = 0;
    for (std::size_t j = 0; j < M; ++j) {
      cur = bits.get(i * M + j) ? cur + 1 : 0;
      longest = std::max(longest, cur);
    }
    int cat = K;
    for (int c = 0; c < K; ++c) {
      if (longest <= edges[c]) {
        cat = c;
        break;
      }
    }
    ++v[static_cast<std::size_t>(cat)];
  }
  double chi2 = 0.0;
  for (int c = 0; c <= K; ++c) {
    const double expect = static_cast<double>(N) * pi[c];
    const double d = static_cast<double>(v[static_cast<std::size_t>(c)]) - expect;
    chi2 += d * d / expect;
  }
  return detail::igamc(static_cast<double>(K) / 2.0, chi2 / 2.0);
}

/// Cumulative sums, forward and reverse.  Returns {P_fwd, P_rev}.
inline std::array<double, 2> nist_cumulative_sums(const BitVector& bits) {
  const std::size_t n = bits.size();
  if (n < 2) throw SequenceTooShortError("cumulative_sums: need at least 2 bits");
  const double sq = std::sqrt(static_cast<double>(n));
  auto p_value = [&](std::int64_t z) {
    const double dn = static_cast<double>(n);
    const double dz = static_cast<double>(z);
    double t1 = 0.0;
    for (auto k = static_cast<std::int64_t>(std::floor((-dn / dz + 1.0) / 4.0));
         k <= static_cast<std::int64_t>(std::floor((dn / dz - 1.0) / 4.0)); ++k) {
      t1 += detail::norm_cdf((4.0 * k + 1.0) * dz / sq) -
            detail::norm_cdf((4.0 * k - 1.0) * dz / sq);
    }
    double t2 = 0.0;
    for (auto k = static_cast<std::int64_t>(std::floor((-dn / dz - 3.0) / 4.0));
         k <= static_cast<std::int64_t>(std::floor((dn / dz - 1.0) / 4.0)); ++k) {
      t2 += detail::norm_cdf((4.0 * k + 3.0) * dz / sq) -
            detail::norm_cdf((4.0 * k + 1.0) * dz / sq);
    }
    return 1.0 - t1 + t2;
  };
  std::array<double, 2> out{};
  for (int mode = 0; mode < 2; ++mode) {
    std::int64_t s = 0, z = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = mode == 0 ? i : n - 1 - i;
      s += bits.get(idx) ? 1 : -1;
      z = std::max<std::int64_t>(z, s < 0 ? -s : s);
    }
    out[static_cast<std::size_t>(mode)] = z == 0 ? 0.0 : p_value(z);
  }
  return out;
}

/// Discrete Fourier transform (spectral): fraction of low peaks in the
/// first half of the modulus spectrum against the 95% threshold.
inline double nist_dft_spectral(const BitVector& bits) {
  const std::size_t n = bits.size();
  if (n < 10) throw SequenceTooShortError("dft_spectral: need at least 10 bits");
  std::vector<detail::Complex> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = detail::Complex(bits.get(i) ? 1.0 : -1.0, 0.0);
  std::vector<detail::Complex> s;
  if (detail::is_power_of_two(n)) {
    detail::fft_pow2(x.data(), n, false);
    s = std::move(x);
  } else {
    s = detail::dft_bluestein(x);
  }
  const double threshold = std::sqrt(static_cast<double>(n) * std::log(1.0 / 0.05));
  std::size_t n1 = 0;
  for (std::size_t k = 0; k < n / 2; ++k) {
    if (std::abs(s[k]) < threshold) ++n1;
  }
  const double n0 = 0.95 * static_cast<double>(n) / 2.0;
  const double d = (static_cast<double>(n1) - n0) /
                   std::sqrt(static_cast<double>(n) * 0.95 * 0.05 / 4.0);
  return std::erfc(std::abs(d) / std::sqrt(2.0));
}

namespace detail {

/// psi^2_m statistic over overlapping m-bit patterns of the circularly
/// extended sequence; psi^2_0 = psi^2_{-1} = 0.
inline double psi_squared(const BitVector& bits, int m) {
  if (m <= 0) return 0.0;
  const std::size_t n = bits.size();
  std::vector<std::uint32_t> counts(std::size_t{1} << m, 0);
  const std::uint32_t mask = (std::uint32_t{1} << m) - 1;
  std::uint32_t window = 0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(m) - 1; ++i) {
    window = (window << 1) | bits.get(i % n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    window = ((window << 1) | bits.get((i + static_cast<std::size_t>(m) - 1) % n)) & mask;
    ++counts[window];
  }
  double sum = 0.0;
  for (std::uint32_t c : counts) sum += static_cast<double>(c) * c;
  return sum * static_cast<double>(std::uint64_t{1} << m) / static_cast<double>(n) -
         static_cast<double>(n);
}

}  // namespace detail

/// Serial test: {P1, P2} from the first and second psi^2 differences.
inline std::array<double, 2> nist_serial(const BitVector& bits, int m) {
  if (m < 2 || m > 24) throw std::invalid_argument("serial: m must be in [2, 24]");
  if (bits.size() < static_cast<std::size_t>(m) + 1) {
    throw SequenceTooShortError("serial: sequence shorter than m+1");
  }
  const double p_m = detail::psi_squared(bits, m);
  const double p_m1 = detail::psi_squared(bits, m - 1);
  const double p_m2 = detail::psi_squared(bits, m - 2);
  const double d1 = p_m - p_m1;
  const double d2 = p_m - 2.0 * p_m1 + p_m2;
  return {detail::igamc(std::pow(2.0, m - 2), d1 / 2.0),
          detail::igamc(std::pow(2.0, m - 3), d2 / 2.0)};
}

/// Approximate entropy: chi^2 = 2n (ln 2 - (phi_m - phi_{m+1})).
inline double nist_approximate_entropy(const BitVector& bits, int m) {
  if (m < 1 || m > 20) throw std::invalid_argument("approximate_entropy: m must be in [1, 20]");
  const std::size_t n = bits.size();
  if (n < static_cast<std::size_t>(m) + 2) {
    throw SequenceTooShortError("approximate_entropy: sequence shorter than m+2");
  }
  auto phi = [&bits, n](int mm) {
    std::vector<std::uint32_t> counts(std::size_t{1} << mm, 0);
    const std::uint32_t mask = (std::uint32_t{1} << mm) - 1;
    std::uint32_t window = 0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(mm) - 1; ++i) {
      window = (window << 1) | bits.get(i % n);
    }
    for (std::size_t i = 0; i < n; ++i) {
      window = ((window << 1) | bits.get((i + static_cast<std::size_t>(mm) - 1) % n)) & mask;
      ++counts[window];
    }
    double acc = 0.0;
    for (std::uint32_t c : counts) {
      if (c != 0) {
        const double p = static_cast<double>(c) / static_cast<double>(n);
        acc += p * std::log(p);
      }
    }
    return acc;
  };
  const double apen = phi(m) - phi(m + 1);
  const double chi2 = 2.0 * static_cast<double>(n) * (std::log(2.0) - apen);
  return detail::igamc(std::pow(2.0, m - 1), chi2 / 2.0);
}

enum class NistTest {
  kMonobit,
  kBlockFrequency,
  kRuns,
  kLongestRun,
  kCumulativeSums,
  kDftSpectral,
  kSerial,
  kApproximateEntropy,
};

inline std::string to_string(NistTest t) {
  switch (t) {
    case NistTest::kMonobit: return "monobit";
    case NistTest::kBlockFrequency: return "block_frequency";
    case NistTest::kRuns: return "runs";
    case NistTest::kLongestRun: return "longest_run";
    case NistTest::kCumulativeSums: return "cumulative_sums";
    case NistTest::kDftSpectral: return "dft_spectral";
    case NistTest::kSerial: return "serial";
    case NistTest::kApproximateEntropy: return "approximate_entropy";
  }
  return "unknown";
}

inline const std::vector<NistTest>& all_nist_tests() {
  static const std::vector<NistTest> kAll = {
      NistTest::kMonobit,        NistTest::kBlockFrequency, NistTest::kRuns,
      NistTest::kLongestRun,     NistTest::kCumulativeSums, NistTest::kDftSpectral,
      NistTest::kSerial,         NistTest::kApproximateEntropy,
  };
  return kAll;
}

struct NistParams {
  std::size_t block_frequency_m = 16384;
  int serial_m = 16;
  int apen_m = 10;
};

/// Dispatch; some kinds yield two P-values (cumulative sums fwd/rev,
/// serial P1/P2), reported as separate statistics.
inline std::vector<double> nist_test(NistTest kind, const BitVector& bits,
                                     const NistParams& params = {}) {
  switch (kind) {
    case NistTest::kMonobit: return {nist_monobit(bits)};
    case NistTest::kBlockFrequency: return {nist_block_frequency(bits, params.block_frequency_m)};
    case NistTest::kRuns: return {nist_runs(bits)};
    case NistTest::kLongestRun: return {nist_longest_run(bits)};
    case NistTest::kCumulativeSums: {
      const auto p = nist_cumulative_sums(bits);
      return {p[0], p[1]};
    }
    case NistTest::kDftSpectral: return {nist_dft_spectral(bits)};
    case NistTest::kSerial: {
      const auto p = nist_serial(bits, params.serial_m);
      return {p[0], p[1]};
    }
    case NistTest::kApproximateEntropy:
      return {nist_approximate_entropy(bits, params.apen_m)};
  }
  throw std::logic_error("nist_test: unknown kind");
}

inline std::vector<std::string> nist_statistic_names(NistTest kind) {
  switch (kind) {
    case NistTest::kCumulativeSums: return {"cumulative_sums_fwd", "cumulative_sums_rev"};
    case NistTest::kSerial: return {"serial_p1", "serial_p2"};
    default: return {to_string(kind)};
  }
}

struct SuiteParams {
  std::size_t sequence_length = std::size_t{1} << 20;
  std::vector<NistTest> enabled = all_nist_tests();
  NistParams test_params;
  double alpha = 0.01;                 // per-sequence significance level
  double paper_min_proportion = 0.98;  // headline pass-rate criterion
  double paper_min_uniformity_p = 0.01;
  double uniformity_alpha = 1e-4;      // reference acceptance for the P-value histogram
  int threads = 0;                     // 0: hardware concurrency
};

struct TestRecord {
  std::string name;
  std::vector<double> p_values;  // one per sequence
  double proportion = 0.0;       // fraction of sequences with P >= alpha
  double proportion_threshold = 0.0;  // sample-size aware reference threshold
  double uniformity_p = 0.0;     // chi^2 over 10 histogram bins of the P-values
  bool pass_reference = false;   // proportion >= threshold and uniformity >= 1e-4
  bool pass_headline = false;    // proportion >= 0.98 and uniformity >= 0.01
};

struct TestReport {
  std::size_t sequences = 0;
  std::size_t sequence_length = 0;
  double alpha = 0.01;
  std::vector<TestRecord> records;
  bool verdict = false;            // headline: every statistic meets the 0.98 / 0.01 criterion
  bool verdict_reference = false;  // every statistic meets the sample-size aware criterion

  std::string to_text() const {
    std::ostringstream os;
    os << "sequences = " << sequences << "\n";
    os << "sequence_length = " << sequence_length << "\n";
    os << "alpha = " << alpha << "\n";
    for (const auto& r : records) {
      os << "test = " << r.name << "; proportion = " << std::setprecision(6) << r.proportion
         << "; proportion_threshold = " << r.proportion_threshold
         << "; uniformity_p = " << r.uniformity_p
         << "; pass_headline = " << (r.pass_headline ? 1 : 0)
         << "; pass_reference = " << (r.pass_reference ? 1 : 0) << "\n";
    }
    os << "verdict = " << (verdict ? "pass" : "fail") << "\n";
    os << "verdict_reference = " << (verdict_reference ? "pass" : "fail") << "\n";
    return os.str();
  }

  std::string to_table() const {
    std::ostringstream os;
    os << std::left << std::setw(24) << "statistic" << std::right << std::setw(12) << "proportion"
       << std::setw(12) << "threshold" << std::setw(14) << "uniformity P" << std::setw(8) << "pass"
       << "\n";
    for (const auto& r : records) {
      os << std::left << std::setw(24) << r.name << std::right << std::fixed
         << std::setprecision(4) << std::setw(12) << r.proportion << std::setw(12)
         << r.proportion_threshold << std::setw(14) << std::setprecision(6) << r.uniformity_p
         << std::setw(8) << (r.pass_headline ? "yes" : "NO") << "\n";
      os.unsetf(std::ios::fixed);
    }
    os << "verdict: " << (verdict ? "pass" : "fail") << "\n";
    return os.str();
  }
};

/// Splits the input into floor(len / sequence_length) sequences, runs every
/// enabled test on each, and aggregates pass proportions plus the chi^2
/// uniformity of each statistic's P-values (10 bins).
inline TestReport run_suite(const BitVector& bits, const SuiteParams& params = {}) {
  const std::size_t L = params.sequence_length;
  if (L == 0) throw std::invalid_argument("run_suite: sequence_length must be > 0");
  if (bits.size() < 2 * L) {
    throw SequenceTooShortError("run_suite: need at least two sequences of input");
  }
  const std::size_t s = bits.size() / L;
  if (s < 10) throw SequenceTooShortError("run_suite: need at least 10 sequences");

  std::vector<std::string> names;
  for (NistTest t : params.enabled) {
    for (const auto& n : nist_statistic_names(t)) names.push_back(n);
  }
  const std::size_t n_stats = names.size();

  // p[stat][seq]
  std::vector<std::vector<double>> p(n_stats, std::vector<double>(s, 0.0));
  const unsigned hw = std::thread::hardware_concurrency();
  const std::size_t n_threads =
      params.threads > 0 ? static_cast<std::size_t>(params.threads)
                         : std::max<std::size_t>(1, std::min<std::size_t>(hw ? hw : 1, s));

  auto worker = [&](std::size_t first, std::size_t last) {
    for (std::size_t i = first; i < last; ++i) {
      const BitVector seq = bits.slice(i * L, L);
      std::size_t stat = 0;
      for (NistTest t : params.enabled) {
        const std::vector<double> values = nist_test(t, seq, params.test_params);
        for (double v : values) p[stat++][i] = v;
      }
    }
  };
  if (n_threads <= 1) {
    worker(0, s);
  } else {
    std::vector<std::thread> pool;
    const std::size_t per = (s + n_threads - 1) / n_threads;
    for (std::size_t t = 0; t < n_threads; ++t) {
      const std::size_t first = t * per;
      const std::size_t last = std::min(s, first + per);
      if (first < last) pool.emplace_back(worker, first, last);
    }
    for (auto& th : pool) th.join();
  }

  TestReport report;
  report.sequences = s;
  report.sequence_length = L;
  report.alpha = params.alpha;
  const double p_hat = 1.0 - params.alpha;
  const double threshold =
      p_hat - 3.0 * std::sqrt(p_hat * params.alpha / static_cast<double>(s));
  report.verdict = true;
  report.verdict_reference = true;
  for (std::size_t stat = 0; stat < n_stats; ++stat) {
    TestRecord rec;
    rec.name = names[stat];
    rec.p_values = p[stat];
    std::size_t passed = 0;
    std::array<std::size_t, 10> hist{};
    for (double v : rec.p_values) {
      if (v >= params.alpha) ++passed;
      const auto bin = std::min<std::size_t>(9, static_cast<std::size_t>(v * 10.0));
      ++hist[bin];
    }
    rec.proportion = static_cast<double>(passed) / static_cast<double>(s);
    rec.proportion_threshold = threshold;
    const double expect = static_cast<double>(s) / 10.0;
    double chi2 = 0.0;
    for (std::size_t b = 0; b < 10; ++b) {
      const double d = static_cast<double>(hist[b]) - expect;
      chi2 += d * d / expect;
    }
    rec.uniformity_p = detail::igamc(4.5, chi2 / 2.0);
    rec.pass_reference =
        rec.proportion >= rec.proportion_threshold && rec.uniformity_p >= params.uniformity_alpha;
    rec.pass_headline = rec.proportion >= params.paper_min_proportion &&
                        rec.uniformity_p >= params.paper_min_uniformity_p;
    report.verdict = report.verdict && rec.pass_headline;
    report.verdict_reference = report.verdict_reference && rec.pass_reference;
    report.records.push_back(std::move(rec));
  }
  return report;
}

}  // namespace ponrng
