/*
 * Copyright 2026 The carsec Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// Timing harness for primitives and protocol procedures. Every cell runs
// warmup + iterations times; the warmup runs are dropped and nothing else
// is trimmed.

#ifndef CARSEC_BENCH_BENCH_H_
#define CARSEC_BENCH_BENCH_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"

namespace carsec::bench {

inline constexpr int kMinIterations = 30;
inline constexpr int kWarmup = 5;
inline constexpr char kCsvHeader[] =
    "device,family,operation,mean_ms,std_ms,iterations";

struct Row {
  std::string device;
  std::string family;
  std::string operation;
  double mean_ms = 0;
  double std_ms = 0;
  int iterations = 0;
};

struct Options {
  std::string device = "host";
  int iterations = kMinIterations;
  uint64_t seed = 1;
  // IBS modulus sizes for the primitives suite; the procedures suite uses
  // the larger.
  int small_bits = 1024;
  int large_bits = 2048;
  // Member count of the benchmarked signature groups.
  uint32_t group_size = 10;
};

// Mean and sample standard deviation of `samples` in milliseconds.
Row Summarize(std::string family, std::string operation,
              const std::vector<double>& samples, const Options& options);

// Times `fn` kWarmup + options.iterations times and keeps the last
// options.iterations samples.
std::vector<double> Measure(const std::function<void()>& fn,
                            const Options& options);

// One row per operation: group signatures, Shamir and GQ identity-based
// signatures at both modulus sizes, DH key agreement on two curves, and
// KEM encapsulation.
absl::StatusOr<std::vector<Row>> RunPrimitives(const Options& options);
// Delegate, Execute and Execute-OTF over the simulator with a loopback
// network, per IBS scheme.
absl::StatusOr<std::vector<Row>> RunProcedures(const Options& options);

// Comment line naming the trimming rule, the fixed header, then rows.
std::string ToCsv(const std::vector<Row>& rows, const Options& options);

}  // namespace carsec::bench

#endif  // CARSEC_BENCH_BENCH_H_
