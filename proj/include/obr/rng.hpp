// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>

namespace obr {

// Counter-based stream generator (Philox2x64, 10 rounds). A stream is fully
// determined by (seed, stream_id), so worker threads and repeated runs get
// identical draws without any shared state: give each independent consumer
// its own stream_id and never share a live stream between threads.
//
// Copying an RngStream copies its position; the copy replays the same tail.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_(stream_id) {}

  std::uint64_t next_u64();

  // Uniform on the open interval (0,1): ((x >> 11) + 0.5) * 2^-53.
  double next_uniform();

  // Standard normal via the quantile transform of next_uniform(); exactly
  // one u64 of stream state per variate.
  double next_normal();

  void fill_uniform(std::span<double> out);
  void fill_normal(std::span<double> out);  // batched through the kernel layer

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_, stream_;
  std::uint64_t counter_ = 0;
  std::uint64_t buf_[2] = {0, 0};
  int avail_ = 0;
};

// Stream-id layout used across the project so that no two purposes collide:
// high 16 bits tag the consumer, low 48 bits index within it.
namespace streams {
constexpr std::uint64_t tag(std::uint64_t purpose, std::uint64_t index = 0) {
  return (purpose << 48) | (index & 0xFFFFFFFFFFFFull);
}
constexpr std::uint64_t kNoiseCov = 1;    // random covariance draws
constexpr std::uint64_t kPerturb = 2;     // covariance perturbations
constexpr std::uint64_t kTables = 3;      // QMC shifts for table builds
constexpr std::uint64_t kTrials = 4;      // Monte Carlo trials (index = trial)
constexpr std::uint64_t kPrior = 5;       // averaged-Pfa prior draws
constexpr std::uint64_t kAnalysis = 6;    // orthant evaluations in analysis
constexpr std::uint64_t kScenario = 7;    // miscellaneous scenario draws
}  // namespace streams

}  // namespace obr
