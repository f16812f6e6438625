// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "obr/rng.hpp"

namespace obr {

// Sobol low-discrepancy sequence (Joe-Kuo D6 direction numbers) with a
// random 64-bit digital shift per instance. Supports random access by index
// so batches can be generated without retaining point state.
class SobolSequence {
 public:
  static constexpr std::size_t kMaxDim = 24;

  // Draws the digital-shift words from `shift_rng` (consumed by value:
  // the same stream state always produces the same randomization).
  SobolSequence(std::size_t dim, RngStream shift_rng);

  std::size_t dim() const { return dim_; }

  // Writes points index .. index+count-1 as a row-major count x dim block
  // of doubles in [0,1).
  void generate(std::uint64_t index, std::size_t count, double* out) const;

 private:
  std::size_t dim_;
  std::vector<std::uint64_t> v_;      // direction numbers, dim x 64
  std::vector<std::uint64_t> shift_;  // digital shift per dimension
};

// One-call convenience used by the public point-set contract: n points of
// the given dimension, row-major.
std::vector<double> qmc_points(std::size_t dim, std::size_t n, RngStream shift_rng);

}  // namespace obr
