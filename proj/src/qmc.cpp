// SPDX-License-Identifier: Apache-2.0
#include "obr/qmc.hpp"

#include <bit>

#include "obr/common.hpp"

namespace obr {

namespace {

// Joe-Kuo D6 initialization: primitive polynomial degree, encoded inner
// coefficients, and the free direction integers, per dimension after the
// first (dimension 1 is the van der Corput sequence).
struct SobolInit {
  int degree;
  unsigned poly;  // bits of c_{s-1} .. c_1
  unsigned m[7];
};

constexpr SobolInit kInit[] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
    {7, 7, {1, 1, 3, 13, 7, 35, 63}},
    {7, 8, {1, 3, 5, 9, 1, 25, 53}},
    {7, 14, {1, 3, 1, 13, 9, 35, 107}},
};

constexpr int kBits = 64;

}  // namespace

SobolSequence::SobolSequence(std::size_t dim, RngStream shift_rng) : dim_(dim) {
  if (dim == 0 || dim > kMaxDim)
    throw InvalidArgument("SobolSequence: dimension must be in 1..24");
  v_.assign(dim * kBits, 0);
  shift_.resize(dim);

  // Dimension 0: van der Corput, v_k = 2^{63-k}.
  for (int k = 0; k < kBits; ++k) v_[k] = 1ull << (63 - k);

  for (std::size_t d = 1; d < dim; ++d) {
    const SobolInit& ini = kInit[d - 1];
    const int s = ini.degree;
    std::uint64_t* v = v_.data() + d * kBits;
    for (int k = 0; k < s; ++k) v[k] = static_cast<std::uint64_t>(ini.m[k]) << (63 - k);
    for (int k = s; k < kBits; ++k) {
      std::uint64_t x = v[k - s] ^ (v[k - s] >> s);
      for (int j = 1; j < s; ++j)
        if ((ini.poly >> (s - 1 - j)) & 1u) x ^= v[k - j];
      v[k] = x;
    }
  }
  for (std::size_t d = 0; d < dim; ++d) shift_[d] = shift_rng.next_u64();
}

void SobolSequence::generate(std::uint64_t index, std::size_t count,
                             double* out) const {
  // State at `index` via the Gray-code formula, then advance incrementally.
  std::vector<std::uint64_t> x(dim_, 0);
  const std::uint64_t gray = index ^ (index >> 1);
  for (std::size_t d = 0; d < dim_; ++d) {
    const std::uint64_t* v = v_.data() + d * kBits;
    std::uint64_t acc = 0;
    for (int k = 0; k < kBits; ++k)
      if ((gray >> k) & 1ull) acc ^= v[k];
    x[d] = acc;
  }
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t d = 0; d < dim_; ++d)
      out[i * dim_ + d] =
          static_cast<double>((x[d] ^ shift_[d]) >> 11) * 0x1.0p-53;
    // Advance to the next Gray-code point: flip along direction ctz(index+1).
    const std::uint64_t n = index + i + 1;
    const int c = std::countr_zero(n);
    for (std::size_t d = 0; d < dim_; ++d) x[d] ^= v_[d * kBits + c];
  }
}

std::vector<double> qmc_points(std::size_t dim, std::size_t n, RngStream shift_rng) {
  SobolSequence seq(dim, shift_rng);
  std::vector<double> pts(dim * n);
  seq.generate(0, n, pts.data());
  return pts;
}

}  // namespace obr
