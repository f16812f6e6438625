// SPDX-License-Identifier: Apache-2.0
#include "obr/rng.hpp"

#include <array>

#include "obr/kernels.hpp"
#include "obr/normal.hpp"

namespace obr {

namespace {

constexpr std::uint64_t kPhiloxM = 0xD2B74407B1CE6E93ull;
constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ull;

inline void philox2x64_block(std::uint64_t ctr, std::uint64_t stream,
                             std::uint64_t key, std::uint64_t out[2]) {
  std::uint64_t c0 = ctr, c1 = stream, k = key;
  for (int round = 0; round < 10; ++round) {
    const unsigned __int128 prod = static_cast<unsigned __int128>(kPhiloxM) * c0;
    const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
    const std::uint64_t lo = static_cast<std::uint64_t>(prod);
    c0 = hi ^ k ^ c1;
    c1 = lo;
    k += kWeyl;
  }
  out[0] = c0;
  out[1] = c1;
}

inline double to_open_unit(std::uint64_t x) {
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

void RngStream::refill() {
  philox2x64_block(counter_++, stream_, seed_, buf_);
  avail_ = 2;
}

std::uint64_t RngStream::next_u64() {
  if (avail_ == 0) refill();
  return buf_[--avail_];
}

double RngStream::next_uniform() { return to_open_unit(next_u64()); }

double RngStream::next_normal() { return std_normal_quantile(next_uniform()); }

void RngStream::fill_uniform(std::span<double> out) {
  for (double& v : out) v = next_uniform();
}

void RngStream::fill_normal(std::span<double> out) {
  constexpr std::size_t kChunk = 2048;
  std::array<double, kChunk> u;
  const auto& kb = kernels::active_batch();
  std::size_t done = 0;
  while (done < out.size()) {
    const std::size_t n = std::min(kChunk, out.size() - done);
    for (std::size_t i = 0; i < n; ++i) u[i] = next_uniform();
    kb.norm_icdf(u.data(), out.data() + done, n);
    done += n;
  }
}

}  // namespace obr
