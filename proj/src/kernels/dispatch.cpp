// SPDX-License-Identifier: Apache-2.0
#include "obr/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace obr::kernels {

#if defined(__x86_64__) || defined(_M_X64)
const Batch* avx2_batch_impl();  // defined in avx2.cpp
#endif

namespace {

const Batch* avx2_if_supported() {
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return avx2_batch_impl();
#endif
  return nullptr;
}

const Batch* pick_active() {
  const char* force = std::getenv("ONEBIT_RAO_KERNEL");
  if (force && std::strcmp(force, "scalar") == 0) return &scalar_batch();
  if (force && std::strcmp(force, "avx2") == 0) {
    if (const Batch* b = avx2_if_supported()) return b;
    return &scalar_batch();  // requested backend unavailable on this CPU
  }
  if (const Batch* b = avx2_if_supported()) return b;
  return &scalar_batch();
}

}  // namespace

const Batch& active_batch() {
  static const Batch* chosen = pick_active();
  return *chosen;
}

std::vector<const Batch*> available_batches() {
  std::vector<const Batch*> out{&scalar_batch()};
  if (const Batch* b = avx2_if_supported()) out.push_back(b);
  return out;
}

}  // namespace obr::kernels
