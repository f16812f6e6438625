// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace obr::kernels {

// Batched transcendental kernels behind the hot loops (QMC orthant sweeps,
// Monte Carlo normal generation). Each backend provides the same entry
// points; variants are selected once at startup from CPUID and can be forced
// with ONEBIT_RAO_KERNEL=scalar|avx2.
//
// norm_cdf:  y[i] = Phi(x[i])
// norm_icdf: y[i] = Phi^{-1}(p[i]), p[i] in (0,1); out-of-range inputs are
//            clamped to the representable open interval rather than trapped,
//            because callers feed digitally-shifted QMC uniforms.
struct Batch {
  void (*norm_cdf)(const double* x, double* y, std::size_t n);
  void (*norm_icdf)(const double* p, double* y, std::size_t n);
  const char* name;
};

// Reference implementation (plain scalar loops over the obr/normal.hpp
// functions). Always available; the equivalence tests measure every other
// backend against it.
const Batch& scalar_batch();

// Backend chosen for this process. Stable for the process lifetime.
const Batch& active_batch();

// All backends usable on this machine, reference first.
std::vector<const Batch*> available_batches();

}  // namespace obr::kernels
