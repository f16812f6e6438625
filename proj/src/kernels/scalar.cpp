// SPDX-License-Identifier: Apache-2.0
#include "obr/kernels.hpp"
#include "obr/normal.hpp"

#include <algorithm>

namespace obr::kernels {

namespace {

void norm_cdf_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = obr::std_normal_cdf(x[i]);
}

void norm_icdf_scalar(const double* p, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double pc = std::clamp(p[i], 1e-300, 1.0 - 1.1e-16);
    y[i] = obr::std_normal_quantile(pc);
  }
}

}  // namespace

const Batch& scalar_batch() {
  static const Batch b{norm_cdf_scalar, norm_icdf_scalar, "scalar"};
  return b;
}

}  // namespace obr::kernels
