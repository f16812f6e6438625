// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace obr {

// Standard normal density, CDF and quantile. The CDF rides on erfc so the
// lower tail keeps full relative accuracy down to the underflow threshold;
// the quantile is Acklam's rational approximation polished by one Halley
// step, which lands within ~2 ulp and makes the pair mutually inverse to
// well below 1e-9.
double std_normal_pdf(double x);
double std_normal_cdf(double x);
double std_normal_quantile(double p);  // throws InvalidArgument outside (0,1)

}  // namespace obr
