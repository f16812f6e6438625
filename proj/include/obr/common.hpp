// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace obr {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Bad caller input: dimension mismatches, out-of-range parameters, matrices
// that fail their structural preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed to meet its contract (non-convergence,
// tolerance blow-up, loss of positive definiteness beyond repair).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problems with experiment configuration files or CLI arguments.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace obr
