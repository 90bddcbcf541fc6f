#pragma once

#include <boost/multiprecision/mpfr.hpp>
#include <cmath>
#include <string>

#include "kgamma/log_real.hpp"

namespace kgamma {

/// Arbitrary precision binary float (MPFR). Precision is a per-thread default;
/// use PrecisionScope to set it for a computation.
using BigFloat = boost::multiprecision::mpfr_float;

inline constexpr unsigned kDefaultMantissaBits = 512;

inline unsigned bits_to_digits10(unsigned bits) {
  return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

/// RAII guard for the working precision of newly created BigFloat values.
class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned mantissa_bits)
      : saved_(BigFloat::default_precision()) {
    BigFloat::default_precision(bits_to_digits10(mantissa_bits));
  }
  ~PrecisionScope() { BigFloat::default_precision(saved_); }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_;
};

/// Decimal scientific string with `digits` significant digits.
std::string to_decimal(const BigFloat& x, int digits = 40);

/// Natural log magnitude of x as LogReal (sign preserved).
LogReal to_log_real(const BigFloat& x);

/// BigFloat from a LogReal; exact up to the working precision of exp().
BigFloat from_log_real(const LogReal& x);

}  // namespace kgamma
