#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <utility>

namespace kgamma {

/// Signed real number stored as sign and natural log of the magnitude.
///
/// The log-magnitude is kept as an unevaluated double-double (hi + lo), which
/// keeps products such as delta_{k}^{2^{60}} exact in the exponent while
/// allowing |ln_mag| up to ~1e300. Zero is sign() == 0; its ln_mag is
/// meaningless.
class LogReal {
 public:
  constexpr LogReal() = default;

  static LogReal zero() { return {}; }
  static LogReal one() { return from_log(0.0); }
  static LogReal from_real(double x);
  static LogReal from_log(double ln_mag, int sign = 1);
  static LogReal from_log(double hi, double lo, int sign);

  int sign() const { return sign_; }
  bool is_zero() const { return sign_ == 0; }
  double ln_mag() const { return hi_ + lo_; }
  double ln_hi() const { return hi_; }
  double ln_lo() const { return lo_; }

  /// Value as a double. Underflows to 0 / overflows to +-inf outside range.
  double to_real() const;
  /// log base 2 of |x|.
  double log2_mag() const;

  LogReal abs() const;
  LogReal operator-() const;
  LogReal pow(std::int64_t e) const;
  LogReal inverse() const;
  LogReal sqrt() const;

  friend LogReal operator*(const LogReal& a, const LogReal& b);
  friend LogReal operator/(const LogReal& a, const LogReal& b);
  // Addition without a cancellation check; exact cancellation gives zero.
  friend LogReal operator+(const LogReal& a, const LogReal& b);
  friend LogReal operator-(const LogReal& a, const LogReal& b);
  LogReal& operator*=(const LogReal& o) { return *this = *this * o; }
  LogReal& operator/=(const LogReal& o) { return *this = *this / o; }
  LogReal& operator+=(const LogReal& o) { return *this = *this + o; }

  friend std::partial_ordering operator<=>(const LogReal& a, const LogReal& b);
  friend bool operator==(const LogReal& a, const LogReal& b);

  std::string str() const;

 private:
  int sign_ = 0;
  double hi_ = 0.0;
  double lo_ = 0.0;
};

/// Exact product of terms raised to integer powers, accumulated in log domain.
/// An empty list (or all-zero exponents) yields one.
LogReal log_mul_pow(std::span<const std::pair<LogReal, std::int64_t>> terms);

/// Sum pivoted at the largest magnitude. Throws CancellationError when terms of
/// mixed sign cancel below 2^-40 of the largest term.
LogReal log_sum(std::span<const LogReal> terms);

}  // namespace kgamma
