#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <numbers>

#include "kgamma/log_real.hpp"

namespace kgamma {

/// Binary floating point with a double mantissa and a 64-bit exponent.
///
/// Used for accumulations (Newton terms, node products) whose magnitudes run
/// far outside the double range but which need cheap additions. Mantissa is
/// kept in [0.5, 1) or exactly 0.
class ExtFloat {
 public:
  constexpr ExtFloat() = default;
  ExtFloat(double x) { set(x, 0); }  // NOLINT(google-explicit-constructor)
  ExtFloat(double m, std::int64_t e) { set(m, e); }

  static ExtFloat from_log(const LogReal& x) {
    if (x.is_zero()) return {};
    const double whole = std::floor(x.ln_hi() / std::numbers::ln2);
    // whole * ln2 as an exact product plus a tail, so frac_ln keeps full precision.
    const double p = whole * kLn2Hi;
    const double perr = std::fma(whole, kLn2Hi, -p);
    const double frac_ln = ((x.ln_hi() - p) - perr) - whole * kLn2Lo + x.ln_lo();
    return ExtFloat(x.sign() * std::exp(frac_ln), static_cast<std::int64_t>(whole));
  }

  double mantissa() const { return m_; }
  std::int64_t exponent() const { return e_; }
  bool is_zero() const { return m_ == 0.0; }
  int sign() const { return m_ > 0 ? 1 : (m_ < 0 ? -1 : 0); }

  double to_double() const {
    if (m_ == 0.0) return 0.0;
    if (e_ > 2000) return m_ > 0 ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
    if (e_ < -2000) return 0.0;
    return std::ldexp(m_, static_cast<int>(e_));
  }
  /// Natural log of |x|; -inf for zero.
  double ln_abs() const {
    if (m_ == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(std::fabs(m_)) + static_cast<double>(e_) * std::numbers::ln2;
  }
  double log2_abs() const {
    if (m_ == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log2(std::fabs(m_)) + static_cast<double>(e_);
  }
  LogReal to_log() const {
    if (m_ == 0.0) return LogReal::zero();
    const double e = static_cast<double>(e_);
    const double p = e * kLn2Hi;
    return LogReal::from_log(p, std::fma(e, kLn2Hi, -p) + e * kLn2Lo + std::log(std::fabs(m_)),
                             sign());
  }

  ExtFloat abs() const { return {std::fabs(m_), e_, Raw{}}; }
  ExtFloat operator-() const { return {-m_, e_, Raw{}}; }

  friend ExtFloat operator*(const ExtFloat& a, const ExtFloat& b) {
    return ExtFloat(a.m_ * b.m_, a.e_ + b.e_);
  }
  friend ExtFloat operator/(const ExtFloat& a, const ExtFloat& b) {
    return ExtFloat(a.m_ / b.m_, a.e_ - b.e_);
  }
  friend ExtFloat operator+(const ExtFloat& a, const ExtFloat& b) {
    if (a.m_ == 0.0) return b;
    if (b.m_ == 0.0) return a;
    const std::int64_t d = a.e_ - b.e_;
    if (d > 64) return a;
    if (d < -64) return b;
    if (d >= 0) return ExtFloat(a.m_ + std::ldexp(b.m_, static_cast<int>(-d)), a.e_);
    return ExtFloat(std::ldexp(a.m_, static_cast<int>(d)) + b.m_, b.e_);
  }
  friend ExtFloat operator-(const ExtFloat& a, const ExtFloat& b) { return a + (-b); }
  ExtFloat& operator+=(const ExtFloat& o) { return *this = *this + o; }
  ExtFloat& operator-=(const ExtFloat& o) { return *this = *this - o; }
  ExtFloat& operator*=(const ExtFloat& o) { return *this = *this * o; }
  ExtFloat& operator/=(const ExtFloat& o) { return *this = *this / o; }

  ExtFloat ldexp(std::int64_t k) const { return {m_, m_ == 0.0 ? 0 : e_ + k, Raw{}}; }

  ExtFloat sqrt() const {
    if (m_ <= 0.0) return {};
    if (e_ % 2 == 0) return ExtFloat(std::sqrt(m_), e_ / 2);
    return ExtFloat(std::sqrt(2.0 * m_), (e_ - 1) / 2);
  }

  ExtFloat pow(int k) const {
    ExtFloat r(1.0);
    ExtFloat b = *this;
    unsigned u = k < 0 ? static_cast<unsigned>(-k) : static_cast<unsigned>(k);
    while (u) {
      if (u & 1u) r *= b;
      b *= b;
      u >>= 1;
    }
    return k < 0 ? ExtFloat(1.0) / r : r;
  }

  friend std::partial_ordering operator<=>(const ExtFloat& a, const ExtFloat& b) {
    const int sa = a.sign();
    const int sb = b.sign();
    if (sa != sb) return sa <=> sb;
    if (sa == 0) return std::partial_ordering::equivalent;
    if (a.e_ != b.e_) return sa > 0 ? a.e_ <=> b.e_ : b.e_ <=> a.e_;
    return a.m_ <=> b.m_;
  }
  friend bool operator==(const ExtFloat& a, const ExtFloat& b) { return a.m_ == b.m_ && a.e_ == b.e_; }

 private:
  static constexpr double kLn2Hi = 0x1.62e42fefa39efp-1;
  static constexpr double kLn2Lo = 0x1.abc9e3b39803fp-56;
  struct Raw {};
  ExtFloat(double m, std::int64_t e, Raw) : m_(m), e_(e) {}

  void set(double m, std::int64_t e) {
    if (m == 0.0 || !std::isfinite(m)) {
      m_ = m;
      e_ = 0;
      return;
    }
    int k = 0;
    m_ = std::frexp(m, &k);
    e_ = e + k;
  }

  double m_ = 0.0;
  std::int64_t e_ = 0;
};

inline ExtFloat abs(const ExtFloat& x) { return x.abs(); }
inline ExtFloat sqrt(const ExtFloat& x) { return x.sqrt(); }

}  // namespace kgamma
