#include "kgamma/log_real.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "kgamma/errors.hpp"

namespace kgamma {
namespace {

struct DD {
  double hi;
  double lo;
};

DD two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  const double e = (a - (s - bb)) + (b - bb);
  return {s, e};
}

DD two_prod(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

DD dd_add(DD a, DD b) {
  DD s = two_sum(a.hi, b.hi);
  s.lo += a.lo + b.lo;
  return two_sum(s.hi, s.lo);
}

DD dd_mul_int(DD a, std::int64_t e) {
  const bool neg = e < 0;
  // |e| < 2^63: split into two exactly-representable halves.
  const std::uint64_t ue = neg ? (~static_cast<std::uint64_t>(e) + 1) : static_cast<std::uint64_t>(e);
  const double upper = std::ldexp(static_cast<double>(ue >> 32), 32);
  const double lower = static_cast<double>(ue & 0xffffffffULL);
  DD r = dd_add(two_prod(a.hi, upper), two_prod(a.hi, lower));
  r = dd_add(r, {a.lo * static_cast<double>(ue), 0.0});
  if (neg) r = {-r.hi, -r.lo};
  return r;
}

}  // namespace

LogReal LogReal::from_real(double x) {
  LogReal r;
  if (x == 0.0) return r;
  r.sign_ = x > 0 ? 1 : -1;
  r.hi_ = std::log(std::fabs(x));
  return r;
}

LogReal LogReal::from_log(double ln_mag, int sign) {
  LogReal r;
  if (sign == 0) return r;
  r.sign_ = sign > 0 ? 1 : -1;
  r.hi_ = ln_mag;
  return r;
}

LogReal LogReal::from_log(double hi, double lo, int sign) {
  LogReal r;
  if (sign == 0) return r;
  r.sign_ = sign > 0 ? 1 : -1;
  const DD s = two_sum(hi, lo);
  r.hi_ = s.hi;
  r.lo_ = s.lo;
  return r;
}

double LogReal::to_real() const {
  if (sign_ == 0) return 0.0;
  return sign_ * std::exp(hi_ + lo_);
}

double LogReal::log2_mag() const { return (hi_ + lo_) / std::numbers::ln2; }

LogReal LogReal::abs() const {
  LogReal r = *this;
  if (r.sign_ < 0) r.sign_ = 1;
  return r;
}

LogReal LogReal::operator-() const {
  LogReal r = *this;
  r.sign_ = -r.sign_;
  return r;
}

LogReal LogReal::pow(std::int64_t e) const {
  if (e == 0) return one();
  if (sign_ == 0) {
    if (e < 0) throw DomainError("LogReal: zero raised to a negative power");
    return zero();
  }
  LogReal r;
  r.sign_ = (sign_ < 0 && (e & 1)) ? -1 : 1;
  const DD p = dd_mul_int({hi_, lo_}, e);
  r.hi_ = p.hi;
  r.lo_ = p.lo;
  return r;
}

LogReal LogReal::inverse() const {
  if (sign_ == 0) throw DomainError("LogReal: inverse of zero");
  LogReal r = *this;
  r.hi_ = -hi_;
  r.lo_ = -lo_;
  return r;
}

LogReal LogReal::sqrt() const {
  if (sign_ < 0) throw DomainError("LogReal: sqrt of a negative number");
  LogReal r = *this;
  r.hi_ = hi_ * 0.5;
  r.lo_ = lo_ * 0.5;
  return r;
}

LogReal operator*(const LogReal& a, const LogReal& b) {
  if (a.sign_ == 0 || b.sign_ == 0) return LogReal{};
  LogReal r;
  r.sign_ = a.sign_ * b.sign_;
  const DD s = dd_add({a.hi_, a.lo_}, {b.hi_, b.lo_});
  r.hi_ = s.hi;
  r.lo_ = s.lo;
  return r;
}

LogReal operator/(const LogReal& a, const LogReal& b) { return a * b.inverse(); }

LogReal operator+(const LogReal& a, const LogReal& b) {
  if (a.sign_ == 0) return b;
  if (b.sign_ == 0) return a;
  const bool a_big = (a.hi_ + a.lo_) >= (b.hi_ + b.lo_);
  const LogReal& big = a_big ? a : b;
  const LogReal& small = a_big ? b : a;
  const double diff = (small.hi_ - big.hi_) + (small.lo_ - big.lo_);
  const double ratio = std::exp(diff);  // <= 1
  const double s = big.sign_ == small.sign_ ? std::log1p(ratio) : std::log1p(-ratio);
  if (!std::isfinite(s)) return LogReal{};
  return LogReal::from_log(big.hi_, big.lo_ + s, big.sign_);
}

LogReal operator-(const LogReal& a, const LogReal& b) { return a + (-b); }

std::partial_ordering operator<=>(const LogReal& a, const LogReal& b) {
  if (a.sign_ != b.sign_) return a.sign_ <=> b.sign_;
  if (a.sign_ == 0) return std::partial_ordering::equivalent;
  // Compare the double-double log magnitudes.
  const DD d = dd_add({a.hi_, a.lo_}, {-b.hi_, -b.lo_});
  const auto mag = d.hi <=> 0.0;
  return a.sign_ > 0 ? mag : 0.0 <=> d.hi;
}

bool operator==(const LogReal& a, const LogReal& b) {
  if (a.sign_ != b.sign_) return false;
  if (a.sign_ == 0) return true;
  return a.hi_ == b.hi_ && a.lo_ == b.lo_;
}

std::string LogReal::str() const {
  if (sign_ == 0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%se^(%.17g)", sign_ < 0 ? "-" : "", hi_ + lo_);
  return buf;
}

LogReal log_mul_pow(std::span<const std::pair<LogReal, std::int64_t>> terms) {
  LogReal acc = LogReal::one();
  for (const auto& [x, e] : terms) {
    if (e == 0) continue;
    acc *= x.pow(e);
  }
  return acc;
}

LogReal log_sum(std::span<const LogReal> terms) {
  const LogReal* pivot = nullptr;
  bool mixed = false;
  int first_sign = 0;
  for (const auto& t : terms) {
    if (t.is_zero()) continue;
    if (first_sign == 0) first_sign = t.sign();
    if (t.sign() != first_sign) mixed = true;
    if (!pivot || t.ln_mag() > pivot->ln_mag()) pivot = &t;
  }
  if (!pivot) return LogReal::zero();
  // Two-level accumulation: most terms are within ~700 nats of the pivot.
  double acc = 0.0;
  double comp = 0.0;
  for (const auto& t : terms) {
    if (t.is_zero()) continue;
    const double d = (t.ln_hi() - pivot->ln_hi()) + (t.ln_lo() - pivot->ln_lo());
    const double v = t.sign() * std::exp(d);
    // Kahan-Babuska summation
    const double s = acc + v;
    comp += std::fabs(acc) >= std::fabs(v) ? (acc - s) + v : (v - s) + acc;
    acc = s;
  }
  acc += comp;
  if (mixed && std::fabs(acc) < 0x1p-40) {
    throw CancellationError("log_sum: mixed-sign terms cancel below 2^-40 of the largest term");
  }
  if (acc == 0.0) return LogReal::zero();
  return LogReal::from_log(pivot->ln_hi(), pivot->ln_lo() + std::log(std::fabs(acc)),
                           acc > 0 ? 1 : -1);
}

}  // namespace kgamma
