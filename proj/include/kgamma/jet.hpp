#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace kgamma {

/// Truncated Taylor expansion c[0] + c[1] e + ... + c[P] e^P of a function at a
/// point. Derivative i is c[i] * i!.
template <typename Scalar, int P>
class Jet {
 public:
  static_assert(P >= 0);
  Jet() { c_.fill(Scalar(0)); }
  Jet(const Scalar& v) {  // NOLINT(google-explicit-constructor)
    c_.fill(Scalar(0));
    c_[0] = v;
  }

  /// The identity function x evaluated at x0.
  static Jet variable(const Scalar& x0) {
    Jet j(x0);
    if constexpr (P >= 1) j.c_[1] = Scalar(1);
    return j;
  }

  const Scalar& operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  Scalar& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }
  Scalar value() const { return c_[0]; }
  Scalar derivative(int i) const {
    Scalar f(1);
    for (int k = 2; k <= i; ++k) f = f * Scalar(static_cast<double>(k));
    return c_[static_cast<std::size_t>(i)] * f;
  }

  /// Composition with x -> x0 + s (x - x0): coefficient i picks up s^i.
  Jet rescaled(const Scalar& s) const {
    Jet r = *this;
    Scalar p(1);
    for (int i = 1; i <= P; ++i) {
      p = p * s;
      r.c_[i] = r.c_[i] * p;
    }
    return r;
  }

  friend Jet operator+(const Jet& a, const Jet& b) {
    Jet r;
    for (int i = 0; i <= P; ++i) r.c_[i] = a.c_[i] + b.c_[i];
    return r;
  }
  friend Jet operator-(const Jet& a, const Jet& b) {
    Jet r;
    for (int i = 0; i <= P; ++i) r.c_[i] = a.c_[i] - b.c_[i];
    return r;
  }
  Jet operator-() const {
    Jet r;
    for (int i = 0; i <= P; ++i) r.c_[i] = -c_[i];
    return r;
  }
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (int i = 0; i <= P; ++i) {
      Scalar s(0);
      for (int k = 0; k <= i; ++k) s = s + a.c_[k] * b.c_[i - k];
      r.c_[i] = s;
    }
    return r;
  }
  friend Jet operator/(const Jet& a, const Jet& b) {
    Jet r;
    for (int i = 0; i <= P; ++i) {
      Scalar s = a.c_[i];
      for (int k = 1; k <= i; ++k) s = s - b.c_[k] * r.c_[i - k];
      r.c_[i] = s / b.c_[0];
    }
    return r;
  }
  Jet& operator+=(const Jet& o) { return *this = *this + o; }
  Jet& operator-=(const Jet& o) { return *this = *this - o; }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }

 private:
  std::array<Scalar, P + 1> c_;
};

/// exp of a jet; uses e' = u' e, i.e. k e_k = sum_{j=1..k} j u_j e_{k-j}.
template <typename Scalar, int P>
Jet<Scalar, P> exp(const Jet<Scalar, P>& u) {
  using std::exp;
  Jet<Scalar, P> e;
  e[0] = exp(u[0]);
  for (int k = 1; k <= P; ++k) {
    Scalar s(0);
    for (int j = 1; j <= k; ++j) s = s + Scalar(static_cast<double>(j)) * u[j] * e[k - j];
    e[k] = s / Scalar(static_cast<double>(k));
  }
  return e;
}

}  // namespace kgamma
