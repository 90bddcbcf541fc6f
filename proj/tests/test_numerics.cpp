#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "kgamma/big_float.hpp"
#include "kgamma/errors.hpp"
#include "kgamma/ext_float.hpp"
#include "kgamma/jet.hpp"
#include "kgamma/log_real.hpp"

using namespace kgamma;

TEST_CASE("log_real arithmetic matches double arithmetic in range") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-50.0, 50.0);
  for (int i = 0; i < 500; ++i) {
    const double a = U(rng), b = U(rng);
    const LogReal A = LogReal::from_real(a), B = LogReal::from_real(b);
    CHECK((A * B).to_real() == doctest::Approx(a * b).epsilon(1e-13));
    CHECK((A / B).to_real() == doctest::Approx(a / b).epsilon(1e-13));
    if (std::fabs(a + b) > 1e-6 * (std::fabs(a) + std::fabs(b)))
      CHECK((A + B).to_real() == doctest::Approx(a + b).epsilon(1e-9));
    CHECK(((A < B) == (a < b)));
  }
}

TEST_CASE("log_real keeps magnitudes far outside double range") {
  const LogReal tiny = LogReal::from_log(-1e300);
  const LogReal sq = tiny * tiny;
  CHECK(sq.ln_mag() == doctest::Approx(-2e300));
  CHECK(tiny.pow(3).ln_mag() == doctest::Approx(-3e300));
  CHECK(tiny.sqrt().ln_mag() == doctest::Approx(-5e299));
  // Double-double exactness: small relative factors survive next to huge logs.
  const LogReal x = LogReal::from_log(-1e20) * LogReal::from_real(2.0);
  CHECK((x / LogReal::from_log(-1e20)).to_real() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("log_sum is accurate and reports catastrophic cancellation") {
  std::vector<LogReal> t{LogReal::from_real(1.0), LogReal::from_real(2.0), LogReal::from_real(-0.5)};
  CHECK(log_sum(t).to_real() == doctest::Approx(2.5));
  std::vector<LogReal> c{LogReal::from_real(1.0), LogReal::from_real(-1.0)};
  CHECK_THROWS_AS(log_sum(c), CancellationError);
  std::vector<LogReal> p;
  for (int i = 0; i < 100; ++i) p.push_back(LogReal::from_log(-1e10 - i));
  const double expect = -1e10 + std::log(1.0 / (1.0 - std::exp(-1.0)) * (1.0 - std::exp(-100.0)));
  CHECK(log_sum(p).ln_mag() == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("ext_float arithmetic and log round trip") {
  const ExtFloat a = ExtFloat::from_log(LogReal::from_log(-5000.0));
  const ExtFloat b = a * a;
  CHECK(b.ln_abs() == doctest::Approx(-10000.0));
  CHECK((a + a).ln_abs() == doctest::Approx(-5000.0 + std::log(2.0)));
  CHECK((a - a).is_zero());
  CHECK(ExtFloat(3.0).to_double() == 3.0);
  CHECK((ExtFloat(2.0).pow(-3)).to_double() == doctest::Approx(0.125));
  CHECK(ExtFloat(9.0).sqrt().to_double() == doctest::Approx(3.0));
  CHECK(ExtFloat(0.25).ldexp(3).to_double() == 2.0);
  CHECK(a.to_log().ln_mag() == doctest::Approx(-5000.0));
  CHECK(ExtFloat(-1.0) < ExtFloat(1e-300));
}

TEST_CASE("big_float precision scope and conversions") {
  PrecisionScope scope(512);
  const BigFloat two(2);
  const BigFloat s = boost::multiprecision::sqrt(two);
  const BigFloat err = boost::multiprecision::abs(s * s - two);
  CHECK(err < BigFloat("1e-150"));
  const LogReal l = to_log_real(BigFloat("1e-1000"));
  CHECK(l.ln_mag() == doctest::Approx(-1000.0 * std::log(10.0)));
  const BigFloat back = from_log_real(l);
  CHECK(boost::multiprecision::abs(back / BigFloat("1e-1000") - 1) < BigFloat("1e-25"));
  CHECK(to_decimal(BigFloat("0.125"), 5).rfind("1.2500e-01", 0) == 0);
}

TEST_CASE("jet derivatives of exp(-1/x) against closed forms") {
  const double x0 = 0.7;
  using J = Jet<double, 3>;
  const J x = J::variable(x0);
  const J f = exp(-(J(1.0) / x));
  const double e = std::exp(-1.0 / x0);
  CHECK(f.derivative(0) == doctest::Approx(e));
  CHECK(f.derivative(1) == doctest::Approx(e / (x0 * x0)));
  CHECK(f.derivative(2) == doctest::Approx(e * (1.0 - 2.0 * x0) / std::pow(x0, 4)));
  const double d3 = e * (6.0 * x0 * x0 - 6.0 * x0 + 1.0) / std::pow(x0, 6);
  CHECK(f.derivative(3) == doctest::Approx(d3));
  // Chain rule under rescaling x -> 3x.
  CHECK(f.rescaled(3.0).derivative(2) == doctest::Approx(9.0 * f.derivative(2)));
}
