#include "kgamma/big_float.hpp"

#include <sstream>

namespace kgamma {

std::string to_decimal(const BigFloat& x, int digits) {
  std::ostringstream os;
  os.precision(digits > 1 ? digits - 1 : 0);
  os << std::scientific << x;
  return os.str();
}

LogReal to_log_real(const BigFloat& x) {
  if (x == 0) return LogReal::zero();
  const BigFloat l = boost::multiprecision::log(boost::multiprecision::abs(x));
  const double hi = l.convert_to<double>();
  const double lo = BigFloat(l - hi).convert_to<double>();
  return LogReal::from_log(hi, lo, x > 0 ? 1 : -1);
}

BigFloat from_log_real(const LogReal& x) {
  if (x.is_zero()) return BigFloat(0);
  BigFloat l = BigFloat(x.ln_hi()) + BigFloat(x.ln_lo());
  BigFloat v = boost::multiprecision::exp(l);
  return x.sign() < 0 ? BigFloat(-v) : v;
}

}  // namespace kgamma
