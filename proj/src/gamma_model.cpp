#include "kgamma/gamma_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "kgamma/errors.hpp"

namespace kgamma {
namespace {

constexpr double kLn2 = std::numbers::ln2;
const double kLn32 = std::log(32.0);
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// m-fold iterated natural log; NaN once an iterate leaves (0, inf).
double iterated_log(double x, int m) {
  for (int i = 0; i < m; ++i) {
    if (!(x > 0.0)) return kNaN;
    x = std::log(x);
  }
  return x;
}

// ln(ln(1/delta)) for a LogReal delta in (0,1).
double ln_ln_inv(const LogReal& delta) {
  const double hi = -delta.ln_hi();
  const double lo = -delta.ln_lo();
  return std::log(hi) + std::log1p(lo / hi);
}

LogReal B_from_delta(const LogReal& delta, int k) {
  return LogReal::from_log(ln_ln_inv(delta) - (k + 1) * kLn2);
}

// ln gamma_k from the family formula; NaN where the formula is undefined.
double formula_ln_gamma(const FamilySpec& s, int k) {
  switch (s.family) {
    case Family::PowerLaw:
      return -s.a * std::log(static_cast<double>(k));
    case Family::Exponential:
      return -k * std::log(s.a);
    case Family::DoublyExp:
      return -std::pow(s.a, k);
    case Family::Example1:
      return k == 1 ? -4.0 * s.B : -std::ldexp(s.B, k);
    case Family::Example2: {
      double v = -2.0 * std::log(k + 5.0);
      for (int j = 1;; ++j) {
        const int kj = s.ex2.k_at(j);
        if (kj > k) break;
        if (kj == k) v -= s.ex2.A(j) - (j > 1 ? s.ex2.A(j - 1) : 0.0);
      }
      return v;
    }
    case Family::DeltaForm:
    case Family::FromDimensionFunction:
    case Family::Example3:
    case Family::Custom:
      break;
  }
  return kNaN;
}

bool delta_defined(Family f) {
  return f == Family::Example3 || f == Family::DeltaForm || f == Family::FromDimensionFunction;
}

// ln(1/delta_k) from the family formula for delta-defined families; NaN where
// undefined, +inf on overflow.
double formula_ln_inv_delta(const FamilySpec& s, int k) {
  switch (s.family) {
    case Family::Example3: {
      // 2^{k+1} B_k with B_k = exp(k / log_(m) k).
      const double lam = iterated_log(static_cast<double>(k), s.m);
      if (!(lam > 0.0)) return kNaN;
      return std::exp((k + 1) * kLn2 + k / lam);
    }
    case Family::DeltaForm:
      return std::pow(s.b, k);
    case Family::FromDimensionFunction:
      try {
        return std::exp(s.h.loglog_inverse(k * kLn2));
      } catch (const DomainError&) {
        return kNaN;
      }
    default:
      break;
  }
  return kNaN;
}

void validate_family(const FamilySpec& s) {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ParameterError(what);
  };
  switch (s.family) {
    case Family::PowerLaw:
      need(s.a > 1.0, "power law needs a > 1 for a summable sequence");
      break;
    case Family::Exponential:
      need(s.a > 1.0, "exponential family needs a > 1");
      break;
    case Family::DoublyExp:
      need(s.a > 1.0, "doubly exponential family needs a > 1");
      break;
    case Family::Example1:
      need(s.B > 0.0, "constant-B family needs B > 0");
      break;
    case Family::DeltaForm:
      need(s.b > 1.0, "delta_k = exp(-b^k) needs b > 1");
      break;
    case Family::Example3:
      need(s.m >= 1 && s.m <= 6, "iterated-log depth m must be in 1..6");
      break;
    case Family::Example2: {
      const auto& k = s.ex2.k;
      for (std::size_t i = 1; i < k.size(); ++i)
        need(k[i] > k[i - 1], "k_j must be strictly increasing");
      need(k.empty() || k.front() >= 1, "k_j must be positive");
      break;
    }
    case Family::FromDimensionFunction:
      s.h.validate();
      break;
    case Family::Custom:
      need(!s.gammas.empty(), "custom sequence is empty");
      break;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// LogPowerSpec

void LogPowerSpec::validate() const {
  switch (kind) {
    case Kind::Constant:
      if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw ParameterError("constant alpha must lie in (0, 1]");
      return;
    case Kind::PlusEps:
      if (!(alpha0 >= 0.0 && alpha0 < 1.0)) throw ParameterError("alpha0 + eps needs alpha0 in [0, 1)");
      break;
    case Kind::MinusEps:
      if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw ParameterError("alpha0 - eps needs alpha0 in (0, 1]");
      break;
  }
  if (m < 3) throw ParameterError("eps_m needs m >= 3 (m = 1, 2 give functions equivalent to h0)");
}

std::string LogPowerSpec::name() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Constant:
      os << "alpha=" << alpha0;
      break;
    case Kind::PlusEps:
      os << "alpha=" << alpha0 << "+eps_" << m;
      break;
    case Kind::MinusEps:
      os << "alpha=" << alpha0 << "-eps_" << m;
      break;
  }
  return os.str();
}

double LogPowerSpec::eps(double ell) const {
  if (kind == Kind::Constant) return 0.0;
  const double x = iterated_log(ell, m - 2);
  if (!(x > 0.0)) return kInf;
  return 1.0 / x;
}

double LogPowerSpec::eps_prime(double ell) const {
  if (kind == Kind::Constant) return 0.0;
  double x = ell;
  double dx = 1.0;
  for (int i = 0; i < m - 2; ++i) {
    dx /= x;
    x = std::log(x);
  }
  return -dx / (x * x);
}

double LogPowerSpec::alpha(double ell) const {
  switch (kind) {
    case Kind::Constant:
      return alpha0;
    case Kind::PlusEps:
      return alpha0 + eps(ell);
    case Kind::MinusEps:
      return alpha0 - eps(ell);
  }
  return alpha0;
}

double LogPowerSpec::alpha_prime(double ell) const {
  switch (kind) {
    case Kind::Constant:
      return 0.0;
    case Kind::PlusEps:
      return eps_prime(ell);
    case Kind::MinusEps:
      return -eps_prime(ell);
  }
  return 0.0;
}

double LogPowerSpec::ell_min() const {
  if (kind == Kind::Constant) return -kInf;
  const double cap = kind == Kind::PlusEps ? 1.0 - alpha0 : alpha0 / 2.0;
  double x = 1.0 / cap;
  for (int i = 0; i < m - 2; ++i) x = std::exp(x);
  return x;
}

double LogPowerSpec::h_of_ell(double ell) const { return std::exp(-alpha(ell) * ell); }

double LogPowerSpec::loglog_inverse(double ln_inv_tau) const {
  if (kind == Kind::Constant) return ln_inv_tau / alpha0;
  const double lo0 = ell_min();
  auto phi = [&](double ell) { return alpha(ell) * ell; };
  if (!(ln_inv_tau > phi(lo0))) throw DomainError("tau outside the range of h on its domain");
  double lo = lo0;
  double hi = lo0 + 1.0;
  while (phi(hi) < ln_inv_tau) {
    lo = hi;
    hi = lo0 + 2.0 * (hi - lo0);
    if (!std::isfinite(hi)) throw DomainError("h inverse does not converge");
  }
  for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < ln_inv_tau ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Families

std::string family_name(Family f) {
  switch (f) {
    case Family::PowerLaw: return "powerlaw";
    case Family::Exponential: return "exponential";
    case Family::DoublyExp: return "doublyexp";
    case Family::Example1: return "example1";
    case Family::Example2: return "example2";
    case Family::Example3: return "example3";
    case Family::DeltaForm: return "deltaform";
    case Family::FromDimensionFunction: return "fromdim";
    case Family::Custom: return "custom";
  }
  return "?";
}

std::optional<Family> parse_family(const std::string& name) {
  for (Family f : {Family::PowerLaw, Family::Exponential, Family::DoublyExp, Family::Example1,
                   Family::Example2, Family::Example3, Family::DeltaForm,
                   Family::FromDimensionFunction, Family::Custom}) {
    if (family_name(f) == name) return f;
  }
  return std::nullopt;
}

int Example2Spec::k_at(int j) const {
  if (k.empty()) return j * j;
  if (j >= 1 && j <= static_cast<int>(k.size())) return k[static_cast<std::size_t>(j - 1)];
  // Past the supplied list the sequence continues with growing gaps.
  const int last = k.back();
  const int n = static_cast<int>(k.size());
  const int gap = n >= 2 ? k[static_cast<std::size_t>(n - 1)] - k[static_cast<std::size_t>(n - 2)] : 1;
  int v = last;
  for (int i = n + 1, g = gap; i <= j; ++i) v += ++g;
  return v;
}

double Example2Spec::A(int j) const {
  if (j <= 0) return 0.0;
  const int kj = k_at(j);
  return variant == Variant::PowA ? std::ldexp(1.0, kj) : std::ldexp(1.0, kj - j);
}

GammaModel GammaModel::build(const FamilySpec& spec, int K_max) {
  validate_family(spec);
  GammaModel m;
  m.spec_ = spec;
  const LogReal cap = LogReal::from_log(-kLn32);

  if (spec.family == Family::Custom) {
    const int K = std::min<int>(K_max, static_cast<int>(spec.gammas.size()));
    if (K < 1) throw HorizonError("custom sequence needs a horizon of at least 1");
    m.gamma_.push_back(LogReal::zero());
    for (int k = 1; k <= K; ++k) {
      const double g = spec.gammas[static_cast<std::size_t>(k - 1)];
      if (!(g > 0.0 && g <= 1.0 / 32.0)) {
        std::ostringstream os;
        os << "custom gamma_" << k << " = " << g << " violates 0 < gamma_k <= 1/32";
        throw ValidationError(os.str());
      }
      m.gamma_.push_back(LogReal::from_real(g));
    }
  } else if (delta_defined(spec.family)) {
    // delta_k follows the formula from k* on; gamma_k = 1/32 before k*, and
    // gamma_{k*} absorbs the difference.
    if (K_max < 1) throw HorizonError("horizon must be at least 1");
    const int K_check = std::max(K_max, 64);
    std::vector<double> L(static_cast<std::size_t>(K_check) + 1, kNaN);
    for (int k = 1; k <= K_check; ++k) L[static_cast<std::size_t>(k)] = formula_ln_inv_delta(spec, k);
    auto Lk = [&](int k) { return L[static_cast<std::size_t>(k)]; };
    int kstar = -1;
    for (int c = 1; c <= K_check && kstar < 0; ++c) {
      bool ok = std::isfinite(Lk(c)) && Lk(c) - (c - 1) * kLn32 >= kLn32;
      for (int k = c + 1; k <= K_check && ok; ++k)
        ok = std::isfinite(Lk(k)) && Lk(k) - Lk(k - 1) >= kLn32;
      if (ok) kstar = c;
    }
    if (kstar < 0 || kstar > K_max) {
      for (int k = 1; k <= K_max; ++k)
        if (std::isinf(Lk(k))) throw HorizonError("delta_k overflows the log range before the horizon");
      throw ValidationError("no clamp prefix within the horizon makes gamma_k <= 1/32");
    }
    m.clamp_prefix_ = kstar - 1;
    m.gamma_.push_back(LogReal::zero());
    for (int k = 1; k <= K_max; ++k) {
      if (k < kstar)
        m.gamma_.push_back(cap);
      else if (k == kstar)
        m.gamma_.push_back(LogReal::from_log(-(Lk(k) - (k - 1) * kLn32)));
      else
        m.gamma_.push_back(LogReal::from_log(-(Lk(k) - Lk(k - 1))));
    }
  } else {
    if (K_max < 1) throw HorizonError("horizon must be at least 1");
    // Clamp the smallest prefix that leaves every later gamma_k <= 1/32.
    const int K_check = K_max + 64;
    int prefix = 0;
    for (int k = 1; k <= K_check; ++k) {
      const double lg = formula_ln_gamma(spec, k);
      if (!(lg <= -kLn32)) prefix = k;
    }
    if (prefix > K_max) throw ValidationError("no clamp prefix within the horizon makes gamma_k <= 1/32");
    m.clamp_prefix_ = prefix;
    m.gamma_.push_back(LogReal::zero());
    for (int k = 1; k <= K_max; ++k) {
      m.gamma_.push_back(k <= prefix ? cap : LogReal::from_log(formula_ln_gamma(spec, k)));
    }
  }

  const int K = m.horizon();
  m.delta_.push_back(LogReal::one());
  m.r_.push_back(LogReal::one());
  double sum = 0.0;
  for (int k = 1; k <= K; ++k) {
    m.delta_.push_back(m.delta_.back() * m.gamma_[static_cast<std::size_t>(k)]);
    m.r_.push_back(m.gamma_[static_cast<std::size_t>(k)] * m.r_.back().pow(2));
    if (!std::isfinite(m.delta_.back().ln_hi()))
      throw HorizonError("delta_k leaves the representable log range before the horizon");
    sum += m.gamma_[static_cast<std::size_t>(k)].to_real();
  }

  // Tail of sum gamma_k past the horizon (upper bound).
  double tail = 0.0;
  switch (spec.family) {
    case Family::Custom:
      break;
    case Family::PowerLaw:
      tail = std::pow(static_cast<double>(K), 1.0 - spec.a) / (spec.a - 1.0);
      break;
    case Family::Exponential:
      tail = std::pow(spec.a, -K) / (spec.a - 1.0);
      break;
    case Family::Example2:
      tail = 1.0 / (K + 5.0);
      break;
    default: {
      for (int k = K + 1; k <= K + 4000; ++k) {
        double lg = delta_defined(spec.family)
                        ? -(formula_ln_inv_delta(spec, k) - formula_ln_inv_delta(spec, k - 1))
                        : formula_ln_gamma(spec, k);
        if (std::isnan(lg)) lg = -kLn32;
        const double g = std::exp(lg);
        tail += g;
        if (g < 1e-20 * (sum + tail)) {
          tail += g;  // geometric remainder
          break;
        }
      }
    }
  }
  m.gamma_sum_ = sum + tail;
  return m;
}

const LogReal& GammaModel::gamma(int k) const {
  if (k < 1 || k > horizon()) throw HorizonError("gamma index outside the horizon");
  return gamma_[static_cast<std::size_t>(k)];
}

LogReal GammaModel::delta(int k) const {
  if (k < 0 || k > horizon()) throw HorizonError("delta index outside the horizon");
  return delta_[static_cast<std::size_t>(k)];
}

LogReal GammaModel::r(int k) const {
  if (k < 0 || k > horizon()) throw HorizonError("r index outside the horizon");
  return r_[static_cast<std::size_t>(k)];
}

double GammaModel::C0() const { return std::exp(ln_C0()); }

std::string GammaModel::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << family_name(spec_.family);
  switch (spec_.family) {
    case Family::PowerLaw:
    case Family::Exponential:
    case Family::DoublyExp:
      os << "(a=" << spec_.a << ")";
      break;
    case Family::Example1:
      os << "(B=" << spec_.B << ")";
      break;
    case Family::DeltaForm:
      os << "(b=" << spec_.b << ")";
      break;
    case Family::Example3:
      os << "(m=" << spec_.m << ")";
      break;
    case Family::Example2:
      os << "(variant=" << (spec_.ex2.variant == Example2Spec::Variant::PowA ? "A=2^k" : "A=2^(k-j)")
         << ",k=" << (spec_.ex2.k.empty() ? std::string("j^2") : std::string("list")) << ")";
      break;
    case Family::FromDimensionFunction:
      os << "(" << spec_.h.name() << ")";
      break;
    case Family::Custom:
      os << "(n=" << spec_.gammas.size() << ")";
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Profile

std::string polar_name(PolarVerdict v) {
  switch (v) {
    case PolarVerdict::Polar: return "polar";
    case PolarVerdict::Nonpolar: return "nonpolar";
    case PolarVerdict::Undetermined: return "undetermined-at-horizon";
  }
  return "?";
}

Profile profile(const GammaModel& model) {
  Profile p;
  const int K = model.horizon();
  LogReal robin = LogReal::zero();
  for (int k = 0; k <= K; ++k) {
    p.delta.push_back(model.delta(k));
    p.r.push_back(model.r(k));
    if (k == 0) {
      p.B.push_back(LogReal::zero());
      p.beta.push_back(kNaN);
      p.robin_partial.push_back(robin);
      continue;
    }
    const LogReal B = B_from_delta(model.delta(k), k);
    p.B.push_back(B);
    p.beta.push_back(B.ln_mag() / k);
    robin += LogReal::from_log(ln_ln_inv(model.gamma(k)) - k * kLn2);
    p.robin_partial.push_back(robin);
  }

  const auto& s = model.spec();
  auto set = [&](PolarVerdict v, const char* rule) {
    p.polar = v;
    p.polar_rule = rule;
  };
  switch (s.family) {
    case Family::PowerLaw:
    case Family::Exponential:
      set(PolarVerdict::Nonpolar, "sum of B_k converges (B_k decays like 2^-k times a polynomial)");
      break;
    case Family::DoublyExp:
      if (s.a >= 2.0)
        set(PolarVerdict::Polar, "B_k ~ (a/2)^{k+1}/(a-1) does not tend to 0 for a >= 2");
      else
        set(PolarVerdict::Nonpolar, "B_k ~ (a/2)^{k+1}/(a-1) is summable for a < 2");
      break;
    case Family::Example1:
      set(PolarVerdict::Polar, "B_k = B for all k: the Robin series diverges");
      break;
    case Family::Example2:
      if (s.ex2.variant == Example2Spec::Variant::PowA)
        set(PolarVerdict::Polar, "B_{k_j} > 2^{-k_j-1} A_j = 1/2 for every j: the Robin series diverges");
      else
        set(PolarVerdict::Nonpolar, "block sums of B_k are below 3 B_{k_j} ~ 3 2^{-j-1}: summable");
      break;
    case Family::Example3:
      set(PolarVerdict::Polar, "B_k = exp(k / log_(m) k) tends to infinity");
      break;
    case Family::DeltaForm:
      if (s.b >= 2.0)
        set(PolarVerdict::Polar, "B_k = (b/2)^k / 2 does not tend to 0 for b >= 2");
      else
        set(PolarVerdict::Nonpolar, "B_k = (b/2)^k / 2 is summable for b < 2");
      break;
    case Family::FromDimensionFunction:
      set(PolarVerdict::Polar, "alpha <= 1 gives ln(1/h^{-1}(2^-k)) >= 2^k, so B_k >= 1/2");
      break;
    case Family::Custom:
      set(PolarVerdict::Undetermined, "finite data: only partial Robin sums are reported");
      break;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Diagnostics

DiagnosticsReport condition_diagnostics(const GammaModel& model, const Profile& prof,
                                        const DiagnosticsParams& params) {
  DiagnosticsReport rep;
  rep.heuristic = model.family() == Family::Custom;
  const int K = prof.horizon();
  const int m = params.m;
  if (m < 0) throw ParameterError("m must be nonnegative");
  if (!(params.epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  if (!(params.M > 0.0)) throw ParameterError("M must be positive");
  const LogReal eps = LogReal::from_real(params.epsilon);
  const LogReal eps10 = LogReal::from_real(1.0 / (2.0 * params.M));

  auto Bsum = [&](int from, int to) {
    std::vector<LogReal> t;
    for (int k = from; k <= to; ++k) t.push_back(prof.B[static_cast<std::size_t>(k)]);
    return log_sum(t);
  };
  auto ln_inv_delta = [&](int k) {
    const LogReal& d = prof.delta[static_cast<std::size_t>(k)];
    return LogReal::from_log(ln_ln_inv(d));
  };

  for (int s : params.s_grid) {
    for (int n : params.n_grid) {
      if (s < 1) throw ParameterError("s must be at least 1");
      if (n < m + 1) throw ParameterError("n must exceed m");
      if (s + n > K) throw HorizonError("diagnostics grid point s+n exceeds the horizon");
      DiagnosticsRow row;
      row.s = s;
      row.n = n;
      const LogReal Bsn = prof.B[static_cast<std::size_t>(s + n)];
      const LogReal total = Bsum(s, s + n);
      row.ratio5 = Bsn / total;
      row.tail_sum = Bsum(s + n - m, s + n);
      row.head_sum = Bsum(s, s + n - m - 1);
      row.ratio7 = row.tail_sum / row.head_sum;
      const LogReal recent = m > 0 ? Bsum(s + n - m, s + n - 1) : LogReal::zero();
      row.test9 = Bsn - eps * recent;
      row.not_witness = row.tail_sum > eps * row.head_sum;

      LogReal margin = -(LogReal::from_real(params.M) * ln_inv_delta(s + n));
      for (int i = 1; i <= m; ++i) margin += LogReal::from_log(ln_inv_delta(s + n - i).ln_mag() + (i - 1) * kLn2);
      row.margin10 = margin;

      // B-translation of the margin: B_{s+n} < recent / (2M).
      const LogReal test10 = Bsn - eps10 * recent;
      bool ok = true;
      const double rel = std::abs(test10.ln_mag() - Bsn.ln_mag());
      if (!(test10.is_zero() || margin.is_zero()) && rel > -30.0) {
        ok = ok && (margin.sign() == -test10.sign());
      }
      if (m == 0) {
        const double r5 = row.ratio5.to_real();
        const double expect = r5 / (1.0 - r5);
        ok = ok && std::abs(row.ratio7.to_real() - expect) <= 1e-9 * std::max(1.0, expect);
      }
      ok = ok && row.ratio5 <= (row.tail_sum / (row.tail_sum + row.head_sum)) * LogReal::from_real(1.0 + 1e-12);
      row.consistent = ok;
      rep.consistent = rep.consistent && ok;
      rep.rows.push_back(row);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Extension property verdicts

std::string ternary_name(Ternary t) {
  switch (t) {
    case Ternary::Yes: return "yes";
    case Ternary::No: return "no";
    case Ternary::Undetermined: return "undetermined";
  }
  return "?";
}

EPVerdict classify_ep(const GammaModel& model) {
  const auto& s = model.spec();
  switch (s.family) {
    case Family::PowerLaw:
      return {Ternary::Yes, "monotone convergent B_k satisfy the uniform ratio condition"};
    case Family::Exponential:
      return {Ternary::Yes, "monotone convergent B_k satisfy the uniform ratio condition"};
    case Family::DoublyExp:
      if (s.a <= 2.0) return {Ternary::Yes, "regular B_k with beta_k -> ln(a/2) <= 0: ratio condition holds"};
      return {Ternary::No, "regular B_k with beta_k -> ln(a/2) > 0: not subexponential"};
    case Family::Example1:
      return {Ternary::Yes, "constant B_k: ratio B_{s+n}/sum = 1/(n+1) -> 0 uniformly"};
    case Family::Example2: {
      // Growth condition k_{j+1}^2 / A_j -> 0 and gaps k_{j+1} - k_j increasing.
      const int J = s.ex2.k.empty() ? 8 : std::max(2, static_cast<int>(s.ex2.k.size()) - 1);
      bool ok = true;
      double prev_ratio = kInf;
      int prev_gap = 0;
      for (int j = 1; j <= J; ++j) {
        const double kj1 = s.ex2.k_at(j + 1);
        const double ratio = kj1 * kj1 / s.ex2.A(j);
        const int gap = s.ex2.k_at(j + 1) - s.ex2.k_at(j);
        if (j > J / 2 && !(ratio < prev_ratio)) ok = false;
        if (!(gap > prev_gap)) ok = false;
        prev_ratio = ratio;
        prev_gap = gap;
      }
      if (ok && prev_ratio < 1.0)
        return {Ternary::No, "irregular B_k: witness s=k_j, n=k_{j+1}-k_j violates the ratio condition"};
      return {Ternary::Undetermined, "supplied k_j do not verify k_{j+1}^2/A_j -> 0 with increasing gaps"};
    }
    case Family::Example3:
      return {Ternary::Yes, "regular B_k with beta_k -> 0: subexponential growth"};
    case Family::DeltaForm:
      if (s.b <= 2.0) return {Ternary::Yes, "B_k = (b/2)^k/2 of subexponential growth for b <= 2"};
      return {Ternary::No, "B_k = (b/2)^k/2 grows exponentially for b > 2"};
    case Family::FromDimensionFunction: {
      const auto& h = s.h;
      if (h.alpha0 == 1.0 && h.kind != LogPowerSpec::Kind::PlusEps)
        return {Ternary::Yes, "(ln 1/h^{-1}(2^-k))^{1/k} -> 2"};
      if (h.kind == LogPowerSpec::Kind::PlusEps && h.alpha0 == 0.0)
        return {Ternary::No, "(ln 1/h^{-1}(2^-k))^{1/k} -> infinity"};
      return {Ternary::No, "(ln 1/h^{-1}(2^-k))^{1/k} -> 2^{1/alpha0} != 2"};
    }
    case Family::Custom:
      return {Ternary::Undetermined, "finite data cannot decide a limit condition; see diagnostics"};
  }
  return {Ternary::Undetermined, "unknown family"};
}

}  // namespace kgamma
