#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kgamma/log_real.hpp"

namespace kgamma {

/// Exponent profile of a dimension function h = h0^alpha with
/// h0(t) = 1 / ln(1/t). Everything is expressed through ell = ln ln(1/t), which
/// keeps the doubly exponential scales of t out of floating point.
///
/// Kinds: Constant (alpha = alpha0), PlusEps (alpha0 + eps_m), MinusEps
/// (alpha0 - eps_m; alpha0 = 1 is the "1 - eps" family). eps_m(t) is
/// 1 / log_(m)(1/t), the m-fold iterated logarithm, with m >= 3.
struct LogPowerSpec {
  enum class Kind { Constant, PlusEps, MinusEps };
  Kind kind = Kind::Constant;
  double alpha0 = 1.0;
  int m = 3;

  void validate() const;
  std::string name() const;

  /// eps_m as a function of ell; +inf outside the domain of the iterated log.
  double eps(double ell) const;
  /// d eps / d ell.
  double eps_prime(double ell) const;
  double alpha(double ell) const;
  double alpha_prime(double ell) const;
  /// The profile is used for ell > ell_min() only (eps below its cap there).
  double ell_min() const;
  /// h as a function of ell: exp(-alpha(ell) ell).
  double h_of_ell(double ell) const;
  /// Solves alpha(ell) ell = ln(1/tau) for ell; the returned ell gives
  /// h^{-1}(tau) = exp(-exp(ell)). Throws DomainError when tau is outside the
  /// range of h.
  double loglog_inverse(double ln_inv_tau) const;
};

enum class Family {
  PowerLaw,
  Exponential,
  DoublyExp,
  Example1,
  Example2,
  Example3,
  DeltaForm,
  FromDimensionFunction,
  Custom
};

std::string family_name(Family f);
std::optional<Family> parse_family(const std::string& name);

/// Irregular sequence: gamma_k = (k+5)^-2, multiplied by eps_j at k = k_j, with
/// eps_j = exp(-(A_j - A_{j-1})), A_0 = 0.
struct Example2Spec {
  enum class Variant { PowA, PowAHalved };  // A_j = 2^{k_j}  or  2^{k_j - j}
  Variant variant = Variant::PowA;
  /// Strictly increasing k_1 < k_2 < ...; empty means k_j = j^2.
  std::vector<int> k;

  int k_at(int j) const;
  /// A_j itself (not its log); exact in double for the default sequence.
  double A(int j) const;
};

struct FamilySpec {
  Family family = Family::Example1;
  double a = 2.0;  // PowerLaw, Exponential, DoublyExp
  double B = 1.0;  // Example1
  double b = 2.0;  // DeltaForm
  int m = 3;       // Example3
  Example2Spec ex2;
  LogPowerSpec h;              // FromDimensionFunction
  std::vector<double> gammas;  // Custom, gamma_1..gamma_K as declared
};

/// A validated gamma sequence up to a horizon K_max.
///
/// gamma(k) for 1 <= k <= K_max; the first clamp_prefix() entries are the
/// override 1/32 (the iterated-log family: its delta-formula starts at clamp_prefix()+1).
class GammaModel {
 public:
  static GammaModel build(const FamilySpec& spec, int K_max);

  const FamilySpec& spec() const { return spec_; }
  Family family() const { return spec_.family; }
  int horizon() const { return static_cast<int>(gamma_.size()) - 1; }
  int clamp_prefix() const { return clamp_prefix_; }
  const LogReal& gamma(int k) const;
  /// ln delta_k, exact sum of ln gamma_i; delta_0 = 1.
  LogReal delta(int k) const;
  /// ln r_k with r_0 = 1, r_k = gamma_k r_{k-1}^2.
  LogReal r(int k) const;

  /// Sum of all gamma_k (horizon part plus an analytic tail upper bound).
  double gamma_sum_upper() const { return gamma_sum_; }
  /// ln C0 = 16 sum gamma_k.
  double ln_C0() const { return 16.0 * gamma_sum_; }
  double C0() const;

  std::string describe() const;

 private:
  FamilySpec spec_;
  int clamp_prefix_ = 0;
  std::vector<LogReal> gamma_;  // [0] unused
  std::vector<LogReal> delta_;  // [0] = 1
  std::vector<LogReal> r_;      // [0] = 1
  double gamma_sum_ = 0.0;
};

enum class PolarVerdict { Polar, Nonpolar, Undetermined };
std::string polar_name(PolarVerdict v);

struct Profile {
  std::vector<LogReal> delta;          // k = 0..K
  std::vector<LogReal> r;              // k = 0..K
  std::vector<LogReal> B;              // k = 0..K, B[0] unused (zero)
  std::vector<double> beta;            // k = 0..K, beta[0] unused (NaN)
  std::vector<LogReal> robin_partial;  // N = 0..K
  PolarVerdict polar = PolarVerdict::Undetermined;
  std::string polar_rule;

  int horizon() const { return static_cast<int>(delta.size()) - 1; }
};

Profile profile(const GammaModel& model);

struct DiagnosticsRow {
  int s = 0;
  int n = 0;
  LogReal ratio5;        // B_{s+n} / sum_{k=s}^{s+n} B_k
  LogReal tail_sum;      // sum_{k=s+n-m}^{s+n} B_k
  LogReal head_sum;      // sum_{k=s}^{s+n-m-1} B_k
  LogReal ratio7;        // tail_sum / head_sum
  LogReal test9;         // B_{s+n} - eps * sum_{k=s+n-m}^{s+n-1} B_k  (< 0: holds)
  LogReal margin10;      // ln delta_{s+n}^M - ln prod_{i=1}^m delta_{s+n-i}^{2^{i-1}}
  bool not_witness = false;  // tail_sum > eps * head_sum
  bool consistent = true;
};

struct DiagnosticsParams {
  std::vector<int> s_grid;
  std::vector<int> n_grid;
  double epsilon = 0.25;
  int m = 0;
  double M = 2.0;
};

struct DiagnosticsReport {
  std::vector<DiagnosticsRow> rows;
  bool consistent = true;
  bool heuristic = false;  // Custom sequences: no analytic verdict backs the grid
};

DiagnosticsReport condition_diagnostics(const GammaModel& model, const Profile& prof,
                                        const DiagnosticsParams& params);

enum class Ternary { Yes, No, Undetermined };
std::string ternary_name(Ternary t);

struct EPVerdict {
  Ternary ep = Ternary::Undetermined;
  std::string rule;
};

EPVerdict classify_ep(const GammaModel& model);

}  // namespace kgamma
