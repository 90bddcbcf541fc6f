#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "kgamma/cantor_geometry.hpp"
#include "kgamma/errors.hpp"
#include "kgamma/ext_float.hpp"
#include "kgamma/gamma_model.hpp"
#include "kgamma/jet.hpp"
#include "kgamma/log_real.hpp"

namespace kgamma {

// ---------------------------------------------------------------------------
// Schedule

/// n_0 = n_1 = 2, n_s = floor(log2 ln(1/delta_s)); N_s = 2^{n_s} - 1,
/// M_s = 2^{n_{s-1}-1} - 1, M_0 = 1.
class Schedule {
 public:
  static Schedule build(const GammaModel& model, int S_max);

  int S_max() const { return static_cast<int>(n_.size()) - 1; }
  int n(int s) const { return n_.at(static_cast<std::size_t>(s)); }
  std::int64_t N(int s) const { return (std::int64_t{1} << n(s)) - 1; }
  std::int64_t M(int s) const { return s == 0 ? 1 : (std::int64_t{1} << (n(s - 1) - 1)) - 1; }
  /// n with 2^n <= N < 2^{n+1}.
  static int level_of(std::int64_t N);
  /// Deepest geometry level touched when evaluating W through level S.
  int levels_needed(int S) const { return S + n(S) + 2; }

 private:
  std::vector<int> n_;
};

// ---------------------------------------------------------------------------
// Bump function

/// C-infinity step psi(tau) = a/(a+b), a = exp(-1/tau), b = exp(-1/(1-tau));
/// 0 for tau <= 0 and 1 for tau >= 1.
double smooth_step(double tau);
Jet<double, 3> smooth_step_jet(double tau);

/// sup |u^{(p)}| t^p for p = 0..3 measured on a fine grid (monotone in p).
const std::array<double, 4>& bump_constants();

/// Contribution of one component [a, b] at x, given da = (x - a)/t and
/// db = (x - b)/t: rises over [a - 2t/3, a - t/3], falls over [b + t/3, b + 2t/3].
/// Jet coefficients are in units of t (derivative p carries t^{-p}).
Jet<double, 3> component_bump(double da_over_t, double db_over_t);

/// Bump for explicit components in double coordinates.
struct BumpSpec {
  double t = 1.0;
  std::vector<std::pair<double, double>> components;

  /// Merges basic intervals whose gaps are <= 4t/3 into components.
  static BumpSpec from_intervals(double t, const std::vector<std::pair<double, double>>& intervals);
  double operator()(double x) const;
};

/// A real number as a point of K plus an offset; differences between loci
/// keep relative precision at any depth.
struct Locus {
  PointId anchor;
  ExtFloat offset;
};

/// x - p for a locus x and a point p of K.
ExtFloat locus_minus(const LocalGeometry& g, const Locus& x, const PointId& p);

/// u(x, t, I_{j,s} cap K) and its first three derivatives (as Taylor
/// coefficients in x). Components are depth-resolved basic intervals whose
/// gaps are <= 4t/3.
struct BumpValue {
  Jet<ExtFloat, 3> jet;
  int components_touched = 0;
  double value() const { return jet[0].to_double(); }
};
BumpValue bump(const LocalGeometry& g, const Locus& x, const ExtFloat& t, int s, std::int64_t j);

// ---------------------------------------------------------------------------
// Functions and divided differences

/// f given by its Taylor coefficients a_m = f^{(m)}(c)/m! at any real c.
class TaylorFunction {
 public:
  virtual ~TaylorFunction() = default;
  virtual std::string name() const = 0;
  virtual void coefficients(double c, int m_max, std::vector<ExtFloat>& a) const = 0;
  double value(double x) const;
  /// Polynomial degree, or -1 for non-polynomials.
  virtual int degree() const { return -1; }
};

std::unique_ptr<TaylorFunction> make_polynomial(std::vector<double> coeffs);  // sum c_k x^k
std::unique_ptr<TaylorFunction> make_sine();
std::unique_ptr<TaylorFunction> make_cosine();
std::unique_ptr<TaylorFunction> make_exp();

/// Classic triangular table; coefficient k is [z_1..z_{k+1}]f. Throws
/// NodeCollisionError for coincident nodes.
template <typename T>
std::vector<T> divided_differences(const std::vector<T>& nodes, const std::vector<T>& values) {
  const std::size_t n = nodes.size();
  if (values.size() != n) throw ParameterError("nodes and values differ in length");
  std::vector<T> t = values;
  std::vector<T> out;
  out.reserve(n);
  if (n == 0) return out;
  out.push_back(t[0]);
  for (std::size_t k = 1; k < n; ++k) {
    for (std::size_t i = 0; i + k < n; ++i) {
      const T d = nodes[i + k] - nodes[i];
      if (d == T(0)) throw NodeCollisionError("coincident interpolation nodes");
      t[i] = (t[i + 1] - t[i]) / d;
    }
    out.push_back(t[0]);
  }
  return out;
}

/// Divided differences of f at c + y_i (y_i >= 0) via Taylor coefficients at c:
/// [c+y_1..c+y_{k+1}]f = sum_d a_{k+d} h_d(y_1..y_{k+1}), h_d the complete
/// homogeneous symmetric polynomials. All h_d are positive, so nothing cancels.
std::vector<ExtFloat> taylor_divided_differences(const TaylorFunction& f, double c, const std::vector<ExtFloat>& y,
                                                 int extra_terms = 40);

// ---------------------------------------------------------------------------
// Operator W

struct LevelTerms {
  int s = 0;
  int nonzero_A = 0;  // intervals I_{j,s} with some u(x, t_N, .) != 0
  int nonzero_T = 0;  // intervals I_{k,s+1} with u(x, delta_{s+n_s-1}, .) != 0
  double A_sum = 0.0;
  double T_sum = 0.0;
};

struct WEvaluation {
  double value = 0.0;
  std::vector<LevelTerms> levels;
  bool locality_ok = true;
};

/// W truncated after level S (base term, A_{j,s} and T_{k,s} for s <= S).
WEvaluation evaluate_W(const TaylorFunction& f, const Locus& x, const LocalGeometry& g, const Schedule& sch, int S);

/// L_N(f, x, I_{j,s}) with N+1 rule nodes, evaluated by Newton's form.
double newton_interpolant(const TaylorFunction& f, const Locus& x, const LocalGeometry& g, int s, std::int64_t j,
                          std::int64_t N);

struct TruncationCheck {
  int S = 0;
  int s = 0;  // S + 1, level of the telescoped interpolant
  int n = 0;  // n_S - 1
  std::int64_t M = 0;
  ExtFloat observed;   // |f(x) - L_{M_{S+1}}(f, x, I_{j,S+1})| by the Newton remainder
  ExtFloat lm_sum;     // ||f||_q sum_k |x - z_k|^q |omega_k(x)|
  LogReal bound;       // ||f||_q 2^n C0^{q-1} (8C0/7)^{2^n} delta_{s+n} delta_s^{q-1}
  bool within = false;
};

/// Error of W_S at x in K, with the certified truncation bound for order q.
TruncationCheck truncation_check(const TaylorFunction& f, const PointId& x, const LocalGeometry& g, const Schedule& sch,
                                 int S, int q, double norm_q);

// ---------------------------------------------------------------------------
// Whitney norms on finite samples

class JetSource {
 public:
  virtual ~JetSource() = default;
  virtual int max_order() const = 0;
  /// f^{(k)}(p).
  virtual ExtFloat derivative(const PointId& p, int k) const = 0;
  /// (R_y^q f)^{(k)}(x) = f^{(k)}(x) - sum_{i=k}^q f^{(i)}(y) (x-y)^{i-k}/(i-k)!.
  virtual ExtFloat remainder(const PointId& y, const PointId& x, int q, int k) const;

 protected:
  explicit JetSource(const LocalGeometry& g) : g_(g) {}
  const LocalGeometry& g_;
};

/// Jets from an analytic f; remainders summed from the Taylor tail at y.
class TaylorJetSource : public JetSource {
 public:
  TaylorJetSource(const LocalGeometry& g, const TaylorFunction& f) : JetSource(g), f_(f) {}
  int max_order() const override { return 120; }
  ExtFloat derivative(const PointId& p, int k) const override;
  ExtFloat remainder(const PointId& y, const PointId& x, int q, int k) const override;

 private:
  const TaylorFunction& f_;
};

/// Explicit jets (orders 0..order) at listed points.
class ExplicitJetSource : public JetSource {
 public:
  ExplicitJetSource(const LocalGeometry& g, std::vector<PointId> points, std::vector<std::vector<double>> jets);
  int max_order() const override { return order_; }
  ExtFloat derivative(const PointId& p, int k) const override;

 private:
  std::vector<PointId> points_;
  std::vector<std::vector<double>> jets_;
  int order_ = 0;
};

/// prod_{k}(x - z_k) on K cap I_{1,s}, zero on the rest of K.
class ProductJetSource : public JetSource {
 public:
  ProductJetSource(const LocalGeometry& g, int s, std::vector<PointId> nodes);
  int max_order() const override { return 1 << 20; }
  ExtFloat derivative(const PointId& p, int k) const override;
  ExtFloat remainder(const PointId& y, const PointId& x, int q, int k) const override;
  bool inside(const PointId& p) const;

 private:
  /// f^{(i)}(p)/i! for i = 0..r.
  std::vector<ExtFloat> taylor_at(const PointId& p) const;
  int s_;
  std::vector<PointId> nodes_;
};

struct JetSample {
  std::vector<PointId> points;
  const JetSource* f = nullptr;
};

struct WhitneyNorm {
  double sup_part = 0.0;        // |f|_{q,K} on the sample
  double remainder_part = 0.0;  // sup of remainder quotients on the sample
  double value() const { return sup_part + remainder_part; }
};

/// Finite-sample ||f||_q; a lower bound of the norm on K.
WhitneyNorm whitney_norms(const JetSample& sample, const LocalGeometry& g, int q);

// ---------------------------------------------------------------------------
// (DN) experiment

struct DNRow {
  int j = 0;  // sequence index (0 if not from a k_j list)
  int s = 0;
  int n = 0;
  int m = 0;
  double ln_cfree = 0.0;         // ln of the constant-free right side
  double ln_certified = 0.0;     // with certified constants for |f|_0, |f^{(q)}(0)|, ||f||_r
  double half_ln_inv_delta = 0.0;  // (1/2) ln(1/delta_{s+n})
  double ln_f0_bound = 0.0;      // ln of C0^r delta_{n+s} delta_{n+s-1} ... delta_s^{2^{n-1}}
  double ln_fq_bound = 0.0;      // ln of q! (7/8)^{r-q} delta_{n+s-m-1}^{2^m} ... delta_s^{2^{n-1}}
  bool has_direct = false;
  double ln_f0_direct = 0.0;     // max of |f| over K cap I_{1,s} sampled at depth s+n+2
  double ln_fq_direct = 0.0;     // ln |f^{(q)}(0)|
};

struct DNParams {
  double epsilon = 0.25;
  int m = 0;
  std::vector<std::pair<int, int>> sn;  // (s, n) pairs
  std::vector<int> j_labels;            // optional labels, same length as sn
  bool direct = false;                  // sample |f|_0 and |f^{(q)}(0)| when n is small
};

struct DNReport {
  std::vector<DNRow> rows;
  bool cfree_increasing = false;
  bool certified_increasing = false;
};

DNReport dn_experiment(const GammaModel& model, const DNParams& params);

/// (s, n) = (k_j, k_{j+1} - k_j) for the irregular family, j in [j_from, j_to].
std::vector<std::pair<int, int>> witness_pairs(const Example2Spec& spec, int j_from, int j_to);

// ---------------------------------------------------------------------------
// Inequality checks on small node sets

/// d_1 <= d_2 <= ... : sorted distances from x to the points.
std::vector<ExtFloat> sorted_distances(const std::vector<ExtFloat>& x_minus_points);

struct BoundReport {
  int cases = 0;
  int violations = 0;
  double worst_log_margin = 0.0;  // min over cases of ln(rhs/lhs)
  bool ok() const { return violations == 0; }
};

/// delta_{s+n} prod_{k=2}^N d_k(x, Z_N) <= C1^N prod_{k=2}^{N+1} d_k(z, Z) for
/// x = z_i +- theta delta_{s+n}, theta in {0, 1/2, 1}, and all z in Z.
BoundReport check_distance_product_bound(const LocalGeometry& g, int s, std::int64_t j, int N);

/// Exhaustive chains: some z in J has prod_{k=q+2}^{N+1} d_k(z, Z) <= Pi(J).
BoundReport check_chain_product_bound(const LocalGeometry& g, int s, std::int64_t j, int N, int q);

/// Minimum over chains [jj, jj+q] = [a_0,b_0] c ... c [a_{N-q}, b_{N-q}] = [1, N+1]
/// of prod_{k>=1} dist[a_k][b_k], by exhaustive enumeration; 1-based indices
/// into points sorted by position.
ExtFloat chain_minimum(const std::vector<std::vector<ExtFloat>>& dist, int jj, int q);

/// |(Omega_N u)^{(p)}(x)| <= 2^p (C0+1) c_p delta_{s+n}^{-p+1} N^p prod_{k=2}^N d_k
/// on a grid of loci near I_{j,s} cap K, p <= min(3, N-1).
BoundReport check_bumped_product_derivatives(const LocalGeometry& g, int s, std::int64_t j, int N, int grid_points);

nlohmann::json dn_report_json(const DNReport& rep);

}  // namespace kgamma
