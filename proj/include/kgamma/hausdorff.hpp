#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kgamma/big_float.hpp"
#include "kgamma/cantor_geometry.hpp"
#include "kgamma/ext_float.hpp"
#include "kgamma/extension_operator.hpp"
#include "kgamma/gamma_model.hpp"

namespace kgamma {

/// A dimension function evaluated through ln t, so arguments far below the
/// double range are fine. Values are 2^{-eta(t)} with eta(delta_k) = k, or
/// h_0^alpha with h_0(t) = 1/ln(1/t).
class DimensionFunction {
 public:
  enum class Kind { EtaFromDelta, LogPower };

  /// eta linear in ln t between consecutive delta_k; domain [delta_K, 1].
  static DimensionFunction eta_from_delta(const GammaModel& model);
  static DimensionFunction log_power(const LogPowerSpec& spec);
  /// h_0 itself.
  static DimensionFunction h0();

  Kind kind() const { return kind_; }
  std::string name() const;
  const LogPowerSpec& spec() const { return spec_; }

  /// Upper end of the domain as ln t0; h is used for ln t <= ln_t0().
  double ln_t0() const;
  /// Lower end as ln t (-inf for LogPower).
  double ln_t_min() const;
  bool in_domain(double ln_t) const;

  /// h(t) for t = exp(ln_t); ln_t = -inf gives 0. Throws DomainError.
  double at_ln(double ln_t) const;
  double operator()(double t) const;
  /// -log2 h(t).
  double eta_at_ln(double ln_t) const;
  /// ln h^{-1}(tau), the exact inverse. Throws DomainError.
  double inverse_ln(double tau) const;
  double inverse(double tau) const;
  /// ln h'(t), analytic; LogPower only.
  double ln_derivative(double ln_t) const;

 private:
  Kind kind_ = Kind::LogPower;
  LogPowerSpec spec_;
  std::vector<double> ln_delta_;  // k = 0..K, ln_delta_[0] = 0
  std::string model_name_;
};

/// Sorted disjoint closed atoms, addressed through hull lengths only.
class AtomSet {
 public:
  virtual ~AtomSet() = default;
  virtual std::size_t size() const = 0;
  /// ln(right_j - left_i) for i <= j; -inf when the hull is a point.
  virtual double ln_hull(std::size_t i, std::size_t j) const = 0;
};

/// Atoms with explicit endpoints, exact at a fixed working precision.
class IntervalAtoms : public AtomSet {
 public:
  struct Atom {
    BigFloat left;
    BigFloat right;
    std::string label;
  };

  IntervalAtoms(std::vector<Atom> atoms, unsigned mantissa_bits);

  std::size_t size() const override { return atoms_.size(); }
  double ln_hull(std::size_t i, std::size_t j) const override;
  const std::vector<Atom>& atoms() const { return atoms_; }
  unsigned bits() const { return bits_; }

  /// Intersection with [lo, hi]; may be empty.
  IntervalAtoms clip(const BigFloat& lo, const BigFloat& hi) const;

 private:
  std::vector<Atom> atoms_;
  unsigned bits_;
};

/// The countable set {0} cup I_1 cup I_2 ... with I_k = [b_k - b_k^{Q_k}, b_k],
/// b_k = e^{-k}.
struct Example4Spec {
  enum class QKind { Constant, LogK };  // Q_k = Q  or  max(2, ln k)
  QKind q_kind = QKind::Constant;
  double Q = 2.0;
  int K_max = 60;

  void validate() const;
  double Q_at(int k) const;
  /// Bits that resolve every atom length against its position.
  unsigned bits_needed() const;
};

/// Residual [0, b_{K+1}] first, then I_K, ..., I_{k_min} left to right.
IntervalAtoms example4_atoms(const Example4Spec& spec, int k_min = 1);
/// Index of I_k in example4_atoms(spec, k_min).
std::size_t example4_index(const Example4Spec& spec, int k, int k_min = 1);
BigFloat example4_b(int k);
BigFloat example4_a(const Example4Spec& spec, int k);

/// An endpoint of a possibly clipped depth-D basic interval.
struct TreeAtom {
  Locus left;
  Locus right;
  std::int64_t j = 1;  // index at the atom depth
};

/// Depth-D basic intervals (or their clipped pieces) on LocalGeometry.
class TreeAtoms : public AtomSet {
 public:
  TreeAtoms(const LocalGeometry& g, int depth, std::vector<TreeAtom> atoms);
  /// All depth-D descendants of I_{j,s}.
  static TreeAtoms descendants(const LocalGeometry& g, int s, std::int64_t j, int depth);
  /// K cap [x - r, x + r] at depth D.
  static TreeAtoms ball(const LocalGeometry& g, int depth, const Locus& x, const ExtFloat& r);

  std::size_t size() const override { return atoms_.size(); }
  double ln_hull(std::size_t i, std::size_t j) const override;
  int depth() const { return depth_; }
  const std::vector<TreeAtom>& atoms() const { return atoms_; }

 private:
  const LocalGeometry* g_;
  int depth_;
  std::vector<TreeAtom> atoms_;
};

struct Covering {
  double value = 0.0;
  /// Inclusive runs [first, last] of consecutive atoms, one per covering interval.
  std::vector<std::pair<std::size_t, std::size_t>> runs;
};

/// Exact minimum of sum h(|G_i|) over finite interval coverings at atom
/// resolution: an optimal interval shrinks to the hull of the atoms it covers,
/// so the optimum is a partition into consecutive runs. O(m^2).
Covering content_dp(const AtomSet& atoms, const DimensionFunction& h);
/// The same minimum by enumerating all 2^{m-1} run partitions; m <= 20.
Covering content_bruteforce(const AtomSet& atoms, const DimensionFunction& h);

/// sum over j of h(l_{j,k}); with (k0, j0) only over the level-k descendants
/// of I_{j0,k0}.
double lambda_level_estimate(const LocalGeometry& g, const DimensionFunction& h, int k);
double lambda_level_estimate(const LocalGeometry& g, const DimensionFunction& h, int k, int k0,
                             std::int64_t j0);
/// exp(ln C0 ln 2 / ln(1/gamma_k)): the level sum at k lies in (1, a_k).
double level_sum_cap(const GammaModel& model, int k);

struct DensityCell {
  double ln_r = 0.0;
  std::string x;
  double phi = 0.0;
  double ratio = 0.0;  // phi / h(2r)
};

struct DensityRow {
  double ln_r = 0.0;
  std::string label;  // which radius family the row belongs to
  std::string argmin_x;
  double inf_phi = 0.0;
  double h_2r = 0.0;
  double ratio = 0.0;
  double running_min = 0.0;
};

struct DensityTable {
  std::vector<DensityRow> rows;  // radii in decreasing order
  std::vector<DensityCell> cells;
  /// Minimum ratio over the smaller half of the radii.
  double liminf_estimate = 0.0;
  double analytic_limit = 0.0;
};

struct Example4Radius {
  BigFloat r;
  std::string label;
};

/// r_k = b_k - b_{k+1} and b_{k+1} for k in [k_from, k_to].
std::vector<Example4Radius> example4_radii(const Example4Spec& spec, int k_from, int k_to);

/// phi(x, r) = M_h(K cap B(x, r)) by content_dp over clipped atoms, for x in
/// {0} and the endpoints of I_k, k <= K_max. The atoms beyond scale r are
/// truncated `tail_window` indices past ln(1/r) with a residual [0, b].
DensityTable density_scan_example4(const Example4Spec& spec, const DimensionFunction& h,
                                   const std::vector<Example4Radius>& radii, int tail_window = 24,
                                   bool keep_cells = false);

/// r = (7/8) delta_{k-1} for k in [k_from, k_to].
std::vector<std::pair<ExtFloat, std::string>> tree_radii(const GammaModel& model, int k_from,
                                                         int k_to);

/// The same scan on K(gamma). For each r, atoms have depth k(r) + extra with
/// k(r) the first level where delta_k < r, and x runs over the endpoints of
/// the level-x_level intervals.
DensityTable density_scan_tree(const LocalGeometry& g, const DimensionFunction& h,
                               const std::vector<std::pair<ExtFloat, std::string>>& radii,
                               int x_level, int extra = 3, bool keep_cells = false);

struct EPTest {
  std::vector<int> k;
  std::vector<double> a;  // (ln 1/h^{-1}(2^{-k}))^{1/k}
  double last = 0.0;
  double analytic_limit = 0.0;  // +inf when divergent
  bool ep = false;
};

/// a_k for k in [k_from, k_to]; verdict from the closed form limit 2^{1/alpha_0}.
EPTest kth_root_test(const LogPowerSpec& spec, int k_from, int k_to);

enum class Order { Precedes, Equivalent, Succeeds, Incomparable };
std::string order_name(Order o);

struct OrderReport {
  std::vector<double> ln_t;
  std::vector<double> eta_diff;  // eta_1 - eta_2 = log2(h2/h1)
  double spread = 0.0;
  double trend = 0.0;
  Order order = Order::Incomparable;
};

/// h1 precedes h2 when h1 = o(h2), i.e. eta_1 - eta_2 grows; decided on the
/// grid: spread <= 2.5 is equivalence, a monotone rise of >= 3 is precedence.
OrderReport compare_dimension_functions(const DimensionFunction& h1, const DimensionFunction& h2,
                                        const std::vector<double>& ln_t_grid);

struct DoublingRow {
  int k = 0;
  double h_C0_delta = 0.0;
  double two_h_next = 0.0;
  bool holds = false;
};

/// h(C0 delta_k) < 2 h(delta_{k+1}) for k in [k_from, k_to].
std::vector<DoublingRow> parent_cover_check(const GammaModel& model, const DimensionFunction& h,
                                            int k_from, int k_to);
/// Number of level-k intervals whose two children the DP covers separately.
int children_split_count(const LocalGeometry& g, const DimensionFunction& h, int k);

struct DerivativeRow {
  double ln_t = 0.0;
  double ln_lhs = 0.0;  // ln h'(t)
  double ln_rhs = 0.0;  // ln of h h0 alpha / t, or h h0 / t for alpha below alpha_0
};

struct DerivativeCheck {
  std::vector<DerivativeRow> rows;
  bool strict = true;     // lhs < rhs everywhere
  bool nonstrict = true;  // lhs <= rhs up to rounding
};

DerivativeCheck derivative_bound_check(const DimensionFunction& h, const std::vector<double>& ln_t_grid);

nlohmann::json density_table_json(const DensityTable& t);
std::string density_table_csv(const DensityTable& t);
nlohmann::json order_report_json(const OrderReport& r);
nlohmann::json ep_test_json(const EPTest& e);

}  // namespace kgamma
