#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "kgamma/big_float.hpp"
#include "kgamma/ext_float.hpp"
#include "kgamma/gamma_model.hpp"
#include "kgamma/log_real.hpp"

namespace kgamma {

/// An endpoint of the basic interval I_{j,level} (1-based j).
struct PointId {
  int level = 0;
  std::int64_t j = 1;
  bool right = false;

  /// The same point as an endpoint of a level+1 interval.
  PointId extended() const { return right ? PointId{level + 1, 2 * j, true} : PointId{level + 1, 2 * j - 1, false}; }
  /// The same point at its coarsest level; that level is the point's type.
  PointId canonical() const;
  int type() const { return canonical().level; }
  /// The same point as an endpoint of a level-k interval, k >= type().
  PointId at_level(int k) const;
  /// Index of the level-k interval containing the point, k <= level.
  std::int64_t ancestor(int k) const;

  friend bool operator==(const PointId& a, const PointId& b);
};

/// P_{2^s}(x) by P_1 = x - 1, P_{2^{i+1}} = P_{2^i}(P_{2^i} + r_i); r[0..s-1].
template <typename T>
T eval_P_with(int s, const T& x, const std::vector<T>& r) {
  T p = x - T(1);
  for (int i = 0; i < s; ++i) p = p * (p + r[static_cast<std::size_t>(i)]);
  return p;
}

/// P_{2^s}(x) at the current BigFloat precision.
BigFloat eval_P(const GammaModel& model, int s, const BigFloat& x);

struct BasicInterval {
  int level = 0;
  std::int64_t index = 1;
  BigFloat left;
  BigFloat right;
  LogReal length;
  /// h_{j,s}: distance between the two children; zero at the deepest level.
  LogReal children_gap;
};

/// Deepest D with log2(1/delta_D) <= bits/2 - 16, capped at the horizon.
int max_depth_for_precision(const GammaModel& model, unsigned mantissa_bits);

class CantorTree {
 public:
  int depth() const { return static_cast<int>(levels_.size()) - 1; }
  unsigned precision_bits() const { return bits_; }
  const GammaModel& model() const { return model_; }
  const std::vector<BasicInterval>& level(int s) const { return levels_.at(static_cast<std::size_t>(s)); }
  const BasicInterval& interval(int s, std::int64_t j) const;
  const BigFloat& point(const PointId& p) const;
  /// r_0..r_D at the tree precision.
  const std::vector<BigFloat>& r() const { return r_; }

 private:
  friend CantorTree build_tree(const GammaModel& model, int D, unsigned mantissa_bits);
  GammaModel model_;
  unsigned bits_ = kDefaultMantissaBits;
  std::vector<std::vector<BasicInterval>> levels_;
  std::vector<BigFloat> r_;
};

/// Bisection for the endpoints of E_1, ..., E_D inside their parents. Throws
/// DepthError past max_depth_for_precision and BracketError when a sign
/// bracket is missing.
CantorTree build_tree(const GammaModel& model, int D, unsigned mantissa_bits = kDefaultMantissaBits);

struct GeometryLevelRow {
  int s = 0;
  double min_len_over_delta = 0.0;
  double max_len_over_delta = 0.0;
  double min_gap_over_len = 0.0;  // NaN at the deepest level
  bool length_bounds = true;      // delta_s < l < C0 delta_s
  bool gap_bound = true;          // h >= 7/8 l
  bool sharp_gap_bound = true;    // h > (1 - 4 gamma_{s+1}) l
  double max_rel_residual = 0.0;  // |P_{2^{s+1}}(e)| / (r_s^2 / 4) over endpoints e
};

struct GeometryReport {
  std::vector<GeometryLevelRow> rows;
  bool length_bounds = true;
  bool gap_bound = true;
  bool sharp_gap_bound = true;
  bool residuals_ok = true;
  bool symmetric_level1 = true;  // l_{1,1} = l_{2,1}
};

GeometryReport verify_geometry(const CantorTree& tree);

struct Node {
  PointId id;
  int type = 0;
};

struct NodeSet {
  int s = 0;
  std::int64_t j = 1;
  std::vector<Node> nodes;
};

/// N points of I_{j,s} by the rule of increase of the type, using levels up to
/// max_level. Throws DepthError when N needs a finer level.
NodeSet rule_nodes(int s, std::int64_t j, int N, int max_level);

/// rule_nodes resolved against a tree (levels up to its depth).
NodeSet select_nodes(const CantorTree& tree, int s, std::int64_t j, int N);

/// Arbitrary-depth geometry of K(gamma) by relative differences.
///
/// Works in the normalized coordinate v_s = -P_{2^s}/r_s, which maps every
/// level-s interval onto [0,1] and satisfies v_{s+1} = v_s(1 - v_s)/gamma_{s+1}.
/// Differences of nearby points are propagated to x through the inverse
/// branches, so their relative accuracy does not depend on the level.
class LocalGeometry {
 public:
  explicit LocalGeometry(const GammaModel& model);

  const GammaModel& model() const { return model_; }
  int max_level() const { return model_.horizon(); }

  /// x-coordinate with relative precision in double.
  double coordinate(const PointId& p) const;
  /// x_p - x_q with relative precision.
  ExtFloat diff(const PointId& p, const PointId& q) const;
  ExtFloat length(int s, std::int64_t j) const;
  /// h_{j,s}, needs s + 1 <= max_level().
  ExtFloat gap(int s, std::int64_t j) const;

 private:
  struct Chain {
    std::vector<int> branch;  // branch[i]: 0 or 1 for the step from level i-1 to i
    std::vector<double> v;    // v[i] for i = 0..level
  };
  Chain chain(const PointId& p) const;

  GammaModel model_;
  std::vector<double> gamma_d_;    // may underflow to 0
  std::vector<ExtFloat> gamma_x_;  // exact range
};

/// {level, index, left, right, ln_length} per interval.
nlohmann::json intervals_json(const CantorTree& tree, int digits = 40);
nlohmann::json nodes_json(const CantorTree& tree, const NodeSet& ns, int digits = 40);
nlohmann::json geometry_report_json(const GeometryReport& rep);

}  // namespace kgamma
