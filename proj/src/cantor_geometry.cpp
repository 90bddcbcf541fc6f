#include "kgamma/cantor_geometry.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "kgamma/errors.hpp"

namespace kgamma {
namespace {

int sign_of(const BigFloat& x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

// Root of f in [lo, hi] with f(lo) f(hi) <= 0, bisected to the last bit.
template <typename F>
BigFloat bisect(const F& f, BigFloat lo, BigFloat hi, unsigned bits) {
  const int slo = sign_of(f(lo));
  const int shi = sign_of(f(hi));
  if (slo == 0) return lo;
  if (shi == 0) return hi;
  if (slo == shi) throw BracketError("endpoint bracket has no sign change; gamma violates the construction");
  const unsigned max_it = bits + 8192;
  for (unsigned it = 0; it < max_it; ++it) {
    BigFloat mid = (lo + hi) / 2;
    if (mid == lo || mid == hi) break;
    const int sm = sign_of(f(mid));
    if (sm == 0) return mid;
    (sm == slo ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

}  // namespace

PointId PointId::canonical() const {
  PointId c = *this;
  while (c.level > 0) {
    if (!c.right && (c.j % 2 == 1))
      c = {c.level - 1, (c.j + 1) / 2, false};
    else if (c.right && (c.j % 2 == 0))
      c = {c.level - 1, c.j / 2, true};
    else
      break;
  }
  return c;
}

PointId PointId::at_level(int k) const {
  PointId c = canonical();
  if (k < c.level) throw DomainError("point has no representation at a level coarser than its type");
  while (c.level < k) c = c.extended();
  return c;
}

std::int64_t PointId::ancestor(int k) const {
  if (k > level) return at_level(k).j;
  return ((j - 1) >> (level - k)) + 1;
}

bool operator==(const PointId& a, const PointId& b) {
  const PointId ca = a.canonical();
  const PointId cb = b.canonical();
  return ca.level == cb.level && ca.j == cb.j && ca.right == cb.right;
}

BigFloat eval_P(const GammaModel& model, int s, const BigFloat& x) {
  if (s < 0 || s > model.horizon() + 1) throw HorizonError("P_{2^s} needs r_0..r_{s-1} within the horizon");
  std::vector<BigFloat> r;
  for (int i = 0; i < s; ++i) r.push_back(i == 0 ? BigFloat(1) : from_log_real(model.r(i)));
  return eval_P_with(s, x, r);
}

int max_depth_for_precision(const GammaModel& model, unsigned mantissa_bits) {
  const double budget = mantissa_bits / 2.0 - 16.0;
  int D = 0;
  while (D < model.horizon() && -model.delta(D + 1).log2_mag() <= budget) ++D;
  return D;
}

const BasicInterval& CantorTree::interval(int s, std::int64_t j) const {
  const auto& lv = level(s);
  if (j < 1 || j > static_cast<std::int64_t>(lv.size())) throw DomainError("interval index out of range");
  return lv[static_cast<std::size_t>(j - 1)];
}

const BigFloat& CantorTree::point(const PointId& p) const {
  const PointId c = p.canonical();
  if (c.level > depth()) throw DepthError("point type exceeds the tree depth");
  const PointId q = p.level <= depth() ? p : c;
  const BasicInterval& I = interval(q.level, q.j);
  return q.right ? I.right : I.left;
}

CantorTree build_tree(const GammaModel& model, int D, unsigned mantissa_bits) {
  if (D < 0 || D > model.horizon()) throw HorizonError("tree depth outside the model horizon");
  if (mantissa_bits < 64) throw ParameterError("mantissa_bits must be at least 64");
  if (D > max_depth_for_precision(model, mantissa_bits))
    throw DepthError("depth needs delta_D >= 2^{-bits/2+16}; raise mantissa_bits or lower the depth");
  PrecisionScope scope(mantissa_bits);

  CantorTree t;
  t.model_ = model;
  t.bits_ = mantissa_bits;
  for (int i = 0; i <= D; ++i) t.r_.push_back(i == 0 ? BigFloat(1) : from_log_real(model.r(i)));
  t.levels_.resize(static_cast<std::size_t>(D) + 1);
  {
    BasicInterval root;
    root.level = 0;
    root.index = 1;
    root.left = 0;
    root.right = 1;
    root.length = LogReal::one();
    t.levels_[0].push_back(root);
  }
  const auto& r = t.r_;
  for (int s = 0; s < D; ++s) {
    auto& parents = t.levels_[static_cast<std::size_t>(s)];
    auto& children = t.levels_[static_cast<std::size_t>(s) + 1];
    children.reserve(parents.size() * 2);
    const BigFloat half_r = r[static_cast<std::size_t>(s)] / 2;
    const BigFloat& rs = r[static_cast<std::size_t>(s)];
    const BigFloat& rs1 = r[static_cast<std::size_t>(s) + 1];
    auto f_mid = [&](const BigFloat& x) { return BigFloat(eval_P_with(s, x, r) + half_r); };
    auto f_child = [&](const BigFloat& x) {
      const BigFloat p = eval_P_with(s, x, r);
      return BigFloat(p * (p + rs) + rs1);
    };
    for (auto& I : parents) {
      const BigFloat m = bisect(f_mid, I.left, I.right, mantissa_bits);
      const BigFloat e1 = bisect(f_child, I.left, m, mantissa_bits);
      const BigFloat e2 = bisect(f_child, m, I.right, mantissa_bits);
      if (!(I.left < e1 && e1 < e2 && e2 < I.right)) throw BracketError("children are not nested in their parent");
      BasicInterval a;
      a.level = s + 1;
      a.index = 2 * I.index - 1;
      a.left = I.left;
      a.right = e1;
      a.length = to_log_real(BigFloat(e1 - I.left));
      BasicInterval b;
      b.level = s + 1;
      b.index = 2 * I.index;
      b.left = e2;
      b.right = I.right;
      b.length = to_log_real(BigFloat(I.right - e2));
      I.children_gap = to_log_real(BigFloat(e2 - e1));
      children.push_back(std::move(a));
      children.push_back(std::move(b));
    }
  }
  return t;
}

GeometryReport verify_geometry(const CantorTree& tree) {
  GeometryReport rep;
  const GammaModel& model = tree.model();
  const int D = tree.depth();
  PrecisionScope scope(tree.precision_bits());
  const double tol_log2 = -(tree.precision_bits() / 2.0);
  const LogReal eighth = LogReal::from_real(0.125);
  for (int s = 1; s <= D; ++s) {
    GeometryLevelRow row;
    row.s = s;
    row.min_len_over_delta = std::numeric_limits<double>::infinity();
    row.max_len_over_delta = 0.0;
    row.min_gap_over_len = s < D ? std::numeric_limits<double>::infinity() : std::numeric_limits<double>::quiet_NaN();
    const LogReal delta = model.delta(s);
    const auto& lv = tree.level(s);
    for (const auto& I : lv) {
      const LogReal ratio = I.length / delta;
      row.min_len_over_delta = std::min(row.min_len_over_delta, ratio.to_real());
      row.max_len_over_delta = std::max(row.max_len_over_delta, ratio.to_real());
      if (!(ratio.ln_mag() > 0.0 && ratio.ln_mag() < model.ln_C0())) row.length_bounds = false;
      if (s < D) {
        row.min_gap_over_len = std::min(row.min_gap_over_len, (I.children_gap / I.length).to_real());
        // 1 - h/l is the children's share of l, compared without rounding h/l.
        const auto& c1 = tree.interval(s + 1, 2 * I.index - 1);
        const auto& c2 = tree.interval(s + 1, 2 * I.index);
        const LogReal share = (c1.length + c2.length) / I.length;
        if (!(share <= eighth)) row.gap_bound = false;
        if (!(share < LogReal::from_real(4.0) * model.gamma(s + 1))) row.sharp_gap_bound = false;
      }
    }
    // Endpoints at level s are zeros of P_{2^{s+1}}; scale is its minimum r_s^2/4.
    const BigFloat& rs = tree.r()[static_cast<std::size_t>(s)];
    const BigFloat scale = rs * rs / 4;
    for (const auto& I : lv) {
      for (const BigFloat* e : {&I.left, &I.right}) {
        const BigFloat p = eval_P_with(s, *e, tree.r());
        const BigFloat v = boost::multiprecision::abs(BigFloat(p * (p + rs))) / scale;
        const double l2 = v == 0 ? -std::numeric_limits<double>::infinity() : to_log_real(v).log2_mag();
        row.max_rel_residual = std::max(row.max_rel_residual, v == 0 ? 0.0 : std::exp2(l2));
        if (l2 >= tol_log2) rep.residuals_ok = false;
      }
    }
    rep.length_bounds = rep.length_bounds && row.length_bounds;
    rep.gap_bound = rep.gap_bound && row.gap_bound;
    rep.sharp_gap_bound = rep.sharp_gap_bound && row.sharp_gap_bound;
    rep.rows.push_back(row);
  }
  if (D >= 1) {
    const LogReal l1 = tree.interval(1, 1).length;
    const LogReal l2 = tree.interval(1, 2).length;
    rep.symmetric_level1 = std::abs(l1.ln_mag() - l2.ln_mag()) < std::ldexp(1.0, -static_cast<int>(tree.precision_bits()) / 2);
  }
  return rep;
}

NodeSet rule_nodes(int s, std::int64_t j, int N, int max_level) {
  if (s < 0 || j < 1 || (s < 62 && j > (std::int64_t{1} << s))) throw DomainError("no such basic interval");
  if (N < 0) throw ParameterError("node count must be nonnegative");
  NodeSet ns;
  ns.s = s;
  ns.j = j;
  for (bool right : {false, true}) {
    if (static_cast<int>(ns.nodes.size()) >= N) break;
    const PointId p{s, j, right};
    ns.nodes.push_back({p, p.type()});
  }
  int k = s;
  while (static_cast<int>(ns.nodes.size()) < N) {
    ++k;
    if (k > max_level) throw DepthError("node count needs point types beyond the available depth");
    const std::size_t cur = ns.nodes.size();
    for (std::size_t i = 0; i < cur && static_cast<int>(ns.nodes.size()) < N; ++i) {
      const PointId q = ns.nodes[i].id.at_level(k);
      ns.nodes.push_back({PointId{k, q.j, !q.right}, k});
    }
  }
  return ns;
}

NodeSet select_nodes(const CantorTree& tree, int s, std::int64_t j, int N) {
  if (s > tree.depth()) throw DepthError("interval level exceeds the tree depth");
  return rule_nodes(s, j, N, tree.depth());
}

// ---------------------------------------------------------------------------
// LocalGeometry

LocalGeometry::LocalGeometry(const GammaModel& model) : model_(model) {
  gamma_d_.push_back(0.0);
  gamma_x_.push_back(ExtFloat());
  for (int k = 1; k <= model.horizon(); ++k) {
    gamma_d_.push_back(model.gamma(k).to_real());
    gamma_x_.push_back(ExtFloat::from_log(model.gamma(k)));
  }
}

LocalGeometry::Chain LocalGeometry::chain(const PointId& p) const {
  const int k = p.level;
  if (k > max_level()) throw DepthError("point level beyond the model horizon");
  Chain c;
  c.branch.assign(static_cast<std::size_t>(k) + 1, 0);
  c.v.assign(static_cast<std::size_t>(k) + 1, 0.0);
  int o = -1;  // v_0 = 1 - x decreases in x
  for (int i = 1; i <= k; ++i) {
    const int child = static_cast<int>(((p.j - 1) >> (k - i)) & 1);
    const int b = o == 1 ? child : 1 - child;
    c.branch[static_cast<std::size_t>(i)] = b;
    if (b == 1) o = -o;
  }
  double v = (p.right == (o == 1)) ? 1.0 : 0.0;
  c.v[static_cast<std::size_t>(k)] = v;
  for (int i = k; i >= 1; --i) {
    const double g = gamma_d_[static_cast<std::size_t>(i)];
    const double S = std::sqrt(1.0 - 4.0 * g * v);
    const double g0 = 2.0 * g * v / (1.0 + S);
    v = c.branch[static_cast<std::size_t>(i)] == 0 ? g0 : 1.0 - g0;
    c.v[static_cast<std::size_t>(i) - 1] = v;
  }
  return c;
}

double LocalGeometry::coordinate(const PointId& p) const {
  const double x = 1.0 - chain(p).v[0];
  // 1 - v_0 cancels near 0; the difference from 0 keeps relative precision there.
  return x < 0.5 ? diff(p, {0, 1, false}).to_double() : x;
}

ExtFloat LocalGeometry::diff(const PointId& p0, const PointId& q0) const {
  PointId p = p0;
  PointId q = q0;
  const int m = std::max(p.level, q.level);
  while (p.level < m) p = p.extended();
  while (q.level < m) q = q.extended();
  const Chain cp = chain(p);
  const Chain cq = chain(q);
  const auto x = static_cast<std::uint64_t>((p.j - 1) ^ (q.j - 1));
  const int a = m - static_cast<int>(std::bit_width(x));
  ExtFloat dv(cp.v[static_cast<std::size_t>(a)] - cq.v[static_cast<std::size_t>(a)]);
  for (int i = a; i >= 1; --i) {
    const auto ii = static_cast<std::size_t>(i);
    const double g = gamma_d_[ii];
    const double Sp = std::sqrt(1.0 - 4.0 * g * cp.v[ii]);
    const double Sq = std::sqrt(1.0 - 4.0 * g * cq.v[ii]);
    dv = dv * gamma_x_[ii] * ExtFloat(2.0 / (Sp + Sq));
    if (cp.branch[ii] == 1) dv = -dv;
  }
  return -dv;
}

ExtFloat LocalGeometry::length(int s, std::int64_t j) const { return diff({s, j, true}, {s, j, false}); }

ExtFloat LocalGeometry::gap(int s, std::int64_t j) const {
  if (s + 1 > max_level()) throw DepthError("gap needs the next level within the horizon");
  return diff({s + 1, 2 * j, false}, {s + 1, 2 * j - 1, true});
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json intervals_json(const CantorTree& tree, int digits) {
  nlohmann::json out = nlohmann::json::array();
  for (int s = 0; s <= tree.depth(); ++s) {
    for (const auto& I : tree.level(s)) {
      out.push_back({{"level", I.level},
                     {"index", I.index},
                     {"left", to_decimal(I.left, digits)},
                     {"right", to_decimal(I.right, digits)},
                     {"ln_length", I.length.ln_mag()}});
    }
  }
  return out;
}

nlohmann::json nodes_json(const CantorTree& tree, const NodeSet& ns, int digits) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : ns.nodes) {
    nodes.push_back({{"value", to_decimal(tree.point(n.id), digits)},
                     {"type", n.type},
                     {"level", n.id.level},
                     {"index", n.id.j},
                     {"side", n.id.right ? "right" : "left"}});
  }
  return {{"level", ns.s}, {"index", ns.j}, {"nodes", nodes}};
}

nlohmann::json geometry_report_json(const GeometryReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"s", r.s},
                    {"min_len_over_delta", r.min_len_over_delta},
                    {"max_len_over_delta", r.max_len_over_delta},
                    {"min_gap_over_len", std::isnan(r.min_gap_over_len) ? nlohmann::json() : nlohmann::json(r.min_gap_over_len)},
                    {"length_bounds", r.length_bounds},
                    {"gap_bound", r.gap_bound},
                    {"sharp_gap_bound", r.sharp_gap_bound},
                    {"max_rel_residual", r.max_rel_residual}});
  }
  return {{"rows", rows},
          {"length_bounds", rep.length_bounds},
          {"gap_bound", rep.gap_bound},
          {"sharp_gap_bound", rep.sharp_gap_bound},
          {"residuals_ok", rep.residuals_ok},
          {"symmetric_level1", rep.symmetric_level1}};
}

}  // namespace kgamma
