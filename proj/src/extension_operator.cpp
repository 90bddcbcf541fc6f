#include "kgamma/extension_operator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace kgamma {
namespace {

using XJet = Jet<ExtFloat, 3>;

double ln_delta(const GammaModel& m, int k) { return m.delta(k).ln_mag(); }

ExtFloat delta_x(const GammaModel& m, int k) { return ExtFloat::from_log(m.delta(k)); }

// B_k = ln(1/delta_k) / 2^{k+1}.
double B_of(const GammaModel& m, int k) { return -std::ldexp(ln_delta(m, k), -(k + 1)); }

ExtFloat falling(int i, int k) {
  ExtFloat r(1.0);
  for (int t = 0; t < k; ++t) r *= ExtFloat(static_cast<double>(i - t));
  return r;
}

ExtFloat dist_to_interval(const LocalGeometry& g, const Locus& x, int k, std::int64_t i) {
  const ExtFloat dl = locus_minus(g, x, {k, i, false});
  if (dl.sign() < 0) return -dl;
  const ExtFloat dr = locus_minus(g, x, {k, i, true});
  if (dr.sign() > 0) return dr;
  return {};
}

// Level-`level` intervals within distance `radius` of x.
void near_intervals(const LocalGeometry& g, const Locus& x, int k, std::int64_t i, int level, const ExtFloat& radius,
                    std::vector<std::int64_t>& out) {
  if (dist_to_interval(g, x, k, i) > radius) return;
  if (k == level) {
    out.push_back(i);
    return;
  }
  near_intervals(g, x, k + 1, 2 * i - 1, level, radius, out);
  near_intervals(g, x, k + 1, 2 * i, level, radius, out);
}

std::vector<std::int64_t> near_intervals(const LocalGeometry& g, const Locus& x, int level, const ExtFloat& radius) {
  std::vector<std::int64_t> out;
  near_intervals(g, x, 0, 1, level, radius, out);
  return out;
}

// Newton data for a node list: divided differences and x - z_i.
struct NewtonData {
  std::vector<ExtFloat> dd;
  std::vector<ExtFloat> x_minus_z;
};

NewtonData newton_data(const TaylorFunction& f, const Locus& x, const LocalGeometry& g, const std::vector<PointId>& z,
                       const PointId& left) {
  NewtonData nd;
  std::vector<ExtFloat> y;
  y.reserve(z.size());
  for (const auto& p : z) {
    y.push_back(g.diff(p, left));
    nd.x_minus_z.push_back(locus_minus(g, x, p));
  }
  nd.dd = taylor_divided_differences(f, g.coordinate(left), y);
  return nd;
}

std::vector<PointId> ids(const NodeSet& ns) {
  std::vector<PointId> v;
  v.reserve(ns.nodes.size());
  for (const auto& n : ns.nodes) v.push_back(n.id);
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Schedule

Schedule Schedule::build(const GammaModel& model, int S_max) {
  if (S_max < 0) throw ParameterError("S_max must be nonnegative");
  if (S_max > model.horizon()) throw HorizonError("schedule beyond the gamma horizon");
  Schedule sch;
  for (int s = 0; s <= S_max; ++s) {
    if (s <= 1) {
      sch.n_.push_back(2);
      continue;
    }
    const LogReal d = model.delta(s);
    const double Lh = -d.ln_hi();
    const double Ll = -d.ln_lo();
    int n = static_cast<int>(std::floor(std::log2(Lh)));
    // Exact floor against the double-double ln(1/delta_s).
    auto at_least = [&](int e) { return (Lh - std::ldexp(1.0, e)) + Ll >= 0.0; };
    while (at_least(n + 1)) ++n;
    while (!at_least(n)) --n;
    n = std::max(n, 2);
    if (n < sch.n_.back()) throw ValidationError("schedule n_s decreased; delta is not decreasing");
    if (n > 60) throw HorizonError("schedule n_s too large for explicit node sets");
    sch.n_.push_back(n);
  }
  return sch;
}

int Schedule::level_of(std::int64_t N) {
  if (N < 1) throw ParameterError("N must be positive");
  return static_cast<int>(std::bit_width(static_cast<std::uint64_t>(N))) - 1;
}

// ---------------------------------------------------------------------------
// Bump

double smooth_step(double tau) { return smooth_step_jet(tau)[0]; }

Jet<double, 3> smooth_step_jet(double tau) {
  using J = Jet<double, 3>;
  if (tau <= 0.0) return J(0.0);
  if (tau >= 1.0) return J(1.0);
  const J t = J::variable(tau);
  const J a = exp(-(J(1.0) / t));
  const J b = exp(-(J(1.0) / (J(1.0) - t)));
  if (a[0] == 0.0) return J(0.0);
  if (b[0] == 0.0) return J(1.0);
  return a / (a + b);
}

const std::array<double, 4>& bump_constants() {
  static const std::array<double, 4> c = [] {
    std::array<double, 4> r{1.0, 0.0, 0.0, 0.0};
    const int n = 200000;
    for (int i = 1; i < n; ++i) {
      const auto j = smooth_step_jet(static_cast<double>(i) / n);
      double f = 1.0;
      for (int p = 1; p <= 3; ++p) {
        f *= p;
        r[static_cast<std::size_t>(p)] = std::max(r[static_cast<std::size_t>(p)], std::abs(j[p]) * f);
      }
    }
    for (int p = 1; p <= 3; ++p) {
      const auto pp = static_cast<std::size_t>(p);
      // Slack for the grid; the ramp is 1/3 of t wide.
      r[pp] = std::max(r[pp] * 1.01 * std::pow(3.0, p), r[pp - 1]);
    }
    return r;
  }();
  return c;
}

Jet<double, 3> component_bump(double da, double db) {
  using J = Jet<double, 3>;
  constexpr double third = 1.0 / 3.0;
  if (da <= -2.0 * third || db >= 2.0 * third) return J(0.0);
  if (da >= -third && db <= third) return J(1.0);
  if (da < -third) return smooth_step_jet(3.0 * da + 2.0).rescaled(3.0);
  return smooth_step_jet(2.0 - 3.0 * db).rescaled(-3.0);
}

BumpSpec BumpSpec::from_intervals(double t, const std::vector<std::pair<double, double>>& intervals) {
  if (!(t > 0.0)) throw ParameterError("bump width must be positive");
  BumpSpec b;
  b.t = t;
  auto iv = intervals;
  std::sort(iv.begin(), iv.end());
  for (const auto& [a, c] : iv) {
    if (!b.components.empty() && a - b.components.back().second <= 4.0 * t / 3.0)
      b.components.back().second = std::max(b.components.back().second, c);
    else
      b.components.emplace_back(a, c);
  }
  return b;
}

double BumpSpec::operator()(double x) const {
  double u = 0.0;
  for (const auto& [a, b] : components) u += component_bump((x - a) / t, (x - b) / t)[0];
  return u;
}

ExtFloat locus_minus(const LocalGeometry& g, const Locus& x, const PointId& p) {
  return g.diff(x.anchor, p) + x.offset;
}

BumpValue bump(const LocalGeometry& g, const Locus& x, const ExtFloat& t, int s, std::int64_t j) {
  BumpValue out;
  out.jet = XJet(ExtFloat());
  const ExtFloat reach = t * ExtFloat(2.0 / 3.0);
  const ExtFloat merge = t * ExtFloat(4.0 / 3.0);
  const ExtFloat inv_t = ExtFloat(1.0) / t;
  std::function<void(int, std::int64_t)> visit = [&](int k, std::int64_t i) {
    const ExtFloat dl = locus_minus(g, x, {k, i, false});
    const ExtFloat dr = locus_minus(g, x, {k, i, true});
    const ExtFloat dist = dl.sign() < 0 ? -dl : (dr.sign() > 0 ? dr : ExtFloat());
    if (dist > reach) return;
    if (k + 1 > g.max_level()) throw DepthError("bump components need levels beyond the horizon");
    if (g.gap(k, i) > merge) {
      visit(k + 1, 2 * i - 1);
      visit(k + 1, 2 * i);
      return;
    }
    // K cap I_{i,k} is one component: every inner gap is below h_{i,k}.
    ++out.components_touched;
    const auto c = component_bump((dl * inv_t).to_double(), (dr * inv_t).to_double());
    ExtFloat scale(1.0);
    for (int p = 0; p <= 3; ++p) {
      out.jet[p] += ExtFloat(c[p]) * scale;
      scale *= inv_t;
    }
  };
  visit(s, j);
  return out;
}

// ---------------------------------------------------------------------------
// Taylor functions

double TaylorFunction::value(double x) const {
  std::vector<ExtFloat> a;
  coefficients(x, 0, a);
  return a[0].to_double();
}

namespace {

class PolynomialFn : public TaylorFunction {
 public:
  explicit PolynomialFn(std::vector<double> c) : c_(std::move(c)) {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
  }
  std::string name() const override { return "polynomial"; }
  int degree() const override { return static_cast<int>(c_.size()) - 1; }
  void coefficients(double c, int m_max, std::vector<ExtFloat>& a) const override {
    // Repeated synthetic division by (x - c).
    std::vector<double> w = c_;
    a.assign(static_cast<std::size_t>(m_max) + 1, ExtFloat());
    const int deg = degree();
    for (int m = 0; m <= std::min(deg, m_max); ++m) {
      double acc = 0.0;
      for (int k = deg; k >= m; --k) {
        acc = acc * c + w[static_cast<std::size_t>(k)];
        w[static_cast<std::size_t>(k)] = acc;
      }
      a[static_cast<std::size_t>(m)] = ExtFloat(w[static_cast<std::size_t>(m)]);
    }
  }

 private:
  std::vector<double> c_;
};

class CyclicFn : public TaylorFunction {
 public:
  enum class Kind { Sin, Cos, Exp };
  explicit CyclicFn(Kind k) : k_(k) {}
  std::string name() const override { return k_ == Kind::Sin ? "sin" : (k_ == Kind::Cos ? "cos" : "exp"); }
  void coefficients(double c, int m_max, std::vector<ExtFloat>& a) const override {
    a.assign(static_cast<std::size_t>(m_max) + 1, ExtFloat());
    const double s = std::sin(c);
    const double co = std::cos(c);
    double cyc[4];
    if (k_ == Kind::Sin) {
      cyc[0] = s, cyc[1] = co, cyc[2] = -s, cyc[3] = -co;
    } else if (k_ == Kind::Cos) {
      cyc[0] = co, cyc[1] = -s, cyc[2] = -co, cyc[3] = s;
    } else {
      cyc[0] = cyc[1] = cyc[2] = cyc[3] = std::exp(c);
    }
    ExtFloat inv_fact(1.0);
    for (int m = 0; m <= m_max; ++m) {
      if (m > 0) inv_fact /= ExtFloat(static_cast<double>(m));
      a[static_cast<std::size_t>(m)] = ExtFloat(cyc[m % 4]) * inv_fact;
    }
  }

 private:
  Kind k_;
};

}  // namespace

std::unique_ptr<TaylorFunction> make_polynomial(std::vector<double> coeffs) {
  return std::make_unique<PolynomialFn>(std::move(coeffs));
}
std::unique_ptr<TaylorFunction> make_sine() { return std::make_unique<CyclicFn>(CyclicFn::Kind::Sin); }
std::unique_ptr<TaylorFunction> make_cosine() { return std::make_unique<CyclicFn>(CyclicFn::Kind::Cos); }
std::unique_ptr<TaylorFunction> make_exp() { return std::make_unique<CyclicFn>(CyclicFn::Kind::Exp); }

std::vector<ExtFloat> taylor_divided_differences(const TaylorFunction& f, double c, const std::vector<ExtFloat>& y,
                                                 int extra_terms) {
  if (y.empty()) return {};
  for (const auto& v : y)
    if (v.sign() < 0) throw DomainError("Taylor divided differences need nodes to the right of the center");
  const int K = static_cast<int>(y.size()) - 1;
  const int D = extra_terms;
  std::vector<ExtFloat> a;
  f.coefficients(c, K + D, a);
  // H[d] = h_d(y_1..y_{k+1}), updated in place as nodes are added.
  std::vector<ExtFloat> H(static_cast<std::size_t>(D) + 1);
  H[0] = ExtFloat(1.0);
  for (int d = 1; d <= D; ++d) H[static_cast<std::size_t>(d)] = H[static_cast<std::size_t>(d) - 1] * y[0];
  std::vector<ExtFloat> dd;
  dd.reserve(y.size());
  for (int k = 0; k <= K; ++k) {
    if (k > 0) {
      const ExtFloat& yk = y[static_cast<std::size_t>(k)];
      for (int d = 1; d <= D; ++d) H[static_cast<std::size_t>(d)] += yk * H[static_cast<std::size_t>(d) - 1];
    }
    ExtFloat sum;
    for (int d = 0; d <= D; ++d) sum += a[static_cast<std::size_t>(k + d)] * H[static_cast<std::size_t>(d)];
    dd.push_back(sum);
  }
  return dd;
}

// ---------------------------------------------------------------------------
// Operator W

double newton_interpolant(const TaylorFunction& f, const Locus& x, const LocalGeometry& g, int s, std::int64_t j,
                          std::int64_t N) {
  const auto ns = rule_nodes(s, j, static_cast<int>(N + 1), g.max_level());
  const auto nd = newton_data(f, x, g, ids(ns), {s, j, false});
  ExtFloat sum;
  ExtFloat omega(1.0);
  for (std::size_t k = 0; k < nd.dd.size(); ++k) {
    sum += nd.dd[k] * omega;
    omega *= nd.x_minus_z[k];
  }
  return sum.to_double();
}

WEvaluation evaluate_W(const TaylorFunction& f, const Locus& x, const LocalGeometry& g, const Schedule& sch, int S) {
  if (S < 0 || S > sch.S_max()) throw ParameterError("truncation level outside the schedule");
  if (sch.levels_needed(S) > g.max_level()) throw DepthError("W through this level needs a deeper gamma horizon");
  const GammaModel& m = g.model();
  const int lv = g.max_level();
  WEvaluation out;
  ExtFloat total;

  {
    const auto nd = newton_data(f, x, g, {PointId{0, 1, false}, PointId{0, 1, true}}, {0, 1, false});
    const ExtFloat L1 = nd.dd[0] + nd.dd[1] * nd.x_minus_z[0];
    total += L1 * bump(g, x, ExtFloat(1.0), 0, 1).jet[0];
  }

  for (int s = 0; s <= S; ++s) {
    LevelTerms lt;
    lt.s = s;
    const std::int64_t Ms = sch.M(s);
    const std::int64_t Ns = sch.N(s);

    // A-terms: raise the degree on I_{j,s} from M_s to N_s.
    const int n_lo = Schedule::level_of(Ms + 1);
    const ExtFloat t_max = delta_x(m, s + n_lo);
    ExtFloat A_sum;
    for (std::int64_t j : near_intervals(g, x, s, t_max * ExtFloat(2.0 / 3.0))) {
      const auto ns = rule_nodes(s, j, static_cast<int>(Ns + 1), lv);
      const auto nd = newton_data(f, x, g, ids(ns), {s, j, false});
      ExtFloat omega(1.0);
      bool any = false;
      int cached_n = -1;
      ExtFloat u;
      for (std::int64_t N = 1; N <= Ns; ++N) {
        omega *= nd.x_minus_z[static_cast<std::size_t>(N - 1)];
        if (N <= Ms) continue;
        const int n = Schedule::level_of(N);
        if (n != cached_n) {
          u = bump(g, x, delta_x(m, s + n), s, j).jet[0];
          cached_n = n;
          if (!u.is_zero()) any = true;
        }
        A_sum += nd.dd[static_cast<std::size_t>(N)] * omega * u;
      }
      if (any) ++lt.nonzero_A;
    }

    // T-terms: switch from L_{N_s}(I_{j,s}) to L_{M_{s+1}}(I_{k,s+1}).
    const int ns_ = sch.n(s);
    const std::int64_t half = std::int64_t{1} << (ns_ - 1);
    const ExtFloat t = delta_x(m, s + ns_ - 1);
    ExtFloat T_sum;
    for (std::int64_t k : near_intervals(g, x, s + 1, t * ExtFloat(2.0 / 3.0))) {
      const ExtFloat u = bump(g, x, t, s + 1, k).jet[0];
      if (u.is_zero()) continue;
      ++lt.nonzero_T;
      const std::int64_t sib = (k % 2 == 1) ? k + 1 : k - 1;
      auto z = ids(rule_nodes(s + 1, k, static_cast<int>(half), lv));
      const auto zs = ids(rule_nodes(s + 1, sib, static_cast<int>(half), lv));
      z.insert(z.end(), zs.begin(), zs.end());
      const auto nd = newton_data(f, x, g, z, {s, (k + 1) / 2, false});
      ExtFloat omega(1.0);
      ExtFloat acc;
      for (std::int64_t N = 1; N <= Ns; ++N) {
        omega *= nd.x_minus_z[static_cast<std::size_t>(N - 1)];
        if (N < half) continue;
        acc += nd.dd[static_cast<std::size_t>(N)] * omega;
      }
      T_sum -= acc * u;
    }

    lt.A_sum = A_sum.to_double();
    lt.T_sum = T_sum.to_double();
    total += A_sum + T_sum;
    if (lt.nonzero_A > 1 || lt.nonzero_T > 1) out.locality_ok = false;
    out.levels.push_back(lt);
  }
  out.value = total.to_double();
  return out;
}

TruncationCheck truncation_check(const TaylorFunction& f, const PointId& x, const LocalGeometry& g, const Schedule& sch,
                                 int S, int q, double norm_q) {
  if (S < 0 || S > sch.S_max()) throw ParameterError("truncation level outside the schedule");
  const GammaModel& m = g.model();
  TruncationCheck tc;
  tc.S = S;
  tc.s = S + 1;
  tc.n = sch.n(S) - 1;
  tc.M = (std::int64_t{1} << tc.n) - 1;
  if (tc.s + tc.n > g.max_level()) throw DepthError("truncation bound needs a deeper gamma horizon");
  const std::int64_t j = x.ancestor(tc.s);
  const PointId left{tc.s, j, false};
  const auto z = ids(rule_nodes(tc.s, j, static_cast<int>(tc.M + 1), g.max_level()));

  std::vector<ExtFloat> y;
  std::vector<ExtFloat> xz;
  for (const auto& p : z) {
    y.push_back(g.diff(p, left));
    xz.push_back(g.diff(x, p));
  }
  y.push_back(g.diff(x, left));
  const auto dd = taylor_divided_differences(f, g.coordinate(left), y);
  ExtFloat omega = dd.back();
  for (const auto& v : xz) omega *= v;
  tc.observed = omega.abs();

  // sum_k |x - z_k|^q |omega_k(x)|, omega_k the Lagrange basis.
  ExtFloat lm;
  for (std::size_t k = 0; k < z.size(); ++k) {
    ExtFloat w(1.0);
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (i == k) continue;
      w *= xz[i] / g.diff(z[k], z[i]);
    }
    lm += (xz[k].abs().pow(q) * w.abs());
  }
  tc.lm_sum = lm * ExtFloat(norm_q);

  const double lnC0 = m.ln_C0();
  const double r = std::ldexp(1.0, tc.n);
  const double ln_bound = std::log(norm_q) + tc.n * std::numbers::ln2 + (q - 1) * lnC0 +
                          r * (std::log(8.0 / 7.0) + lnC0) + ln_delta(m, tc.s + tc.n) + (q - 1) * ln_delta(m, tc.s);
  tc.bound = LogReal::from_log(ln_bound);
  tc.within = tc.observed.is_zero() || tc.observed.ln_abs() <= ln_bound;
  return tc;
}

// ---------------------------------------------------------------------------
// Whitney norms

ExtFloat JetSource::remainder(const PointId& y, const PointId& x, int q, int k) const {
  const ExtFloat h = g_.diff(x, y);
  ExtFloat r = derivative(x, k);
  ExtFloat hp(1.0);
  ExtFloat inv_fact(1.0);
  for (int i = k; i <= q; ++i) {
    if (i > k) {
      hp *= h;
      inv_fact /= ExtFloat(static_cast<double>(i - k));
    }
    r -= derivative(y, i) * hp * inv_fact;
  }
  return r;
}

ExtFloat TaylorJetSource::derivative(const PointId& p, int k) const {
  std::vector<ExtFloat> a;
  f_.coefficients(g_.coordinate(p), k, a);
  return a[static_cast<std::size_t>(k)] * falling(k, k);
}

ExtFloat TaylorJetSource::remainder(const PointId& y, const PointId& x, int q, int k) const {
  const int extra = 40;
  std::vector<ExtFloat> a;
  f_.coefficients(g_.coordinate(y), q + extra, a);
  const ExtFloat h = g_.diff(x, y);
  ExtFloat r;
  for (int i = q + 1; i <= q + extra; ++i) r += a[static_cast<std::size_t>(i)] * falling(i, k) * h.pow(i - k);
  return r;
}

ExplicitJetSource::ExplicitJetSource(const LocalGeometry& g, std::vector<PointId> points,
                                     std::vector<std::vector<double>> jets)
    : JetSource(g), points_(std::move(points)), jets_(std::move(jets)) {
  if (points_.size() != jets_.size() || points_.empty()) throw ParameterError("one jet per sample point");
  order_ = std::numeric_limits<int>::max();
  for (const auto& j : jets_) order_ = std::min(order_, static_cast<int>(j.size()) - 1);
  if (order_ < 0) throw ParameterError("empty jet");
}

ExtFloat ExplicitJetSource::derivative(const PointId& p, int k) const {
  if (k > order_) throw InsufficientOrderError("jet does not carry this derivative order");
  const PointId c = p.canonical();
  for (std::size_t i = 0; i < points_.size(); ++i)
    if (points_[i].canonical() == c) return ExtFloat(jets_[i][static_cast<std::size_t>(k)]);
  throw DomainError("point is not in the jet sample");
}

ProductJetSource::ProductJetSource(const LocalGeometry& g, int s, std::vector<PointId> nodes)
    : JetSource(g), s_(s), nodes_(std::move(nodes)) {}

bool ProductJetSource::inside(const PointId& p) const { return p.ancestor(s_) == 1; }

std::vector<ExtFloat> ProductJetSource::taylor_at(const PointId& p) const {
  const std::size_t r = nodes_.size();
  std::vector<ExtFloat> c(r + 1);
  if (!inside(p)) return c;
  // prod (t + w_i) with w_i = p - z_i; coefficient of t^i.
  c[0] = ExtFloat(1.0);
  std::size_t deg = 0;
  for (const auto& z : nodes_) {
    const ExtFloat w = g_.diff(p, z);
    ++deg;
    for (std::size_t i = deg; i >= 1; --i) c[i] = c[i - 1] + c[i] * w;
    c[0] = c[0] * w;
  }
  return c;
}

ExtFloat ProductJetSource::derivative(const PointId& p, int k) const {
  const auto c = taylor_at(p);
  if (k >= static_cast<int>(c.size())) return {};
  return c[static_cast<std::size_t>(k)] * falling(k, k);
}

ExtFloat ProductJetSource::remainder(const PointId& y, const PointId& x, int q, int k) const {
  const bool ix = inside(x);
  const bool iy = inside(y);
  if (!ix && !iy) return {};
  if (ix && !iy) return derivative(x, k);
  const auto c = taylor_at(y);
  const int r = static_cast<int>(c.size()) - 1;
  const ExtFloat h = g_.diff(x, y);
  ExtFloat sum;
  if (ix) {
    for (int i = q + 1; i <= r; ++i) sum += c[static_cast<std::size_t>(i)] * falling(i, k) * h.pow(i - k);
    return sum;
  }
  for (int i = k; i <= std::min(q, r); ++i) sum += c[static_cast<std::size_t>(i)] * falling(i, k) * h.pow(i - k);
  return -sum;
}

WhitneyNorm whitney_norms(const JetSample& sample, const LocalGeometry& g, int q) {
  if (sample.f == nullptr) throw ParameterError("jet sample without a function");
  if (q < 0) throw ParameterError("order must be nonnegative");
  if (q > sample.f->max_order()) throw InsufficientOrderError("jet order below the requested norm order");
  WhitneyNorm w;
  for (const auto& p : sample.points)
    for (int k = 0; k <= q; ++k) w.sup_part = std::max(w.sup_part, sample.f->derivative(p, k).abs().to_double());
  for (const auto& x : sample.points) {
    for (const auto& y : sample.points) {
      const ExtFloat h = g.diff(x, y).abs();
      if (h.is_zero()) continue;
      for (int k = 0; k <= q; ++k) {
        const ExtFloat r = sample.f->remainder(y, x, q, k).abs() / h.pow(q - k);
        w.remainder_part = std::max(w.remainder_part, r.to_double());
      }
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// (DN) experiment

std::vector<std::pair<int, int>> witness_pairs(const Example2Spec& spec, int j_from, int j_to) {
  std::vector<std::pair<int, int>> out;
  for (int j = j_from; j <= j_to; ++j) out.emplace_back(spec.k_at(j), spec.k_at(j + 1) - spec.k_at(j));
  return out;
}

DNReport dn_experiment(const GammaModel& model, const DNParams& params) {
  const double eps = params.epsilon;
  if (!(eps > 0.0)) throw ParameterError("epsilon must be positive");
  const int m = params.m;
  if (m < 0) throw ParameterError("m must be nonnegative");
  DNReport rep;
  const double lnC0 = model.ln_C0();
  for (std::size_t idx = 0; idx < params.sn.size(); ++idx) {
    const auto [s, n] = params.sn[idx];
    if (s < 1 || n <= m) throw ParameterError("(DN) experiment needs s >= 1 and n > m");
    if (s + n > model.horizon()) throw HorizonError("s + n beyond the gamma horizon");
    DNRow row;
    row.j = idx < params.j_labels.size() ? params.j_labels[idx] : 0;
    row.s = s;
    row.n = n;
    row.m = m;
    const double r = std::ldexp(1.0, n);
    const double q = std::ldexp(1.0, m);
    const double scale = std::ldexp(1.0, n + s);

    // Brace terms from B_k, so the comparison with B_{n+s} keeps its precision.
    double near = 0.0;
    double far = 0.0;
    for (int i = 1; i <= m; ++i) near += B_of(model, n + s - i);
    for (int i = m + 1; i <= n; ++i) far += B_of(model, n + s - i);
    const double Bt = B_of(model, n + s);
    row.ln_cfree = scale * (2.0 * Bt + near - eps * far);
    row.half_ln_inv_delta = scale * Bt;

    double f0 = r * lnC0 + ln_delta(model, n + s);
    for (int i = 1; i <= n; ++i) f0 += std::ldexp(1.0, i - 1) * ln_delta(model, n + s - i);
    double fq = std::lgamma(q + 1.0) + (r - q) * std::log(7.0 / 8.0);
    for (int i = m + 1; i <= n; ++i) fq += std::ldexp(1.0, i - 1) * ln_delta(model, n + s - i);
    row.ln_f0_bound = f0;
    row.ln_fq_bound = fq;
    const double ln_norm_r = std::log(2.0) + std::lgamma(r + 1.0);
    row.ln_certified = (1.0 + eps) * fq - f0 - eps * ln_norm_r;

    if (params.direct && n <= 5 && s + n + 2 <= model.horizon()) {
      const LocalGeometry g(model);
      const auto z = ids(rule_nodes(s, 1, static_cast<int>(r), g.max_level()));
      double best = -std::numeric_limits<double>::infinity();
      const int lvl = s + n + 2;
      const std::int64_t count = std::int64_t{1} << (n + 2);
      for (std::int64_t i = 1; i <= count; ++i) {
        for (bool right : {false, true}) {
          const PointId p{lvl, i, right};
          ExtFloat prod(1.0);
          for (const auto& zk : z) prod *= g.diff(p, zk);
          best = std::max(best, prod.ln_abs());
        }
      }
      // e_{r-q}(z) by the elementary symmetric recursion; all z_k >= 0.
      std::vector<ExtFloat> e(z.size() + 1);
      e[0] = ExtFloat(1.0);
      std::size_t deg = 0;
      for (const auto& zk : z) {
        const ExtFloat v = g.diff(zk, {0, 1, false});
        ++deg;
        for (std::size_t i = deg; i >= 1; --i) e[i] = e[i] + e[i - 1] * v;
      }
      row.has_direct = true;
      row.ln_f0_direct = best;
      row.ln_fq_direct = std::lgamma(q + 1.0) + e[z.size() - static_cast<std::size_t>(q)].ln_abs();
    }
    rep.rows.push_back(row);
  }
  rep.cfree_increasing = rep.rows.size() >= 2;
  rep.certified_increasing = rep.rows.size() >= 2;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    if (!(rep.rows[i].ln_cfree > rep.rows[i - 1].ln_cfree)) rep.cfree_increasing = false;
    if (!(rep.rows[i].ln_certified > rep.rows[i - 1].ln_certified)) rep.certified_increasing = false;
  }
  return rep;
}

nlohmann::json dn_report_json(const DNReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rep.rows) {
    nlohmann::json o{{"j", r.j},
                     {"s", r.s},
                     {"n", r.n},
                     {"m", r.m},
                     {"ln_cfree", r.ln_cfree},
                     {"ln_certified", r.ln_certified},
                     {"half_ln_inv_delta", r.half_ln_inv_delta},
                     {"ln_f0_bound", r.ln_f0_bound},
                     {"ln_fq_bound", r.ln_fq_bound}};
    if (r.has_direct) {
      o["ln_f0_direct"] = r.ln_f0_direct;
      o["ln_fq_direct"] = r.ln_fq_direct;
    }
    rows.push_back(o);
  }
  return {{"rows", rows}, {"cfree_increasing", rep.cfree_increasing}, {"certified_increasing", rep.certified_increasing}};
}

// ---------------------------------------------------------------------------
// Inequality checks

std::vector<ExtFloat> sorted_distances(const std::vector<ExtFloat>& x_minus_points) {
  std::vector<ExtFloat> d;
  d.reserve(x_minus_points.size());
  for (const auto& v : x_minus_points) d.push_back(v.abs());
  std::sort(d.begin(), d.end(), [](const ExtFloat& a, const ExtFloat& b) { return a < b; });
  return d;
}

namespace {

ExtFloat product_from(const std::vector<ExtFloat>& d, std::size_t first) {
  ExtFloat p(1.0);
  for (std::size_t i = first; i < d.size(); ++i) p *= d[i];
  return p;
}

void record(BoundReport& rep, double ln_lhs, double ln_rhs) {
  ++rep.cases;
  const double margin = ln_rhs - ln_lhs;
  if (rep.cases == 1 || margin < rep.worst_log_margin) rep.worst_log_margin = margin;
  if (margin < 0.0) ++rep.violations;
}

}  // namespace

BoundReport check_distance_product_bound(const LocalGeometry& g, int s, std::int64_t j, int N) {
  if (N < 2) throw ParameterError("the distance product bound needs N >= 2");
  const GammaModel& m = g.model();
  const int n = Schedule::level_of(N);
  const auto z = ids(rule_nodes(s, j, N + 1, g.max_level()));
  const ExtFloat t = delta_x(m, s + n);
  const double lnC1 = std::log(8.0 / 7.0 * (m.C0() + 1.0));

  double ln_rhs = std::numeric_limits<double>::infinity();
  for (const auto& zk : z) {
    std::vector<ExtFloat> v;
    for (const auto& zi : z) v.push_back(g.diff(zk, zi));
    ln_rhs = std::min(ln_rhs, product_from(sorted_distances(v), 1).ln_abs());
  }
  ln_rhs += N * lnC1;

  BoundReport rep;
  for (int i = 0; i < N; ++i) {
    for (double theta : {0.0, 0.5, 1.0, -0.5, -1.0}) {
      const Locus x{z[static_cast<std::size_t>(i)], t * ExtFloat(theta)};
      std::vector<ExtFloat> v;
      for (int k = 0; k < N; ++k) v.push_back(locus_minus(g, x, z[static_cast<std::size_t>(k)]));
      const ExtFloat lhs = t * product_from(sorted_distances(v), 1);
      record(rep, lhs.ln_abs(), ln_rhs);
    }
  }
  return rep;
}

ExtFloat chain_minimum(const std::vector<std::vector<ExtFloat>>& dist, int jj, int q) {
  const int np = static_cast<int>(dist.size());
  if (jj < 1 || jj + q > np) throw ParameterError("segment outside the node range");
  ExtFloat best;
  bool have = false;
  std::function<void(int, int, ExtFloat)> walk = [&](int a, int b, ExtFloat prod) {
    if (a == 1 && b == np) {
      if (!have || prod < best) best = prod;
      have = true;
      return;
    }
    if (a > 1) walk(a - 1, b, prod * dist[static_cast<std::size_t>(a - 2)][static_cast<std::size_t>(b - 1)]);
    if (b < np) walk(a, b + 1, prod * dist[static_cast<std::size_t>(a - 1)][static_cast<std::size_t>(b)]);
  };
  walk(jj, jj + q, ExtFloat(1.0));
  return best;
}

BoundReport check_chain_product_bound(const LocalGeometry& g, int s, std::int64_t j, int N, int q) {
  const int n = Schedule::level_of(N);
  const int mq = Schedule::level_of(q + 1);
  if ((std::int64_t{1} << mq) != q + 1 || mq >= n) throw ParameterError("the chain product bound needs q = 2^m - 1 with m < n");
  auto z = ids(rule_nodes(s, j, N + 1, g.max_level()));
  std::sort(z.begin(), z.end(), [&](const PointId& a, const PointId& b) { return g.diff(a, b).sign() < 0; });
  const std::size_t np = z.size();
  std::vector<std::vector<ExtFloat>> dist(np, std::vector<ExtFloat>(np));
  for (std::size_t a = 0; a < np; ++a)
    for (std::size_t b = 0; b < np; ++b) dist[a][b] = g.diff(z[a], z[b]).abs();

  BoundReport rep;
  for (int jj = 1; jj + q <= static_cast<int>(np); ++jj) {
    const ExtFloat pi = chain_minimum(dist, jj, q);
    double best = std::numeric_limits<double>::infinity();
    for (int i = jj; i <= jj + q; ++i) {
      auto d = dist[static_cast<std::size_t>(i - 1)];
      std::sort(d.begin(), d.end(), [](const ExtFloat& a, const ExtFloat& b) { return a < b; });
      best = std::min(best, product_from(d, static_cast<std::size_t>(q) + 1).ln_abs());
    }
    record(rep, best, pi.ln_abs());
  }
  return rep;
}

BoundReport check_bumped_product_derivatives(const LocalGeometry& g, int s, std::int64_t j, int N, int grid_points) {
  if (N < 2) throw ParameterError("the derivative bound check needs N >= 2");
  if (grid_points < 2) throw ParameterError("grid needs at least two points");
  const GammaModel& m = g.model();
  const int n = Schedule::level_of(N);
  const auto z = ids(rule_nodes(s, j, N, g.max_level()));
  const ExtFloat t = delta_x(m, s + n);
  const auto& c = bump_constants();
  const double lnC = std::log(m.C0() + 1.0);
  const int pmax = std::min(3, N - 1);
  const int lvl = s + n;
  if (lvl + 1 > g.max_level()) throw DepthError("the derivative bound grid needs a deeper gamma horizon");

  BoundReport rep;
  const std::int64_t count = std::int64_t{1} << n;
  const std::int64_t first = ((j - 1) << n) + 1;
  for (std::int64_t i = first; i < first + count; ++i) {
    for (bool right : {false, true}) {
      for (int gi = 0; gi < grid_points; ++gi) {
        const double theta = -1.0 + 2.0 * gi / (grid_points - 1);
        const Locus x{{lvl, i, right}, t * ExtFloat(theta)};
        XJet omega(ExtFloat(1.0));
        std::vector<ExtFloat> v;
        for (const auto& zk : z) {
          const ExtFloat d = locus_minus(g, x, zk);
          v.push_back(d);
          XJet f(d);
          f[1] = ExtFloat(1.0);
          omega *= f;
        }
        const XJet prod = omega * bump(g, x, t, s, j).jet;
        const double ln_d = product_from(sorted_distances(v), 1).ln_abs();
        for (int p = 0; p <= pmax; ++p) {
          const ExtFloat lhs = prod.derivative(p).abs();
          if (lhs.is_zero()) continue;
          const double ln_rhs = p * std::numbers::ln2 + lnC + std::log(c[static_cast<std::size_t>(p)]) +
                                (1 - p) * t.ln_abs() + p * std::log(static_cast<double>(N)) + ln_d;
          record(rep, lhs.ln_abs(), ln_rhs);
        }
      }
    }
  }
  return rep;
}

}  // namespace kgamma
