#include "kgamma/hausdorff.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "kgamma/errors.hpp"

namespace kgamma {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = std::numbers::ln2;

// ln |x| through the binary exponent; no BigFloat log.
double ln_abs_big(const BigFloat& x) {
  if (x == 0) return -kInf;
  long e = 0;
  const double m = mpfr_get_d_2exp(&e, x.backend().data(), MPFR_RNDN);
  return std::log(std::fabs(m)) + static_cast<double>(e) * kLn2;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Cost of one covering interval; +inf outside the domain of h.
double cover_cost(const DimensionFunction& h, double ln_len) {
  if (ln_len == -kInf) return 0.0;
  if (!h.in_domain(ln_len)) return kInf;
  return h.at_ln(ln_len);
}

ExtFloat point_minus(const LocalGeometry& g, const Locus& a, const Locus& b) {
  ExtFloat d = a.anchor == b.anchor ? ExtFloat() : g.diff(a.anchor, b.anchor);
  return d + a.offset - b.offset;
}

void finish_table(DensityTable& t) {
  std::stable_sort(t.rows.begin(), t.rows.end(),
                   [](const DensityRow& a, const DensityRow& b) { return a.ln_r > b.ln_r; });
  double run = kInf;
  for (auto& r : t.rows) {
    run = std::min(run, r.ratio);
    r.running_min = run;
  }
  t.liminf_estimate = kInf;
  const std::size_t half = t.rows.size() / 2;
  for (std::size_t i = half; i < t.rows.size(); ++i) t.liminf_estimate = std::min(t.liminf_estimate, t.rows[i].ratio);
}

}  // namespace

// DimensionFunction

DimensionFunction DimensionFunction::eta_from_delta(const GammaModel& model) {
  DimensionFunction h;
  h.kind_ = Kind::EtaFromDelta;
  h.model_name_ = model.describe();
  for (int k = 0; k <= model.horizon(); ++k) h.ln_delta_.push_back(model.delta(k).ln_mag());
  h.ln_delta_[0] = 0.0;
  return h;
}

DimensionFunction DimensionFunction::log_power(const LogPowerSpec& spec) {
  spec.validate();
  DimensionFunction h;
  h.kind_ = Kind::LogPower;
  h.spec_ = spec;
  return h;
}

DimensionFunction DimensionFunction::h0() {
  LogPowerSpec s;
  s.kind = LogPowerSpec::Kind::Constant;
  s.alpha0 = 1.0;
  return log_power(s);
}

std::string DimensionFunction::name() const {
  if (kind_ == Kind::EtaFromDelta) return "eta(delta_k)=k of " + model_name_;
  return "h0^alpha, " + spec_.name();
}

double DimensionFunction::ln_t0() const {
  if (kind_ == Kind::EtaFromDelta) return 0.0;
  if (spec_.kind == LogPowerSpec::Kind::Constant) return 0.0;
  return -std::exp(spec_.ell_min());
}

double DimensionFunction::ln_t_min() const {
  if (kind_ == Kind::EtaFromDelta) return ln_delta_.back();
  return -kInf;
}

bool DimensionFunction::in_domain(double ln_t) const {
  if (kind_ == Kind::EtaFromDelta) return ln_t <= 0.0 && ln_t >= ln_delta_.back();
  return ln_t < ln_t0();
}

double DimensionFunction::eta_at_ln(double ln_t) const {
  if (ln_t == -kInf) return kInf;
  if (!in_domain(ln_t)) throw DomainError("t outside the domain of " + name());
  if (kind_ == Kind::EtaFromDelta) {
    // Segment k with ln_delta_[k+1] <= ln_t <= ln_delta_[k].
    const auto it = std::lower_bound(ln_delta_.begin(), ln_delta_.end(), ln_t, std::greater<double>());
    std::size_t k = static_cast<std::size_t>(it - ln_delta_.begin());
    if (k > 0) --k;
    if (k + 1 >= ln_delta_.size()) k = ln_delta_.size() - 2;
    const double a = ln_delta_[k];
    const double b = ln_delta_[k + 1];
    return static_cast<double>(k) + (a - ln_t) / (a - b);
  }
  const double ell = std::log(-ln_t);
  return spec_.alpha(ell) * ell / kLn2;
}

double DimensionFunction::at_ln(double ln_t) const {
  if (ln_t == -kInf) return 0.0;
  if (kind_ == Kind::EtaFromDelta) return std::exp2(-eta_at_ln(ln_t));
  if (!in_domain(ln_t)) throw DomainError("t outside the domain of " + name());
  return spec_.h_of_ell(std::log(-ln_t));
}

double DimensionFunction::operator()(double t) const {
  if (!(t >= 0.0)) throw DomainError("h needs t >= 0");
  return at_ln(std::log(t));
}

double DimensionFunction::inverse_ln(double tau) const {
  if (!(tau > 0.0)) throw DomainError("h inverse needs tau > 0");
  if (kind_ == Kind::EtaFromDelta) {
    const double eta = -std::log2(tau);
    const double K = static_cast<double>(ln_delta_.size() - 1);
    if (eta < 0.0 || eta > K) throw DomainError("tau outside [2^-K, 1]");
    auto k = static_cast<std::size_t>(std::floor(eta));
    if (k + 1 >= ln_delta_.size()) k = ln_delta_.size() - 2;
    const double frac = eta - static_cast<double>(k);
    return ln_delta_[k] - frac * (ln_delta_[k] - ln_delta_[k + 1]);
  }
  const double ell = spec_.loglog_inverse(-std::log(tau));
  const double ln_t = -std::exp(ell);
  if (!in_domain(ln_t)) throw DomainError("tau outside the range of h on its domain");
  return ln_t;
}

double DimensionFunction::inverse(double tau) const { return std::exp(inverse_ln(tau)); }

double DimensionFunction::ln_derivative(double ln_t) const {
  if (kind_ != Kind::LogPower) throw ParameterError("analytic derivative needs a LogPower function");
  if (!in_domain(ln_t)) throw DomainError("t outside the domain of " + name());
  // h = exp(-alpha(ell) ell), ell = ln ln(1/t): h' = h h0 (alpha + alpha' ell) / t.
  const double ell = std::log(-ln_t);
  const double slope = spec_.alpha(ell) + spec_.alpha_prime(ell) * ell;
  return std::log(at_ln(ln_t)) - ell + std::log(slope) - ln_t;
}

// Atoms

IntervalAtoms::IntervalAtoms(std::vector<Atom> atoms, unsigned mantissa_bits)
    : atoms_(std::move(atoms)), bits_(mantissa_bits) {
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (atoms_[i].left > atoms_[i].right) throw ParameterError("atom with left > right");
    if (i > 0 && !(atoms_[i - 1].right < atoms_[i].left)) throw ParameterError("atoms must be sorted and disjoint");
  }
}

double IntervalAtoms::ln_hull(std::size_t i, std::size_t j) const {
  PrecisionScope scope(bits_);
  const BigFloat d = atoms_[j].right - atoms_[i].left;
  return ln_abs_big(d);
}

IntervalAtoms IntervalAtoms::clip(const BigFloat& lo, const BigFloat& hi) const {
  PrecisionScope scope(bits_);
  std::vector<Atom> out;
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), lo,
                             [](const Atom& a, const BigFloat& v) { return a.right < v; });
  // A clipped piece below the working resolution is the rounding image of an
  // endpoint; it is kept as a point.
  const BigFloat resolution = boost::multiprecision::ldexp(BigFloat(1), -static_cast<int>(bits_) + 32);
  for (; it != atoms_.end() && it->left <= hi; ++it) {
    const bool clipped = it->left < lo || it->right > hi;
    Atom a{it->left < lo ? lo : it->left, it->right > hi ? hi : it->right, it->label};
    if (clipped && a.right - a.left < resolution * boost::multiprecision::abs(a.right)) a.left = a.right;
    out.push_back(std::move(a));
  }
  return IntervalAtoms(std::move(out), bits_);
}

void Example4Spec::validate() const {
  if (K_max < 1) throw ParameterError("the countable set needs K_max >= 1");
  if (q_kind == QKind::Constant && !(Q > 1.0)) throw ParameterError("the countable set needs Q > 1");
}

double Example4Spec::Q_at(int k) const {
  if (q_kind == QKind::Constant) return Q;
  return std::max(2.0, std::log(static_cast<double>(k)));
}

unsigned Example4Spec::bits_needed() const {
  double worst = 0.0;
  for (int k = 1; k <= K_max; ++k) worst = std::max(worst, k * Q_at(k));
  return static_cast<unsigned>(std::ceil(worst / kLn2)) + 128;
}

BigFloat example4_b(int k) { return boost::multiprecision::exp(BigFloat(-k)); }

BigFloat example4_a(const Example4Spec& spec, int k) {
  return example4_b(k) - boost::multiprecision::exp(BigFloat(-k) * BigFloat(spec.Q_at(k)));
}

IntervalAtoms example4_atoms(const Example4Spec& spec, int k_min) {
  spec.validate();
  if (k_min < 1 || k_min > spec.K_max) throw ParameterError("k_min outside 1..K_max");
  const unsigned bits = spec.bits_needed();
  PrecisionScope scope(bits);
  std::vector<IntervalAtoms::Atom> atoms;
  atoms.push_back({BigFloat(0), example4_b(spec.K_max + 1), "[0,b_" + std::to_string(spec.K_max + 1) + "]"});
  for (int k = spec.K_max; k >= k_min; --k) atoms.push_back({example4_a(spec, k), example4_b(k), "I_" + std::to_string(k)});
  return IntervalAtoms(std::move(atoms), bits);
}

std::size_t example4_index(const Example4Spec& spec, int k, int k_min) {
  if (k < k_min || k > spec.K_max) throw ParameterError("k outside the atom range");
  return static_cast<std::size_t>(1 + spec.K_max - k);
}

TreeAtoms::TreeAtoms(const LocalGeometry& g, int depth, std::vector<TreeAtom> atoms)
    : g_(&g), depth_(depth), atoms_(std::move(atoms)) {}

TreeAtoms TreeAtoms::descendants(const LocalGeometry& g, int s, std::int64_t j, int depth) {
  if (depth < s) throw ParameterError("atom depth below the interval level");
  if (depth > g.max_level()) throw DepthError("atom depth beyond the model horizon");
  std::vector<TreeAtom> atoms;
  const std::int64_t w = std::int64_t{1} << (depth - s);
  for (std::int64_t i = (j - 1) * w + 1; i <= j * w; ++i)
    atoms.push_back({Locus{{depth, i, false}, {}}, Locus{{depth, i, true}, {}}, i});
  return TreeAtoms(g, depth, std::move(atoms));
}

TreeAtoms TreeAtoms::ball(const LocalGeometry& g, int depth, const Locus& x, const ExtFloat& r) {
  if (depth > g.max_level()) throw DepthError("atom depth beyond the model horizon");
  std::vector<TreeAtom> atoms;
  const ExtFloat neg_r = -r;
  auto visit = [&](auto&& self, int s, std::int64_t j) -> void {
    const PointId L{s, j, false};
    const PointId R{s, j, true};
    const ExtFloat dl = -locus_minus(g, x, L);
    if (dl > r) return;
    const ExtFloat dr = -locus_minus(g, x, R);
    if (dr < neg_r) return;
    if (s == depth) {
      TreeAtom a;
      a.j = j;
      a.left = dl >= neg_r ? Locus{L, {}} : Locus{x.anchor, x.offset - r};
      a.right = dr <= r ? Locus{R, {}} : Locus{x.anchor, x.offset + r};
      atoms.push_back(a);
      return;
    }
    self(self, s + 1, 2 * j - 1);
    self(self, s + 1, 2 * j);
  };
  visit(visit, 0, 1);
  return TreeAtoms(g, depth, std::move(atoms));
}

double TreeAtoms::ln_hull(std::size_t i, std::size_t j) const {
  const ExtFloat d = point_minus(*g_, atoms_[j].right, atoms_[i].left);
  if (d.sign() <= 0) return -kInf;
  return d.ln_abs();
}

// Contents

Covering content_dp(const AtomSet& atoms, const DimensionFunction& h) {
  const std::size_t m = atoms.size();
  Covering out;
  if (m == 0) return out;
  std::vector<double> best(m + 1, kInf);
  std::vector<std::size_t> from(m + 1, 0);
  best[0] = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t jj = i + 1; jj-- > 0;) {
      const double c = cover_cost(h, atoms.ln_hull(jj, i));
      // Hulls only grow as jj decreases and h is nondecreasing.
      if (c >= best[i + 1]) break;
      if (best[jj] + c < best[i + 1]) {
        best[i + 1] = best[jj] + c;
        from[i + 1] = jj;
      }
    }
  }
  out.value = best[m];
  for (std::size_t e = m; e > 0; e = from[e]) out.runs.emplace_back(from[e], e - 1);
  std::reverse(out.runs.begin(), out.runs.end());
  return out;
}

Covering content_bruteforce(const AtomSet& atoms, const DimensionFunction& h) {
  const std::size_t m = atoms.size();
  Covering out;
  if (m == 0) return out;
  if (m > 20) throw ParameterError("exhaustive covering search is limited to 20 atoms");
  out.value = kInf;
  const std::uint32_t cuts = 1u << (m - 1);
  for (std::uint32_t mask = 0; mask < cuts; ++mask) {
    double v = 0.0;
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    std::size_t start = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (i + 1 == m || ((mask >> i) & 1u)) {
        v += cover_cost(h, atoms.ln_hull(start, i));
        runs.emplace_back(start, i);
        start = i + 1;
      }
    }
    if (v < out.value) {
      out.value = v;
      out.runs = std::move(runs);
    }
  }
  return out;
}

double lambda_level_estimate(const LocalGeometry& g, const DimensionFunction& h, int k) {
  return lambda_level_estimate(g, h, k, 0, 1);
}

double lambda_level_estimate(const LocalGeometry& g, const DimensionFunction& h, int k, int k0,
                             std::int64_t j0) {
  if (k < k0 || k0 < 0) throw ParameterError("level sum needs 0 <= k0 <= k");
  if (k > g.max_level()) throw DepthError("level beyond the model horizon");
  if (k > 40) throw DepthError("level sum enumerates 2^k intervals; k <= 40");
  const std::int64_t w = std::int64_t{1} << (k - k0);
  double sum = 0.0;
  for (std::int64_t j = (j0 - 1) * w + 1; j <= j0 * w; ++j) sum += h.at_ln(g.length(k, j).ln_abs());
  return sum;
}

double level_sum_cap(const GammaModel& model, int k) {
  if (k < 1 || k > model.horizon()) throw HorizonError("level outside the horizon");
  return std::exp(model.ln_C0() * kLn2 / -model.gamma(k).ln_mag());
}

// Densities

std::vector<Example4Radius> example4_radii(const Example4Spec& spec, int k_from, int k_to) {
  if (k_from < 1 || k_to > spec.K_max || k_from > k_to) throw ParameterError("radius range outside 1..K_max");
  PrecisionScope scope(spec.bits_needed());
  std::vector<Example4Radius> out;
  for (int k = k_from; k <= k_to; ++k) {
    out.push_back({example4_b(k) - example4_b(k + 1), "b_" + std::to_string(k) + "-b_" + std::to_string(k + 1)});
    out.push_back({example4_b(k + 1), "b_" + std::to_string(k + 1)});
  }
  return out;
}

DensityTable density_scan_example4(const Example4Spec& spec, const DimensionFunction& h,
                                   const std::vector<Example4Radius>& radii, int tail_window,
                                   bool keep_cells) {
  spec.validate();
  if (radii.empty()) throw ParameterError("density scan needs radii");
  const unsigned bits = spec.bits_needed();
  PrecisionScope scope(bits);
  const IntervalAtoms all = example4_atoms(spec);
  DensityTable t;
  for (const auto& rad : radii) {
    const double ln_r = ln_abs_big(rad.r);
    const int K = std::min(spec.K_max, static_cast<int>(std::floor(-ln_r)) + tail_window);
    std::vector<IntervalAtoms::Atom> atoms;
    atoms.push_back({BigFloat(0), example4_b(K + 1), "[0,b_" + std::to_string(K + 1) + "]"});
    for (int k = K; k >= 1; --k) atoms.push_back(all.atoms()[example4_index(spec, k)]);
    const IntervalAtoms set(std::move(atoms), bits);

    std::vector<std::pair<BigFloat, std::string>> xs{{BigFloat(0), "0"}};
    for (int k = 1; k <= K; ++k) {
      const auto& a = all.atoms()[example4_index(spec, k)];
      xs.emplace_back(a.left, "a_" + std::to_string(k));
      xs.emplace_back(a.right, "b_" + std::to_string(k));
    }
    DensityRow row;
    row.ln_r = ln_r;
    row.label = rad.label;
    row.inf_phi = kInf;
    row.h_2r = h.at_ln(ln_r + kLn2);
    for (const auto& [x, label] : xs) {
      const IntervalAtoms part = set.clip(x - rad.r, x + rad.r);
      const double phi = content_dp(part, h).value;
      if (keep_cells) t.cells.push_back({ln_r, label, phi, phi / row.h_2r});
      if (phi < row.inf_phi) {
        row.inf_phi = phi;
        row.argmin_x = label;
      }
    }
    row.ratio = row.inf_phi / row.h_2r;
    t.rows.push_back(row);
  }
  finish_table(t);
  t.analytic_limit = std::numeric_limits<double>::quiet_NaN();
  if (h.kind() == DimensionFunction::Kind::LogPower && h.spec().kind == LogPowerSpec::Kind::Constant)
    t.analytic_limit = spec.q_kind == Example4Spec::QKind::Constant ? std::pow(spec.Q, -h.spec().alpha0) : 0.0;
  return t;
}

std::vector<std::pair<ExtFloat, std::string>> tree_radii(const GammaModel& model, int k_from, int k_to) {
  if (k_from < 1 || k_to > model.horizon() || k_from > k_to) throw HorizonError("radius levels outside the horizon");
  std::vector<std::pair<ExtFloat, std::string>> out;
  for (int k = k_from; k <= k_to; ++k)
    out.emplace_back(ExtFloat::from_log(model.delta(k - 1)) * ExtFloat(0.875), "7/8 delta_" + std::to_string(k - 1));
  return out;
}

DensityTable density_scan_tree(const LocalGeometry& g, const DimensionFunction& h,
                               const std::vector<std::pair<ExtFloat, std::string>>& radii, int x_level,
                               int extra, bool keep_cells) {
  if (radii.empty()) throw ParameterError("density scan needs radii");
  if (x_level < 0 || x_level > 20) throw ParameterError("x_level must lie in 0..20");
  const GammaModel& model = g.model();
  DensityTable t;
  for (const auto& [r, label] : radii) {
    const double ln_r = r.ln_abs();
    int kr = 0;
    while (kr <= model.horizon() && model.delta(kr).ln_mag() >= ln_r) ++kr;
    const int depth = kr + extra;
    if (depth > g.max_level()) throw DepthError("radius needs atoms beyond the model horizon");
    DensityRow row;
    row.ln_r = ln_r;
    row.label = label;
    row.inf_phi = kInf;
    row.h_2r = h.at_ln(ln_r + kLn2);
    for (std::int64_t j = 1; j <= (std::int64_t{1} << x_level); ++j) {
      for (bool right : {false, true}) {
        const Locus x{{x_level, j, right}, {}};
        const double phi = content_dp(TreeAtoms::ball(g, depth, x, r), h).value;
        const std::string xl = "x(" + std::to_string(x_level) + "," + std::to_string(j) + (right ? ",R)" : ",L)");
        if (keep_cells) t.cells.push_back({ln_r, xl, phi, phi / row.h_2r});
        if (phi < row.inf_phi) {
          row.inf_phi = phi;
          row.argmin_x = xl;
        }
      }
    }
    row.ratio = row.inf_phi / row.h_2r;
    t.rows.push_back(row);
  }
  finish_table(t);
  t.analytic_limit = std::numeric_limits<double>::quiet_NaN();
  if (model.family() == Family::DeltaForm && h.kind() == DimensionFunction::Kind::LogPower &&
      h.spec().kind == LogPowerSpec::Kind::Constant)
    t.analytic_limit = std::pow(model.spec().b, -h.spec().alpha0);
  return t;
}

// k-th root test and order comparison

EPTest kth_root_test(const LogPowerSpec& spec, int k_from, int k_to) {
  spec.validate();
  if (k_from < 1 || k_from > k_to) throw ParameterError("k range must satisfy 1 <= k_from <= k_to");
  EPTest e;
  for (int k = k_from; k <= k_to; ++k) {
    double ell = 0.0;
    try {
      ell = spec.loglog_inverse(k * kLn2);
    } catch (const DomainError&) {
      continue;
    }
    e.k.push_back(k);
    e.a.push_back(std::exp(ell / k));
  }
  if (!e.a.empty()) e.last = e.a.back();
  const bool divergent = spec.kind == LogPowerSpec::Kind::PlusEps && spec.alpha0 == 0.0;
  e.analytic_limit = divergent ? kInf : std::exp2(1.0 / spec.alpha0);
  e.ep = e.analytic_limit == 2.0;
  return e;
}

std::string order_name(Order o) {
  switch (o) {
    case Order::Precedes: return "precedes";
    case Order::Equivalent: return "equivalent";
    case Order::Succeeds: return "succeeds";
    case Order::Incomparable: return "incomparable-at-horizon";
  }
  return "?";
}

OrderReport compare_dimension_functions(const DimensionFunction& h1, const DimensionFunction& h2,
                                        const std::vector<double>& ln_t_grid) {
  std::vector<double> grid = ln_t_grid;
  std::sort(grid.begin(), grid.end(), std::greater<double>());
  OrderReport rep;
  for (double lt : grid) {
    if (!h1.in_domain(lt) || !h2.in_domain(lt)) continue;
    rep.ln_t.push_back(lt);
    rep.eta_diff.push_back(h1.eta_at_ln(lt) - h2.eta_at_ln(lt));
  }
  if (rep.eta_diff.size() < 3) throw DomainError("comparison grid has fewer than 3 points in the common domain");
  const auto [lo, hi] = std::minmax_element(rep.eta_diff.begin(), rep.eta_diff.end());
  rep.spread = *hi - *lo;
  const std::size_t n = rep.eta_diff.size();
  const std::size_t third = std::max<std::size_t>(1, n / 3);
  double head = 0.0;
  double tail = 0.0;
  for (std::size_t i = 0; i < third; ++i) {
    head += rep.eta_diff[i];
    tail += rep.eta_diff[n - 1 - i];
  }
  rep.trend = (tail - head) / static_cast<double>(third);
  if (rep.spread <= 2.5)
    rep.order = Order::Equivalent;
  else if (rep.trend >= 3.0)
    rep.order = Order::Precedes;
  else if (rep.trend <= -3.0)
    rep.order = Order::Succeeds;
  else
    rep.order = Order::Incomparable;
  return rep;
}

// Structural checks

std::vector<DoublingRow> parent_cover_check(const GammaModel& model, const DimensionFunction& h, int k_from,
                                            int k_to) {
  if (k_from < 0 || k_to + 1 > model.horizon()) throw HorizonError("levels outside the horizon");
  std::vector<DoublingRow> out;
  for (int k = k_from; k <= k_to; ++k) {
    DoublingRow row;
    row.k = k;
    row.h_C0_delta = cover_cost(h, model.ln_C0() + model.delta(k).ln_mag());
    row.two_h_next = 2.0 * h.at_ln(model.delta(k + 1).ln_mag());
    row.holds = row.h_C0_delta < row.two_h_next;
    out.push_back(row);
  }
  return out;
}

int children_split_count(const LocalGeometry& g, const DimensionFunction& h, int k) {
  if (k > 30) throw DepthError("split count enumerates 2^k intervals; k <= 30");
  int count = 0;
  for (std::int64_t j = 1; j <= (std::int64_t{1} << k); ++j)
    if (content_dp(TreeAtoms::descendants(g, k, j, k + 1), h).runs.size() > 1) ++count;
  return count;
}

DerivativeCheck derivative_bound_check(const DimensionFunction& h, const std::vector<double>& ln_t_grid) {
  if (h.kind() != DimensionFunction::Kind::LogPower) throw ParameterError("derivative check needs a LogPower function");
  const LogPowerSpec& s = h.spec();
  const bool below = s.kind == LogPowerSpec::Kind::MinusEps;
  DerivativeCheck c;
  for (double lt : ln_t_grid) {
    if (!h.in_domain(lt)) continue;
    const double ell = std::log(-lt);
    const double a = s.alpha(ell);
    DerivativeRow row;
    row.ln_t = lt;
    row.ln_lhs = h.ln_derivative(lt);
    row.ln_rhs = std::log(h.at_ln(lt)) - ell - lt + (below ? 0.0 : std::log(a));
    // Compare the slopes directly; the common factor h h0 / t cancels.
    const double lhs = a + s.alpha_prime(ell) * ell;
    const double rhs = below ? 1.0 : a;
    if (!(lhs < rhs)) c.strict = false;
    if (!(lhs <= rhs * (1 + 1e-12))) c.nonstrict = false;
    c.rows.push_back(row);
  }
  return c;
}

// Output

nlohmann::json density_table_json(const DensityTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"ln_r", r.ln_r}, {"radius", r.label}, {"argmin_x", r.argmin_x}, {"inf_phi", r.inf_phi},
                    {"h_2r", r.h_2r}, {"ratio", r.ratio}, {"running_min", r.running_min}});
  nlohmann::json j{{"rows", rows}, {"liminf_estimate", t.liminf_estimate}};
  j["analytic_limit"] = std::isnan(t.analytic_limit) ? nlohmann::json(nullptr) : nlohmann::json(t.analytic_limit);
  return j;
}

std::string density_table_csv(const DensityTable& t) {
  std::ostringstream os;
  os << "ln_r,x,phi,ratio\n";
  if (!t.cells.empty()) {
    for (const auto& c : t.cells) os << num(c.ln_r) << ',' << c.x << ',' << num(c.phi) << ',' << num(c.ratio) << '\n';
  } else {
    for (const auto& r : t.rows)
      os << num(r.ln_r) << ',' << r.argmin_x << ',' << num(r.inf_phi) << ',' << num(r.ratio) << '\n';
  }
  return os.str();
}

nlohmann::json order_report_json(const OrderReport& r) {
  return {{"ln_t", r.ln_t}, {"eta_diff", r.eta_diff}, {"spread", r.spread}, {"trend", r.trend},
          {"order", order_name(r.order)}};
}

nlohmann::json ep_test_json(const EPTest& e) {
  nlohmann::json j{{"k", e.k}, {"a_k", e.a}, {"last", e.last}, {"ep", e.ep}};
  j["analytic_limit"] = std::isinf(e.analytic_limit) ? nlohmann::json("inf") : nlohmann::json(e.analytic_limit);
  return j;
}

}  // namespace kgamma
