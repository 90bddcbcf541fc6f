#include "kgamma/markov_factors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include "kgamma/big_float.hpp"
#include "kgamma/errors.hpp"

namespace kgamma {

namespace {

constexpr double kLn2 = std::numbers::ln2;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct DualResult {
  double value = 0.0;
  Eigen::VectorXd y;  // primal coefficients: A^T y <= 1 componentwise
  bool stalled = false;
};

// min 1^T w subject to A w = g, w >= 0, by a two-phase revised simplex with
// Bland's rule. The basis is refactored every iteration (m <= 33), so no
// tableau drift accumulates. Artificial column i is sign(g_i) e_i.
class Simplex {
 public:
  Simplex(const Eigen::MatrixXd& A, const Eigen::VectorXd& g, double tol)
      : A_(A), g_(g), m_(A.rows()), N_(A.cols()), basis_(static_cast<std::size_t>(m_)) {
    scale_ = std::max(1.0, A.cwiseAbs().maxCoeff());
    tol_ = tol;
    for (Eigen::Index i = 0; i < m_; ++i) basis_[static_cast<std::size_t>(i)] = N_ + i;
    limit_ = 20 * (N_ + m_);
  }

  DualResult solve() {
    run(true);
    // Swap remaining artificials (at level zero) for structural columns.
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < N_) continue;
      factor();
      for (Eigen::Index j = 0; j < N_; ++j) {
        if (in_basis(j)) continue;
        const Eigen::VectorXd d = lu_.solve(column(j));
        if (std::abs(d(i)) > 1e-9) {
          basis_[static_cast<std::size_t>(i)] = j;
          break;
        }
      }
    }
    run(false);

    DualResult r;
    r.stalled = stalled_;
    factor();
    const Eigen::VectorXd xb = lu_.solve(g_);
    Eigen::VectorXd cb(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const bool structural = basis_[static_cast<std::size_t>(i)] < N_;
      cb(i) = structural ? 1.0 : 0.0;
      if (structural) r.value += xb(i);
    }
    r.y = lu_.transpose().solve(cb);
    return r;
  }

 private:
  Eigen::VectorXd column(Eigen::Index j) const {
    if (j < N_) return A_.col(j);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m_);
    e(j - N_) = g_(j - N_) < 0 ? -1.0 : 1.0;
    return e;
  }

  bool in_basis(Eigen::Index j) const { return std::find(basis_.begin(), basis_.end(), j) != basis_.end(); }

  void factor() {
    Eigen::MatrixXd B(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) B.col(i) = column(basis_[static_cast<std::size_t>(i)]);
    lu_.compute(B);
  }

  // phase1: minimize the artificial sum; otherwise the structural sum with
  // artificials barred from entering.
  void run(bool phase1) {
    auto cost = [&](Eigen::Index j) { return (j < N_) != phase1 ? 1.0 : 0.0; };
    const Eigen::Index columns = phase1 ? N_ + m_ : N_;
    for (; iterations_ < limit_; ++iterations_) {
      factor();
      const Eigen::VectorXd xb = lu_.solve(g_);
      Eigen::VectorXd cb(m_);
      for (Eigen::Index i = 0; i < m_; ++i) cb(i) = cost(basis_[static_cast<std::size_t>(i)]);
      const Eigen::VectorXd y = lu_.transpose().solve(cb);
      const double rc_tol = tol_ * (1.0 + y.cwiseAbs().sum() * scale_);
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < columns; ++j) {
        if (in_basis(j)) continue;
        const double rc = cost(j) - y.dot(column(j));
        if (rc < -rc_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return;
      const Eigen::VectorXd d = lu_.solve(column(enter));
      Eigen::Index leave = -1;
      double best = 0.0;
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (d(i) <= 1e-12) continue;
        const double ratio = std::max(0.0, xb(i)) / d(i);
        if (leave < 0 || ratio < best ||
            (ratio == best && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) throw PrecisionError("Markov LP dual is unbounded: grid has fewer than n + 1 distinct points");
      basis_[static_cast<std::size_t>(leave)] = enter;
    }
    stalled_ = true;
  }

  Eigen::MatrixXd A_;
  Eigen::VectorXd g_;
  Eigen::Index m_;
  Eigen::Index N_;
  std::vector<Eigen::Index> basis_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double scale_ = 1.0;
  double tol_ = 0.0;
  Eigen::Index limit_ = 0;
  Eigen::Index iterations_ = 0;
  bool stalled_ = false;
};

// T_0..T_n at u.
Eigen::VectorXd cheb_values(double u, int n) {
  Eigen::VectorXd t(n + 1);
  t(0) = 1.0;
  if (n >= 1) t(1) = u;
  for (int i = 2; i <= n; ++i) t(i) = 2.0 * u * t(i - 1) - t(i - 2);
  return t;
}

// T_0'..T_n' at u, through T_i' = i U_{i-1}.
Eigen::VectorXd cheb_derivatives(double u, int n) {
  Eigen::VectorXd d(n + 1);
  d(0) = 0.0;
  double um2 = 0.0;
  double um1 = 1.0;  // U_0
  for (int i = 1; i <= n; ++i) {
    d(i) = i * um1;
    const double next = 2.0 * u * um1 - um2;
    um2 = um1;
    um1 = next;
  }
  return d;
}

}  // namespace

MarkovEstimate markov_bounds(const GammaModel& model, int n) {
  if (n < 2) throw DegreeError("Markov bracket needs n >= 2");
  MarkovEstimate e;
  e.n = n;
  e.k = static_cast<int>(std::bit_width(static_cast<unsigned>(n))) - 1;
  if (e.k + 1 > model.horizon()) throw HorizonError("Markov bracket needs delta_{k+1} within the horizon");
  const double ld_k = model.delta(e.k).ln_mag();
  const double ld_k1 = model.delta(e.k + 1).ln_mag();
  e.lower = LogReal::from_log(-ld_k);
  e.upper = LogReal::from_log(2.0 * kLn2 - ld_k1);
  e.methods.push_back("bracket 1/delta_k, 4/delta_{k+1}");
  if ((n & (n - 1)) == 0) {
    e.point = LogReal::from_log(kLn2 - ld_k);
    e.methods.push_back("asymptotic 2/delta_k");
  }
  return e;
}

double certificate_ln(const GammaModel& model, int s, unsigned mantissa_bits) {
  if (s < 0) throw ParameterError("certificate level must be >= 0");
  const CantorTree tree = build_tree(model, s, mantissa_bits);
  PrecisionScope scope(mantissa_bits);
  const auto& r = tree.r();
  BigFloat sup = 0;
  BigFloat slope = 0;
  for (const auto& I : tree.level(s)) {
    for (const BigFloat* x : {&I.left, &I.right}) {
      BigFloat p = *x - 1;
      BigFloat dp = 1;
      for (int i = 0; i < s; ++i) {
        const BigFloat& ri = r[static_cast<std::size_t>(i)];
        dp = dp * (2 * p + ri);
        p = p * (p + ri);
      }
      const BigFloat q = boost::multiprecision::abs(p + r[static_cast<std::size_t>(s)] / 2);
      if (q > sup) sup = q;
      const BigFloat a = boost::multiprecision::abs(dp);
      if (a > slope) slope = a;
    }
  }
  return to_log_real(slope).ln_mag() - to_log_real(sup).ln_mag();
}

std::vector<double> chebyshev_grid(double a, double b, int m) {
  if (m < 2) throw ParameterError("Chebyshev grid needs at least 2 points");
  std::vector<double> out;
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = m - 1; i >= 0; --i) {
    if (i == m - 1)
      out.push_back(a);
    else if (i == 0)
      out.push_back(b);
    else
      out.push_back(mid + half * std::cos(std::numbers::pi * i / (m - 1)));
  }
  return out;
}

std::vector<double> tree_grid(const CantorTree& tree, int per_atom) {
  std::vector<double> out;
  for (const auto& I : tree.level(tree.depth())) {
    const auto part = chebyshev_grid(I.left.convert_to<double>(), I.right.convert_to<double>(), per_atom);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

MarkovNumeric markov_numeric(std::vector<double> grid, int n, const MarkovOptions& opt) {
  if (n < 1 || n > 32) throw DegreeError("numeric Markov factor needs 1 <= n <= 32");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const auto G = static_cast<Eigen::Index>(grid.size());
  if (G < 4 * n) throw ParameterError("numeric Markov factor needs at least 4n distinct grid points");

  MarkovNumeric out;
  out.hull_lo = grid.front();
  out.hull_hi = grid.back();
  const double a = out.hull_lo;
  const double b = out.hull_hi;
  auto to_u = [&](double x) { return std::clamp((2.0 * x - a - b) / (b - a), -1.0, 1.0); };

  Eigen::MatrixXd A(n + 1, 2 * G);
  for (Eigen::Index j = 0; j < G; ++j) {
    const Eigen::VectorXd t = cheb_values(to_u(grid[static_cast<std::size_t>(j)]), n);
    A.col(j) = t;
    A.col(G + j) = -t;
  }

  // Candidates: both ends of the grid plus one seeded point per interior stratum.
  const Eigen::Index edge = std::min<Eigen::Index>(G, opt.edge_points < 0 ? n + 2 : opt.edge_points);
  std::vector<Eigen::Index> cand;
  for (Eigen::Index i = 0; i < edge; ++i) {
    cand.push_back(i);
    cand.push_back(G - 1 - i);
  }
  std::mt19937_64 rng(opt.seed);
  const Eigen::Index lo = edge;
  const Eigen::Index hi = G - edge;
  if (hi > lo && opt.strata > 0) {
    for (int s = 0; s < opt.strata; ++s) {
      const Eigen::Index from = lo + (hi - lo) * s / opt.strata;
      const Eigen::Index to = lo + (hi - lo) * (s + 1) / opt.strata;
      if (to <= from) continue;
      std::uniform_int_distribution<Eigen::Index> pick(from, to - 1);
      cand.push_back(pick(rng));
    }
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  out.candidates = static_cast<int>(cand.size());

  const double du = 2.0 / (b - a);
  for (const Eigen::Index c : cand) {
    const double x = grid[static_cast<std::size_t>(c)];
    const Eigen::VectorXd g = du * cheb_derivatives(to_u(x), n);
    Simplex lp(A, g, opt.tolerance);
    const DualResult r = lp.solve();
    out.stalled = out.stalled || r.stalled;
    if (r.value > out.value) {
      out.value = r.value;
      out.x_star = x;
      out.coefficients.assign(r.y.data(), r.y.data() + r.y.size());
    }
  }
  if (!out.coefficients.empty()) {
    const Eigen::Map<const Eigen::VectorXd> y(out.coefficients.data(), n + 1);
    for (Eigen::Index j = 0; j < G; ++j) out.sup_on_grid = std::max(out.sup_on_grid, std::abs(A.col(j).dot(y)));
  }
  return out;
}

RatioTable ratio_table(double B, int k_from, int k_to) {
  if (!(B > 1.0)) throw ParameterError("the ratio bound needs B > 1");
  if (k_from < 1 || k_from > k_to) throw ParameterError("k range must satisfy 1 <= k_from <= k_to");
  FamilySpec s1;
  s1.family = Family::Example1;
  s1.B = B;
  FamilySpec s2;
  s2.family = Family::Example2;
  s2.ex2.variant = Example2Spec::Variant::PowA;
  const GammaModel m1 = GammaModel::build(s1, k_to + 1);
  const GammaModel m2 = GammaModel::build(s2, k_to + 1);
  const auto& ex2 = s2.ex2;
  RatioTable t;
  t.B = B;
  for (int k = k_from; k <= k_to; ++k) {
    RatioRow row;
    row.k = k;
    row.j = 1;
    while (ex2.k_at(row.j + 1) <= k) ++row.j;
    const int next = ex2.k_at(row.j + 1);
    row.last_in_block = k == next - 1;
    row.ln_delta1_k = m1.delta(k).ln_mag();
    row.ln_delta2_k1 = m2.delta(k + 1).ln_mag();
    row.bound = 2.0 * kLn2 + row.ln_delta1_k - row.ln_delta2_k1;
    if (row.last_in_block)
      row.proof_bound = 2.0 * kLn2 - std::ldexp(B, next) + 2.0 * next * std::log(next) + ex2.A(row.j + 1);
    else
      row.proof_bound = 2.0 * kLn2 - std::ldexp(B, k + 1) + 2.0 * (k + 1) * std::log(k + 1.0) + ex2.A(row.j);
    t.rows.push_back(row);
  }
  return t;
}

nlohmann::json markov_estimate_json(const MarkovEstimate& e) {
  nlohmann::json j{{"n", e.n}, {"k", e.k}, {"ln_lower", e.lower.ln_mag()}, {"ln_upper", e.upper.ln_mag()},
                   {"methods", e.methods}};
  j["ln_point"] = e.point ? nlohmann::json(e.point->ln_mag()) : nlohmann::json(nullptr);
  j["numeric"] = e.numeric ? nlohmann::json(*e.numeric) : nlohmann::json(nullptr);
  return j;
}

std::string markov_csv(const std::vector<MarkovEstimate>& rows) {
  std::ostringstream os;
  os << "n,ln_lower,ln_point,ln_upper,numeric\n";
  for (const auto& e : rows) {
    os << e.n << ',' << num(e.lower.ln_mag()) << ',' << (e.point ? num(e.point->ln_mag()) : "") << ','
       << num(e.upper.ln_mag()) << ',' << (e.numeric ? num(*e.numeric) : "") << '\n';
  }
  return os.str();
}

nlohmann::json ratio_table_json(const RatioTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"k", r.k},
                    {"j", r.j},
                    {"branch", r.last_in_block ? "k = k_{j+1} - 1" : "k <= k_{j+1} - 2"},
                    {"ln_delta1_k", r.ln_delta1_k},
                    {"ln_delta2_k1", r.ln_delta2_k1},
                    {"bound", r.bound},
                    {"proof_bound", r.proof_bound}});
  return {{"B", t.B}, {"rows", rows}};
}

}  // namespace kgamma
