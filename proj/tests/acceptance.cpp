#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "kgamma/cantor_geometry.hpp"
#include "kgamma/errors.hpp"
#include "kgamma/extension_operator.hpp"
#include "kgamma/gamma_model.hpp"
#include "kgamma/hausdorff.hpp"
#include "kgamma/markov_factors.hpp"

using namespace kgamma;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  // Records one sub-check; the criterion passes only if every sub-check does.
  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "NOT ") + what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

GammaModel model(Family f, double p, int K) {
  FamilySpec s;
  s.family = f;
  s.a = p;
  s.B = p;
  s.b = p;
  s.m = static_cast<int>(p);
  return GammaModel::build(s, K);
}

LogPowerSpec log_power(LogPowerSpec::Kind kind, double alpha0) {
  LogPowerSpec s;
  s.kind = kind;
  s.alpha0 = alpha0;
  return s;
}

PointId random_point(std::mt19937_64& rng, int level) {
  std::uniform_int_distribution<std::int64_t> J(1, std::int64_t{1} << level);
  return {level, J(rng), (rng() & 1u) != 0};
}

Verdict geometry_invariants() {
  Verdict v;
  for (const auto& m : {model(Family::Example1, 1.0, 10), model(Family::PowerLaw, 2.0, 12)}) {
    PrecisionScope scope(512);
    const auto tree = build_tree(m, 6, 512);
    const auto rep = verify_geometry(tree);
    double worst = 0.0;
    for (const auto& row : rep.rows) worst = std::max(worst, row.max_rel_residual);
    v.require(rep.length_bounds && rep.gap_bound, m.describe() + " delta_s < l < C0 delta_s and h >= 7/8 l");
    v.require(worst < std::ldexp(1.0, -256), m.describe() + " residual " + fmt("%.2e", worst) + " < 2^-256");
  }
  return v;
}

Verdict node_rule() {
  Verdict v;
  PrecisionScope scope(512);
  const auto tree = build_tree(model(Family::Example1, 1.0, 10), 3, 512);
  const auto ns = select_nodes(tree, 0, 1, 8);
  const auto len = [&](int s, std::int64_t j) { return tree.interval(s, j).right - tree.interval(s, j).left; };
  // x1 = 0, x2 = 1, x3 = l11, x4 = 1 - l21, x5 = l12, x6 = 1 - l42, x7 = l11 - l22, x8 = 1 - l21 + l32.
  const std::vector<BigFloat> expect{BigFloat(0), BigFloat(1), len(1, 1), 1 - len(1, 2), len(2, 1),
                                     1 - len(2, 4), len(1, 1) - len(2, 2), 1 - len(1, 2) + len(2, 3)};
  const std::vector<int> types{0, 0, 1, 1, 2, 2, 2, 2};
  bool order_ok = ns.nodes.size() == 8;
  for (std::size_t i = 0; order_ok && i < 8; ++i) {
    const BigFloat d = abs(tree.point(ns.nodes[i].id) - expect[i]);
    order_ok = d <= ldexp(BigFloat(1), -480) && ns.nodes[i].type == types[i];
  }
  v.require(order_ok, "x1..x8 on [0,1] in rule order");
  bool prefix = true;
  for (int N = 1; N <= 8; ++N) {
    const auto part = select_nodes(tree, 0, 1, N);
    for (int i = 0; i < N; ++i) prefix = prefix && part.nodes[static_cast<std::size_t>(i)].id == ns.nodes[static_cast<std::size_t>(i)].id;
  }
  v.require(prefix, "prefix property for N <= 8");
  return v;
}

Verdict extension_identity() {
  Verdict v;
  const auto m = model(Family::Example1, 1.0, 24);
  const LocalGeometry g(m);
  const auto sch = Schedule::build(m, 8);
  const std::vector<std::unique_ptr<TaylorFunction>> polys = [] {
    std::vector<std::unique_ptr<TaylorFunction>> out;
    out.push_back(make_polynomial({1.0}));
    out.push_back(make_polynomial({0.0, 1.0}));
    out.push_back(make_polynomial({0.0, 0.0, 1.0}));
    return out;
  }();
  // Errors relative to sup |f| on [0,1], which is 1 for all three; pointwise
  // ratios near x = 0 measure cancellation between O(x) Newton terms instead.
  double worst = 0.0, worst_pointwise = 0.0;
  for (std::int64_t j = 1; j <= 32; ++j) {
    for (bool right : {false, true}) {
      const PointId p{5, j, right};
      const double x = g.coordinate(p);
      for (const auto& f : polys) {
        const double w = evaluate_W(*f, Locus{p, {}}, g, sch, 5).value;
        const double fx = f->value(x);
        worst = std::max(worst, std::abs(w - fx));
        if (fx != 0.0) worst_pointwise = std::max(worst_pointwise, std::abs(w - fx) / std::abs(fx));
      }
    }
  }
  v.require(worst <= 1e-12, "W(f) = f for 1, x, x^2 at depth-5 endpoints, worst error / sup|f| " + fmt("%.1e", worst) +
                                " (pointwise " + fmt("%.1e", worst_pointwise) + ")");

  const auto f = make_sine();
  TaylorJetSource src(g, *f);
  JetSample sample;
  sample.f = &src;
  for (std::int64_t j = 1; j <= 16; ++j) sample.points.push_back({4, j, j % 2 == 0});
  const double norm5 = whitney_norms(sample, g, 5).value();
  std::mt19937_64 rng(21);
  int outside = 0;
  double tightest = -INFINITY;
  for (int it = 0; it < 100; ++it) {
    const PointId p = random_point(rng, 16);
    for (int S = 3; S <= 6; ++S) {
      const auto tc = truncation_check(*f, p, g, sch, S, 5, norm5);
      if (!tc.within) ++outside;
      if (!tc.observed.is_zero()) tightest = std::max(tightest, tc.observed.ln_abs() - tc.bound.ln_mag());
    }
  }
  v.require(outside == 0, "sin: |W_S f - f| within the certified bound at S = 3..6 for 100 x, max ln(err/bound) " +
                              fmt("%.1f", tightest));
  return v;
}

Verdict locality() {
  Verdict v;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (const auto& m : {model(Family::Example1, 1.0, 24), model(Family::PowerLaw, 2.0, 24)}) {
    const LocalGeometry g(m);
    const auto sch = Schedule::build(m, 6);
    const auto f = make_cosine();
    int violations = 0;
    for (int it = 0; it < 1000; ++it) {
      const auto w = evaluate_W(*f, Locus{{0, 1, false}, ExtFloat(U(rng))}, g, sch, 5);
      for (const auto& lt : w.levels)
        if (lt.nonzero_A > 1 || lt.nonzero_T > 1) ++violations;
      if (!w.locality_ok) ++violations;
    }
    v.require(violations == 0, m.describe() + ": " + std::to_string(violations) + " violations in 1000 x");
  }
  return v;
}

Verdict node_product_inequalities() {
  Verdict v;
  for (const auto& m : {model(Family::Example1, 1.0, 30), model(Family::PowerLaw, 2.0, 30)}) {
    const LocalGeometry g(m);
    int cases = 0, violations = 0;
    for (int s_j : {1, 2}) {
      for (int N = 2; N <= 12; ++N) {
        const auto a = check_distance_product_bound(g, 1, s_j, N);
        cases += a.cases;
        violations += a.violations;
        for (int q : {1, 2, 3}) {
          try {
            const auto b = check_chain_product_bound(g, 1, s_j, N, q);
            cases += b.cases;
            violations += b.violations;
          } catch (const ParameterError&) {
            // N too small for q
          }
        }
      }
    }
    v.require(violations == 0, m.describe() + ": " + std::to_string(cases) + " cases, " +
                                   std::to_string(violations) + " violations");
  }
  return v;
}

Verdict dn_experiment_check() {
  Verdict v;
  DNParams p;
  p.epsilon = 0.25;
  p.sn = witness_pairs(Example2Spec{}, 2, 5);
  p.j_labels = {2, 3, 4, 5};
  const auto rep2 = dn_experiment(model(Family::Example2, 0.0, 60), p);
  std::string below;
  for (const auto& r : rep2.rows)
    if (r.ln_certified < r.half_ln_inv_delta)
      below += " j=" + std::to_string(r.j) + " (" + fmt("%.1f", r.ln_certified) + " < " +
               fmt("%.1f", r.half_ln_inv_delta) + ")";
  v.require(below.empty(), "irregular family: certified >= half ln(1/delta_{s+n}) on j = 2..5" +
                               (below.empty() ? std::string() : ", fails at" + below));
  v.require(rep2.certified_increasing, "irregular family: certified statistic increases along j");

  const auto rep1 = dn_experiment(model(Family::Example1, 1.0, 60), p);
  bool flat = true;
  double prev = INFINITY;
  for (const auto& r : rep1.rows) {
    const double normalized = r.ln_certified / r.half_ln_inv_delta;
    flat = flat && normalized < 1.0 && normalized <= prev;
    prev = normalized;
  }
  v.require(flat, "constant-B family: certified / half ln(1/delta) below 1 and nonincreasing");
  return v;
}

Verdict hausdorff_content() {
  Verdict v;
  const auto h = DimensionFunction::log_power(log_power(LogPowerSpec::Kind::Constant, 0.5));
  Example4Spec spec;
  spec.K_max = 60;
  PrecisionScope scope(spec.bits_needed());
  bool tail = true;
  for (int n : {5, 10, 20}) {
    const auto atoms = example4_atoms(spec, n);
    const auto c = content_dp(atoms, h);
    tail = tail && c.runs.size() == 1 && std::abs(c.value / (1.0 / std::sqrt(n)) - 1.0) < 1e-13;
  }
  v.require(tail, "tail queries n = 5, 10, 20 give h(b_n) with one covering interval");

  const auto all = example4_atoms(spec);
  std::string merged;
  for (int k : {5, 10, 20, 40}) {
    const std::size_t i = example4_index(spec, k + 1);
    const IntervalAtoms two({all.atoms()[i], all.atoms()[i + 1]}, all.bits());
    const auto c = content_dp(two, h);
    if (c.runs.size() != 2)
      merged += " k=" + std::to_string(k) + " (merged " + fmt("%.4f", c.value) + " < separate " +
                fmt("%.4f", h.at_ln(two.ln_hull(0, 0)) + h.at_ln(two.ln_hull(1, 1))) + ")";
  }
  v.require(merged.empty(), "adjacent I_k, I_{k+1} covered separately" +
                                (merged.empty() ? std::string() : ", merged at" + merged));

  // Exhaustive oracle: every window of <= 12 consecutive atoms, plus random sets.
  int mismatches = 0, sets = 0;
  for (std::size_t len = 1; len <= 12; ++len) {
    for (std::size_t first = 0; first + len <= all.size(); first += 3) {
      std::vector<IntervalAtoms::Atom> w(all.atoms().begin() + static_cast<long>(first),
                                         all.atoms().begin() + static_cast<long>(first + len));
      const IntervalAtoms set(std::move(w), all.bits());
      ++sets;
      if (std::abs(content_dp(set, h).value - content_bruteforce(set, h).value) > 1e-13 * content_dp(set, h).value)
        ++mismatches;
    }
  }
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 600; ++trial) {
    const int m = 1 + trial % 12;
    std::vector<double> cuts;
    for (int i = 0; i < 2 * m; ++i) cuts.push_back(std::exp(-30.0 * U(rng)) * 0.3);
    std::sort(cuts.begin(), cuts.end());
    if (std::adjacent_find(cuts.begin(), cuts.end()) != cuts.end()) continue;
    std::vector<IntervalAtoms::Atom> atoms;
    for (int i = 0; i < m; ++i) atoms.push_back({BigFloat(cuts[2 * i]), BigFloat(cuts[2 * i + 1]), ""});
    const IntervalAtoms set(std::move(atoms), 256);
    ++sets;
    const double a = content_dp(set, h).value, b = content_bruteforce(set, h).value;
    if (std::abs(a - b) > 1e-13 * b) ++mismatches;
  }
  v.require(mismatches == 0, "DP equals exhaustive search on " + std::to_string(sets) + " sets of <= 12 atoms");
  return v;
}

Verdict level_sums() {
  Verdict v;
  const auto m = model(Family::Example1, 1.0, 12);
  const LocalGeometry g(m);
  const auto h = DimensionFunction::eta_from_delta(m);
  double prev = INFINITY;
  bool bracket = true, decreasing = true;
  std::string values;
  for (int k = 4; k <= 7; ++k) {
    const double s = lambda_level_estimate(g, h, k);
    const double a = level_sum_cap(m, k);
    bracket = bracket && s > 1.0 && s < a;
    decreasing = decreasing && s < prev;
    prev = s;
    values += " " + fmt("%.6f", s) + "<" + fmt("%.6f", a);
  }
  v.require(bracket, "1 < sum_j h(l_{j,k}) < a_k <= 1 + a_k for k = 4..7:" + values);
  v.require(decreasing, "sums decrease toward 1");
  return v;
}

Verdict densities() {
  Verdict v;
  const auto h = DimensionFunction::log_power(log_power(LogPowerSpec::Kind::Constant, 0.5));
  {
    Example4Spec spec;
    spec.K_max = 120;
    PrecisionScope scope(spec.bits_needed());
    const auto t = density_scan_example4(spec, h, example4_radii(spec, 20, 90));
    v.require(std::abs(t.liminf_estimate / std::sqrt(0.5) - 1.0) < 0.1,
              "countable set, Q = 2: liminf " + fmt("%.4f", t.liminf_estimate) + " within 10% of 2^-1/2");
  }
  {
    Example4Spec spec;
    spec.q_kind = Example4Spec::QKind::LogK;
    spec.K_max = 200;
    PrecisionScope scope(spec.bits_needed());
    std::vector<Example4Radius> rk;
    for (const auto& r : example4_radii(spec, 10, 200))
      if (r.label.find('-') != std::string::npos) rk.push_back(r);
    const auto t = density_scan_example4(spec, h, rk);
    bool monotone = true;
    for (std::size_t i = 1; i < t.rows.size(); ++i) monotone = monotone && t.rows[i].ratio <= t.rows[i - 1].ratio * (1 + 1e-12);
    v.require(monotone, "countable set, Q_k = max(2, ln k): ratio at r_k decreasing");
    v.require(t.rows.back().ratio < 0.05,
              "ratio at r_200 = " + fmt("%.4f", t.rows.back().ratio) + " below 0.05 (Q_200^-1/2 = " +
                  fmt("%.4f", 1.0 / std::sqrt(spec.Q_at(200))) + ")");
  }
  std::vector<std::string> eps;
  for (double b : {2.0, 3.0}) {
    const auto m = model(Family::DeltaForm, b, 14);
    const LocalGeometry g(m);
    const auto t = density_scan_tree(g, h, tree_radii(m, 5, 9), 6);
    v.require(std::abs(t.liminf_estimate * std::sqrt(b) - 1.0) < 0.1,
              m.describe() + ": liminf " + fmt("%.4f", t.liminf_estimate) + " within 10% of b^-1/2");
    eps.push_back(ternary_name(classify_ep(m).ep));
  }
  v.require(eps[0] == "yes" && eps[1] == "no", "EP verdicts b = 2: " + eps[0] + ", b = 3: " + eps[1]);
  return v;
}

Verdict root_test_limits() {
  Verdict v;
  const auto slow = kth_root_test(log_power(LogPowerSpec::Kind::MinusEps, 1.0), 1, 40);
  v.require(std::abs(slow.last / 2.0 - 1.0) < 0.05,
            "alpha = 1 - eps_3: a_40 = " + fmt("%.4f", slow.last) + " within 5% of 2");
  const auto half = kth_root_test(log_power(LogPowerSpec::Kind::Constant, 0.5), 1, 40);
  v.require(std::abs(half.last / 4.0 - 1.0) < 0.05, "alpha = 1/2: a_40 = " + fmt("%.4f", half.last) + " within 5% of 4");
  return v;
}

Verdict markov() {
  Verdict v;
  const auto grid = chebyshev_grid(0.0, 1.0, 512);
  const double m2 = markov_numeric(grid, 2).value;
  const double m3 = markov_numeric(grid, 3).value;
  v.require(std::abs(m2 / 8.0 - 1.0) < 0.02, "M_2 on [0,1] = " + fmt("%.6f", m2));
  v.require(std::abs(m3 / 18.0 - 1.0) < 0.02, "M_3 on [0,1] = " + fmt("%.6f", m3));
  for (const auto& m : {model(Family::PowerLaw, 2.0, 8), model(Family::Example1, 1.0, 8)}) {
    PrecisionScope scope(512);
    const auto tgrid = tree_grid(build_tree(m, 3, 512), 9);
    bool inside = true;
    for (int n = 2; n <= 7; ++n) {
      const auto e = markov_bounds(m, n);
      const double ln_v = std::log(markov_numeric(tgrid, n).value);
      inside = inside && ln_v > e.lower.ln_mag() && ln_v < e.upper.ln_mag();
    }
    v.require(inside, m.describe() + " depth 3: numeric M_n inside (1/delta_k, 4/delta_{k+1}) for n = 2..7");
  }
  const auto t = ratio_table(2.0, 1, 40);
  bool ok = true;
  for (std::size_t i = 1; i < t.rows.size(); ++i)
    if (t.rows[i].j > 3) ok = ok && t.rows[i].bound < 0.0 && t.rows[i].bound < t.rows[i - 1].bound;
  v.require(ok, "B = 2 ratio bound negative and strictly decreasing beyond j = 3");
  return v;
}

Verdict ep_table() {
  Verdict v;
  struct Row {
    const char* name;
    Family f;
    double p;
    Ternary expect;
  };
  const std::vector<Row> rows{{"PowerLaw", Family::PowerLaw, 2.0, Ternary::Yes},
                              {"Exponential", Family::Exponential, 2.0, Ternary::Yes},
                              {"DoublyExp(2)", Family::DoublyExp, 2.0, Ternary::Yes},
                              {"DoublyExp(3)", Family::DoublyExp, 3.0, Ternary::No},
                              {"Example1", Family::Example1, 1.0, Ternary::Yes},
                              {"Example2", Family::Example2, 0.0, Ternary::No},
                              {"Example3", Family::Example3, 3.0, Ternary::Yes},
                              {"DeltaForm(2)", Family::DeltaForm, 2.0, Ternary::Yes},
                              {"DeltaForm(3)", Family::DeltaForm, 3.0, Ternary::No}};
  for (const auto& r : rows) {
    const auto got = classify_ep(model(r.f, r.p, 40)).ep;
    v.require(got == r.expect, std::string(r.name) + "=" + ternary_name(got));
  }
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* what;
    double limit_s;  // 0: no runtime limit
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> all{
      {"AC1", "geometry invariants", 10, geometry_invariants},
      {"AC2", "node rule", 1, node_rule},
      {"AC3", "extension identity", 60, extension_identity},
      {"AC4", "locality", 0, locality},
      {"AC5", "node product inequalities", 120, node_product_inequalities},
      {"AC6", "(DN) experiment", 0, dn_experiment_check},
      {"AC7", "Hausdorff content", 30, hausdorff_content},
      {"AC8", "level sums", 0, level_sums},
      {"AC9", "densities", 0, densities},
      {"AC10", "root-test limits", 0, root_test_limits},
      {"AC11", "Markov factors", 60, markov},
      {"AC12", "EP classifier", 0, ep_table},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.require(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0) v.require(secs < c.limit_s, "runtime " + fmt("%.2f", secs) + " s < " + fmt("%.0f", c.limit_s) + " s");
    else v.detail += "; runtime " + fmt("%.2f", secs) + " s";
    if (!v.pass) ++failed;
    std::printf("%s %s %s: %s\n", c.id, v.pass ? "PASS" : "FAIL", c.what, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
