#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "kgamma/extension_operator.hpp"

using namespace kgamma;

namespace {

GammaModel example1(int K) {
  FamilySpec s;
  s.family = Family::Example1;
  s.B = 1.0;
  return GammaModel::build(s, K);
}

GammaModel power_law(int K) {
  FamilySpec s;
  s.family = Family::PowerLaw;
  s.a = 2.0;
  return GammaModel::build(s, K);
}

GammaModel example2(int K) {
  FamilySpec s;
  s.family = Family::Example2;
  return GammaModel::build(s, K);
}

// A random point of K at the given level.
PointId random_point(std::mt19937_64& rng, int level) {
  std::uniform_int_distribution<std::int64_t> J(1, std::int64_t{1} << level);
  return {level, J(rng), (rng() & 1u) != 0};
}

}  // namespace

TEST_CASE("schedule for the constant-B family: n_s = s + 1 from s = 2") {
  const auto m = example1(20);
  const auto sch = Schedule::build(m, 8);
  CHECK(sch.n(0) == 2);
  CHECK(sch.n(1) == 2);
  for (int s = 2; s <= 8; ++s) CHECK(sch.n(s) == s + 1);
  CHECK(sch.M(0) == 1);
  CHECK(sch.M(1) == 1);
  CHECK(sch.M(2) == 1);
  CHECK(sch.M(3) == 3);
  CHECK(sch.M(5) == 15);
  CHECK(sch.N(5) == 63);
  CHECK(Schedule::level_of(1) == 0);
  CHECK(Schedule::level_of(7) == 2);
  CHECK(Schedule::level_of(8) == 3);
}

TEST_CASE("schedule invariants: 2^{n_s} <= ln(1/delta_s) < 2^{n_s+1}, nondecreasing") {
  for (const auto& m : {power_law(40), example1(20), example2(40)}) {
    const int S = std::min(m.horizon(), 20);
    const auto sch = Schedule::build(m, S);
    for (int s = 2; s <= S; ++s) {
      const double L = -m.delta(s).ln_mag();
      CHECK(std::ldexp(1.0, sch.n(s)) <= L * (1 + 1e-15));
      CHECK(L < std::ldexp(1.0, sch.n(s) + 1));
      CHECK(sch.n(s) >= sch.n(s - 1));
    }
  }
}

TEST_CASE("smooth step: symmetry, endpoints, derivatives") {
  CHECK(smooth_step(0.0) == 0.0);
  CHECK(smooth_step(1.0) == 1.0);
  CHECK(smooth_step(0.5) == doctest::Approx(0.5));
  for (double t : {0.1, 0.3, 0.45, 0.8}) {
    CHECK(smooth_step(t) + smooth_step(1 - t) == doctest::Approx(1.0).epsilon(1e-14));
    const double h = 1e-5;
    const auto j = smooth_step_jet(t);
    CHECK(j[1] == doctest::Approx((smooth_step(t + h) - smooth_step(t - h)) / (2 * h)).epsilon(1e-7));
    CHECK(2 * j[2] ==
          doctest::Approx((smooth_step(t + h) - 2 * smooth_step(t) + smooth_step(t - h)) / (h * h)).epsilon(1e-4));
  }
  const auto& c = bump_constants();
  CHECK(c[0] == 1.0);
  for (int p = 1; p <= 3; ++p) CHECK(c[static_cast<std::size_t>(p)] >= c[static_cast<std::size_t>(p) - 1]);
  // The steepest slope of psi is 2 at tau = 1/2, times 3 for the ramp width t/3.
  CHECK(c[1] == doctest::Approx(6.0).epsilon(0.02));
}

TEST_CASE("bump on explicit components") {
  const auto b = BumpSpec::from_intervals(0.3, {{0.0, 1.0}, {1.2, 2.0}, {5.0, 6.0}});
  REQUIRE(b.components.size() == 2);  // gap 0.2 <= 4t/3 merges
  CHECK(b(0.5) == 1.0);
  CHECK(b(1.1) == 1.0);
  CHECK(b(-0.05) == 1.0);
  CHECK(b(-0.6) == 0.0);
  CHECK(b(3.0) == 0.0);
  CHECK(b(-0.15) == doctest::Approx(0.5));
  for (double x = -1.0; x < 7.0; x += 0.01) {
    CHECK(b(x) >= 0.0);
    CHECK(b(x) <= 1.0);
  }
  CHECK_THROWS_AS(BumpSpec::from_intervals(0.0, {}), ParameterError);
}

TEST_CASE("bump on K: one inside, zero in the middle of a gap and at distance 2t") {
  const auto m = example1(20);
  const LocalGeometry g(m);
  for (int s : {1, 2, 3}) {
    const ExtFloat t = ExtFloat::from_log(m.delta(s + 1));
    for (std::int64_t j = 1; j <= (std::int64_t{1} << s); ++j) {
      CHECK(bump(g, Locus{{s + 4, (j - 1) * 16 + 5, true}, {}}, t, s, j).value() == 1.0);
      CHECK(bump(g, Locus{{s, j, false}, -(t * ExtFloat(2.0))}, t, s, j).value() == 0.0);
      CHECK(bump(g, Locus{{s, j, true}, t * ExtFloat(2.0)}, t, s, j).value() == 0.0);
      const ExtFloat half_gap = g.gap(s, j) * ExtFloat(0.5);
      CHECK(bump(g, Locus{{s + 1, 2 * j - 1, true}, half_gap}, t, s, j).value() == 0.0);
      // Half way through the ramp.
      CHECK(bump(g, Locus{{s, j, false}, -(t * ExtFloat(0.5))}, t, s, j).value() == doctest::Approx(0.5));
    }
  }
}

TEST_CASE("classic divided differences") {
  const std::vector<double> z{0.0, 0.5, 1.0, 2.0};
  std::vector<double> v;
  for (double x : z) v.push_back(3 * x * x * x - x + 2);
  const auto dd = divided_differences(z, v);
  CHECK(dd[0] == doctest::Approx(2.0));
  CHECK(dd[3] == doctest::Approx(3.0));
  CHECK_THROWS_AS(divided_differences(std::vector<double>{1.0, 1.0}, std::vector<double>{0.0, 1.0}),
                  NodeCollisionError);
}

TEST_CASE("Taylor divided differences agree with the classic table at 256 bits") {
  PrecisionScope scope(256);
  const std::vector<double> yd{0.0, 0.31, 0.07, 0.52, 0.2, 0.45, 0.11, 0.6};
  const double c = 0.25;
  for (const auto& f : {make_sine(), make_exp(), make_polynomial({1.0, -2.0, 0.5, 4.0})}) {
    std::vector<BigFloat> zb;
    std::vector<BigFloat> vb;
    std::vector<ExtFloat> y;
    for (double v : yd) {
      const BigFloat x = BigFloat(c) + BigFloat(v);
      zb.push_back(x);
      if (f->name() == "sin")
        vb.push_back(boost::multiprecision::sin(x));
      else if (f->name() == "exp")
        vb.push_back(boost::multiprecision::exp(x));
      else
        vb.push_back(1 - 2 * x + x * x / 2 + 4 * x * x * x);
      y.emplace_back(v);
    }
    const auto classic = divided_differences(zb, vb);
    const auto taylor = taylor_divided_differences(*f, c, y);
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double ref = classic[k].convert_to<double>();
      if (f->degree() >= 0 && static_cast<int>(k) > f->degree()) {
        CHECK(taylor[k].is_zero());
        continue;
      }
      CHECK(taylor[k].to_double() == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("W reproduces 1, x, x^2 at all depth-5 endpoints") {
  const auto m = example1(24);
  const LocalGeometry g(m);
  const auto sch = Schedule::build(m, 8);
  const auto one = make_polynomial({1.0});
  const auto lin = make_polynomial({0.0, 1.0});
  const auto sq = make_polynomial({0.0, 0.0, 1.0});
  for (std::int64_t j = 1; j <= 32; ++j) {
    for (bool right : {false, true}) {
      const PointId p{5, j, right};
      const double x = g.coordinate(p);
      for (int S : {2, 5}) {
        const auto w1 = evaluate_W(*one, Locus{p, {}}, g, sch, S);
        CHECK(w1.value == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(w1.locality_ok);
        CHECK(evaluate_W(*lin, Locus{p, {}}, g, sch, S).value == doctest::Approx(x).epsilon(1e-12));
        CHECK(std::abs(evaluate_W(*sq, Locus{p, {}}, g, sch, S).value - x * x) <= 1e-12);
      }
    }
  }
}

TEST_CASE("W telescopes to the interpolant of the next level on K") {
  const auto m = example1(24);
  const LocalGeometry g(m);
  const auto sch = Schedule::build(m, 8);
  const auto f = make_sine();
  std::mt19937_64 rng(5);
  for (int it = 0; it < 20; ++it) {
    const PointId p = random_point(rng, 14);
    for (int S = 0; S <= 4; ++S) {
      const double w = evaluate_W(*f, Locus{p, {}}, g, sch, S).value;
      const double L = newton_interpolant(*f, Locus{p, {}}, g, S + 1, p.ancestor(S + 1), sch.M(S + 1));
      CHECK(w == doctest::Approx(L).epsilon(1e-13));
    }
  }
}

TEST_CASE("W is local: at most one A and one T term per level") {
  const auto m = power_law(24);
  const LocalGeometry g(m);
  const auto sch = Schedule::build(m, 6);
  const auto f = make_cosine();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> off(-1.0, 1.0);
  for (int it = 0; it < 60; ++it) {
    const int lvl = 3 + static_cast<int>(rng() % 8);
    const ExtFloat o = ExtFloat::from_log(m.delta(lvl)) * ExtFloat(off(rng));
    const auto w = evaluate_W(*f, Locus{random_point(rng, lvl), o}, g, sch, 4);
    CHECK(w.locality_ok);
    for (const auto& lt : w.levels) {
      CHECK(lt.nonzero_A <= 1);
      CHECK(lt.nonzero_T <= 1);
    }
  }
}

TEST_CASE("truncation error: Newton remainder against a 512-bit Lagrange interpolant") {
  PrecisionScope scope(512);
  const auto m = example1(24);
  const LocalGeometry g(m);
  const auto tree = build_tree(m, 6, 512);
  const auto sch = Schedule::build(m, 6);
  const auto f = make_sine();
  std::mt19937_64 rng(9);
  for (int it = 0; it < 10; ++it) {
    const PointId p = random_point(rng, 6);
    const int S = 2;  // s = 3, M = 3: four nodes of type <= 4
    const auto tc = truncation_check(*f, p, g, sch, S, 1, 1.0);
    const auto nodes = select_nodes(tree, tc.s, p.ancestor(tc.s), static_cast<int>(tc.M + 1));
    const BigFloat x = tree.point(p);
    BigFloat L = 0;
    for (std::size_t k = 0; k < nodes.nodes.size(); ++k) {
      BigFloat w = boost::multiprecision::sin(tree.point(nodes.nodes[k].id));
      for (std::size_t i = 0; i < nodes.nodes.size(); ++i) {
        if (i == k) continue;
        const BigFloat zi = tree.point(nodes.nodes[i].id);
        w *= (x - zi) / (tree.point(nodes.nodes[k].id) - zi);
      }
      L += w;
    }
    const BigFloat err = boost::multiprecision::abs(boost::multiprecision::sin(x) - L);
    if (err == 0) {
      CHECK(tc.observed.is_zero());
      continue;
    }
    CHECK(tc.observed.ln_abs() == doctest::Approx(to_log_real(err).ln_mag()).epsilon(1e-8));
  }
}

TEST_CASE("truncation error of sin within the certified bound, S = 3..6") {
  const auto m = example1(24);
  const LocalGeometry g(m);
  const auto sch = Schedule::build(m, 8);
  const auto f = make_sine();
  TaylorJetSource src(g, *f);
  JetSample sample;
  sample.f = &src;
  for (std::int64_t j = 1; j <= 16; ++j) sample.points.push_back({4, j, j % 2 == 0});
  const double norm5 = whitney_norms(sample, g, 5).value();
  CHECK(norm5 >= 1.0);
  CHECK(norm5 <= 2.0);
  std::mt19937_64 rng(21);
  for (int it = 0; it < 25; ++it) {
    const PointId p = random_point(rng, 16);
    for (int S = 3; S <= 6; ++S) {
      const auto tc = truncation_check(*f, p, g, sch, S, 5, norm5);
      CHECK(tc.within);
      CHECK(tc.observed <= tc.lm_sum);
      CHECK(tc.lm_sum.ln_abs() <= tc.bound.ln_mag());
    }
  }
}

TEST_CASE("Whitney norms of 1 and x on {0, 1}") {
  const auto m = example1(10);
  const LocalGeometry g(m);
  const std::vector<PointId> pts{{0, 1, false}, {0, 1, true}};
  ExplicitJetSource one(g, pts, {{1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}});
  ExplicitJetSource lin(g, pts, {{0.0, 1.0, 0.0}, {1.0, 1.0, 0.0}});
  CHECK(whitney_norms({pts, &one}, g, 2).value() == 1.0);
  CHECK(whitney_norms({pts, &lin}, g, 1).value() == 1.0);
  CHECK(whitney_norms({pts, &lin}, g, 0).value() == doctest::Approx(2.0));  // |f|_0 = 1, |x - y| / 1 = 1
  CHECK_THROWS_AS(whitney_norms({pts, &lin}, g, 3), InsufficientOrderError);
}

TEST_CASE("(DN) witness for the irregular family: constant-free bound grows past half ln(1/delta)") {
  const auto m = example2(60);
  DNParams p;
  p.epsilon = 0.25;
  p.m = 0;
  p.sn = witness_pairs(m.spec().ex2, 2, 5);
  p.j_labels = {2, 3, 4, 5};
  const auto rep = dn_experiment(m, p);
  REQUIRE(rep.rows.size() == 4);
  CHECK(rep.cfree_increasing);
  CHECK(rep.certified_increasing);
  for (const auto& r : rep.rows) {
    if (r.j >= 3) {
      CHECK(r.ln_cfree >= r.half_ln_inv_delta);
      CHECK(r.ln_certified >= r.half_ln_inv_delta);
    }
  }
  // At j = 2 the sum B_4 + ... + B_8 = 2.18 still exceeds 2; the inequality
  // B_s + ... + B_{s+n-1} < 2 only holds for large j.
  CHECK(rep.rows[0].ln_cfree < rep.rows[0].half_ln_inv_delta);
}

TEST_CASE("(DN) statistic for the constant-B family does not grow") {
  const auto m = example1(60);
  DNParams p;
  p.sn = {{4, 12}, {9, 12}, {16, 12}, {25, 12}};
  const auto rep = dn_experiment(m, p);
  CHECK_FALSE(rep.cfree_increasing);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) CHECK(rep.rows[i].ln_cfree <= rep.rows[i - 1].ln_cfree);
}

TEST_CASE("witness function bounds against the node product sampled on K") {
  const auto m = power_law(30);
  DNParams p;
  p.direct = true;
  p.sn = {{2, 2}, {3, 2}, {3, 3}, {4, 3}, {5, 4}};
  for (int mm : {0, 1}) {
    p.m = mm;
    const auto rep = dn_experiment(m, p);
    for (const auto& r : rep.rows) {
      REQUIRE(r.has_direct);
      CHECK(r.ln_f0_direct <= r.ln_f0_bound);
      CHECK(r.ln_fq_direct >= r.ln_fq_bound);
    }
  }
}

// ||f||_r adds the remainder sup to |f|_{r,K}; across the gap the order-r
// remainder alone is r!, and order r-1 adds r!(1 + l/h), so 2 r! is exceeded.
TEST_CASE("witness function: sampled ||f||_r stays below 2 r!" * doctest::should_fail()) {
  const auto m = power_law(30);
  const LocalGeometry g(m);
  const int s = 2;
  const int n = 2;
  const int r = 1 << n;
  std::vector<PointId> z;
  for (const auto& node : rule_nodes(s, 1, r, g.max_level()).nodes) z.push_back(node.id);
  ProductJetSource f(g, s, z);
  JetSample sample;
  sample.f = &f;
  for (std::int64_t i = 1; i <= (std::int64_t{1} << (s + 1)); ++i)
    for (bool right : {false, true}) sample.points.push_back({s + 1 + n, (i - 1) << n | 1, right});
  CHECK(whitney_norms(sample, g, r).value() <= 2 * std::tgamma(r + 1.0));
}

TEST_CASE("witness function: sampled ||f||_r within r! (1 + max_k (1 + l/h)^{r-k} / (r-k)!)") {
  const auto m = power_law(30);
  const LocalGeometry g(m);
  for (auto [s, n] : std::vector<std::pair<int, int>>{{2, 2}, {3, 2}}) {
    const int r = 1 << n;
    std::vector<PointId> z;
    for (const auto& node : rule_nodes(s, 1, r, g.max_level()).nodes) z.push_back(node.id);
    ProductJetSource f(g, s, z);
    JetSample sample;
    sample.f = &f;
    for (std::int64_t i = 1; i <= (std::int64_t{1} << (s + 1)); ++i)
      for (bool right : {false, true}) sample.points.push_back({s + 1 + n, (i - 1) << n | 1, right});
    const auto w = whitney_norms(sample, g, r);
    CHECK(w.sup_part >= std::tgamma(r + 1.0) * (1 - 1e-12));
    const double lh = (g.length(s, 1) / g.gap(s - 1, 1)).to_double();
    double worst = 0.0;
    for (int k = 0; k <= r; ++k) worst = std::max(worst, std::pow(1 + lh, r - k) / std::tgamma(r - k + 1.0));
    CHECK(w.value() <= std::tgamma(r + 1.0) * (1 + worst));
    CHECK(w.value() > 2 * std::tgamma(r + 1.0));
  }
}

TEST_CASE("distance product bound on the first two basic intervals") {
  for (const auto& m : {example1(30), power_law(30)}) {
    const LocalGeometry g(m);
    for (auto [s, j] : std::vector<std::pair<int, int>>{{1, 1}, {1, 2}}) {
      for (int N = 2; N <= 12; ++N) {
        const auto rep = check_distance_product_bound(g, s, j, N);
        CHECK(rep.cases > 0);
        CHECK(rep.ok());
      }
    }
  }
}

TEST_CASE("chain minimum matches a dynamic program") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int it = 0; it < 20; ++it) {
    const int np = 9;
    std::vector<double> x;
    for (int i = 0; i < np; ++i) x.push_back(U(rng));
    std::sort(x.begin(), x.end());
    std::vector<std::vector<ExtFloat>> d(np, std::vector<ExtFloat>(np));
    for (int a = 0; a < np; ++a)
      for (int b = 0; b < np; ++b) d[a][b] = ExtFloat(std::abs(x[a] - x[b]));
    for (int q : {1, 3}) {
      for (int jj = 1; jj + q <= np; ++jj) {
        // best[a][b]: minimal product reaching [a, b] from [jj, jj+q].
        std::vector<std::vector<double>> best(np + 1, std::vector<double>(np + 1, INFINITY));
        best[jj][jj + q] = 1.0;
        for (int len = q; len < np; ++len)
          for (int a = 1; a + len <= np; ++a) {
            const int b = a + len;
            if (best[a][b] == INFINITY) continue;
            if (a > 1) best[a - 1][b] = std::min(best[a - 1][b], best[a][b] * (x[b - 1] - x[a - 2]));
            if (b < np) best[a][b + 1] = std::min(best[a][b + 1], best[a][b] * (x[b] - x[a - 1]));
          }
        CHECK(chain_minimum(d, jj, q).to_double() == doctest::Approx(best[1][np]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("chain product bound on the first two basic intervals") {
  for (const auto& m : {example1(30), power_law(30)}) {
    const LocalGeometry g(m);
    for (auto [s, j] : std::vector<std::pair<int, int>>{{1, 1}, {1, 2}}) {
      for (int N = 4; N <= 12; ++N) {
        CHECK(check_chain_product_bound(g, s, j, N, 1).ok());
        if (N >= 8) CHECK(check_chain_product_bound(g, s, j, N, 3).ok());
      }
    }
  }
  const LocalGeometry g(example1(30));
  CHECK_THROWS_AS(check_chain_product_bound(g, 1, 1, 5, 3), ParameterError);
}

TEST_CASE("derivative bound for the bumped node product around K") {
  const auto m = power_law(30);
  const LocalGeometry g(m);
  for (int N : {2, 3, 5, 8, 12}) {
    const auto rep = check_bumped_product_derivatives(g, 1, 1, N, 9);
    CHECK(rep.cases > 0);
    CHECK(rep.ok());
  }
}
