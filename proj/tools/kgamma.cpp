#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kgamma/cantor_geometry.hpp"
#include "kgamma/errors.hpp"
#include "kgamma/extension_operator.hpp"
#include "kgamma/gamma_model.hpp"
#include "kgamma/hausdorff.hpp"
#include "kgamma/markov_factors.hpp"

#ifndef KGAMMA_VERSION
#define KGAMMA_VERSION "0.0.0"
#endif

using namespace kgamma;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Every configurable key with its default; the order is the output order.
std::vector<std::pair<std::string, std::string>> default_config() {
  const unsigned hw = std::thread::hardware_concurrency();
  return {
      {"family", "example1"}, {"B", "1"}, {"a", "2"}, {"b", "2"}, {"m", "3"}, {"variant", "powa"},
      {"gammas", ""}, {"h-kind", "constant"}, {"alpha0", "0.5"}, {"Q", "2"}, {"horizon", "30"},
      {"depth", "4"}, {"bits", "512"}, {"N", "8"}, {"interval", "1,0"}, {"epsilon", "0.25"},
      {"dn-m", "0"}, {"q", "1"}, {"S", "4"}, {"function", "sin"}, {"r", ""}, {"k-range", "4,8"},
      {"grid", "9"}, {"format", "json"}, {"out", ""},
      {"workers", std::to_string(hw == 0 ? 1 : hw)}, {"seed", "1"},
  };
}

class RunConfig {
 public:
  RunConfig() {
    for (auto& [k, v] : default_config()) {
      order_.push_back(k);
      values_[k] = v;
    }
  }

  bool known(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) {
    if (!known(key)) throw ValidationError("unknown configuration key '" + key + "'");
    values_[key] = value;
  }

  /// Lines `key = value`; '#' starts a comment.
  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      const auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ValidationError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }

  const std::string& str(const std::string& key) const { return values_.at(key); }

  double real(const std::string& key) const {
    const auto& s = str(key);
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos == s.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError("'" + key + "' must be a finite number, got '" + s + "'");
  }

  int integer(const std::string& key) const {
    const auto& s = str(key);
    try {
      std::size_t pos = 0;
      const long v = std::stol(s, &pos);
      if (pos == s.size() && v >= -(1L << 30) && v <= (1L << 30)) return static_cast<int>(v);
    } catch (const std::exception&) {
    }
    throw ValidationError("'" + key + "' must be an integer, got '" + s + "'");
  }

  std::pair<int, int> int_pair(const std::string& key) const {
    const auto& s = str(key);
    const auto c = s.find(',');
    int a = 0, b = 0;
    char tail = 0;
    if (c == std::string::npos || std::sscanf(s.c_str(), "%d,%d%c", &a, &b, &tail) != 2)
      throw ValidationError("'" + key + "' must be two integers 'a,b', got '" + s + "'");
    return {a, b};
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ValidationError("'" + key + "' must be a comma-separated list of numbers");
      }
    }
    return out;
  }

  json to_json() const {
    json j = json::object();
    for (const auto& k : order_) j[k] = values_.at(k);
    return j;
  }

  const std::vector<std::string>& keys() const { return order_; }

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::string> values_;
};

LogPowerSpec log_power_spec(const RunConfig& c) {
  LogPowerSpec s;
  const auto& hk = c.str("h-kind");
  if (hk == "constant") {
    s.kind = LogPowerSpec::Kind::Constant;
  } else if (hk == "plus-eps") {
    s.kind = LogPowerSpec::Kind::PlusEps;
  } else if (hk == "minus-eps") {
    s.kind = LogPowerSpec::Kind::MinusEps;
  } else {
    throw ValidationError("h-kind must be one of eta, constant, plus-eps, minus-eps");
  }
  s.alpha0 = c.real("alpha0");
  s.m = c.integer("m");
  s.validate();
  return s;
}

FamilySpec family_spec(const RunConfig& c) {
  const auto f = parse_family(c.str("family"));
  if (!f) throw ValidationError("unknown family '" + c.str("family") + "'");
  FamilySpec s;
  s.family = *f;
  s.a = c.real("a");
  s.B = c.real("B");
  s.b = c.real("b");
  s.m = c.integer("m");
  const auto& v = c.str("variant");
  if (v == "powa") {
    s.ex2.variant = Example2Spec::Variant::PowA;
  } else if (v == "powa-halved") {
    s.ex2.variant = Example2Spec::Variant::PowAHalved;
  } else {
    throw ValidationError("variant must be 'powa' or 'powa-halved'");
  }
  if (*f == Family::FromDimensionFunction) s.h = log_power_spec(c);
  if (*f == Family::Custom) s.gammas = c.reals("gammas");
  return s;
}

GammaModel build_model(const RunConfig& c) { return GammaModel::build(family_spec(c), c.integer("horizon")); }

// eta needs a gamma model; the log-power kinds do not.
DimensionFunction dimension_function(const RunConfig& c, const GammaModel* model) {
  if (c.str("h-kind") == "eta") {
    if (model == nullptr) throw ValidationError("h-kind eta needs a K(gamma) family");
    return DimensionFunction::eta_from_delta(*model);
  }
  return DimensionFunction::log_power(log_power_spec(c));
}

std::pair<int, int> checked_range(const RunConfig& c) {
  const auto r = c.int_pair("k-range");
  if (r.first > r.second) throw ValidationError("k-range must satisfy from <= to");
  return r;
}

std::unique_ptr<TaylorFunction> test_function(const std::string& name) {
  if (name == "sin") return make_sine();
  if (name == "cos") return make_cosine();
  if (name == "exp") return make_exp();
  if (name == "one") return make_polynomial({1.0});
  if (name == "x") return make_polynomial({0.0, 1.0});
  if (name == "x2") return make_polynomial({0.0, 0.0, 1.0});
  throw ValidationError("function must be one of sin, cos, exp, one, x, x2");
}

// A subcommand result: JSON always, CSV when the command has a table.
struct Output {
  json result;
  std::optional<std::string> csv;
};

std::string csv_line(const std::vector<std::string>& fields) {
  std::string s;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) s += ',';
    s += fields[i];
  }
  return s + '\n';
}

// ---------------------------------------------------------------------------
// Subcommands

json profile_json(const GammaModel& m, const Profile& p) {
  json rows = json::array();
  for (int k = 0; k <= p.horizon(); ++k) {
    json r;
    r["k"] = k;
    r["ln_gamma"] = k == 0 ? json(nullptr) : json(m.gamma(k).ln_mag());
    r["ln_delta"] = p.delta[static_cast<std::size_t>(k)].ln_mag();
    r["ln_r"] = p.r[static_cast<std::size_t>(k)].ln_mag();
    r["B"] = k == 0 ? json(nullptr) : json(p.B[static_cast<std::size_t>(k)].to_real());
    r["beta"] = k == 0 ? json(nullptr) : json(p.beta[static_cast<std::size_t>(k)]);
    rows.push_back(r);
  }
  return rows;
}

Output cmd_gamma(const RunConfig& c) {
  const auto m = build_model(c);
  const auto p = profile(m);
  const auto ep = classify_ep(m);
  Output o;
  o.result["model"] = m.describe();
  o.result["clamp_prefix"] = m.clamp_prefix();
  o.result["ln_C0"] = m.ln_C0();
  o.result["profile"] = profile_json(m, p);
  o.result["polar"] = p.polar == PolarVerdict::Polar;
  o.result["polar_verdict"] = polar_name(p.polar);
  o.result["polar_rule"] = p.polar_rule;
  o.result["extension_property"] = ternary_name(ep.ep);
  o.result["extension_rule"] = ep.rule;
  std::string csv = csv_line({"k", "ln_gamma", "ln_delta", "ln_r", "B", "beta"});
  for (const auto& r : o.result["profile"]) {
    auto f = [&](const char* key) { return r[key].is_null() ? std::string() : num(r[key].get<double>()); };
    csv += csv_line({std::to_string(r["k"].get<int>()), f("ln_gamma"), f("ln_delta"), f("ln_r"), f("B"), f("beta")});
  }
  o.csv = csv;
  return o;
}

Output cmd_geometry(const RunConfig& c) {
  const auto m = build_model(c);
  const unsigned bits = static_cast<unsigned>(c.integer("bits"));
  PrecisionScope scope(bits);
  const auto tree = build_tree(m, c.integer("depth"), bits);
  const auto rep = verify_geometry(tree);
  Output o;
  o.result["model"] = m.describe();
  o.result["max_depth_for_precision"] = max_depth_for_precision(m, bits);
  o.result["intervals"] = intervals_json(tree);
  o.result["report"] = geometry_report_json(rep);
  std::string csv = csv_line({"level", "index", "left", "right", "ln_length"});
  for (const auto& iv : o.result["intervals"]) {
    csv += csv_line({iv["level"].dump(), iv["index"].dump(), iv["left"].get<std::string>(),
                     iv["right"].get<std::string>(), num(iv["ln_length"].get<double>())});
  }
  o.csv = csv;
  return o;
}

Output cmd_nodes(const RunConfig& c) {
  const auto m = build_model(c);
  const auto [j, s] = c.int_pair("interval");
  const int N = c.integer("N");
  if (N < 1) throw ValidationError("N must be at least 1");
  if (s < 0 || j < 1 || (s < 62 && j > (std::int64_t{1} << s)))
    throw ValidationError("interval j,s needs 1 <= j <= 2^s");
  int n = 0;
  while ((1 << n) < N) ++n;
  const unsigned bits = static_cast<unsigned>(c.integer("bits"));
  PrecisionScope scope(bits);
  const auto tree = build_tree(m, std::max(s + n, 1), bits);
  const auto ns = select_nodes(tree, s, j, N);
  Output o;
  o.result["model"] = m.describe();
  o.result["nodes"] = nodes_json(tree, ns);
  std::string csv = csv_line({"position", "level", "index", "side", "type", "x"});
  int pos = 1;
  for (const auto& node : ns.nodes) {
    csv += csv_line({std::to_string(pos++), std::to_string(node.id.level), std::to_string(node.id.j),
                     node.id.right ? "right" : "left", std::to_string(node.type), to_decimal(tree.point(node.id))});
  }
  o.csv = csv;
  return o;
}

Output cmd_extend(const RunConfig& c) {
  const auto m = build_model(c);
  const LocalGeometry g(m);
  const int S = c.integer("S");
  const int level = c.integer("depth");
  const int q = c.integer("q");
  if (S < 0) throw ValidationError("S must be nonnegative");
  if (level < 0 || level > 12) throw ValidationError("depth for sample points must lie in 0..12");
  const auto sch = Schedule::build(m, S + 1);
  if (sch.levels_needed(S + 1) > m.horizon())
    throw HorizonError("W through level S needs a larger horizon");
  const auto f = test_function(c.str("function"));

  // ||f||_q sampled on the level-4 endpoints.
  TaylorJetSource src(g, *f);
  JetSample sample;
  sample.f = &src;
  const int norm_level = std::min(4, m.horizon());
  for (std::int64_t jj = 1; jj <= (std::int64_t{1} << norm_level); ++jj) {
    sample.points.push_back({norm_level, jj, false});
    sample.points.push_back({norm_level, jj, true});
  }
  const double norm_q = whitney_norms(sample, g, q).value();

  Output o;
  o.result["model"] = m.describe();
  o.result["function"] = f->name();
  o.result["whitney_norm_q"] = norm_q;
  json rows = json::array();
  std::string csv = csv_line({"level", "index", "side", "x", "W", "f", "abs_error", "ln_bound", "within", "local"});
  bool all_within = true;
  for (std::int64_t jj = 1; jj <= (std::int64_t{1} << level); ++jj) {
    for (bool right : {false, true}) {
      const PointId p{level, jj, right};
      const auto w = evaluate_W(*f, Locus{p, {}}, g, sch, S);
      const double x = g.coordinate(p);
      const double fx = f->value(x);
      const auto tc = truncation_check(*f, p, g, sch, S, q, norm_q);
      all_within = all_within && tc.within;
      json r;
      r["level"] = level;
      r["index"] = jj;
      r["side"] = right ? "right" : "left";
      r["x"] = x;
      r["W"] = w.value;
      r["f"] = fx;
      r["abs_error"] = std::abs(w.value - fx);
      r["ln_certified_bound"] = tc.bound.ln_mag();
      r["within"] = tc.within;
      r["local"] = w.locality_ok;
      rows.push_back(r);
      csv += csv_line({std::to_string(level), std::to_string(jj), right ? "right" : "left", num(x), num(w.value),
                       num(fx), num(std::abs(w.value - fx)), num(tc.bound.ln_mag()), tc.within ? "1" : "0",
                       w.locality_ok ? "1" : "0"});
    }
  }
  o.result["points"] = rows;
  o.result["all_within_bound"] = all_within;
  o.csv = csv;
  return o;
}

Output cmd_dn(const RunConfig& c) {
  const auto m = build_model(c);
  const auto [j0, j1] = checked_range(c);
  if (j0 < 1) throw ValidationError("k-range indexes j >= 1 for the witness pairs");
  const Example2Spec spec = m.family() == Family::Example2 ? m.spec().ex2 : Example2Spec{};
  DNParams p;
  p.epsilon = c.real("epsilon");
  p.m = c.integer("dn-m");
  p.sn = witness_pairs(spec, j0, j1);
  for (int j = j0; j <= j1; ++j) p.j_labels.push_back(j);
  const auto rep = dn_experiment(m, p);
  Output o;
  o.result["model"] = m.describe();
  o.result["experiment"] = dn_report_json(rep);
  std::string csv = csv_line({"j", "s", "n", "ln_cfree", "ln_certified", "half_ln_inv_delta"});
  for (const auto& r : rep.rows)
    csv += csv_line({std::to_string(r.j), std::to_string(r.s), std::to_string(r.n), num(r.ln_cfree),
                     num(r.ln_certified), num(r.half_ln_inv_delta)});
  o.csv = csv;
  return o;
}

Output cmd_hausdorff(const RunConfig& c) {
  const auto m = build_model(c);
  const LocalGeometry g(m);
  const auto h = dimension_function(c, &m);
  const auto [k0, k1] = checked_range(c);
  if (k0 < 0) throw ValidationError("k-range must be nonnegative");
  if (k1 > 16) throw ValidationError("level sums enumerate 2^k intervals; k-range must stay <= 16");
  Output o;
  o.result["model"] = m.describe();
  o.result["h"] = h.name();
  json sums = json::array();
  std::string csv = csv_line({"k", "level_sum", "cap"});
  for (int k = k0; k <= k1; ++k) {
    const double v = lambda_level_estimate(g, h, k);
    const double cap = level_sum_cap(m, k);
    sums.push_back({{"k", k}, {"level_sum", v}, {"cap", cap}});
    csv += csv_line({std::to_string(k), num(v), num(cap)});
  }
  o.result["level_sums"] = sums;
  json cover = json::array();
  for (const auto& r : parent_cover_check(m, h, std::max(k0, 1), std::min(k1, m.horizon() - 1)))
    cover.push_back({{"k", r.k}, {"h_C0_delta", r.h_C0_delta}, {"two_h_next", r.two_h_next}, {"holds", r.holds}});
  o.result["parent_cover"] = cover;
  if (h.kind() == DimensionFunction::Kind::LogPower) {
    o.result["root_test"] = ep_test_json(kth_root_test(h.spec(), std::max(k0, 1), std::max(k1, 40)));
  }
  std::vector<double> grid;
  for (int k = 1; k <= m.horizon(); ++k) grid.push_back(m.delta(k).ln_mag());
  o.result["order_vs_h0"] = order_report_json(compare_dimension_functions(h, DimensionFunction::h0(), grid));
  o.csv = csv;
  return o;
}

Example4Spec example4_spec(const RunConfig& c) {
  Example4Spec s;
  if (c.str("Q") == "log") {
    s.q_kind = Example4Spec::QKind::LogK;
  } else {
    s.q_kind = Example4Spec::QKind::Constant;
    s.Q = c.real("Q");
  }
  s.K_max = c.integer("horizon");
  s.validate();
  return s;
}

Output cmd_density(const RunConfig& c) {
  const auto [k0, k1] = checked_range(c);
  Output o;
  DensityTable t;
  if (c.str("family") == "example4") {
    const auto spec = example4_spec(c);
    const auto h = dimension_function(c, nullptr);
    PrecisionScope scope(spec.bits_needed());
    std::vector<Example4Radius> radii;
    if (!c.str("r").empty()) {
      radii.push_back({BigFloat(c.str("r")), "r"});
    } else {
      radii = example4_radii(spec, k0, k1);
    }
    t = density_scan_example4(spec, h, radii);
    o.result["set"] = "countable {0} with atoms [b_k - b_k^Q_k, b_k]";
    o.result["h"] = h.name();
  } else {
    const auto m = build_model(c);
    const LocalGeometry g(m);
    const auto h = dimension_function(c, &m);
    std::vector<std::pair<ExtFloat, std::string>> radii;
    if (!c.str("r").empty()) {
      radii.emplace_back(ExtFloat(c.real("r")), "r");
    } else {
      radii = tree_radii(m, k0, k1);
    }
    t = density_scan_tree(g, h, radii, c.integer("depth"));
    o.result["model"] = m.describe();
    o.result["h"] = h.name();
  }
  o.result["table"] = density_table_json(t);
  o.csv = density_table_csv(t);
  return o;
}

Output cmd_markov(const RunConfig& c) {
  const auto m = build_model(c);
  const int N = c.integer("N");
  const int D = c.integer("depth");
  if (N < 2) throw DegreeError("N must be at least 2");
  const unsigned bits = static_cast<unsigned>(c.integer("bits"));
  PrecisionScope scope(bits);
  MarkovOptions opt;
  opt.seed = static_cast<std::uint64_t>(c.integer("seed"));
  std::vector<double> grid;
  if (D >= 1) grid = tree_grid(build_tree(m, D, bits), c.integer("grid"));
  std::vector<MarkovEstimate> rows;
  for (int n = 2; n <= N; ++n) {
    auto e = markov_bounds(m, n);
    if (!grid.empty() && static_cast<int>(grid.size()) >= 4 * n && n <= 32) {
      e.numeric = markov_numeric(grid, n, opt).value;
      e.methods.push_back("dual-lp-on-tree-grid");
    }
    rows.push_back(std::move(e));
  }
  Output o;
  o.result["model"] = m.describe();
  json est = json::array();
  for (const auto& e : rows) est.push_back(markov_estimate_json(e));
  o.result["estimates"] = est;
  json cert = json::array();
  for (int s = 1; s <= D; ++s) cert.push_back({{"s", s}, {"ln_lower_bound", certificate_ln(m, s, bits)}});
  o.result["certificates"] = cert;
  if (m.family() == Family::Example1 && m.spec().B > 1.0) {
    const auto [k0, k1] = checked_range(c);
    o.result["ratio_vs_irregular"] = ratio_table_json(ratio_table(m.spec().B, std::max(k0, 1), k1));
  }
  o.csv = markov_csv(rows);
  return o;
}

GammaModel model_of(Family f, double p, int K, Example2Spec::Variant v = Example2Spec::Variant::PowA) {
  FamilySpec s;
  s.family = f;
  s.a = p;
  s.B = p;
  s.b = p;
  s.m = static_cast<int>(p);
  s.ex2.variant = v;
  return GammaModel::build(s, K);
}

json verdicts(const GammaModel& m) {
  const auto p = profile(m);
  const auto ep = classify_ep(m);
  return {{"model", m.describe()},
          {"polar", polar_name(p.polar)},
          {"polar_rule", p.polar_rule},
          {"extension_property", ternary_name(ep.ep)},
          {"extension_rule", ep.rule}};
}

Output cmd_examples(const RunConfig& c) {
  Output o;
  json& r = o.result;

  {
    const auto m = model_of(Family::Example1, 1.0, 30);
    json sec = verdicts(m);
    json B = json::array();
    const auto p = profile(m);
    for (int k = 1; k <= 10; ++k) B.push_back(p.B[static_cast<std::size_t>(k)].to_real());
    sec["B_1_to_10"] = B;
    r["constant_B_profile"] = sec;
  }
  {
    DNParams p;
    p.epsilon = c.real("epsilon");
    p.sn = witness_pairs(Example2Spec{}, 2, 5);
    p.j_labels = {2, 3, 4, 5};
    json sec;
    const auto m2 = model_of(Family::Example2, 0.0, 60);
    sec["irregular"] = verdicts(m2);
    sec["irregular"]["experiment"] = dn_report_json(dn_experiment(m2, p));
    const auto m1 = model_of(Family::Example1, 1.0, 60);
    sec["constant_B"] = verdicts(m1);
    sec["constant_B"]["experiment"] = dn_report_json(dn_experiment(m1, p));
    r["dn_witness"] = sec;
  }
  r["iterated_log_classification"] = verdicts(model_of(Family::Example3, 3.0, 40));
  {
    const auto h0 = DimensionFunction::h0();
    const auto m1 = model_of(Family::Example1, 1.0, 40);
    const auto m2 = model_of(Family::Example2, 0.0, 50, Example2Spec::Variant::PowAHalved);
    std::vector<double> g1, g2;
    for (int k = 1; k <= 40; ++k) g1.push_back(m1.delta(k).ln_mag() * 0.999);
    for (int k = 1; k <= 50; ++k) g2.push_back(m2.delta(k).ln_mag());
    json sec;
    sec["h1"] = verdicts(m1);
    sec["h1"]["order_vs_h0"] =
        order_report_json(compare_dimension_functions(DimensionFunction::eta_from_delta(m1), h0, g1));
    sec["h2"] = verdicts(m2);
    sec["h2"]["order_vs_h0"] =
        order_report_json(compare_dimension_functions(DimensionFunction::eta_from_delta(m2), h0, g2));
    r["dimension_function_pair"] = sec;
  }
  {
    LogPowerSpec ls;
    ls.kind = LogPowerSpec::Kind::Constant;
    ls.alpha0 = 0.5;
    const auto h = DimensionFunction::log_power(ls);
    json sec;
    Example4Spec bounded;
    bounded.K_max = 120;
    {
      PrecisionScope scope(bounded.bits_needed());
      sec["bounded_Q"] = density_table_json(density_scan_example4(bounded, h, example4_radii(bounded, 20, 90)));
    }
    Example4Spec growing;
    growing.q_kind = Example4Spec::QKind::LogK;
    growing.K_max = 200;
    {
      PrecisionScope scope(growing.bits_needed());
      std::vector<Example4Radius> rk;
      for (const auto& x : example4_radii(growing, 10, 200))
        if (x.label.find('-') != std::string::npos) rk.push_back(x);
      sec["growing_Q"] = density_table_json(density_scan_example4(growing, h, rk));
    }
    r["countable_set_densities"] = sec;

    json tree;
    for (double b : {2.0, 3.0}) {
      const auto m = model_of(Family::DeltaForm, b, 14);
      const LocalGeometry g(m);
      json t = verdicts(m);
      t["density"] = density_table_json(density_scan_tree(g, h, tree_radii(m, 5, 9), 6));
      tree.push_back(t);
    }
    r["delta_form_densities"] = tree;
  }
  r["markov_ratio_table"] = ratio_table_json(ratio_table(2.0, 1, 30));
  return o;
}

// ---------------------------------------------------------------------------

std::string render(const std::string& command, const RunConfig& c, const Output& out) {
  const auto& fmt = c.str("format");
  if (fmt == "json") {
    json doc;
    doc["artifact"] = {{"name", "kgamma"}, {"version", KGAMMA_VERSION}};
    doc["command"] = command;
    doc["config"] = c.to_json();
    doc["result"] = out.result;
    return doc.dump(2) + "\n";
  }
  if (fmt == "csv") {
    if (!out.csv) throw ValidationError("command '" + command + "' has no CSV form; use --format json");
    std::string s = "# kgamma " KGAMMA_VERSION "\n# command = " + command + "\n";
    for (const auto& k : c.keys()) s += "# " + k + " = " + c.str(k) + "\n";
    return s + *out.csv;
  }
  throw ValidationError("format must be json or csv");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cantor-type sets K(gamma): geometry, extension operator, Hausdorff contents, Markov factors."};
  app.fallthrough();
  app.set_help_all_flag("--help-all");

  RunConfig cfg;
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_options;
  for (const auto& key : cfg.keys()) {
    flag_options[key] = app.add_option("--" + key, flag_values[key], "default: " + cfg.str(key));
  }
  std::string config_path;
  app.add_option("--config", config_path, "file of 'key = value' lines; flags override it");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"gamma", "profile of the gamma sequence, polarity and extension-property verdicts"},
      {"geometry", "basic intervals to a depth with the length and gap invariants"},
      {"nodes", "interpolation nodes of I_{j,s} by the rule of increase of the type"},
      {"extend", "the extension operator W on sample points of K with certified error bounds"},
      {"dn", "(DN) log-ratio statistic along (s, n) witness pairs"},
      {"hausdorff", "level sums, parent-cover check and order against h0"},
      {"density", "lower density table phi(x, r) / h(2r)"},
      {"markov", "Markov factor brackets, numeric factors and certificates"},
      {"examples", "reproduce the worked examples in one run"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const auto subs = app.get_subcommands();
  if (subs.empty()) {
    std::cerr << app.help();
    return 2;
  }
  const std::string command = subs.front()->get_name();

  try {
    if (!config_path.empty()) cfg.load_file(config_path);
    for (const auto& key : cfg.keys())
      if (flag_options[key]->count() > 0) cfg.set(key, flag_values[key]);
    if (cfg.integer("workers") < 1) throw ValidationError("workers must be at least 1");

    Output out;
    if (command == "gamma") out = cmd_gamma(cfg);
    else if (command == "geometry") out = cmd_geometry(cfg);
    else if (command == "nodes") out = cmd_nodes(cfg);
    else if (command == "extend") out = cmd_extend(cfg);
    else if (command == "dn") out = cmd_dn(cfg);
    else if (command == "hausdorff") out = cmd_hausdorff(cfg);
    else if (command == "density") out = cmd_density(cfg);
    else if (command == "markov") out = cmd_markov(cfg);
    else out = cmd_examples(cfg);

    const std::string text = render(command, cfg, out);
    if (cfg.str("out").empty()) {
      std::cout << text;
    } else {
      std::ofstream f(cfg.str("out"), std::ios::binary);
      if (!f) throw ValidationError("cannot write '" + cfg.str("out") + "'");
      f << text;
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "kgamma " << command << ": " << e.what() << "\n";
    return e.exit_code();
  }
}
