#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kgamma/cantor_geometry.hpp"
#include "kgamma/gamma_model.hpp"
#include "kgamma/log_real.hpp"

namespace kgamma {

/// Bracket for M_n(K(gamma)) with 2^k <= n < 2^{k+1}:
/// 1/delta_k < M_n < 4/delta_{k+1}, and M_{2^k} ~ 2/delta_k.
struct MarkovEstimate {
  int n = 0;
  int k = 0;
  LogReal lower;
  LogReal upper;
  std::optional<LogReal> point;  // n = 2^k only
  std::optional<double> numeric;
  std::vector<std::string> methods;
};

/// Throws HorizonError when delta_{k+1} is beyond the horizon.
MarkovEstimate markov_bounds(const GammaModel& model, int n);

/// |Q'(x)| / sup|Q| over the level-s endpoints for Q = P_{2^s} + r_s/2, which
/// maps E_s onto [-r_s/2, r_s/2]; a lower bound for M_{2^s}(K) as ln.
double certificate_ln(const GammaModel& model, int s, unsigned mantissa_bits = kDefaultMantissaBits);

struct MarkovNumeric {
  double value = 0.0;  // max P'(x*) over the candidates
  double x_star = 0.0;
  double hull_lo = 0.0;
  double hull_hi = 0.0;
  /// Extremal polynomial in the Chebyshev basis of the hull.
  std::vector<double> coefficients;
  double sup_on_grid = 0.0;
  int candidates = 0;
  bool stalled = false;
};

struct MarkovOptions {
  int edge_points = -1;  // grid points taken from each end; -1 means n + 2
  int strata = 16;       // one random interior candidate per stratum
  std::uint64_t seed = 1;
  double tolerance = 1e-10;
};

/// Max of P'(x*) subject to |P(x_i)| <= 1 on the grid, over candidate x*.
/// Each LP is solved in its dual form by a simplex exchange on reference sets
/// of n + 1 grid points (Bland's rule). Throws DegreeError for n outside 1..32
/// and ParameterError for fewer than 4n distinct points.
MarkovNumeric markov_numeric(std::vector<double> grid, int n, const MarkovOptions& opt = {});

/// m Chebyshev extrema in each depth-D basic interval (m - 1 doubling nests grids).
std::vector<double> tree_grid(const CantorTree& tree, int per_atom);
/// m Chebyshev extrema on [a, b].
std::vector<double> chebyshev_grid(double a, double b, int m);

struct RatioRow {
  int k = 0;
  int j = 0;
  bool last_in_block = false;  // k = k_{j+1} - 1
  double ln_delta1_k = 0.0;
  double ln_delta2_k1 = 0.0;
  double bound = 0.0;        // ln 4 + ln delta^(1)_k - ln delta^(2)_{k+1}
  double proof_bound = 0.0;  // ln 4 + the bracket used in the proof for this branch
};

struct RatioTable {
  double B = 0.0;
  std::vector<RatioRow> rows;
};

/// Bound on ln(M_n(K_2)/M_n(K_1)) for 2^k <= n < 2^{k+1}, K_1 the constant-B
/// family and K_2 the irregular family with A_j = 2^{k_j}, k_j = j^2.
RatioTable ratio_table(double B, int k_from, int k_to);

nlohmann::json markov_estimate_json(const MarkovEstimate& e);
std::string markov_csv(const std::vector<MarkovEstimate>& rows);
nlohmann::json ratio_table_json(const RatioTable& t);

}  // namespace kgamma
